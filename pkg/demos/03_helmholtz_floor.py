"""
Error floor of the Helmholtz problem
====================================

Solve u_xx + u_yy - alpha^2 u = f on x >= 0, |y| <= pi/2 with a manufactured
solution that decays in x. A block of LGL elements covers 0 <= x <= 5 and one
row of Laguerre elements covers the rest. Raising the LGL order drives the
error down until the Laguerre order sets a floor.
"""
from laguerre_sem.helmholtz import helmholtz_sweep

lgl = range(4, 11)
lgr = (16, 32, 64)
rows = helmholtz_sweep(lgl, lgr)
err = {(nl, nr): e for nl, nr, e in rows}

print("N_LGL " + "".join(f"{'N_LGR=' + str(nr):>14s}" for nr in lgr))
for nl in lgl:
    print(f"{nl:5d} " + "".join(f"{err[(nl, nr)]:14.2e}" for nr in lgr))
