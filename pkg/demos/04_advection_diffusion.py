"""
A Gaussian crossing into a Laguerre layer
=========================================

The Gaussian starts at z = 8 and drifts up into the semi-infinite element at
z = 10 while it spreads. Errors against the closed-form solution shrink as
the Laguerre order grows. A coarse vertical mesh keeps this to a minute;
pass --nz 125 for the full resolution.
"""
import argparse

from laguerre_sem.cases import build_case
from laguerre_sem.config import merge_config
from laguerre_sem.diagnostics import advection_diffusion_exact, error_norms

ap = argparse.ArgumentParser()
ap.add_argument("--nz", type=int, default=32)
ap.add_argument("--t-end", type=float, default=4.0)
args = ap.parse_args()

print(" order        L2          Linf")
for order in (15, 20, 30, 40):
    s = build_case(merge_config({"mesh": {"nz": args.nz}, "layer": {"order": order},
                                 "integrator": {"t_end": args.t_end}}, "advdiff"))
    res = s.run()
    x, z = s.mesh.coords.T
    l2, linf = error_norms(res.q[0], advection_diffusion_exact(x, z, res.t), s.rhs.op.mass)
    print(f"{order:6d}  {l2:.6e}  {linf:.6e}")
