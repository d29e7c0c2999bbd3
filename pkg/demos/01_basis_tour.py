"""
Nodes, weights and the scaled Laguerre basis
============================================

Finite elements use Legendre-Gauss-Lobatto points. The semi-infinite
elements use Laguerre-Gauss-Radau points with weights pre-multiplied by
exp(xi), so that they integrate decaying functions directly.
"""
import math

import numpy as np

from laguerre_sem import laguerre_deriv_matrix, lgl_quadrature, lgr_quadrature, slf_eval

# A fourth-order LGL rule has five points and integrates degree 7 exactly.
q = lgl_quadrature(4)
print("LGL nodes  ", np.round(q.nodes, 6))
print("LGL weights", np.round(q.weights, 6))
print("int xi^6   ", q.weights @ q.nodes**6, "exact", 2 / 7)
print("int xi^8   ", q.weights @ q.nodes**8, "exact", 2 / 9, "(first miss)")

# The Radau rule keeps xi = 0 so that it can share a node with a finite element.
r = lgr_quadrature(14, lam=300.0)
print("\nLGR order 14, scale 300: last node at", round(r.physical_nodes(15000.0)[-1]), "m")

# Classical weights times xi^m recover m! up to degree 2N.
r1 = lgr_quadrature(10)
classic = np.exp(-r1.nodes) * r1.weights
for m in (5, 20, 21):
    print(f"sum w xi^{m:<2d} / {m}! =", classic @ r1.nodes.astype(float) ** m / math.factorial(m))

# The scaled functions are orthogonal with norm lam.
r40 = lgr_quadrature(40)
for lam in (0.05, 1.0, 100.0):
    x, w = lam * r40.nodes, lam * r40.weights
    phi = np.array([slf_eval(i, x, lam) for i in range(5)])
    G = (phi * w) @ phi.T
    print(f"lam = {lam:6.2f}: Gram / lam - I has max entry {np.abs(G / lam - np.eye(5)).max():.1e}")

# Differentiation is exact for exp(-xi/2) times a polynomial of degree N.
D = laguerre_deriv_matrix(r1)
f = np.exp(-r1.nodes / 2) * (1 + r1.nodes**3)
df = np.exp(-r1.nodes / 2) * (3 * r1.nodes**2 - 0.5 * (1 + r1.nodes**3))
print("\nmax derivative error", np.abs(D @ f - df).max())
