"""Manufactured-solution Helmholtz problem on a semi-infinite channel.

The channel [0, inf) x [-pi/2, pi/2] is split into a finite block and one
semi-infinite element per finite element row along its right edge.  The
discrete problem -K u + alpha^2 M u = M f is solved with a sparse direct
solver after symmetric Dirichlet elimination.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import global_laplacian, global_mass
from .mesh import Mesh, attach_semi_infinite_layer, build_finite_mesh

__all__ = [
    "HelmholtzProblem",
    "exact_solution",
    "manufactured_rhs",
    "helmholtz_mesh",
    "assemble_system",
    "solve_helmholtz",
    "helmholtz_sweep",
]


@dataclass(frozen=True)
class HelmholtzProblem:
    alpha: float = 10.0
    L: float = 2.0
    x_len: float = 5.0
    nx: int = 4
    ny: int = 4
    lam: float = 2.5


def exact_solution(x, y, L: float = 2.0):
    return np.exp(-x / L) * np.sin(x / L) * np.cos(y)


def manufactured_rhs(x, y, alpha: float = 10.0, L: float = 2.0):
    """f = u_xx + u_yy + alpha^2 u for the exact solution."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.exp(-x / L) * np.cos(y) * (-2.0 * np.cos(x / L) / L**2 + (alpha**2 - 1.0) * np.sin(x / L))


def helmholtz_mesh(n_lgl: int, n_lgr: int, prob: HelmholtzProblem = HelmholtzProblem()) -> Mesh:
    mesh = build_finite_mesh((0.0, prob.x_len), (-np.pi / 2, np.pi / 2), prob.nx, prob.ny, n_lgl, n_lgl)
    return attach_semi_infinite_layer(mesh, "right", n_lgr, prob.lam)


def _dirichlet_nodes(mesh: Mesh) -> np.ndarray:
    return np.unique(np.concatenate([mesh.boundary[k] for k in ("left", "bottom", "top")]))


def assemble_system(mesh: Mesh, prob: HelmholtzProblem = HelmholtzProblem()):
    """Return (A, b, dirichlet) with A symmetric after elimination."""
    K = global_laplacian(mesh)
    M = global_mass(mesh)
    x, y = mesh.coords[:, 0], mesh.coords[:, 1]
    A = (-K + sp.diags(prob.alpha**2 * M)).tocsr()
    b = M * manufactured_rhs(x, y, prob.alpha, prob.L)
    bnd = _dirichlet_nodes(mesh)
    g = np.zeros(mesh.nglobal)  # zero Dirichlet data
    b = b - A @ g
    keep = np.ones(mesh.nglobal)
    keep[bnd] = 0.0
    D = sp.diags(keep)
    A = (D @ A @ D + sp.diags(1.0 - keep)).tocsr()
    b[bnd] = g[bnd]
    return A, b, bnd


def solve_helmholtz(n_lgl: int, n_lgr: int, prob: HelmholtzProblem = HelmholtzProblem()):
    """Solve and return (mesh, u, relative L2 error)."""
    mesh = helmholtz_mesh(n_lgl, n_lgr, prob)
    A, b, _ = assemble_system(mesh, prob)
    u = spla.spsolve(A.tocsc(), b)
    if not np.all(np.isfinite(u)):
        raise RuntimeError("singular Helmholtz system")
    M = global_mass(mesh)
    ref = exact_solution(mesh.coords[:, 0], mesh.coords[:, 1], prob.L)
    err = np.sqrt(np.sum(M * (u - ref) ** 2) / np.sum(M * ref**2))
    return mesh, u, float(err)


def helmholtz_sweep(lgl_orders=range(4, 11), lgr_orders=(16, 32, 48, 64),
                    prob: HelmholtzProblem = HelmholtzProblem(), path=None) -> list[tuple[int, int, float]]:
    rows = []
    for nr in lgr_orders:
        for nl in lgl_orders:
            rows.append((nl, nr, solve_helmholtz(nl, nr, prob)[2]))
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N_LGL", "N_LGR", "rel_L2_error"])
            for nl, nr, e in rows:
                w.writerow([nl, nr, f"{e:.17g}"])
    return rows
