"""Low-pass modal filtering of element-local nodal data.

Each element is taken to modal space with a basis whose high modes vanish on
the element boundary (LGL) or at the interface node (LGR), the modes are
damped with Boyd-Vandeven factors, and the result is transformed back.
Continuity is then restored by multiplicity-weighted averaging.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .basis import QuadKind, Quadrature1D, laguerre_table, legendre_table

__all__ = [
    "FilterSpec",
    "lgl_modal_basis",
    "lgr_modal_basis",
    "boyd_vandeven_sigma",
    "filter_matrix",
    "make_filter",
    "apply_filter",
]


def lgl_modal_basis(quad: Quadrature1D) -> tuple[np.ndarray, np.ndarray]:
    """Legendre matrix Phi[j, k] = phi_k(xi_j) and its inverse.

    phi_0 = P_0, phi_1 = P_1, phi_k = P_k - P_{k-2} for k >= 2.
    """
    N = quad.order
    if N < 2:
        raise ValueError("LGL modal basis needs N >= 2")
    P, _ = legendre_table(N, quad.nodes)
    Phi = P.T.copy()
    Phi[:, 2:] -= P[:-2].T
    try:
        inv = np.linalg.solve(Phi, np.eye(N + 1))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular LGL modal matrix") from exc
    return Phi, inv


def lgr_modal_basis(quad: Quadrature1D) -> tuple[np.ndarray, np.ndarray]:
    """Laguerre modal matrix with phi_0 = e^{-xi/2}, phi_k = e^{-xi/2}(L_k - L_{k-1})."""
    N = quad.order
    if N < 1:
        raise ValueError("LGR modal basis needs N >= 1")
    x = quad.nodes
    L, _ = laguerre_table(N, x)
    V = L.T.copy()
    V[:, 1:] -= L[:-1].T
    E = np.exp(-0.5 * x)
    Phi = E[:, None] * V
    # sqrt(w_hat) * Phi = sqrt(w_std) * V is close to orthogonal, so solve scaled
    s = np.sqrt(quad.weights)
    try:
        inv = np.linalg.solve(s[:, None] * Phi, np.diag(s))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular LGR modal matrix") from exc
    return Phi, inv


def boyd_vandeven_sigma(N: int, cutoff: float = 2.0 / 3.0, strength: float = 1.0) -> np.ndarray:
    """Per-mode damping factors for modes 0..N.

    Modes k <= floor(cutoff * N) are untouched.  Above the cutoff the
    erfc-log transfer function of Boyd is used on theta = (k - kc)/(N - kc),
    and the result is blended with the identity by ``strength``.
    """
    if not 0.0 < cutoff < 1.0:
        raise ValueError("cutoff fraction must lie in (0, 1)")
    if not 0.0 <= strength <= 1.0:
        raise ValueError("filter strength must lie in [0, 1]")
    kc = int(np.floor(cutoff * N))
    sigma = np.ones(N + 1)
    if kc < N:
        k = np.arange(kc + 1, N + 1)
        theta = (k - kc) / (N - kc)
        d = theta - 0.5
        with np.errstate(divide="ignore", invalid="ignore"):
            chi = np.sqrt(-np.log1p(-4.0 * d**2) / (4.0 * d**2))
        chi = np.where(np.abs(d) < 1e-12, 1.0, chi)
        arg = 2.0 * np.sqrt(N) * chi * d * 2.0
        sigma[kc + 1:] = 0.5 * erfc(arg)
    sigma = (1.0 - strength) + strength * sigma
    # guard against round-off wiggles right above the cutoff
    return np.minimum.accumulate(sigma)


def filter_matrix(modal: np.ndarray, modal_inv: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Nodal-space filter Phi diag(sigma) Phi^{-1}."""
    return modal @ (sigma[:, None] * modal_inv)


@dataclass(frozen=True)
class FilterSpec:
    transform: np.ndarray
    inverse: np.ndarray
    sigma: np.ndarray
    strength: float
    cutoff: float

    @property
    def matrix(self) -> np.ndarray:
        return filter_matrix(self.transform, self.inverse, self.sigma)


def make_filter(quad: Quadrature1D, cutoff: float = 2.0 / 3.0, strength: float = 1.0) -> FilterSpec:
    if quad.kind is QuadKind.LGL:
        Phi, inv = lgl_modal_basis(quad)
    else:
        Phi, inv = lgr_modal_basis(quad)
    sigma = boyd_vandeven_sigma(quad.order, cutoff, strength)
    return FilterSpec(Phi, inv, sigma, strength, cutoff)


def apply_filter(field: np.ndarray, mesh, cutoff: float = 2.0 / 3.0, strength: float = 1.0,
                 matrices: dict | None = None) -> np.ndarray:
    """Filter a global nodal field (shape ``(nglobal,)`` or ``(nvar, nglobal)``).

    Every element is filtered with a tensor product of 1D filter matrices, one
    per reference direction, and the element results are averaged back onto
    the global nodes by multiplicity.
    """
    field = np.asarray(field, dtype=float)
    squeeze = field.ndim == 1
    q = field[None] if squeeze else field
    if matrices is None:
        matrices = filter_matrices(mesh, cutoff, strength)
    out = np.zeros_like(q)
    for g, group in enumerate(mesh.groups):
        mats = matrices[g]
        qe = q[:, group.conn]  # (nvar, nel, n1[, n2])
        qe = np.einsum("ik,vek...->vei...", mats[0], qe)
        if len(mats) == 2:
            qe = np.einsum("vaik,jk->vaij", qe, mats[1])
        for v in range(q.shape[0]):
            out[v] += np.bincount(group.conn.ravel(), weights=qe[v].ravel(), minlength=q.shape[1])
    out /= mesh.multiplicity
    return out[0] if squeeze else out


def filter_matrices(mesh, cutoff: float = 2.0 / 3.0, strength: float = 1.0) -> list[tuple[np.ndarray, ...]]:
    """Per-group tuple of 1D nodal filter matrices, one per reference axis."""
    cache: dict = {}
    result = []
    for group in mesh.groups:
        mats = []
        for b in group.bases:
            key = (b.kind, b.quad.order)
            if key not in cache:
                if b.kind is QuadKind.LGL and b.quad.order < 2:
                    cache[key] = np.eye(b.npoints)
                else:
                    cache[key] = make_filter(b.quad, cutoff, strength).matrix
            mats.append(cache[key])
        result.append(tuple(mats))
    return result
