"""Element operators, direct stiffness summation and the fused RHS kernels.

All element contributions are scattered in ascending element order, so
global sums are reproducible bit for bit.
"""
from __future__ import annotations

import time

import numba
import numpy as np
import scipy.sparse as sp

from .mesh import ElementGroup, Mesh

__all__ = [
    "element_mass",
    "global_mass",
    "dss",
    "dss_average",
    "element_rhs_advective",
    "element_rhs_diffusive",
    "element_stiffness",
    "global_laplacian",
    "apply_rayleigh",
    "SpatialOperator",
]


# --------------------------------------------------------------------------
# mass and DSS
# --------------------------------------------------------------------------

def element_mass(group: ElementGroup) -> np.ndarray:
    """Diagonal of every element mass matrix, shape ``(nel, n1[, n2])``."""
    return group.weights * group.jac


def dss(local_arrays, conns, nglobal: int) -> np.ndarray:
    """Scatter-add element-local arrays onto global nodes.

    ``local_arrays`` and ``conns`` are matching sequences (one entry per
    element group) or single arrays.
    """
    if isinstance(conns, np.ndarray):
        local_arrays, conns = [local_arrays], [conns]
    out = np.zeros(nglobal)
    for a, c in zip(local_arrays, conns):
        out += np.bincount(c.ravel(), weights=np.asarray(a, dtype=float).ravel(), minlength=nglobal)
    return out


def dss_average(mesh: Mesh, local_arrays) -> np.ndarray:
    """DSS followed by division by node multiplicity."""
    return dss(local_arrays, [g.conn for g in mesh.groups], mesh.nglobal) / mesh.multiplicity


def global_mass(mesh: Mesh) -> np.ndarray:
    m = dss([element_mass(g) for g in mesh.groups], [g.conn for g in mesh.groups], mesh.nglobal)
    if np.any(m <= 0):
        raise ValueError("non-positive global mass entry")
    return m


# --------------------------------------------------------------------------
# reference (numpy) element operators
# --------------------------------------------------------------------------

def _grad_local(group: ElementGroup, q: np.ndarray) -> list[np.ndarray]:
    """Physical gradient components of element-local data ``q`` (nel, n1[, n2])."""
    D1 = group.bases[0].deriv
    if q.ndim == 2:
        qxi = np.einsum("ik,ek->ei", D1, q)
        return [qxi * group.dxi[..., 0, 0]]
    D2 = group.bases[1].deriv
    qxi = np.einsum("ik,ekj->eij", D1, q)
    qeta = np.einsum("jk,eik->eij", D2, q)
    return [qxi * group.dxi[..., 0, d] + qeta * group.dxi[..., 1, d] for d in range(2)]


def element_rhs_advective(group: ElementGroup, F: np.ndarray, G: np.ndarray | None = None) -> np.ndarray:
    """Strong-form flux divergence weighted by -w|J| at every element node.

    ``F`` and ``G`` hold element-local flux values with shape
    ``(nvar, nel, n1[, n2])``; the result has the same shape.
    """
    F = np.asarray(F, dtype=float)
    out = np.empty_like(F)
    wj = group.weights * group.jac
    for v in range(F.shape[0]):
        div = _grad_local(group, F[v])[0]
        if G is not None:
            div = div + _grad_local(group, np.asarray(G[v], dtype=float))[1]
        out[v] = -wj * div
    return out


def element_rhs_diffusive(group: ElementGroup, q: np.ndarray, nu) -> np.ndarray:
    """Weak-form Laplacian -int grad(psi) . nu grad(q), boundary terms dropped.

    ``q`` has shape ``(nvar, nel, n1[, n2])`` and ``nu`` one coefficient per
    variable (or a scalar).
    """
    q = np.asarray(q, dtype=float)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), (q.shape[0],))
    out = np.zeros_like(q)
    wj = group.weights * group.jac
    D1 = group.bases[0].deriv
    for v in range(q.shape[0]):
        if nu[v] == 0.0:
            continue
        grads = _grad_local(group, q[v])
        if q.ndim == 3:
            fxi = wj * grads[0] * group.dxi[..., 0, 0]
            out[v] = -nu[v] * np.einsum("ki,ek->ei", D1, fxi)
        else:
            D2 = group.bases[1].deriv
            fxi = wj * sum(grads[d] * group.dxi[..., 0, d] for d in range(2))
            feta = wj * sum(grads[d] * group.dxi[..., 1, d] for d in range(2))
            out[v] = -nu[v] * (np.einsum("ka,ekb->eab", D1, fxi) + np.einsum("lb,eal->eab", D2, feta))
    return out


def element_stiffness(group: ElementGroup) -> np.ndarray:
    """Dense element stiffness blocks K_e[a, b] = int grad(psi_a) . grad(psi_b)."""
    shape = group.shape
    npe = int(np.prod(shape))
    eye = np.eye(npe).reshape((npe,) + shape)
    K = np.empty((group.nel, npe, npe))
    for b in range(npe):
        unit = np.broadcast_to(eye[b], (group.nel,) + shape)
        col = -element_rhs_diffusive(group, unit[None], 1.0)[0]
        K[:, :, b] = col.reshape(group.nel, npe)
    return K


def global_laplacian(mesh: Mesh) -> sp.csr_matrix:
    """Global symmetric stiffness matrix K (positive semi-definite)."""
    rows, cols, vals = [], [], []
    for g in mesh.groups:
        K = element_stiffness(g)
        ids = g.conn.reshape(g.nel, -1)
        rows.append(np.repeat(ids[:, :, None], ids.shape[1], axis=2).ravel())
        cols.append(np.repeat(ids[:, None, :], ids.shape[1], axis=1).ravel())
        vals.append(K.ravel())
    n = mesh.nglobal
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    A = A.tocsr()
    A.sum_duplicates()
    return A


def apply_rayleigh(q: np.ndarray, q0, gamma: np.ndarray, nodes: np.ndarray | None = None) -> np.ndarray:
    """Tendency increment -gamma (q - q0), optionally restricted to ``nodes``."""
    q = np.asarray(q, dtype=float)
    inc = -np.asarray(gamma) * (q - q0)
    if nodes is not None:
        mask = np.zeros(q.shape[-1], dtype=bool)
        mask[nodes] = True
        inc = np.where(mask, inc, 0.0)
    return inc


# --------------------------------------------------------------------------
# fused kernels
# --------------------------------------------------------------------------

@numba.njit(cache=True)
def _adv1d(F, conn, D1, m11, wj, out):
    nvar = F.shape[0]
    nel, n1 = conn.shape
    fe = np.empty(n1)
    for e in range(nel):
        for v in range(nvar):
            for i in range(n1):
                fe[i] = F[v, conn[e, i]]
            for i in range(n1):
                s = 0.0
                for k in range(n1):
                    s += D1[i, k] * fe[k]
                out[v, conn[e, i]] -= wj[e, i] * s * m11[e, i]


@numba.njit(cache=True)
def _adv2d(F, G, conn, D1, D2, m11, m12, m21, m22, wj, out):
    nvar = F.shape[0]
    nel, n1, n2 = conn.shape
    fe = np.empty((n1, n2))
    ge = np.empty((n1, n2))
    for e in range(nel):
        for v in range(nvar):
            for i in range(n1):
                for j in range(n2):
                    I = conn[e, i, j]
                    fe[i, j] = F[v, I]
                    ge[i, j] = G[v, I]
            for i in range(n1):
                for j in range(n2):
                    fxi = 0.0
                    gxi = 0.0
                    for k in range(n1):
                        fxi += D1[i, k] * fe[k, j]
                        gxi += D1[i, k] * ge[k, j]
                    feta = 0.0
                    geta = 0.0
                    for k in range(n2):
                        feta += D2[j, k] * fe[i, k]
                        geta += D2[j, k] * ge[i, k]
                    div = (fxi * m11[e, i, j] + feta * m21[e, i, j]
                           + gxi * m12[e, i, j] + geta * m22[e, i, j])
                    out[v, conn[e, i, j]] -= wj[e, i, j] * div


@numba.njit(cache=True)
def _lap1d(q, nu, conn, D1, m11, wj, out):
    nvar = q.shape[0]
    nel, n1 = conn.shape
    qe = np.empty(n1)
    f = np.empty(n1)
    for e in range(nel):
        for v in range(nvar):
            if nu[v] == 0.0:
                continue
            for i in range(n1):
                qe[i] = q[v, conn[e, i]]
            for i in range(n1):
                s = 0.0
                for k in range(n1):
                    s += D1[i, k] * qe[k]
                f[i] = wj[e, i] * s * m11[e, i] * m11[e, i]
            for a in range(n1):
                s = 0.0
                for k in range(n1):
                    s += D1[k, a] * f[k]
                out[v, conn[e, a]] -= nu[v] * s


@numba.njit(cache=True)
def _lap2d(q, nu, conn, D1, D2, m11, m12, m21, m22, wj, out):
    nvar = q.shape[0]
    nel, n1, n2 = conn.shape
    qe = np.empty((n1, n2))
    fx = np.empty((n1, n2))
    fe = np.empty((n1, n2))
    for e in range(nel):
        for v in range(nvar):
            if nu[v] == 0.0:
                continue
            for i in range(n1):
                for j in range(n2):
                    qe[i, j] = q[v, conn[e, i, j]]
            for i in range(n1):
                for j in range(n2):
                    qxi = 0.0
                    for k in range(n1):
                        qxi += D1[i, k] * qe[k, j]
                    qeta = 0.0
                    for k in range(n2):
                        qeta += D2[j, k] * qe[i, k]
                    qx = qxi * m11[e, i, j] + qeta * m21[e, i, j]
                    qz = qxi * m12[e, i, j] + qeta * m22[e, i, j]
                    w = wj[e, i, j]
                    fx[i, j] = w * (m11[e, i, j] * qx + m12[e, i, j] * qz)
                    fe[i, j] = w * (m21[e, i, j] * qx + m22[e, i, j] * qz)
            for a in range(n1):
                for b in range(n2):
                    s = 0.0
                    for k in range(n1):
                        s += D1[k, a] * fx[k, b]
                    for k in range(n2):
                        s += D2[k, b] * fe[a, k]
                    out[v, conn[e, a, b]] -= nu[v] * s


class _GroupTables:
    """Contiguous per-group arrays handed to the kernels."""

    def __init__(self, group: ElementGroup):
        self.finite = group.kind.is_finite
        self.conn = np.ascontiguousarray(group.conn, dtype=np.int64)
        self.D1 = np.ascontiguousarray(group.bases[0].deriv)
        self.wj = np.ascontiguousarray(group.weights * group.jac)
        self.m11 = np.ascontiguousarray(group.dxi[..., 0, 0])
        if group.conn.ndim == 3:
            self.D2 = np.ascontiguousarray(group.bases[1].deriv)
            self.m12 = np.ascontiguousarray(group.dxi[..., 0, 1])
            self.m21 = np.ascontiguousarray(group.dxi[..., 1, 0])
            self.m22 = np.ascontiguousarray(group.dxi[..., 1, 1])


class SpatialOperator:
    """Global advective and diffusive operators with per-class timing.

    ``divergence`` and ``laplacian`` accumulate DSS-assembled, mass-weighted
    tendencies into ``out``; the caller divides by ``mass`` afterwards.
    With ``timing`` enabled, kernel wall time is split between finite and
    semi-infinite element classes.
    """

    def __init__(self, mesh: Mesh, timing: bool = False):
        self.mesh = mesh
        self.dim = mesh.dim
        self.mass = global_mass(mesh)
        self.inv_mass = 1.0 / self.mass
        self.tables = [_GroupTables(g) for g in mesh.groups]
        self.timing = timing
        self.timers = {"finite": 0.0, "laguerre": 0.0}

    def reset_timers(self):
        self.timers = {"finite": 0.0, "laguerre": 0.0}

    def _charge(self, t, tab):
        if self.timing:
            self.timers["finite" if tab.finite else "laguerre"] += time.perf_counter() - t

    def divergence(self, F: np.ndarray, G: np.ndarray | None, out: np.ndarray) -> np.ndarray:
        """out -= DSS(w|J| div(F, G)) for global flux arrays of shape (nvar, nglobal)."""
        for tab in self.tables:
            t = time.perf_counter() if self.timing else 0.0
            if self.dim == 1:
                _adv1d(F, tab.conn, tab.D1, tab.m11, tab.wj, out)
            else:
                _adv2d(F, G, tab.conn, tab.D1, tab.D2, tab.m11, tab.m12, tab.m21, tab.m22, tab.wj, out)
            self._charge(t, tab)
        return out

    def laplacian(self, q: np.ndarray, nu: np.ndarray, out: np.ndarray) -> np.ndarray:
        """out += DSS of the weak-form nu-weighted Laplacian of q."""
        nu = np.asarray(nu, dtype=float)
        for tab in self.tables:
            t = time.perf_counter() if self.timing else 0.0
            if self.dim == 1:
                _lap1d(q, nu, tab.conn, tab.D1, tab.m11, tab.wj, out)
            else:
                _lap2d(q, nu, tab.conn, tab.D1, tab.D2, tab.m11, tab.m12, tab.m21, tab.m22, tab.wj, out)
            self._charge(t, tab)
        return out

    def add_global(self, t0: float):
        """Attribute pointwise global work started at ``t0`` to the finite class."""
        if self.timing:
            self.timers["finite"] += time.perf_counter() - t0
