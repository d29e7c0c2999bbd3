"""One-dimensional polynomial families, quadrature rules and nodal bases.

Two point sets are supported:

* Legendre-Gauss-Lobatto (LGL) points on the reference interval [-1, 1],
  carrying ordinary Lagrange interpolants.
* Laguerre-Gauss-Radau (LGR) points on [0, inf), carrying Lagrange-Laguerre
  interpolants built from scaled Laguerre functions, i.e. every interpolant
  is ``exp(-xi/2)`` times a polynomial of degree N.

All tables live on reference coordinates.  The physical scaling ``lam`` of
a semi-infinite element only enters through the element metric terms.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "QuadKind",
    "Quadrature1D",
    "NodalBasis1D",
    "legendre_eval",
    "legendre_table",
    "laguerre_eval",
    "laguerre_table",
    "lgl_quadrature",
    "lgr_quadrature",
    "lagrange_deriv_matrix",
    "lagrange_poly_deriv_matrix",
    "laguerre_poly_deriv_matrix",
    "laguerre_deriv_matrix",
    "slf_eval",
    "lagrange_interp_matrix",
    "laguerre_interp_matrix",
    "nodal_basis",
    "dump_quadrature_csv",
]


class QuadKind(enum.Enum):
    LGL = "LGL"
    LGR = "LGR"


@dataclass(frozen=True)
class Quadrature1D:
    """Nodes and weights of a 1D rule.

    For LGR rules ``weights`` are the scaled weights ``exp(xi) * w_std`` so
    that ``sum(w * f(xi))`` approximates ``int_0^inf f`` directly for
    functions decaying like ``exp(-xi)``.  ``scale`` is informational for
    LGR (physical nodes are ``scale * nodes``) and 1 for LGL.
    """

    kind: QuadKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    scale: float = 1.0

    @property
    def npoints(self) -> int:
        return self.order + 1

    def physical_nodes(self, base: float = 0.0) -> np.ndarray:
        if self.kind is QuadKind.LGL:
            return self.nodes.copy()
        return base + self.scale * self.nodes


@dataclass(frozen=True)
class NodalBasis1D:
    """Derivative tables (and modal transforms) for one point set.

    ``deriv[i, j]`` is the derivative of interpolant ``j`` at node ``i``.  For
    LGR this is the Lagrange-Laguerre *function* basis used for fields;
    ``poly_deriv`` is the plain polynomial Lagrange derivative on the same
    nodes, used for coordinate (geometry) fields, which grow linearly.
    """

    quad: Quadrature1D
    deriv: np.ndarray
    poly_deriv: np.ndarray
    modal: np.ndarray | None = field(default=None, repr=False)
    modal_inv: np.ndarray | None = field(default=None, repr=False)

    @property
    def kind(self) -> QuadKind:
        return self.quad.kind

    @property
    def npoints(self) -> int:
        return self.quad.order + 1

    @property
    def nodes(self) -> np.ndarray:
        return self.quad.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.quad.weights


# --------------------------------------------------------------------------
# Legendre
# --------------------------------------------------------------------------

def legendre_table(kmax: int, xi) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of P_0..P_kmax at ``xi``.

    Returns two arrays of shape ``(kmax + 1,) + np.shape(xi)``.
    """
    xi = np.asarray(xi, dtype=float)
    P = np.zeros((kmax + 1,) + xi.shape)
    dP = np.zeros_like(P)
    P[0] = 1.0
    if kmax >= 1:
        P[1] = xi
        dP[1] = 1.0
    for k in range(2, kmax + 1):
        P[k] = ((2 * k - 1) * xi * P[k - 1] - (k - 1) * P[k - 2]) / k
        dP[k] = (2 * k - 1) * P[k - 1] + dP[k - 2]
    return P, dP


def legendre_eval(k: int, xi):
    """Legendre polynomial P_k and its derivative at ``xi``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    P, dP = legendre_table(k, xi)
    return P[k], dP[k]


def lgl_quadrature(N: int, tol: float = 1e-15, maxiter: int = 100) -> Quadrature1D:
    """Legendre-Gauss-Lobatto rule with N + 1 points.

    Interior nodes are the roots of P'_N, found by Newton iteration from
    Chebyshev-Gauss-Lobatto guesses.  P''_N comes from the Legendre ODE.
    """
    if N < 1:
        raise ValueError("LGL order must be >= 1")
    x = -np.cos(np.pi * np.arange(N + 1) / N)
    x[0], x[-1] = -1.0, 1.0
    if N >= 2:
        xi = x[1:-1].copy()
        for _ in range(maxiter):
            P, dP = legendre_table(N, xi)
            d2P = (2 * xi * dP[N] - N * (N + 1) * P[N]) / (1 - xi**2)
            dx = dP[N] / d2P
            xi -= dx
            if np.max(np.abs(dx)) <= tol:
                break
        else:
            raise RuntimeError(f"LGL Newton iteration did not converge for N={N}")
        x[1:-1] = np.sort(xi)
        # exact symmetry about 0
        x = 0.5 * (x - x[::-1])
    P, _ = legendre_table(N, x)
    w = 2.0 / (N * (N + 1)) / P[N] ** 2
    w = 0.5 * (w + w[::-1])
    return Quadrature1D(QuadKind.LGL, N, x, w)


def _barycentric_weights(x: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    # product in log form keeps high orders on long intervals finite
    sign = np.prod(np.sign(diff), axis=1)
    logmag = np.sum(np.log(np.abs(diff)), axis=1)
    return sign * np.exp(-(logmag - logmag.max()))


def _poly_deriv_from_nodes(x: np.ndarray) -> np.ndarray:
    b = _barycentric_weights(x)
    n = x.size
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (b[j] / b[i]) / (x[i] - x[j])
        D[i, i] = -np.sum(D[i])
    return D


def lagrange_deriv_matrix(quad: Quadrature1D) -> np.ndarray:
    """D[i, j] = h'_j(xi_i) for the Lagrange basis on LGL nodes."""
    if quad.kind is not QuadKind.LGL:
        raise ValueError("lagrange_deriv_matrix expects an LGL rule")
    return _poly_deriv_from_nodes(quad.nodes)


def lagrange_interp_matrix(nodes: np.ndarray, x) -> np.ndarray:
    """Matrix evaluating the polynomial interpolant on ``nodes`` at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    b = _barycentric_weights(nodes)
    out = np.zeros((x.size, nodes.size))
    for r, xr in enumerate(x):
        d = xr - nodes
        hit = np.flatnonzero(d == 0.0)
        if hit.size:
            out[r, hit[0]] = 1.0
            continue
        t = b / d
        out[r] = t / t.sum()
    return out


# --------------------------------------------------------------------------
# Laguerre
# --------------------------------------------------------------------------

def laguerre_table(kmax: int, xi) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of L_0..L_kmax at ``xi`` (three-term recurrence).

    The derivative uses L'_k = -sum_{n<k} L_n.
    """
    xi = np.asarray(xi, dtype=float)
    L = np.zeros((kmax + 1,) + xi.shape)
    L[0] = 1.0
    if kmax >= 1:
        L[1] = 1.0 - xi
    for k in range(2, kmax + 1):
        L[k] = ((2 * k - 1 - xi) * L[k - 1] - (k - 1) * L[k - 2]) / k
    dL = np.zeros_like(L)
    if kmax >= 1:
        dL[1:] = -np.cumsum(L[:-1], axis=0)
    return L, dL


def laguerre_eval(k: int, xi):
    """Laguerre polynomial L_k and its derivative at ``xi``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    L, dL = laguerre_table(k, xi)
    return L[k], dL[k]


def slf_eval(i: int, xi, lam: float = 1.0):
    """Scaled Laguerre function exp(-xi / (2 lam)) * L_i(xi / lam)."""
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    xi = np.asarray(xi, dtype=float)
    Li, _ = laguerre_eval(i, xi / lam)
    return np.exp(-xi / (2.0 * lam)) * Li


def _log_abs_laguerre(k: int, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sign and log|L_k(xi)| evaluated with a rescaled recurrence."""
    xi = np.asarray(xi, dtype=float)
    a = np.ones_like(xi)
    b = 1.0 - xi
    logscale = np.zeros_like(xi)
    if k == 0:
        return np.ones_like(xi), np.zeros_like(xi)
    for n in range(2, k + 1):
        a, b = b, ((2 * n - 1 - xi) * b - (n - 1) * a) / n
        s = np.maximum(np.abs(b), 1e-300)
        big = s > 1e100
        if np.any(big):
            a = np.where(big, a / s, a)
            b = np.where(big, b / s, b)
            logscale = logscale + np.where(big, np.log(s), 0.0)
    return np.sign(b), np.log(np.abs(b)) + logscale


def lgr_quadrature(N: int, lam: float = 1.0) -> Quadrature1D:
    """Laguerre-Gauss-Radau rule with N + 1 points, first node pinned at 0.

    Nodes are eigenvalues of the Jacobi matrix of the Laguerre recurrence
    (diagonal 2k + 1, off-diagonal k) with the Radau modification of the last
    diagonal entry that forces 0 into the spectrum.  Weights are returned in
    scaled form exp(xi) / ((N + 1) L_N(xi)^2), evaluated in log space.
    """
    if N < 1:
        raise ValueError("LGR order must be >= 1")
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    k = np.arange(N + 1)
    diag = (2 * k + 1).astype(float)
    off = np.arange(1, N + 1, dtype=float)
    # alpha_N -> a - beta_N p_{N-1}(a) / p_N(a) with a = 0 gives N
    diag[N] = float(N)
    try:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError("LGR eigenvalue problem failed") from exc
    x = np.sort(x)
    if not np.all(np.isfinite(x)) or abs(x[0]) > 1e-10:
        raise RuntimeError(f"LGR first node {x[0]!r} is not pinned at 0")
    x[0] = 0.0
    # polish interior nodes: Newton on L'_{N+1}, whose roots they are
    xi = x[1:].copy()
    for _ in range(20):
        L, dL = laguerre_table(N + 1, xi)
        # (L'_{N+1})' from the Laguerre ODE: xi L'' = (xi - 1) L' - n L
        d2 = ((xi - 1) * dL[N + 1] - (N + 1) * L[N + 1]) / xi
        dx = dL[N + 1] / d2
        xi -= dx
        if np.max(np.abs(dx) / np.maximum(1.0, xi)) < 1e-15:
            break
    x[1:] = np.sort(xi)
    if np.any(np.diff(x) <= 0):
        raise RuntimeError("LGR nodes are not distinct")
    _, logL = _log_abs_laguerre(N, x)
    logw = x - math.log(N + 1) - 2.0 * logL
    w = np.exp(logw)
    return Quadrature1D(QuadKind.LGR, N, x, w, float(lam))


def laguerre_poly_deriv_matrix(quad: Quadrature1D) -> np.ndarray:
    """Derivative table of the plain polynomial Lagrange basis on LGR nodes.

    Off-diagonal entries L_{N+1}(xi_i) / (L_{N+1}(xi_j)(xi_i - xi_j)), diagonal
    1/2 on interior nodes and -N/2 at the origin.
    """
    x = quad.nodes
    N = quad.order
    s, lg = _log_abs_laguerre(N + 1, x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (s[:, None] * s[None, :]) * np.exp(lg[:, None] - lg[None, :]) / diff
    np.fill_diagonal(D, 0.5)
    D[0, 0] = -N / 2.0
    return D


def laguerre_deriv_matrix(quad: Quadrature1D) -> np.ndarray:
    """D[i, j] = derivative of Lagrange-Laguerre function j at LGR node i.

    Off-diagonal entries are Lhat_{N+1}(xi_i) / (Lhat_{N+1}(xi_j)(xi_i - xi_j))
    with Lhat = exp(-xi/2) L; diagonal is 0 except -(N + 1)/2 at the origin.
    """
    if quad.kind is not QuadKind.LGR:
        raise ValueError("laguerre_deriv_matrix expects an LGR rule")
    x = quad.nodes
    N = quad.order
    s, lg = _log_abs_laguerre(N + 1, x)
    lg = lg - 0.5 * x
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (s[:, None] * s[None, :]) * np.exp(lg[:, None] - lg[None, :]) / diff
    np.fill_diagonal(D, 0.0)
    D[0, 0] = -(N + 1) / 2.0
    return D


def lagrange_poly_deriv_matrix(quad: Quadrature1D) -> np.ndarray:
    """Polynomial derivative table for either point set."""
    if quad.kind is QuadKind.LGL:
        return lagrange_deriv_matrix(quad)
    return laguerre_poly_deriv_matrix(quad)


def laguerre_interp_matrix(nodes: np.ndarray, x) -> np.ndarray:
    """Evaluate Lagrange-Laguerre functions on ``nodes`` (reference) at ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = lagrange_interp_matrix(nodes, x)
    return np.exp(-0.5 * (x[:, None] - nodes[None, :])) * P


def nodal_basis(quad: Quadrature1D, with_modal: bool = True) -> NodalBasis1D:
    """Bundle derivative tables (and, optionally, modal transforms) for ``quad``."""
    from . import filter as _filter

    if quad.kind is QuadKind.LGL:
        D = lagrange_deriv_matrix(quad)
        Dp = D
    else:
        D = laguerre_deriv_matrix(quad)
        Dp = laguerre_poly_deriv_matrix(quad)
    modal = modal_inv = None
    if with_modal and (quad.kind is QuadKind.LGR or quad.order >= 2):
        if quad.kind is QuadKind.LGL:
            modal, modal_inv = _filter.lgl_modal_basis(quad)
        else:
            modal, modal_inv = _filter.lgr_modal_basis(quad)
    return NodalBasis1D(quad, D, Dp, modal, modal_inv)


def dump_quadrature_csv(quad: Quadrature1D, path) -> None:
    """Write nodes and weights with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "node", "weight"])
        for i, (x, wt) in enumerate(zip(quad.nodes, quad.weights)):
            w.writerow([i, f"{x:.17g}", f"{wt:.17g}"])
