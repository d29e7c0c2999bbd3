"""Equation sets, atmospheric backgrounds, damping profiles and boundary conditions.

Every equation set exposes point-wise fluxes on global nodal arrays of shape
``(nvar, nglobal)``; :class:`SemiDiscreteRHS` combines them with the element
kernels into dq/dt.  The Euler system is written for perturbations from a
hydrostatic background that may carry a uniform horizontal wind.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import SpatialOperator, _grad_local
from .mesh import Mesh

__all__ = [
    "PhysicalConstants",
    "DEFAULT_CONSTANTS",
    "PhysicalStateError",
    "equation_of_state",
    "brunt_vaisala",
    "BackgroundState",
    "hydrostatic_background",
    "hydrostatic_residual",
    "DampingProfile",
    "damping_coefficient",
    "EquationSet",
    "Wave1D",
    "ShallowWater1D",
    "AdvectionDiffusion2D",
    "Euler2D",
    "euler_flux",
    "BoundaryConditions",
    "free_slip",
    "SemiDiscreteRHS",
]


class PhysicalStateError(ValueError):
    """Raised when a state leaves the physical domain (e.g. rho <= 0)."""


@dataclass(frozen=True)
class PhysicalConstants:
    g: float = 9.81
    cp: float = 1005.0
    R: float = 287.0
    p_ref: float = 1.0e5

    @property
    def cv(self) -> float:
        return self.cp - self.R

    @property
    def gamma(self) -> float:
        return self.cp / self.cv


DEFAULT_CONSTANTS = PhysicalConstants()


def equation_of_state(rho, theta, const: PhysicalConstants = DEFAULT_CONSTANTS):
    """Ideal-gas pressure p = p_ref (rho R theta / p_ref)^(cp/cv)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(rho <= 0) or np.any(theta <= 0):
        raise PhysicalStateError("equation of state needs rho > 0 and theta > 0")
    return const.p_ref * (rho * const.R * theta / const.p_ref) ** const.gamma


def _pressure(Theta, const: PhysicalConstants):
    """Pressure from Theta = rho*theta without validation (hot path)."""
    return const.p_ref * (const.R / const.p_ref * Theta) ** const.gamma


def _density(p, theta, const: PhysicalConstants):
    return const.p_ref / (const.R * theta) * (p / const.p_ref) ** (const.cv / const.cp)


def brunt_vaisala(theta0: float, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """N = g / sqrt(cp theta0), the value for an isothermal atmosphere."""
    return const.g / np.sqrt(const.cp * theta0)


@dataclass
class BackgroundState:
    kind: str
    theta_sl: float
    p_sl: float
    N: float
    z: np.ndarray
    theta: np.ndarray
    p: np.ndarray
    rho: np.ndarray
    U: float = 0.0
    const: PhysicalConstants = DEFAULT_CONSTANTS

    @property
    def Theta(self) -> np.ndarray:
        return self.rho * self.theta


def hydrostatic_background(theta_sl: float, p_sl: float, kind: str, z, N: float | None = None,
                           U: float = 0.0, const: PhysicalConstants = DEFAULT_CONSTANTS) -> BackgroundState:
    """Hydrostatically balanced profiles sampled at heights ``z``.

    ``kind`` is ``"isentropic"`` (uniform theta) or ``"constant_n"`` (uniform
    Brunt-Vaisala frequency, defaulting to g/sqrt(cp theta_sl)).
    """
    if theta_sl <= 0 or p_sl <= 0:
        raise ValueError("background needs positive theta and pressure")
    z = np.asarray(z, dtype=float)
    g, cp, R = const.g, const.cp, const.R
    if kind == "isentropic":
        N = 0.0
        theta = np.full_like(z, theta_sl)
        base = 1.0 - g * z / (cp * theta_sl)
        if np.any(base <= 0):
            raise ValueError("isentropic atmosphere is undefined above cp*theta/g")
        p = p_sl * base ** (cp / R)
    elif kind == "constant_n":
        N = brunt_vaisala(theta_sl, const) if N is None else float(N)
        if N <= 0:
            raise ValueError("constant_n background needs N > 0")
        s = N**2 / g
        theta = theta_sl * np.exp(s * z)
        base = 1.0 + g**2 / (cp * theta_sl * N**2) * (np.exp(-s * z) - 1.0)
        if np.any(base <= 0):
            raise ValueError("stratified atmosphere is undefined at these heights")
        p = p_sl * base ** (cp / R)
    else:
        raise ValueError(f"unknown background kind {kind!r}")
    rho = _density(p, theta, const)
    return BackgroundState(kind, theta_sl, p_sl, N, z, theta, p, rho, U, const)


def hydrostatic_residual(mesh: Mesh, bg: BackgroundState) -> float:
    """max |dp0/dz + rho0 g| / (rho0 g) over interior finite-element nodes."""
    worst = 0.0
    g = bg.const.g
    for grp in mesh.finite_groups:
        dpdz = _grad_local(grp, bg.p[grp.conn])[-1]
        rg = bg.rho[grp.conn] * g
        res = np.abs(dpdz + rg) / rg
        inner = res[(slice(None),) + (slice(1, -1),) * (res.ndim - 1)]
        worst = max(worst, float(inner.max()) if inner.size else 0.0)
    return worst


# --------------------------------------------------------------------------
# damping
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DampingProfile:
    """Rayleigh coefficient gamma(s) along one coordinate axis.

    ``sigmoid``: logistic ramp anchored at the first layer node X0 and the
    layer end L0.  ``sine_squared``: zero before z_s, Delta-gamma after
    z_max, a sin^2 ramp between (z_max < z_s gives a ramp toward -inf).
    """

    kind: str
    delta_gamma: float
    axis: int = 0
    X0: float = 0.0
    L0: float = 1.0
    alpha: float = 0.3
    zeta: float = 1.0
    z_s: float = 0.0
    z_max: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sigmoid", "sine_squared"):
            raise ValueError(f"unknown damping kind {self.kind!r}")
        if self.delta_gamma < 0:
            raise ValueError("damping strength must be non-negative")


def damping_coefficient(s, profile: DampingProfile):
    s = np.asarray(s, dtype=float)
    p = profile
    if p.kind == "sigmoid":
        d = p.L0 - p.X0
        arg = np.sign(d) * (p.alpha * d - s + p.X0) / p.zeta
        with np.errstate(over="ignore"):
            return p.delta_gamma / (1.0 + np.exp(arg))
    t = np.clip((s - p.z_s) / (p.z_max - p.z_s), 0.0, 1.0)
    return p.delta_gamma * np.sin(0.5 * np.pi * t) ** 2


# --------------------------------------------------------------------------
# equation sets
# --------------------------------------------------------------------------

class EquationSet:
    """Point-wise physics of one PDE system."""

    names: tuple[str, ...] = ()
    dim: int = 1

    @property
    def nvar(self) -> int:
        return len(self.names)

    diffusion: np.ndarray | None = None

    def flux(self, q: np.ndarray, t: float):
        raise NotImplementedError

    def source(self, q: np.ndarray, t: float):
        return None

    def diffusion_operand(self, q: np.ndarray) -> np.ndarray:
        return q

    def reference(self, nglobal: int) -> np.ndarray:
        return np.zeros((self.nvar, nglobal))


class Wave1D(EquationSet):
    """u_t + v_x = 0, v_t + u_x = 0 (unit wave speed)."""

    names = ("u", "v")

    def flux(self, q, t):
        return q[::-1], None


@dataclass
class ShallowWater1D(EquationSet):
    H: float = 10.0
    U: float = 0.0
    g: float = 9.81
    names = ("h", "u")

    def flux(self, q, t):
        h, u = q
        return np.stack([self.U * h + self.H * u, self.g * h + self.U * u]), None


@dataclass
class AdvectionDiffusion2D(EquationSet):
    u: float = 0.5
    v: float = 1.0
    nu: float = 0.1
    names = ("q",)
    dim = 2

    def __post_init__(self):
        self.diffusion = np.array([self.nu]) if self.nu else None

    def flux(self, q, t):
        return q * self.u, q * self.v


def euler_flux(q, const: PhysicalConstants = DEFAULT_CONSTANTS):
    """Full nonlinear fluxes and gravity source for total variables (rho, rho u, rho v, rho theta)."""
    q = np.asarray(q, dtype=float)
    rho, mu, mv, Th = q
    if np.any(rho <= 0):
        raise PhysicalStateError("non-positive density")
    u, v = mu / rho, mv / rho
    p = _pressure(Th, const)
    F = np.stack([mu, mu * u + p, mu * v, Th * u])
    G = np.stack([mv, mv * u, mv * v + p, Th * v])
    S = np.stack([np.zeros_like(rho), np.zeros_like(rho), -rho * const.g, np.zeros_like(rho)])
    return F, G, S


class Euler2D(EquationSet):
    """Compressible Euler with gravity in perturbation variables.

    State: (rho', (rho u)', rho v, (rho theta)') relative to a hydrostatic
    background with uniform wind U.  The background flux is subtracted
    exactly, the pressure enters as p' = p(Theta) - p(Theta0), and gravity as
    -rho' g.  Diffusion acts on u', v and theta' with (mu, mu, kappa).
    """

    names = ("rho", "rhou", "rhov", "rhotheta")
    dim = 2

    def __init__(self, background: BackgroundState, mu: float = 0.0, kappa: float = 0.0):
        self.bg = background
        self.const = background.const
        self.rho0 = background.rho
        self.Theta0 = background.Theta
        self.theta0 = background.theta
        self.U = background.U
        self.m0 = self.rho0 * self.U
        self.p0 = _pressure(self.Theta0, self.const)
        self.mu, self.kappa = mu, kappa
        self.diffusion = np.array([0.0, mu, mu, kappa]) if (mu or kappa) else None

    def totals(self, q):
        return self.rho0 + q[0], self.m0 + q[1], q[2], self.Theta0 + q[3]

    def flux(self, q, t):
        rho, mu, mv, Th = self.totals(q)
        if not np.all(rho > 0):
            raise PhysicalStateError("non-positive density")
        u = mu / rho
        v = mv / rho
        pp = _pressure(Th, self.const) - self.p0
        F = np.empty_like(q)
        G = np.empty_like(q)
        F[0] = q[1]
        F[1] = mu * u - self.m0 * self.U + pp
        F[2] = mu * v
        F[3] = Th * u - self.Theta0 * self.U
        G[0] = mv
        G[1] = mv * u
        G[2] = mv * v + pp
        G[3] = Th * v
        return F, G

    def source(self, q, t):
        S = np.zeros_like(q)
        S[2] = -self.const.g * q[0]
        return S

    def diffusion_operand(self, q):
        rho, mu, mv, Th = self.totals(q)
        out = np.empty_like(q)
        out[0] = 0.0
        out[1] = mu / rho - self.U
        out[2] = mv / rho
        out[3] = Th / rho - self.theta0
        return out

    def primitive(self, q):
        """(u, w, theta') at every node."""
        rho, mu, mv, Th = self.totals(q)
        return mu / rho, mv / rho, Th / rho - self.theta0


# --------------------------------------------------------------------------
# boundary conditions
# --------------------------------------------------------------------------

def free_slip(q: np.ndarray, nodes: np.ndarray, normals: np.ndarray, m0: np.ndarray | float = 0.0,
              mom: tuple[int, int] = (1, 2)) -> None:
    """Remove the normal component of total momentum at ``nodes`` in place.

    ``m0`` is the background horizontal momentum (perturbation form).
    """
    i, j = mom
    m0n = m0[nodes] if np.ndim(m0) else m0
    mx = q[i, nodes] + m0n
    mz = q[j, nodes]
    dot = mx * normals[:, 0] + mz * normals[:, 1]
    q[i, nodes] = mx - dot * normals[:, 0] - m0n
    q[j, nodes] = mz - dot * normals[:, 1]


@dataclass
class BoundaryConditions:
    """Ordered list of in-place state constraints ``f(q, t)``."""

    actions: list = field(default_factory=list)

    def add(self, fn):
        self.actions.append(fn)
        return self

    def __call__(self, q, t):
        for fn in self.actions:
            fn(q, t)
        return q

    @staticmethod
    def dirichlet(nodes, var: int, value):
        nodes = np.asarray(nodes)

        def apply(q, t):
            q[var, nodes] = value(t) if callable(value) else value
        return apply

    @staticmethod
    def wall(nodes, normals, m0=0.0, mom=(1, 2)):
        nodes = np.asarray(nodes)
        normals = np.asarray(normals, dtype=float)
        if normals.ndim == 1:
            normals = np.broadcast_to(normals, (nodes.size, 2))

        def apply(q, t):
            free_slip(q, nodes, normals, m0, mom)
        return apply


# --------------------------------------------------------------------------
# semi-discrete operator
# --------------------------------------------------------------------------

class SemiDiscreteRHS:
    """dq/dt = M^{-1} DSS(element RHS) + S(q) - gamma (q - q0).

    Rayleigh terms are applied only at nodes where gamma > 0, and only to the
    variables flagged in ``damp_vars``.
    """

    def __init__(self, mesh: Mesh, eq: EquationSet, gamma: np.ndarray | None = None,
                 damp_vars=None, timing: bool = False):
        self.mesh = mesh
        self.eq = eq
        self.op = SpatialOperator(mesh, timing=timing)
        self.inv_mass = self.op.inv_mass
        self.q0 = eq.reference(mesh.nglobal)
        self.sponge = None
        if gamma is not None and np.any(gamma > 0):
            self.sponge = np.flatnonzero(gamma > 0)
            self.gamma_s = np.asarray(gamma)[self.sponge]
            dv = np.ones(eq.nvar, dtype=bool) if damp_vars is None else np.asarray(damp_vars, dtype=bool)
            self.damp_rows = np.flatnonzero(dv)
        self.nevals = 0

    @property
    def timers(self):
        return self.op.timers

    def __call__(self, q, t):
        op = self.op
        t0 = time.perf_counter()
        F, G = self.eq.flux(q, t)
        out = np.zeros_like(q)
        op.add_global(t0)
        op.divergence(F, G, out)
        if self.eq.diffusion is not None:
            t1 = time.perf_counter()
            d = self.eq.diffusion_operand(q)
            op.add_global(t1)
            op.laplacian(d, self.eq.diffusion, out)
        t2 = time.perf_counter()
        out *= self.inv_mass
        S = self.eq.source(q, t)
        if S is not None:
            out += S
        if self.sponge is not None:
            s = self.sponge
            for r in self.damp_rows:
                out[r, s] -= self.gamma_s * (q[r, s] - self.q0[r, s])
        op.add_global(t2)
        self.nevals += 1
        return out
