"""Assembly of every registered test case from a resolved configuration."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import advection_diffusion_exact
from .equations import (AdvectionDiffusion2D, BoundaryConditions, DampingProfile, Euler2D,
                        PhysicalConstants, SemiDiscreteRHS, ShallowWater1D, Wave1D, damping_coefficient,
                        hydrostatic_background)
from .filter import apply_filter, filter_matrices
from .mesh import Mesh, TerrainProfile, attach_semi_infinite_layer, build_finite_mesh, build_interval_mesh
from .timeint import IntegratorSpec, RunResult, run

__all__ = ["CaseSetup", "build_case", "case_initial_state", "wavetrain_forcing", "interface_check"]

log = logging.getLogger("laguerre_sem")


@dataclass
class CaseSetup:
    name: str
    cfg: dict
    mesh: Mesh
    eq: object
    rhs: SemiDiscreteRHS
    q_init: np.ndarray
    spec: IntegratorSpec
    bc: BoundaryConditions | None = None
    filt: object = None
    gamma: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def run(self, hooks=(), snapshot_every=None, nsteps=None) -> RunResult:
        return run(self.q_init, self.rhs, self.spec, post=self.bc, filt=self.filt,
                   snapshot_every=snapshot_every, hooks=hooks, nsteps=nsteps)

    @property
    def finite_nodes(self) -> np.ndarray:
        return self.meta["finite_nodes"]


def wavetrain_forcing(t, A=0.025, k=30, T=5000.0):
    return A * np.sin(2 * np.pi * k * t / T)


def interface_check(mesh: Mesh, tol: float = 1e-9):
    """Hook asserting that interface values seen through H^F and H^S agree bitwise.

    Interface pairs are found from element-local coordinates, so the check
    also fails when the two maps disagree about which global node sits at a
    shared point.
    """
    from scipy.spatial import cKDTree

    def flat(groups):
        ids = [g.conn.ravel() for g in groups]
        xy = [g.coords.reshape(-1, mesh.dim) for g in groups]
        return (np.concatenate(ids), np.concatenate(xy)) if ids else (np.zeros(0, int), np.zeros((0, mesh.dim)))

    fid, fxy = flat(mesh.finite_groups)
    sid, sxy = flat(mesh.semi_groups)
    pairs_f, pairs_s = [], []
    if sid.size:
        dist, idx = cKDTree(fxy).query(sxy, distance_upper_bound=tol)
        hit = np.isfinite(dist)
        pairs_f, pairs_s = fid[idx[hit]], sid[hit]
    pairs_f, pairs_s = np.asarray(pairs_f, dtype=np.int64), np.asarray(pairs_s, dtype=np.int64)

    def hook(k, t, q):
        if not pairs_f.size:
            return
        if not np.array_equal(q[:, pairs_f].view(np.uint64), q[:, pairs_s].view(np.uint64)):
            raise AssertionError(f"interface values differ at step {k}")
    hook.n_interface = int(np.unique(pairs_s).size)
    return hook


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def _spec(cfg) -> IntegratorSpec:
    i = cfg["integrator"]
    return IntegratorSpec(i["scheme"], float(i["dt"]), float(i["t_end"]))


def _filter(cfg, mesh):
    f = cfg.get("filter", {})
    if not f.get("enabled"):
        return None
    mats = filter_matrices(mesh, float(f["cutoff"]), float(f["strength"]))
    return lambda q: apply_filter(q, mesh, matrices=mats)


def _sigmoid_gamma_1d(x, sides_end, cfg, base):
    """Logistic sponge on each side beyond the finite-domain ends in ``base``."""
    d = cfg["damping"]
    gamma = np.zeros_like(x)
    ends = dict(sides_end)
    zeta = max(abs(v) for v in ends.values()) / float(d["zeta_divisor"])
    for side, L0 in ends.items():
        X0 = base[side]
        prof = DampingProfile("sigmoid", float(d["delta_gamma"]), 0, X0=X0, L0=L0,
                              alpha=float(d["alpha"]), zeta=zeta)
        mask = x >= X0 if side == "right" else x <= X0
        gamma[mask] = damping_coefficient(x[mask], prof)
    return gamma


def _build_1d(cfg, name):
    m = cfg["mesh"]
    x0, x1 = map(float, m["x_range"])
    nx, order = int(m["nx"]), int(m["order"])
    layer = cfg["layer"]
    ext = float(m.get("extend_to", 0.0) or 0.0)
    periodic = bool(m.get("periodic", False))
    base = {"left": x0, "right": x1}
    sides = list(layer["sides"])
    meta = {}
    if ext > 0:
        # extended finite domain: same element size out to the layer end points
        dx = (x1 - x0) / nx
        lo = -ext if "left" in sides else x0
        hi = ext if "right" in sides else x1
        n_lo = int(np.ceil(round((x0 - lo) / dx, 9)))
        n_hi = int(np.ceil(round((hi - x1) / dx, 9)))
        mesh = build_interval_mesh((x0 - n_lo * dx, x1 + n_hi * dx), nx + n_lo + n_hi, order, periodic)
        ends = {s: (-ext if s == "left" else ext) for s in sides}
        finite_mask = (mesh.coords[:, 0] >= x0 - 1e-12) & (mesh.coords[:, 0] <= x1 + 1e-12)
        meta["finite_nodes"] = np.flatnonzero(finite_mask)
    else:
        mesh = build_interval_mesh((x0, x1), nx, order, periodic)
        meta["finite_nodes"] = mesh.finite_nodes()
        if layer.get("enabled", True):
            for s in sides:
                mesh = attach_semi_infinite_layer(mesh, s, int(layer["order"]), float(layer["lam"]))
        ends = dict(mesh.layer_end)
    meta["layer_end"] = ends
    x = mesh.coords[:, 0]
    gamma = None
    if cfg["damping"]["enabled"] and ends:
        gamma = _sigmoid_gamma_1d(x, ends, cfg, base)
    if name == "wave1d":
        eq = Wave1D()
        bc = None
    else:
        p = cfg["physics"]
        eq = ShallowWater1D(float(p["H"]), float(p["U"]), float(cfg["constants"]["g"]))
        A, k, T = float(p["A"]), float(p["k"]), float(p["T"])
        left = int(np.argmin(x))
        bc = BoundaryConditions().add(BoundaryConditions.dirichlet([left], 1, lambda t: wavetrain_forcing(t, A, k, T)))
    return mesh, eq, gamma, bc, meta


def _build_advdiff(cfg):
    m, layer, p = cfg["mesh"], cfg["layer"], cfg["physics"]
    z0, z1 = map(float, m["z_range"])
    nz = int(m["nz"])
    ext = float(m.get("extend_to", 0.0) or 0.0)
    meta = {}
    if ext > 0:
        dz = (z1 - z0) / nz
        nadd = int(np.ceil(round((ext - z1) / dz, 9)))
        mesh = build_finite_mesh(m["x_range"], (z0, z1 + nadd * dz), int(m["nx"]), nz + nadd,
                                 int(m["order"]), int(m["order"]))
        meta["finite_nodes"] = np.flatnonzero(mesh.coords[:, 1] <= z1 + 1e-12)
        meta["layer_end"] = {"top": z1 + nadd * dz}
    else:
        mesh = build_finite_mesh(m["x_range"], (z0, z1), int(m["nx"]), nz, int(m["order"]), int(m["order"]))
        meta["finite_nodes"] = mesh.finite_nodes()
        if layer.get("enabled", True):
            mesh = attach_semi_infinite_layer(mesh, "top", int(layer["order"]), float(layer["lam"]))
        meta["layer_end"] = dict(mesh.layer_end)
    eq = AdvectionDiffusion2D(float(p["u"]), float(p["v"]), float(p["nu"]))
    # the closed-form solution is imposed on the lateral and bottom edges
    nodes = np.unique(np.concatenate([mesh.boundary[k] for k in ("left", "right", "bottom") if k in mesh.boundary]))
    xb, zb = mesh.coords[nodes, 0], mesh.coords[nodes, 1]
    xc, zc = float(p["xc"]), float(p["zc"])

    def edge_values(t):
        return advection_diffusion_exact(xb, zb, t, eq.u, eq.v, eq.nu, xc, zc)
    bc = BoundaryConditions().add(BoundaryConditions.dirichlet(nodes, 0, edge_values))
    return mesh, eq, None, bc, meta


def _constants(cfg) -> PhysicalConstants:
    c = cfg["constants"]
    return PhysicalConstants(float(c["g"]), float(c["cp"]), float(c["R"]), float(c["p_ref"]))


def _build_euler(cfg, name):
    m, layer, p, d = cfg["mesh"], cfg["layer"], cfg["physics"], cfg["damping"]
    const = _constants(cfg)
    terrain = TerrainProfile(**cfg["terrain"]) if "terrain" in cfg else TerrainProfile()
    periodic = name in ("lhm", "schar")
    z0, z1 = map(float, m["z_range"])
    nz = int(m["nz"])
    ext = float(m.get("extend_to", 0.0) or 0.0)
    meta = {}
    if ext > 0:
        dz = (z1 - z0) / nz
        nadd = int(np.ceil(round((ext - z1) / dz, 9)))
        ztop = z1 + nadd * dz
        mesh = build_finite_mesh(m["x_range"], (z0, ztop), int(m["nx"]), nz + nadd, int(m["order"]),
                                 int(m["order"]), terrain, periodic)
        meta["layer_end"] = {"top": ztop}
    else:
        ztop = z1
        mesh = build_finite_mesh(m["x_range"], (z0, z1), int(m["nx"]), nz, int(m["order"]), int(m["order"]),
                                 terrain, periodic)
        if layer.get("enabled", True):
            mesh = attach_semi_infinite_layer(mesh, "top", int(layer["order"]), float(layer["lam"]))
            ztop = mesh.layer_end["top"]
        meta["layer_end"] = dict(mesh.layer_end) if mesh.layer_end else {"top": ztop}
    x, z = mesh.coords[:, 0], mesh.coords[:, 1]
    meta["finite_nodes"] = np.flatnonzero(z <= z1 + 1e-9) if ext > 0 else mesh.finite_nodes()
    meta["z_interface"] = z1

    kind = "isentropic" if name == "bubble" else "constant_n"
    N = float(p.get("N", 0.0) or 0.0) or None
    U = float(p.get("U", 0.0))
    bg = hydrostatic_background(float(p["theta0"]), float(p["p0"]), kind, z, N=N, U=U, const=const)
    eq = Euler2D(bg, float(p.get("nu", 0.0)), float(p.get("kappa", 0.0)))
    meta["background"] = bg

    gamma = None
    if d.get("enabled"):
        zmax = meta["layer_end"]["top"]
        top = DampingProfile("sine_squared", float(d["delta_gamma"]), 1, z_s=z1, z_max=zmax)
        gamma = damping_coefficient(z, top)
        width = float(d.get("lateral_width", 0.0) or 0.0)
        if width > 0:
            xa, xb = map(float, m["x_range"])
            lat_r = DampingProfile("sine_squared", float(d["lateral_gamma"]), 0, z_s=xb - width, z_max=xb)
            lat_l = DampingProfile("sine_squared", float(d["lateral_gamma"]), 0, z_s=xa + width, z_max=xa)
            gamma = np.maximum(gamma, np.maximum(damping_coefficient(x, lat_r), damping_coefficient(x, lat_l)))
    meta["damp_vars"] = [bool(d.get("damp_density", True)), True, True, True]

    bc = BoundaryConditions()
    bc.add(BoundaryConditions.wall(mesh.boundary["bottom"], mesh.bottom_normals, eq.m0))
    if not periodic:
        bc.add(BoundaryConditions.wall(mesh.boundary["left"], (-1.0, 0.0), eq.m0))
        bc.add(BoundaryConditions.wall(mesh.boundary["right"], (1.0, 0.0), eq.m0))
    if "top" in mesh.boundary:
        bc.add(BoundaryConditions.wall(mesh.boundary["top"], (0.0, 1.0), eq.m0))
    return mesh, eq, gamma, bc, meta


def case_initial_state(name: str, cfg: dict, mesh: Mesh, eq) -> np.ndarray:
    """Initial data; Euler cases return perturbations from the background."""
    p = cfg.get("physics", {})
    if name == "wave1d":
        x = mesh.coords[:, 0]
        q = np.zeros((2, mesh.nglobal))
        q[0] = 2.0 ** (-((x - float(p["xc"])) ** 2) / float(p["sigma"]) ** 2)
        return q
    if name == "wavetrain":
        return np.zeros((2, mesh.nglobal))
    if name == "advdiff":
        x, z = mesh.coords[:, 0], mesh.coords[:, 1]
        return advection_diffusion_exact(x, z, 0.0, xc=float(p["xc"]), zc=float(p["zc"]))[None, :].copy()
    if name == "bubble":
        x, z = mesh.coords[:, 0], mesh.coords[:, 1]
        bg = eq.bg
        r = np.hypot(x - float(p["xc"]), z - float(p["zc"]))
        r0 = float(p["r0"])
        dtheta = np.where(r <= r0, float(p["theta_c"]) * (1.0 - r / r0), 0.0)
        theta = bg.theta + dtheta
        c = bg.const
        rho = c.p_ref / (c.R * theta) * (bg.p / c.p_ref) ** (c.cv / c.cp)
        q = np.zeros((4, mesh.nglobal))
        q[0] = rho - bg.rho
        q[3] = rho * theta - bg.Theta
        return q
    if name in ("lhm", "schar"):
        return np.zeros((4, mesh.nglobal))
    raise ValueError(f"unknown case id {name!r}")


def build_case(cfg: dict, timing: bool = False) -> CaseSetup:
    name = cfg["case"]
    if name in ("wave1d", "wavetrain"):
        mesh, eq, gamma, bc, meta = _build_1d(cfg, name)
        damp_vars = None
    elif name == "advdiff":
        mesh, eq, gamma, bc, meta = _build_advdiff(cfg)
        damp_vars = None
    elif name in ("bubble", "lhm", "schar"):
        mesh, eq, gamma, bc, meta = _build_euler(cfg, name)
        damp_vars = meta["damp_vars"]
    else:
        raise ValueError(f"case {name!r} is not time dependent")
    for side, end in meta.get("layer_end", {}).items():
        log.info("%s: layer %s ends at %.6g", name, side, end)
    rhs = SemiDiscreteRHS(mesh, eq, gamma, damp_vars, timing=timing)
    q = case_initial_state(name, cfg, mesh, eq)
    return CaseSetup(name, cfg, mesh, eq, rhs, q, _spec(cfg), bc, _filter(cfg, mesh), gamma, meta)
