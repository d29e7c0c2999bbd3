"""Structured hybrid meshes: finite spectral elements plus semi-infinite layers.

Element-local arrays have shape ``(nel, n1)`` in 1D and ``(nel, n1, n2)`` in
2D, axis 1 being the first reference direction (xi) and axis 2 the second
(eta).  ``conn`` maps every element-local node to its global index; shared
nodes (element edges, periodic seams, finite/semi-infinite interfaces) have
a single global index, so continuity holds by construction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import NodalBasis1D, QuadKind, lgl_quadrature, lgr_quadrature, nodal_basis

__all__ = [
    "ElementKind",
    "TerrainProfile",
    "ElementGroup",
    "Mesh",
    "build_interval_mesh",
    "build_finite_mesh",
    "attach_semi_infinite_layer",
    "compute_metrics",
    "layer_end_point",
    "write_vtk",
    "write_node_csv",
]

INTERFACE_TOL = 1e-9


class ElementKind(enum.Enum):
    FINITE = "finite"
    SEMI_INFINITE_UP = "semi_infinite_up"
    SEMI_INFINITE_LEFT = "semi_infinite_left"
    SEMI_INFINITE_RIGHT = "semi_infinite_right"

    @property
    def is_finite(self) -> bool:
        return self is ElementKind.FINITE


_SIDE_KIND = {
    "top": ElementKind.SEMI_INFINITE_UP,
    "left": ElementKind.SEMI_INFINITE_LEFT,
    "right": ElementKind.SEMI_INFINITE_RIGHT,
}


@dataclass(frozen=True)
class TerrainProfile:
    """Bottom topography h_s(x) in meters."""

    shape: str = "flat"
    h: float = 0.0
    a: float = 1.0
    x_c: float = 0.0
    lam_c: float = 1.0

    def __post_init__(self):
        if self.shape not in ("flat", "agnesi", "schar"):
            raise ValueError(f"unknown terrain shape {self.shape!r}")
        if self.h < 0 or self.a <= 0:
            raise ValueError("terrain needs h >= 0 and a > 0")

    def height(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape == "flat":
            return np.zeros_like(x)
        if self.shape == "agnesi":
            return self.h * self.a**2 / ((x - self.x_c) ** 2 + self.a**2)
        s = x - self.x_c
        return self.h * np.exp(-(s / self.a) ** 2) * np.cos(np.pi * s / self.lam_c) ** 2


@dataclass
class ElementGroup:
    """Elements sharing one tensor-product basis (one element kind)."""

    kind: ElementKind
    bases: tuple[NodalBasis1D, ...]
    conn: np.ndarray
    coords: np.ndarray
    dxi: np.ndarray | None = None
    jac: np.ndarray | None = None
    weights: np.ndarray | None = None

    @property
    def nel(self) -> int:
        return self.conn.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.conn.shape[1:]

    @property
    def mass(self) -> np.ndarray:
        """Diagonal element mass w |J| at every element node."""
        return self.weights * self.jac

    def flat_conn(self) -> np.ndarray:
        """(nel, n1*n2) map with the first reference index running fastest."""
        return self.conn.reshape(self.nel, -1, order="C") if self.conn.ndim == 2 else \
            self.conn.transpose(0, 2, 1).reshape(self.nel, -1)


@dataclass
class Mesh:
    dim: int
    coords: np.ndarray
    groups: list[ElementGroup]
    boundary: dict[str, np.ndarray] = field(default_factory=dict)
    interface: dict[str, np.ndarray] = field(default_factory=dict)
    layer_end: dict[str, float] = field(default_factory=dict)
    periodic: bool = False
    extent: dict = field(default_factory=dict)
    bottom_normals: np.ndarray | None = None
    multiplicity: np.ndarray | None = None

    @property
    def nglobal(self) -> int:
        return self.coords.shape[0]

    @property
    def finite_groups(self) -> list[ElementGroup]:
        return [g for g in self.groups if g.kind.is_finite]

    @property
    def semi_groups(self) -> list[ElementGroup]:
        return [g for g in self.groups if not g.kind.is_finite]

    @property
    def conn_F(self) -> np.ndarray:
        return np.concatenate([g.flat_conn() for g in self.finite_groups])

    @property
    def conn_S(self) -> np.ndarray:
        gs = self.semi_groups
        if not gs:
            return np.zeros((0, 0), dtype=np.int64)
        return np.concatenate([g.flat_conn() for g in gs])

    @property
    def n_elements(self) -> int:
        return sum(g.nel for g in self.groups)

    def finite_nodes(self) -> np.ndarray:
        """Sorted global ids of all nodes touched by finite elements."""
        return np.unique(np.concatenate([g.conn.ravel() for g in self.finite_groups]))

    def semi_nodes(self) -> np.ndarray:
        gs = self.semi_groups
        if not gs:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([g.conn.ravel() for g in gs]))


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def _multiplicity(mesh: Mesh) -> np.ndarray:
    m = np.zeros(mesh.nglobal)
    for g in mesh.groups:
        m += np.bincount(g.conn.ravel(), minlength=mesh.nglobal)
    return m


def build_interval_mesh(x_range, nx: int, order: int, periodic: bool = False) -> Mesh:
    """Uniform 1D mesh of ``nx`` LGL elements of degree ``order``."""
    if nx < 1 or order < 1:
        raise ValueError("need positive element count and order")
    x0, x1 = map(float, x_range)
    basis = nodal_basis(lgl_quadrature(order))
    dx = (x1 - x0) / nx
    npts = nx * order + (0 if periodic else 1)
    I = np.arange(nx)[:, None] * order + np.arange(order + 1)[None, :]
    xe = x0 + np.arange(nx)[:, None] * dx + (basis.nodes[None, :] + 1) * dx / 2
    conn = I % npts if periodic else I
    coords = np.zeros((npts, 1))
    coords[conn.ravel(), 0] = xe.ravel()
    coords[conn[0, 0], 0] = x0
    group = ElementGroup(ElementKind.FINITE, (basis,), conn.astype(np.int64), xe[..., None])
    boundary = {} if periodic else {"left": np.array([0]), "right": np.array([npts - 1])}
    mesh = Mesh(1, coords, [group], boundary, periodic=periodic,
                extent={"x": (x0, x1), "nx": nx, "order": (order,)})
    return compute_metrics(mesh)


def build_finite_mesh(x_range, z_range, nx: int, nz: int, order_x: int, order_z: int | None = None,
                      terrain: TerrainProfile | None = None, periodic: bool = False) -> Mesh:
    """Structured quadrilateral mesh with a terrain-following vertical coordinate.

    Node heights follow z = zeta + h_s(x) (z_top - zeta)/(z_top - z_bot), so
    the terrain signal vanishes at the top of the finite domain.
    """
    if order_z is None:
        order_z = order_x
    if min(nx, nz, order_x, order_z) < 1:
        raise ValueError("need positive element counts and orders")
    terrain = terrain or TerrainProfile()
    x0, x1 = map(float, x_range)
    z0, z1 = map(float, z_range)
    bx = nodal_basis(lgl_quadrature(order_x))
    bz = bx if order_z == order_x else nodal_basis(lgl_quadrature(order_z))
    dx, dz = (x1 - x0) / nx, (z1 - z0) / nz
    ncol_raw = nx * order_x + 1
    ncol = ncol_raw - 1 if periodic else ncol_raw
    nrow = nz * order_z + 1

    xg = np.empty(ncol_raw)
    for e in range(nx):
        xg[e * order_x:(e + 1) * order_x + 1] = x0 + e * dx + (bx.nodes + 1) * dx / 2
    zeta = np.empty(nrow)
    for e in range(nz):
        zeta[e * order_z:(e + 1) * order_z + 1] = z0 + e * dz + (bz.nodes + 1) * dz / 2
    hs = terrain.height(xg)
    Z = zeta[:, None] + hs[None, :] * (z1 - zeta[:, None]) / (z1 - z0)
    X = np.broadcast_to(xg[None, :], Z.shape)

    ex, ez = np.meshgrid(np.arange(nx), np.arange(nz), indexing="xy")
    ex, ez = ex.ravel(), ez.ravel()  # element order: x fastest, then z
    Icol = ex[:, None, None] * order_x + np.arange(order_x + 1)[None, :, None]
    Jrow = ez[:, None, None] * order_z + np.arange(order_z + 1)[None, None, :]
    Icol, Jrow = np.broadcast_arrays(Icol, Jrow)
    conn = Jrow * ncol + (Icol % ncol)
    coords_e = np.stack([X[Jrow, Icol], Z[Jrow, Icol]], axis=-1)

    coords = np.zeros((nrow * ncol, 2))
    coords[:, 0] = np.tile(xg[:ncol], nrow)
    coords[:, 1] = Z[:, :ncol].ravel()

    rows = np.arange(nrow)
    cols = np.arange(ncol)
    boundary = {
        "bottom": cols.copy(),
        "top": (nrow - 1) * ncol + cols,
    }
    if not periodic:
        boundary["left"] = rows * ncol
        boundary["right"] = rows * ncol + ncol - 1
    group = ElementGroup(ElementKind.FINITE, (bx, bz), conn.astype(np.int64), coords_e)
    mesh = Mesh(2, coords, [group], boundary, periodic=periodic,
                extent={"x": (x0, x1), "z": (z0, z1), "nx": nx, "nz": nz,
                        "order": (order_x, order_z), "terrain": terrain})
    return compute_metrics(mesh)


def layer_end_point(base: float, order: int, lam: float, direction: int = 1) -> float:
    """Coordinate of the last LGR node of a layer starting at ``base``."""
    q = lgr_quadrature(order, lam)
    return base + direction * lam * q.nodes[-1]


def attach_semi_infinite_layer(mesh: Mesh, side: str, order: int, lam: float) -> Mesh:
    """Return a new mesh with one semi-infinite element per boundary element on ``side``.

    The finite direction of each new element reuses the abutting element's LGL
    basis; the infinite direction carries LGR nodes at base + lam * xi.
    """
    if side not in _SIDE_KIND:
        raise ValueError(f"unknown side {side!r}")
    if lam <= 0 or order < 1:
        raise ValueError("layer needs order >= 1 and lam > 0")
    kinds = {g.kind for g in mesh.semi_groups}
    if _SIDE_KIND[side] in kinds:
        raise ValueError(f"a layer is already attached on side {side!r}")
    if mesh.dim == 2 and kinds and (side == "top" or ElementKind.SEMI_INFINITE_UP in kinds):
        raise ValueError("corner semi-infinite elements are not supported")
    if mesh.dim == 1 and side == "top":
        raise ValueError("1D meshes only take left/right layers")
    if side in ("left", "right") and mesh.periodic:
        raise ValueError("cannot attach a lateral layer to a periodic mesh")

    lgr = nodal_basis(lgr_quadrature(order, lam))
    eta = lgr.nodes
    fin = mesh.finite_groups[0]
    n0 = mesh.nglobal
    sgn = -1.0 if side == "left" else 1.0

    if mesh.dim == 1:
        e = 0 if side == "left" else fin.nel - 1
        inode = fin.conn[e, 0] if side == "left" else fin.conn[e, -1]
        base = mesh.coords[inode, 0]
        conn = np.concatenate([[inode], n0 + np.arange(order)])[None, :]
        xe = base + sgn * lam * eta
        new_coords = xe[1:, None]
        group = ElementGroup(_SIDE_KIND[side], (lgr,), conn.astype(np.int64), xe[None, :, None])
        iface = np.array([inode])
        end = float(xe[-1])
    else:
        nx, nz = mesh.extent["nx"], mesh.extent["nz"]
        if side == "top":
            elems = (nz - 1) * nx + np.arange(nx)
            edge = fin.conn[elems, :, -1]  # (nx, n1)
            ecoords = fin.coords[elems, :, -1, :]
            base = mesh.extent["z"][1]
            if np.max(np.abs(ecoords[..., 1] - base)) > INTERFACE_TOL:
                raise ValueError("top boundary is not flat; cannot attach a layer")
            # new nodes indexed by (finite column, LGR level >= 1)
            cols = np.unique(edge)
            colpos = np.searchsorted(cols, edge)
            ncols = cols.size
            n1 = edge.shape[1]
            conn = np.empty((nx, n1, order + 1), dtype=np.int64)
            conn[:, :, 0] = edge
            conn[:, :, 1:] = n0 + colpos[:, :, None] + ncols * np.arange(order)[None, None, :]
            ce = np.empty((nx, n1, order + 1, 2))
            ce[..., 0] = ecoords[:, :, None, 0]
            ce[..., 1] = base + lam * eta[None, None, :]
            new_coords = np.empty((order * ncols, 2))
            flat = conn[:, :, 1:].ravel() - n0
            new_coords[flat] = ce[:, :, 1:, :].reshape(-1, 2)
            group = ElementGroup(ElementKind.SEMI_INFINITE_UP, (fin.bases[0], lgr), conn, ce)
            iface = cols
        else:
            xcol = 0 if side == "left" else nx - 1
            elems = np.arange(nz) * nx + xcol
            edge = fin.conn[elems, 0 if side == "left" else -1, :]  # (nz, n2)
            ecoords = fin.coords[elems, 0 if side == "left" else -1, :, :]
            base = mesh.extent["x"][0 if side == "left" else 1]
            if np.max(np.abs(ecoords[..., 0] - base)) > INTERFACE_TOL:
                raise ValueError("lateral boundary is not straight; cannot attach a layer")
            rows = np.unique(edge)
            rowpos = np.searchsorted(rows, edge)
            nrows = rows.size
            n2 = edge.shape[1]
            conn = np.empty((nz, order + 1, n2), dtype=np.int64)
            conn[:, 0, :] = edge
            conn[:, 1:, :] = n0 + rowpos[:, None, :] + nrows * np.arange(order)[None, :, None]
            ce = np.empty((nz, order + 1, n2, 2))
            ce[..., 0] = base + sgn * lam * eta[None, :, None]
            ce[..., 1] = ecoords[:, None, :, 1]
            new_coords = np.empty((order * nrows, 2))
            flat = conn[:, 1:, :].ravel() - n0
            new_coords[flat] = ce[:, 1:, :, :].reshape(-1, 2)
            group = ElementGroup(_SIDE_KIND[side], (lgr, fin.bases[1]), conn, ce)
            iface = rows
        end = float(base + sgn * lam * eta[-1])

    coords = np.vstack([mesh.coords, new_coords])
    _check_interface(mesh, group, side)

    boundary = {k: v.copy() for k, v in mesh.boundary.items()}
    if mesh.dim == 2:
        if side == "top":
            boundary.pop("top", None)
            if not mesh.periodic:
                left_ids = group.conn[0, 0, 1:]
                right_ids = group.conn[-1, -1, 1:]
                boundary["left"] = np.concatenate([boundary["left"], left_ids])
                boundary["right"] = np.concatenate([boundary["right"], right_ids])
        else:
            boundary.pop(side, None)
            bottom_ids = group.conn[0, 1:, 0]
            top_ids = group.conn[-1, 1:, -1]
            boundary["bottom"] = np.concatenate([boundary["bottom"], bottom_ids])
            if "top" in boundary:
                boundary["top"] = np.concatenate([boundary["top"], top_ids])
    else:
        boundary.pop(side, None)

    new = replace(mesh, coords=coords, groups=mesh.groups + [group], boundary=boundary,
                  interface={**mesh.interface, side: np.asarray(iface)},
                  layer_end={**mesh.layer_end, side: end})
    return compute_metrics(new)


def _check_interface(mesh: Mesh, group: ElementGroup, side: str) -> None:
    if mesh.dim == 1:
        ids = group.conn[:, 0]
        pos = group.coords[:, 0, :]
    elif side == "top":
        ids = group.conn[:, :, 0].ravel()
        pos = group.coords[:, :, 0, :].reshape(-1, 2)
    else:
        ids = group.conn[:, 0, :].ravel()
        pos = group.coords[:, 0, :, :].reshape(-1, 2)
    fin = mesh.finite_groups[0]
    lookup = {}
    flat_ids = fin.conn.ravel()
    flat_pos = fin.coords.reshape(-1, mesh.dim)
    for k, i in enumerate(flat_ids):
        lookup.setdefault(int(i), flat_pos[k])
    for i, p in zip(ids, pos):
        q = lookup.get(int(i))
        if q is not None and mesh.periodic:
            period = mesh.extent["x"][1] - mesh.extent["x"][0]
            q = q.copy()
            q[0] += period * np.round((p[0] - q[0]) / period)
        if q is None or np.max(np.abs(q - p)) > INTERFACE_TOL:
            raise ValueError(f"interface node {int(i)} does not match the finite mesh")


# --------------------------------------------------------------------------
# metric terms
# --------------------------------------------------------------------------

def _axis_derivative(basis: NodalBasis1D, f: np.ndarray, axis: int) -> np.ndarray:
    """Derivative of a coordinate field along one reference axis."""
    if basis.kind is QuadKind.LGL:
        return np.moveaxis(np.tensordot(basis.deriv, np.moveaxis(f, axis, 0), axes=(1, 0)), 0, axis)
    # Coordinates are affine along an LGR axis; the polynomial LGR derivative
    # table is far too ill-conditioned at high order, so difference the first
    # two nodes, which is exact for affine data.
    x = basis.nodes
    f0 = np.take(f, [0], axis=axis)
    f1 = np.take(f, [1], axis=axis)
    return np.broadcast_to((f1 - f0) / (x[1] - x[0]), f.shape).copy()


def compute_metrics(mesh: Mesh) -> Mesh:
    """Fill inverse-Jacobian terms, |J| and tensor weights for every group."""
    for g in mesh.groups:
        if g.coords.shape[-1] != mesh.dim:
            raise ValueError("coordinate dimension mismatch")
        if mesh.dim == 1:
            x_xi = _axis_derivative(g.bases[0], g.coords[..., 0], 1)
            det = x_xi
            dxi = (1.0 / x_xi)[..., None, None]
            w = g.bases[0].weights.copy()
        else:
            b1, b2 = g.bases
            X, Z = g.coords[..., 0], g.coords[..., 1]
            x_xi = _axis_derivative(b1, X, 1)
            z_xi = _axis_derivative(b1, Z, 1)
            x_eta = _axis_derivative(b2, X, 2)
            z_eta = _axis_derivative(b2, Z, 2)
            det = x_xi * z_eta - x_eta * z_xi
            dxi = np.empty(det.shape + (2, 2))
            dxi[..., 0, 0] = z_eta / det
            dxi[..., 0, 1] = -x_eta / det
            dxi[..., 1, 0] = -z_xi / det
            dxi[..., 1, 1] = x_xi / det
            w = np.outer(b1.weights, b2.weights)
        if g.kind.is_finite and np.any(det <= 0):
            raise ValueError("degenerate element mapping: |J| <= 0")
        if np.any(det == 0) or not np.all(np.isfinite(det)):
            raise ValueError("degenerate semi-infinite element mapping")
        g.dxi = dxi
        g.jac = np.abs(det)
        g.weights = w
    mesh.multiplicity = _multiplicity(mesh)
    if mesh.dim == 2 and "bottom" in mesh.boundary:
        mesh.bottom_normals = _bottom_normals(mesh)
    return mesh


def _bottom_normals(mesh: Mesh) -> np.ndarray:
    """Unit outward normals at bottom boundary nodes, from the eta gradient."""
    acc = np.zeros((mesh.nglobal, 2))
    for g in mesh.groups:
        if g.kind is ElementKind.SEMI_INFINITE_UP:
            continue
        ids = g.conn[:, :, 0].ravel()
        grad = -g.dxi[:, :, 0, 1, :].reshape(-1, 2)
        grad /= np.linalg.norm(grad, axis=1)[:, None]
        np.add.at(acc, ids, grad)
    nb = acc[mesh.boundary["bottom"]]
    norm = np.linalg.norm(nb, axis=1)
    norm[norm == 0] = 1.0
    return nb / norm[:, None]


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def write_node_csv(mesh: Mesh, path, fields: dict | None = None) -> None:
    fields = fields or {}
    names = ["x", "z"][: mesh.dim] + list(fields)
    cols = [mesh.coords[:, d] for d in range(mesh.dim)] + [np.asarray(v) for v in fields.values()]
    with open(path, "w") as fh:
        fh.write("id," + ",".join(names) + "\n")
        for i in range(mesh.nglobal):
            fh.write(f"{i}," + ",".join(f"{c[i]:.17g}" for c in cols) + "\n")


def write_vtk(mesh: Mesh, path, fields: dict | None = None, title: str = "laguerre_sem") -> None:
    """Legacy ASCII VTK unstructured grid; each element is split into sub-quads.

    Points are written per element so periodic seams do not produce cells
    spanning the domain.
    """
    if mesh.dim != 2:
        raise ValueError("VTK output is for 2D meshes")
    fields = fields or {}
    pts, ids, cells = [], [], []
    offset = 0
    for g in mesh.groups:
        nel, n1, n2 = g.conn.shape
        pts.append(g.coords.reshape(-1, 2))
        ids.append(g.conn.ravel())
        loc = np.arange(nel * n1 * n2).reshape(nel, n1, n2) + offset
        quads = np.stack([loc[:, :-1, :-1], loc[:, 1:, :-1], loc[:, 1:, 1:], loc[:, :-1, 1:]], axis=-1)
        cells.append(quads.reshape(-1, 4))
        offset += nel * n1 * n2
    P = np.vstack(pts)
    gid = np.concatenate(ids)
    C = np.vstack(cells)
    with open(path, "w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {P.shape[0]} double\n")
        for x, z in P:
            fh.write(f"{x:.17g} {z:.17g} 0\n")
        fh.write(f"CELLS {C.shape[0]} {C.shape[0] * 5}\n")
        for c in C:
            fh.write(f"4 {c[0]} {c[1]} {c[2]} {c[3]}\n")
        fh.write(f"CELL_TYPES {C.shape[0]}\n")
        fh.write("9\n" * C.shape[0])
        if fields:
            fh.write(f"POINT_DATA {P.shape[0]}\n")
            for name, val in fields.items():
                v = np.asarray(val)[gid]
                fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                fh.write("\n".join(f"{x:.17g}" for x in v))
                fh.write("\n")
