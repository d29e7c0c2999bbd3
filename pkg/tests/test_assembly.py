import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laguerre_sem.assembly import (
    SpatialOperator,
    apply_rayleigh,
    dss,
    dss_average,
    element_mass,
    element_rhs_advective,
    element_rhs_diffusive,
    element_stiffness,
    global_laplacian,
    global_mass,
)
from laguerre_sem.basis import lgl_quadrature, lgr_quadrature
from laguerre_sem.mesh import (
    TerrainProfile,
    attach_semi_infinite_layer,
    build_finite_mesh,
    build_interval_mesh,
)
from laguerre_sem.timeint import ssprk33_step


def _local(group, f):
    return f[group.conn]


def test_element_mass_examples():
    m = build_finite_mesh((0, 2), (0, 2), 1, 1, 1)
    assert np.allclose(element_mass(m.groups[0]), 1.0)
    s = attach_semi_infinite_layer(build_finite_mesh((0, 2), (-2, 0), 1, 1, 1), "top", 1, 1.0)
    mg = element_mass(s.semi_groups[0])[0]
    assert np.allclose(mg, [[0.5, math.e**2 / 2], [0.5, math.e**2 / 2]])


def test_single_element_mass_is_weight_product():
    m = build_finite_mesh((0, 3), (1, 2), 1, 1, 4)
    w = lgl_quadrature(4).weights
    assert np.allclose(global_mass(m).reshape(5, 5), np.outer(w, w) * 1.5 * 0.5)


def test_dss_examples():
    conn = np.array([[0, 1], [1, 2]])
    assert np.array_equal(dss(np.ones((2, 2)), conn, 3), [1.0, 2.0, 1.0])
    m = attach_semi_infinite_layer(build_finite_mesh((-5, 5), (0, 10), 6, 8, 4), "top", 10, 0.07)
    total = sum(element_mass(g).sum() for g in m.groups)
    assert global_mass(m).sum() == pytest.approx(total, rel=1e-14)
    f = np.sin(m.coords[:, 0]) + m.coords[:, 1]
    assert np.allclose(dss_average(m, [f[g.conn] for g in m.groups]), f, rtol=0, atol=1e-13)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_dss_linearity(a, b):
    m = build_finite_mesh((0, 1), (0, 1), 3, 2, 3)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(m.groups[0].conn.shape)
    v = rng.standard_normal(m.groups[0].conn.shape)
    c = m.groups[0].conn
    assert np.allclose(dss(a * u + b * v, c, m.nglobal), a * dss(u, c, m.nglobal) + b * dss(v, c, m.nglobal),
                       atol=1e-12)


def test_advective_constant_flux_vanishes():
    m = attach_semi_infinite_layer(build_finite_mesh((0, 2), (0, 1), 3, 2, 4,
                                                     terrain=TerrainProfile("agnesi", 0.1, 0.5, 1.0)),
                                   "top", 6, 0.3)
    for g in m.groups:
        F = np.full((2,) + g.conn.shape, 3.0)
        G = np.full((2,) + g.conn.shape, -1.5)
        out = element_rhs_advective(g, F, G)
        if g.kind.is_finite:
            assert np.max(np.abs(out)) < 1e-11


def test_advective_linear_flux_1d():
    m = build_interval_mesh((-1, 1), 1, 4)
    g = m.groups[0]
    F = _local(g, m.coords[:, 0])[None]
    out = element_rhs_advective(g, F)[0, 0]
    assert np.allclose(out, -lgl_quadrature(4).weights, atol=1e-14)


def test_advective_semi_infinite_weighted_exactness():
    # flux e^{-z/2} p(z) in a lam = 1 layer on flat ground: rhs = -w |J| dF/dz
    m = attach_semi_infinite_layer(build_finite_mesh((0, 2), (-1, 0), 1, 1, 3), "top", 12, 1.0)
    g = m.semi_groups[0]
    z = g.coords[..., 1]
    F = np.exp(-z / 2) * (1 + z - 0.3 * z**2)
    dF = np.exp(-z / 2) * (1 - 0.6 * z - 0.5 * (1 + z - 0.3 * z**2))
    out = element_rhs_advective(g, np.zeros((1,) + z.shape), F[None])[0]
    assert np.allclose(out, -g.weights * g.jac * dF, rtol=1e-9, atol=1e-12)


def test_semi_infinite_path_matches_finite_path_with_lgl_tables():
    # a semi-infinite group whose tables are swapped for LGL reproduces the finite kernel
    from dataclasses import replace

    fm = build_finite_mesh((0, 2), (0, 2), 1, 1, 5)
    sm = attach_semi_infinite_layer(build_finite_mesh((0, 2), (-2, 0), 1, 1, 5), "top", 5, 1.0)
    fg, sg = fm.groups[0], sm.semi_groups[0]
    hybrid = replace(sg, bases=fg.bases, dxi=fg.dxi, jac=fg.jac, weights=fg.weights, coords=fg.coords)
    rng = np.random.default_rng(3)
    F, G = rng.standard_normal((2, 1) + fg.conn.shape)
    assert np.allclose(element_rhs_advective(hybrid, F, G), element_rhs_advective(fg, F, G), atol=1e-13)


def test_diffusive_examples():
    m = build_finite_mesh((0, 2), (0, 1), 2, 2, 5)
    g = m.groups[0]
    x, z = g.coords[..., 0], g.coords[..., 1]
    interior = (slice(None), slice(1, -1), slice(1, -1))
    lin = element_rhs_diffusive(g, (1 + 2 * x - 3 * z)[None], 1.0)[0]
    assert np.max(np.abs(lin[interior])) < 1e-10
    assert np.all(element_rhs_diffusive(g, (x**2)[None], 0.0) == 0.0)
    quad = element_rhs_diffusive(g, (x**2)[None], 1.0)[0]
    assert np.allclose(quad[interior], 2 * element_mass(g)[interior], atol=1e-9)


def test_laplacian_matches_dense_assembly_oracle():
    # brute-force oracle: K[a, b] = sum_q w_q |J| grad h_a . grad h_b on one affine element
    m = build_finite_mesh((0, 3), (0, 1), 1, 1, 3)
    K = global_laplacian(m).toarray()
    from laguerre_sem.basis import lagrange_deriv_matrix

    q = lgl_quadrature(3)
    D = lagrange_deriv_matrix(q)
    w = q.weights
    sx, sz = 2 / 3, 2.0
    J = 1.5 * 0.5
    n = 4
    ref = np.zeros((n * n, n * n))
    for a in range(n * n):
        ia, ja = divmod(a, n)
        for b in range(n * n):
            ib, jb = divmod(b, n)
            s = 0.0
            for i in range(n):
                for j in range(n):
                    ga = np.array([D[j, ja] * (i == ia) * sx, D[i, ia] * (j == ja) * sz])
                    gb = np.array([D[j, jb] * (i == ib) * sx, D[i, ib] * (j == jb) * sz])
                    s += w[i] * w[j] * J * ga @ gb
            ref[a, b] = s
    assert np.allclose(K, ref, atol=1e-12)


def test_laplacian_properties():
    two = global_laplacian(build_interval_mesh((0, 2), 2, 1)).toarray()
    assert np.allclose(two, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    m = build_finite_mesh((0, 1), (0, 2), 3, 2, 4, terrain=TerrainProfile("agnesi", 0.1, 0.3, 0.5))
    K = global_laplacian(m)
    assert np.max(np.abs(K @ np.ones(m.nglobal))) < 1e-9
    ml = attach_semi_infinite_layer(m, "top", 8, 0.5)
    Kl = global_laplacian(ml)
    assert abs(Kl - Kl.T).max() < 1e-10
    assert np.min(np.linalg.eigvalsh(Kl.toarray())) > -1e-10


def test_element_stiffness_symmetric():
    m = attach_semi_infinite_layer(build_finite_mesh((0, 1), (0, 1), 1, 1, 3), "top", 5, 0.2)
    for g in m.groups:
        K = element_stiffness(g)
        assert np.allclose(K, K.transpose(0, 2, 1), atol=1e-12)


def test_rayleigh():
    q = np.array([1.0, 2.0, 3.0])
    assert np.all(apply_rayleigh(q, q, np.full(3, 2.0)) == 0)
    assert np.allclose(apply_rayleigh(q, q - 1, np.full(3, 2.0)), -2.0)
    assert np.allclose(apply_rayleigh(q, q - 1, np.full(3, 2.0), nodes=[1]), [0, -2, 0])
    # one SSPRK33 step of q' = -gamma q matches exp(-gamma dt) to O(dt^4)
    gamma, dt = 2.0, 1e-3
    rhs = lambda u, t: apply_rayleigh(u, 0.0, gamma)
    q1 = ssprk33_step(np.array([1.0]), 0.0, dt, rhs)[0]
    assert abs(q1 - math.exp(-gamma * dt)) < (gamma * dt) ** 4


@pytest.mark.parametrize("layer", [False, True])
def test_fused_kernels_match_reference(layer):
    m = build_finite_mesh((0, 4), (0, 2), 3, 2, 4, terrain=TerrainProfile("agnesi", 0.2, 0.7, 2.0))
    if layer:
        m = attach_semi_infinite_layer(m, "top", 9, 0.4)
    rng = np.random.default_rng(1)
    F, G, q = rng.standard_normal((3, 2, m.nglobal))
    op = SpatialOperator(m, timing=True)
    out = np.zeros((2, m.nglobal))
    op.divergence(F, G, out)
    ref = sum(dss([element_rhs_advective(g, F[:, g.conn], G[:, g.conn])[v] for g in m.groups],
                  [g.conn for g in m.groups], m.nglobal)[None] * (np.arange(2) == v)[:, None] for v in range(2))
    assert np.allclose(out, ref, atol=1e-11)
    nu = np.array([0.3, 1.5])
    out = np.zeros((2, m.nglobal))
    op.laplacian(q, nu, out)
    ref = np.stack([dss([element_rhs_diffusive(g, q[v:v + 1, g.conn], nu[v])[0] for g in m.groups],
                        [g.conn for g in m.groups], m.nglobal) for v in range(2)])
    assert np.allclose(out, ref, atol=1e-11)
    assert op.timers["finite"] > 0 and (op.timers["laguerre"] > 0) == layer
    op.reset_timers()
    assert op.timers == {"finite": 0.0, "laguerre": 0.0}


def test_fused_1d_kernels_match_reference():
    m = attach_semi_infinite_layer(build_interval_mesh((0, 1), 4, 5), "right", 7, 0.1)
    rng = np.random.default_rng(2)
    F = rng.standard_normal((1, m.nglobal))
    op = SpatialOperator(m)
    out = np.zeros((1, m.nglobal))
    op.divergence(F, None, out)
    ref = dss([element_rhs_advective(g, F[:, g.conn])[0] for g in m.groups], [g.conn for g in m.groups], m.nglobal)
    assert np.allclose(out[0], ref, atol=1e-11)


def test_dss_is_bitwise_deterministic():
    m = attach_semi_infinite_layer(build_finite_mesh((0, 4), (0, 2), 5, 3, 4), "top", 6, 0.5)
    rng = np.random.default_rng(5)
    F, G = rng.standard_normal((2, 4, m.nglobal))
    op = SpatialOperator(m)
    a = op.divergence(F, G, np.zeros((4, m.nglobal)))
    b = op.divergence(F, G, np.zeros((4, m.nglobal)))
    assert np.array_equal(a, b)


def test_finite_mesh_conserves_discrete_integral():
    # periodic in x, flux G vanishing at bottom and top: sum of rhs is round-off
    m = build_finite_mesh((0, 1), (0, 1), 4, 3, 5, periodic=True)
    x, z = m.coords.T
    F = (np.cos(2 * np.pi * x) * (1 + z))[None]
    G = (np.sin(np.pi * z) * np.sin(2 * np.pi * x))[None]
    out = SpatialOperator(m).divergence(F, G, np.zeros((1, m.nglobal)))
    assert abs(out.sum()) < 1e-13
