import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from laguerre_sem.basis import lgl_quadrature, lgr_quadrature
from laguerre_sem.filter import (
    apply_filter,
    boyd_vandeven_sigma,
    filter_matrices,
    filter_matrix,
    lgl_modal_basis,
    lgr_modal_basis,
    make_filter,
)
from laguerre_sem.mesh import attach_semi_infinite_layer, build_finite_mesh, build_interval_mesh


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_lgl_modal_basis(N):
    q = lgl_quadrature(N)
    Phi, inv = lgl_modal_basis(q)
    assert np.allclose(Phi[[0, -1], 2:], 0.0, atol=1e-13)
    assert np.allclose(Phi @ inv, np.eye(N + 1), atol=1e-10)
    # column k matches the Legendre combination evaluated independently
    for k in range(N + 1):
        c = np.zeros(N + 1)
        c[k] = 1.0
        if k >= 2:
            c[k - 2] = -1.0
        assert np.allclose(Phi[:, k], npleg.legval(q.nodes, c), atol=1e-12)
    with pytest.raises(ValueError):
        lgl_modal_basis(lgl_quadrature(1))


@pytest.mark.parametrize("N", [1, 6, 14, 30])
def test_lgr_modal_basis(N):
    Phi, inv = lgr_modal_basis(lgr_quadrature(N))
    assert Phi[0, 0] == 1.0
    assert np.allclose(Phi[0, 1:], 0.0, atol=1e-14)
    assert np.allclose(Phi @ inv, np.eye(N + 1), atol=1e-10)


def test_sigma_examples():
    s = boyd_vandeven_sigma(10, 2 / 3, 1.0)
    assert s[0] == 1.0 and np.all(s[:7] == 1.0)
    assert np.all(boyd_vandeven_sigma(12, 0.5, 0.0) == 1.0)
    assert boyd_vandeven_sigma(8, 0.5, 1.0)[-1] < 0.05
    assert np.all((s >= 0) & (s <= 1))
    with pytest.raises(ValueError):
        boyd_vandeven_sigma(8, 1.2)
    with pytest.raises(ValueError):
        boyd_vandeven_sigma(8, 0.5, 2.0)


@given(st.integers(1, 64), st.sampled_from([0.5, 0.66, 0.8]), st.floats(0, 1))
@settings(max_examples=200)
def test_sigma_monotone(N, sc, mu):
    s = boyd_vandeven_sigma(N, sc, mu)
    assert s[0] == 1.0 and np.all(np.diff(s) <= 0)


def test_sigma_identity_filter_is_identity():
    q = lgl_quadrature(7)
    Phi, inv = lgl_modal_basis(q)
    F = filter_matrix(Phi, inv, np.ones(8))
    f = np.random.default_rng(0).standard_normal(8)
    assert np.allclose(F @ f, f, atol=1e-12)


def test_filter_idempotence_bound():
    spec = make_filter(lgl_quadrature(9), 0.5, 0.7)
    twice = spec.matrix @ spec.matrix
    once_squared = filter_matrix(spec.transform, spec.inverse, spec.sigma**2)
    assert np.allclose(twice, once_squared, atol=1e-10)


def test_filter_keeps_endpoints_of_interior_spike():
    q = lgl_quadrature(8)
    F = make_filter(q, 0.5, 1.0).matrix
    f = np.zeros(9)
    f[4] = 1.0
    g = F @ f
    assert abs(g[0]) < 1e-10 and abs(g[-1]) < 1e-10


def test_apply_filter_constant_and_low_degree():
    m = build_finite_mesh((0, 2), (0, 1), 2, 2, 6)
    c = np.full(m.nglobal, 3.5)
    assert np.allclose(apply_filter(c, m, 2 / 3, 1.0), c, atol=1e-11)
    # in a layer the lowest mode is the decaying exponential, not the constant
    ml = attach_semi_infinite_layer(m, "top", 8, 0.3)
    z = ml.coords[:, 1]
    f = np.where(z > 1, np.exp(-(z - 1) / 0.6) * (1 + (z - 1) / 0.3), 1.0)
    layer = ml.semi_nodes()
    assert np.allclose(apply_filter(f, ml, 2 / 3, 1.0)[layer], f[layer], atol=1e-11)
    single = build_interval_mesh((-1, 1), 1, 9)
    x = single.coords[:, 0]
    p = 1 + x - 2 * x**3 + x**6  # degree 6 = floor(2/3 * 9)
    assert np.allclose(apply_filter(p, single, 2 / 3, 1.0), p, atol=1e-9)


def test_apply_filter_highest_mode():
    m = build_interval_mesh((-1, 1), 1, 8)
    x = m.coords[:, 0]
    c = np.zeros(9)
    c[8], c[6] = 1.0, -1.0
    top = npleg.legval(x, c)
    out = apply_filter(top, m, 0.5, 1.0)
    sigma = boyd_vandeven_sigma(8, 0.5, 1.0)
    assert np.allclose(out, sigma[8] * top, atol=1e-12) and sigma[8] < 0.05


def test_apply_filter_multi_variable_and_continuity():
    m = attach_semi_infinite_layer(build_finite_mesh((0, 3), (0, 1), 3, 2, 5), "top", 7, 0.2)
    rng = np.random.default_rng(4)
    q = rng.standard_normal((3, m.nglobal))
    mats = filter_matrices(m, 0.5, 0.5)
    out = apply_filter(q, m, matrices=mats)
    assert out.shape == q.shape
    assert np.allclose(out[1], apply_filter(q[1], m, 0.5, 0.5), atol=1e-14)
    # the result is a single-valued nodal field, so a second DSS average is the identity
    from laguerre_sem.assembly import dss_average

    assert np.allclose(dss_average(m, [out[0][g.conn] for g in m.groups]), out[0], atol=1e-14)
