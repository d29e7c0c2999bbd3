import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laguerre_sem.diagnostics import (
    TimingReport,
    advection_diffusion_exact,
    dominant_wavelength,
    error_norms,
    mass_budget,
    reflection_metric,
    rmse_cross_run,
    timing_reports,
    write_timing_csv,
)


def test_error_norm_examples():
    u = np.array([1.0, 2.0, 3.0])
    M = np.array([0.25, 0.5, 0.25])
    assert error_norms(u, u, M) == (0.0, 0.0)
    assert error_norms(u + 0.3, u, M) == pytest.approx((0.3, 0.3))
    assert error_norms(u, lambda: u - 2.0, M) == pytest.approx((2.0, 2.0))
    rel, _ = error_norms(2 * u, u, M, relative=True)
    assert rel == pytest.approx(1.0)
    assert error_norms(u, u * 0, M, nodes=[0])[1] == 1.0
    with pytest.raises(ValueError):
        error_norms(u, u[:2], M)


@given(st.floats(-10, 10))
def test_error_norms_translation_invariant(c):
    rng = np.random.default_rng(0)
    u, r = rng.standard_normal((2, 20))
    M = rng.uniform(0.1, 1, 20)
    assert np.allclose(error_norms(u + c, r + c, M), error_norms(u, r, M), atol=1e-12)


def test_advection_diffusion_oracle():
    # independent check: the Gaussian solves q_t + u q_x + v q_z = nu (q_xx + q_zz)
    u, v, nu = 0.5, 1.0, 0.1
    x, z, t, h = 0.7, 9.1, 1.3, 1e-4
    f = lambda x, z, t: advection_diffusion_exact(x, z, t, u, v, nu)
    qt = (f(x, z, t + h) - f(x, z, t - h)) / (2 * h)
    qx = (f(x + h, z, t) - f(x - h, z, t)) / (2 * h)
    qz = (f(x, z + h, t) - f(x, z - h, t)) / (2 * h)
    lap = (f(x + h, z, t) + f(x - h, z, t) + f(x, z + h, t) + f(x, z - h, t) - 4 * f(x, z, t)) / h**2
    assert qt + u * qx + v * qz == pytest.approx(nu * lap, abs=1e-6)
    assert advection_diffusion_exact(0.0, 8.0, 0.0) == 1.0
    # peak travels to (xc + 0.5 t, zc + t)
    assert advection_diffusion_exact(2.0, 12.0, 4.0) == pytest.approx(1 / 2.6)


def test_mass_budget():
    M = np.array([1.0, 2.0, 1.0])
    rho0 = np.array([1.2, 1.1, 1.0])
    b = mass_budget(np.zeros(3), rho0, M)
    assert b.relative_loss == 0.0 and b.m0 == pytest.approx(4.4)
    b = mass_budget(np.array([0.0, 0.011, 0.0]), rho0, M, reference=4.4)
    assert b.relative_loss == pytest.approx(0.022 / 4.4)


def test_reflection_metric():
    init = np.array([0.0, 1.0, 0.5, 0.0])
    assert reflection_metric(init, init, np.arange(4)) == 1.0
    assert reflection_metric(np.array([0.0, 0.01, 0.0, 5.0]), init, np.arange(3)) == pytest.approx(0.01)


def test_rmse_cross_run():
    a = np.arange(12.0).reshape(2, 6)
    assert np.all(rmse_cross_run(a, a) == 0)
    b = a + np.array([[1.0], [2.0]])
    assert np.allclose(rmse_cross_run(a, b, nodes=[0, 2]), [1.0, 2.0])
    c = np.zeros((6, 2))
    with pytest.raises(ValueError):
        rmse_cross_run(a, b, coords_a=c, coords_b=c + 1)
    with pytest.raises(ValueError):
        rmse_cross_run(a, b[:, :4])


def test_dominant_wavelength():
    z = np.linspace(0, 15000, 200)
    w = 0.3 * np.sin(2 * np.pi * z / 6400 + 0.4) + 0.01
    assert dominant_wavelength(z, w, 3000, 12000) == pytest.approx(6400, rel=0.01)


def test_timing_reports(tmp_path):
    a = iter([(2.0, 0.9, 0.1)] * 3)
    b = iter([(5.0, 1.0, 0.0)] * 3)
    reps = timing_reports([lambda: next(a), lambda: next(b)], ["layer", "extended"], 3, [11.63, 11.63], [50, 146])
    assert reps[0].T_star == 1.0 and reps[1].T_star == 2.5
    assert reps[0].pct_finite + reps[0].pct_laguerre == pytest.approx(100.0)
    assert reps[1].pct_finite == 100.0 and reps[1].pct_laguerre == 0.0
    path = tmp_path / "t.csv"
    write_timing_csv(reps, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].startswith("layer_type,T_star,extent_end,T_star_finite_pct,T_star_laguerre_pct")
    assert rows[2].split(",")[4] == "N/A"
    same = iter([(1.0, 1.0, 0.0)] * 6)
    r = timing_reports([lambda: next(same)] * 2, ["a", "b"], 3)
    assert r[1].T_star == 1.0 and isinstance(r[0], TimingReport)
