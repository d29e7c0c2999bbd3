"""Error norms, mass budgets, reflection and RMSE metrics, and timing reports."""
from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass

import numpy as np

__all__ = [
    "error_norms",
    "MassBudget",
    "mass_budget",
    "reflection_metric",
    "rmse_cross_run",
    "advection_diffusion_exact",
    "TimingReport",
    "timing_reports",
    "write_timing_csv",
    "dominant_wavelength",
]


def error_norms(u, ref, mass, relative: bool = False, nodes=None) -> tuple[float, float]:
    """Quadrature L2 and max-norm errors.

    ``ref`` may be an array or a callable of no arguments returning one.
    """
    ref = ref() if callable(ref) else np.asarray(ref, dtype=float)
    u = np.asarray(u, dtype=float)
    mass = np.asarray(mass, dtype=float)
    if nodes is not None:
        u, ref, mass = u[nodes], ref[nodes], mass[nodes]
    if u.shape != ref.shape or u.shape != mass.shape:
        raise ValueError("fields and mass must share one node set")
    d = u - ref
    l2 = np.sqrt(np.sum(mass * d * d))
    if relative:
        l2 /= np.sqrt(np.sum(mass * ref * ref))
    return float(l2), float(np.max(np.abs(d))) if d.size else 0.0


def advection_diffusion_exact(x, z, t, u=0.5, v=1.0, nu=0.1, xc=0.0, zc=8.0):
    """Free-space evolution of exp(-r^2) under constant advection and diffusion."""
    s = 1.0 + 4.0 * nu * t
    r2 = (np.asarray(x) - xc - u * t) ** 2 + (np.asarray(z) - zc - v * t) ** 2
    return np.exp(-r2 / s) / s


@dataclass
class MassBudget:
    m0: float
    m: float

    @property
    def relative_loss(self) -> float:
        return abs(self.m - self.m0) / abs(self.m0)


def mass_budget(rho_perturbation, rho0, mass, reference: float | None = None) -> MassBudget:
    """Quadrature mass sum(M (rho0 + rho')) relative to ``reference`` (default: rho' = 0)."""
    mass = np.asarray(mass, dtype=float)
    total = float(np.sum(mass * rho0) + np.sum(mass * rho_perturbation))
    m0 = float(np.sum(mass * rho0)) if reference is None else float(reference)
    return MassBudget(m0, total)


def reflection_metric(u_final, u_initial, finite_nodes) -> float:
    """max |u| over the finite domain at the end, over the initial peak."""
    return float(np.max(np.abs(np.asarray(u_final)[finite_nodes])) /
                 np.max(np.abs(np.asarray(u_initial))))


def rmse_cross_run(a, b, nodes=None, coords_a=None, coords_b=None) -> np.ndarray:
    """Per-variable RMSE between two runs over a shared (finite-domain) node set."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if coords_a is not None and coords_b is not None:
        ca = np.asarray(coords_a) if nodes is None else np.asarray(coords_a)[nodes]
        cb = np.asarray(coords_b) if nodes is None else np.asarray(coords_b)[nodes]
        if ca.shape != cb.shape or not np.allclose(ca, cb, rtol=0, atol=1e-9):
            raise ValueError("runs do not share a grid")
    if nodes is not None:
        a, b = a[:, nodes], b[:, nodes]
    if a.shape != b.shape:
        raise ValueError("runs do not share a grid")
    return np.sqrt(np.mean((a - b) ** 2, axis=1))


def dominant_wavelength(z, w, lam_min: float, lam_max: float, n: int = 2000) -> float:
    """Wavelength of the best least-squares sinusoid fit a cos(kz) + b sin(kz) + c."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    best, best_lam = np.inf, np.nan
    for lam in np.linspace(lam_min, lam_max, n):
        k = 2 * np.pi / lam
        A = np.stack([np.cos(k * z), np.sin(k * z), np.ones_like(z)], axis=1)
        coef, *_ = np.linalg.lstsq(A, w, rcond=None)
        r = np.sum((A @ coef - w) ** 2)
        if r < best:
            best, best_lam = r, lam
    return float(best_lam)


@dataclass
class TimingReport:
    label: str
    wall_per_step: float
    T_star: float
    pct_finite: float
    pct_laguerre: float
    extent: float = float("nan")
    n_elements: int = 0


def _median_run(measure, repeats):
    samples = [measure() for _ in range(repeats)]
    per_step = statistics.median(s[0] for s in samples)
    fin = statistics.median(s[1] for s in samples)
    lag = statistics.median(s[2] for s in samples)
    return per_step, fin, lag


def timing_reports(measures, labels, repeats: int = 3, extents=None, n_elements=None) -> list[TimingReport]:
    """Median-of-``repeats`` timings, T* normalized to the first entry.

    Each ``measure()`` returns ``(wall_per_step, finite_seconds, laguerre_seconds)``.
    """
    out = []
    base = None
    for i, (m, lab) in enumerate(zip(measures, labels)):
        per_step, fin, lag = _median_run(m, repeats)
        base = per_step if base is None else base
        tot = fin + lag
        pf = 100.0 * fin / tot if tot > 0 else 100.0
        out.append(TimingReport(lab, per_step, per_step / base, pf, 100.0 - pf if lag > 0 else 0.0,
                                extents[i] if extents else float("nan"),
                                n_elements[i] if n_elements else 0))
    return out


def write_timing_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["layer_type", "T_star", "extent_end", "T_star_finite_pct", "T_star_laguerre_pct",
                    "n_elements", "wall_per_step_s"])
        for r in reports:
            w.writerow([r.label, f"{r.T_star:.6g}", f"{r.extent:.6g}", f"{r.pct_finite:.4g}",
                        f"{r.pct_laguerre:.4g}" if r.pct_laguerre else "N/A", r.n_elements,
                        f"{r.wall_per_step:.6g}"])
