"""Explicit strong-stability-preserving Runge-Kutta integration."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "IntegratorSpec",
    "NumericalFailure",
    "ssprk33_step",
    "ssprk54_step",
    "step",
    "RunResult",
    "run",
]

SCHEMES = ("ssprk33", "ssprk54")

# Five-stage fourth-order SSP scheme in Shu-Osher form (Spiteri & Ruuth).
_A54 = (
    (1.0,),
    (0.444370493651235, 0.555629506348765),
    (0.620101851488403, 0.0, 0.379898148511597),
    (0.178079954393132, 0.0, 0.0, 0.821920045606868),
    (0.0, 0.0, 0.517231671970585, 0.096059710526147, 0.386708617503269),
)
_B54 = (
    (0.391752226571890,),
    (0.0, 0.368410593050371),
    (0.0, 0.0, 0.251891774271694),
    (0.0, 0.0, 0.0, 0.544974750228521),
    (0.0, 0.0, 0.0, 0.063692468666290, 0.226007483236906),
)
_C54 = (0.0, 0.391752226571890, 0.586079689311540, 0.474542363121400, 0.935010630967653)


class NumericalFailure(RuntimeError):
    """Non-finite values appeared during time integration."""


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str = "ssprk33"
    dt: float = 1e-3
    t_end: float = 0.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


def _post(post, q, t):
    if post is not None:
        post(q, t)
    return q


def ssprk33_step(q, t, dt, rhs, post=None):
    q1 = q + dt * rhs(q, t)
    _post(post, q1, t + dt)
    q2 = 0.75 * q + 0.25 * (q1 + dt * rhs(q1, t + dt))
    _post(post, q2, t + 0.5 * dt)
    out = q / 3.0 + (2.0 / 3.0) * (q2 + dt * rhs(q2, t + 0.5 * dt))
    return _post(post, out, t + dt)


def ssprk54_step(q, t, dt, rhs, post=None):
    stages = [q]
    tend = []
    for s in range(5):
        tend.append(rhs(stages[-1], t + _C54[s] * dt))
        a, b = _A54[s], _B54[s]
        new = np.zeros_like(q)
        for k in range(len(a)):
            if a[k]:
                new += a[k] * stages[k]
            if b[k]:
                new += (b[k] * dt) * tend[k]
        tn = t + (_C54[s + 1] * dt if s < 4 else dt)
        stages.append(_post(post, new, tn))
    return stages[-1]


def step(q, t, dt, rhs, scheme: str = "ssprk33", post=None):
    if scheme == "ssprk33":
        return ssprk33_step(q, t, dt, rhs, post)
    if scheme == "ssprk54":
        return ssprk54_step(q, t, dt, rhs, post)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass
class RunResult:
    q: np.ndarray
    t: float
    nsteps: int
    snapshots: list = field(default_factory=list)
    wall: float = 0.0

    @property
    def wall_per_step(self) -> float:
        return self.wall / max(self.nsteps, 1)


def run(q0: np.ndarray, rhs: Callable, spec: IntegratorSpec, post: Callable | None = None,
        filt: Callable | None = None, snapshot_every: int | None = None,
        hooks=(), check_every: int = 1, nsteps: int | None = None) -> RunResult:
    """Advance ``q0`` to ``spec.t_end`` (or ``nsteps`` steps).

    ``post(q, t)`` imposes boundary conditions after every stage, ``filt(q)``
    is applied once per completed step, and every hook is called as
    ``hook(step_index, t, q)`` after each step.  Snapshots ``(t, q.copy())``
    are kept at the start and then every ``snapshot_every`` steps.
    """
    q = np.array(q0, dtype=float)
    if post is not None:
        post(q, 0.0)
    n = spec.nsteps if nsteps is None else int(nsteps)
    snaps = [(0.0, q.copy())]
    t = 0.0
    start = time.perf_counter()
    for k in range(1, n + 1):
        q = step(q, t, spec.dt, rhs, spec.scheme, post)
        t = k * spec.dt
        if filt is not None:
            q = filt(q)
            if post is not None:
                post(q, t)
        if check_every and k % check_every == 0 and not np.isfinite(q).all():
            raise NumericalFailure(f"non-finite state at step {k}, t = {t:g} s")
        for h in hooks:
            h(k, t, q)
        if snapshot_every and k % snapshot_every == 0:
            snaps.append((t, q.copy()))
    wall = time.perf_counter() - start
    if snapshot_every is None or (n and n % snapshot_every):
        if n:
            snaps.append((t, q.copy()))
    return RunResult(q, t, n, snaps, wall)
