"""Command line entry point: ``python -m laguerre_sem <command>``.

Commands
--------
run <config>           run one case and write snapshots, manifest and diagnostics
bench <cfg> <cfg>      time a layer configuration against an extended domain
sweep helmholtz        write the (N_LGL, N_LGR) -> relative error table
list-cases             print registered case ids

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, config_hash, default_config, list_cases, load_config, merge_config
from .equations import PhysicalStateError
from .timeint import NumericalFailure

log = logging.getLogger("laguerre_sem")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _resolve(arg: str, smoke: bool) -> dict:
    """A config path, or a bare case id for the defaults."""
    if arg in list_cases() and not os.path.exists(arg):
        return merge_config({}, arg, smoke)
    return load_config(arg, smoke=smoke)


def _write_snapshot(setup, t, q, outdir: Path, fmt: list[str], index: int):
    from .mesh import write_node_csv, write_vtk

    names = setup.eq.names
    fields = {n: q[i] for i, n in enumerate(names)}
    if setup.mesh.dim == 1:
        path = outdir / f"snapshot_{index:05d}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", *names])
            order = np.argsort(setup.mesh.coords[:, 0], kind="stable")
            for i in order:
                w.writerow([f"{setup.mesh.coords[i, 0]:.17g}", *(f"{q[v, i]:.17g}" for v in range(len(names)))])
        return path
    if "vtk" in fmt:
        write_vtk(setup.mesh, outdir / f"snapshot_{index:05d}.vtk", fields, title=f"{setup.name} t={t:g}")
    if "csv" in fmt:
        write_node_csv(setup.mesh, outdir / f"snapshot_{index:05d}.csv", fields)
    return outdir


def run_case(cfg: dict, outdir: Path | None = None, workers: int = 1) -> dict:
    """Run a configured case and write its artifacts; returns the manifest."""
    from .assembly import global_mass
    from .cases import build_case, interface_check
    from .diagnostics import (advection_diffusion_exact, error_norms, mass_budget,
                              reflection_metric)

    outdir = Path(outdir or cfg["output"]["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg["case"] == "helmholtz":
        return _run_helmholtz(cfg, outdir)
    setup = build_case(cfg, timing=True)
    every = int(cfg["output"].get("snapshot_every") or 0) or None
    hooks = [interface_check(setup.mesh)] if setup.mesh.semi_groups else []
    t0 = time.perf_counter()
    res = setup.run(hooks=hooks, snapshot_every=every)
    wall = time.perf_counter() - t0
    fmt = list(cfg["output"].get("formats", ["csv"]))
    for i, (t, q) in enumerate(res.snapshots):
        _write_snapshot(setup, t, q, outdir, fmt, i)

    diag = {"t_final": res.t, "nsteps": res.nsteps}
    name = setup.name
    if name == "wave1d":
        diag["reflection_metric"] = reflection_metric(res.q[0], setup.q_init[0], setup.finite_nodes)
    elif name == "advdiff":
        x, z = setup.mesh.coords.T
        p = cfg["physics"]
        ref = advection_diffusion_exact(x, z, res.t, p["u"], p["v"], p["nu"], p["xc"], p["zc"])
        diag["L2"], diag["Linf"] = error_norms(res.q[0], ref, setup.rhs.op.mass)
    elif name in ("bubble", "lhm", "schar"):
        M = global_mass(setup.mesh)
        bg = setup.meta["background"]
        diag["relative_mass_loss"] = mass_budget(res.q[0], bg.rho, M,
                                                 reference=float(np.sum(M * (bg.rho + setup.q_init[0])))).relative_loss
        _, w, _ = setup.eq.primitive(res.q)
        diag["max_abs_w_finite"] = float(np.abs(w[setup.finite_nodes]).max())
    with open(outdir / "diagnostics.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["quantity", "value"])
        for k, v in diag.items():
            wr.writerow([k, f"{v:.17g}" if isinstance(v, float) else v])
    timers = setup.rhs.timers
    manifest = {
        "case": name,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "workers": workers,
        "layer_end": setup.meta.get("layer_end"),
        "n_global": setup.mesh.nglobal,
        "n_elements": setup.mesh.n_elements,
        "wall_seconds": wall,
        "wall_per_step": res.wall_per_step,
        "rhs_seconds": timers,
        "python": platform.python_version(),
        "diagnostics": diag,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return manifest


def _run_helmholtz(cfg, outdir: Path) -> dict:
    from .helmholtz import HelmholtzProblem, solve_helmholtz

    m, p = cfg["mesh"], cfg["physics"]
    prob = HelmholtzProblem(float(p["alpha"]), float(p["L"]), float(m["x_len"]), int(m["nx"]), int(m["ny"]),
                            float(cfg["layer"]["lam"]))
    _, _, err = solve_helmholtz(int(m["order"]), int(cfg["layer"]["order"]), prob)
    manifest = {"case": "helmholtz", "config": cfg, "config_hash": config_hash(cfg),
                "relative_L2_error": err}
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
    return manifest


def sweep_helmholtz(outdir: Path, smoke: bool = False) -> Path:
    from .helmholtz import HelmholtzProblem, helmholtz_sweep

    cfg = default_config("helmholtz", smoke)
    m, p, s = cfg["mesh"], cfg["physics"], cfg["sweep"]
    prob = HelmholtzProblem(float(p["alpha"]), float(p["L"]), float(m["x_len"]), int(m["nx"]), int(m["ny"]),
                            float(cfg["layer"]["lam"]))
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "helmholtz_sweep.csv"
    helmholtz_sweep(s["lgl_orders"], s["lgr_orders"], prob, path)
    return path


def bench(cfgs: list[dict], outdir: Path, nsteps: int = 200, repeats: int = 3) -> Path:
    """Time each configuration for ``nsteps`` steps and write a table CSV."""
    from .cases import build_case
    from .diagnostics import timing_reports, write_timing_csv

    measures, labels, extents, nel = [], [], [], []
    for cfg in cfgs:
        setup = build_case(cfg, timing=True)
        setup.run(nsteps=5)  # compile and warm caches

        def measure(setup=setup):
            setup.rhs.op.reset_timers()
            r = setup.run(nsteps=nsteps)
            return r.wall_per_step, setup.rhs.timers["finite"], setup.rhs.timers["laguerre"]

        measures.append(measure)
        layered = bool(setup.mesh.semi_groups)
        labels.append(f"semi-infinite order {cfg['layer']['order']}" if layered else "extended finite domain")
        extents.append(max(abs(v) for v in setup.meta["layer_end"].values()) if setup.meta.get("layer_end") else 0.0)
        nel.append(sum(g.nel for g in setup.mesh.finite_groups))
    reports = timing_reports(measures, labels, repeats, extents, nel)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "bench.csv"
    write_timing_csv(reports, path)
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="laguerre-sem", description=__doc__.split("\n")[0])
    ap.add_argument("--workers", type=int, default=1, help="worker count recorded in the manifest")
    ap.add_argument("--output", type=Path, default=None, help="output directory")
    ap.add_argument("--smoke", action="store_true", help="use the coarsened smoke preset")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a case from a YAML config or a case id")
    r.add_argument("config")
    b = sub.add_parser("bench", help="time two or more configurations")
    b.add_argument("configs", nargs="+")
    b.add_argument("--steps", type=int, default=200)
    b.add_argument("--repeats", type=int, default=3)
    s = sub.add_parser("sweep", help="parameter sweeps")
    s.add_argument("target", choices=["helmholtz"])
    sub.add_parser("list-cases", help="list registered cases")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "list-cases":
            for c in list_cases():
                print(c)
            return EXIT_OK
        if args.command == "run":
            cfg = _resolve(args.config, args.smoke)
            out = args.output or Path(cfg["output"]["dir"])
            man = run_case(cfg, out, args.workers)
            print(json.dumps(man.get("diagnostics", {k: man[k] for k in man if k == "relative_L2_error"}),
                             default=str))
            return EXIT_OK
        if args.command == "bench":
            cfgs = [_resolve(c, args.smoke) for c in args.configs]
            path = bench(cfgs, args.output or Path("output"), args.steps, args.repeats)
            print(path.read_text(), end="")
            return EXIT_OK
        if args.command == "sweep":
            path = sweep_helmholtz(args.output or Path("output"), args.smoke)
            print(path.read_text(), end="")
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, PhysicalStateError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
