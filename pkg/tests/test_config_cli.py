import json
import logging
import time

import numpy as np
import pytest

from laguerre_sem.cases import build_case, interface_check, wavetrain_forcing
from laguerre_sem.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main, run_case
from laguerre_sem.config import (
    CASE_DEFAULTS,
    ConfigError,
    config_hash,
    default_config,
    list_cases,
    load_config,
    merge_config,
)


def test_registry_lists_all_cases():
    assert list_cases() == ["wave1d", "wavetrain", "advdiff", "helmholtz", "bubble", "lhm", "schar"]


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    cfg = load_config(p, case="wave1d")
    assert cfg["mesh"]["nx"] == 50 and cfg["mesh"]["order"] == 6
    assert cfg["layer"]["lam"] == 0.05 and cfg["integrator"]["dt"] == 0.001


def test_override_layer_order_logs_end_point(tmp_path, caplog):
    p = tmp_path / "c.yaml"
    p.write_text("case: wave1d\nlayer:\n  order: 20\n")
    cfg = load_config(p)
    assert cfg["layer"]["order"] == 20
    with caplog.at_level(logging.INFO, logger="laguerre_sem"):
        setup = build_case(cfg)
    assert setup.mesh.layer_end["right"] < 11.63
    assert any("ends at" in r.getMessage() for r in caplog.records)


@pytest.mark.parametrize("text, key", [
    ("case: wave1d\nintegrator:\n  dt: -0.1\n", "integrator.dt"),
    ("case: wave1d\nmesh:\n  bogus: 1\n", "mesh.bogus"),
    ("case: nowhere\n", "case"),
    ("mesh:\n  nx: 3\n", "case"),
    ("case: bubble\nfilter:\n  cutoff: 1.5\n", "filter.cutoff"),
    ("case: lhm\nlayer:\n  sides: [bottom]\n", "layer.sides"),
    ("case: wave1d\nintegrator:\n  scheme: euler\n", "integrator.scheme"),
])
def test_invalid_configs_name_the_key(tmp_path, text, key):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(p)


def test_parse_error_and_missing_file(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text("case: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_config_hash_is_stable():
    a, b = default_config("bubble"), default_config("bubble")
    assert config_hash(a) == config_hash(b)
    b["integrator"]["dt"] = 0.01
    assert config_hash(a) != config_hash(b)


def test_case_default_values():
    assert CASE_DEFAULTS["bubble"]["physics"]["kappa"] == 2 * CASE_DEFAULTS["bubble"]["physics"]["nu"]
    assert CASE_DEFAULTS["lhm"]["filter"]["strength"] == 0.05
    assert merge_config({}, "advdiff")["integrator"]["dt"] == 0.0005
    assert wavetrain_forcing(5000.0 / 120) == pytest.approx(0.025)


def test_smoke_presets_run_quickly_and_keep_interfaces():
    start = time.perf_counter()
    for case in list_cases():
        cfg = default_config(case, smoke=True)
        if case == "helmholtz":
            continue
        setup = build_case(cfg)
        hook = interface_check(setup.mesh)
        assert hook.n_interface > 0
        res = setup.run(hooks=[hook])
        assert np.all(np.isfinite(res.q))
    assert time.perf_counter() - start < 60.0


def test_interface_hook_detects_mismatch():
    setup = build_case(default_config("advdiff", smoke=True))
    hook = interface_check(setup.mesh)
    assert hook.n_interface == setup.mesh.interface["top"].size
    q = setup.q_init.copy()
    hook(0, 0.0, q)
    # point one interface node of the layer at a fresh global id holding another value
    sg = setup.mesh.semi_groups[0]
    node = setup.mesh.interface["top"][1]
    sg.conn[sg.conn == node] = setup.mesh.nglobal
    q = np.concatenate([q, q[:, node:node + 1] + 1.0], axis=1)
    with pytest.raises(AssertionError):
        interface_check(setup.mesh)(1, 0.0, q)


def test_cli_list_and_run(tmp_path, capsys):
    assert main(["list-cases"]) == EXIT_OK
    assert "bubble" in capsys.readouterr().out
    out = tmp_path / "w"
    assert main(["--smoke", "--output", str(out), "run", "wave1d"]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["case"] == "wave1d" and man["workers"] == 1 and len(man["config_hash"]) == 64
    assert (out / "diagnostics.csv").read_text().startswith("quantity,value")
    snap = sorted(out.glob("snapshot_*.csv"))
    assert snap and snap[0].read_text().startswith("x,u,v")


def test_cli_run_2d_writes_vtk(tmp_path):
    cfg = tmp_path / "b.yaml"
    cfg.write_text("case: bubble\noutput:\n  formats: [vtk, csv]\n  snapshot_every: 10\n")
    out = tmp_path / "b"
    assert main(["--smoke", "--output", str(out), "run", str(cfg)]) == EXIT_OK
    assert list(out.glob("*.vtk")) and list(out.glob("*.csv"))
    man = json.loads((out / "manifest.json").read_text())
    assert "relative_mass_loss" in man["diagnostics"]


def test_cli_run_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--smoke", "--output", str(a), "run", "advdiff"]) == EXIT_OK
    assert main(["--smoke", "--output", str(b), "run", "advdiff"]) == EXIT_OK
    for f in sorted(a.glob("snapshot_*.csv")):
        assert f.read_bytes() == (b / f.name).read_bytes()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("case: wave1d\nintegrator:\n  dt: -1\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert "integrator.dt" in capsys.readouterr().err
    assert main(["--workers", "0", "list-cases"]) == EXIT_CONFIG
    unstable = tmp_path / "unstable.yaml"
    unstable.write_text("case: wave1d\nintegrator:\n  dt: 0.5\n  t_end: 200.0\n")
    assert main(["--smoke", "--output", str(tmp_path / "u"), "run", str(unstable)]) == EXIT_NUMERICAL


def test_cli_sweep_and_bench(tmp_path, capsys):
    assert main(["--smoke", "--output", str(tmp_path), "sweep", "helmholtz"]) == EXIT_OK
    rows = (tmp_path / "helmholtz_sweep.csv").read_text().strip().splitlines()
    assert rows[0] == "N_LGL,N_LGR,rel_L2_error" and len(rows) == 5
    ext = tmp_path / "ext.yaml"
    ext.write_text("case: wave1d\nmesh:\n  extend_to: 4.0\n")
    assert main(["--smoke", "--output", str(tmp_path), "bench", "wave1d", str(ext), "--steps", "5",
                 "--repeats", "3"]) == EXIT_OK
    table = (tmp_path / "bench.csv").read_text().strip().splitlines()
    assert len(table) == 3 and table[1].split(",")[1] == "1"


def test_run_case_helmholtz(tmp_path):
    cfg = default_config("helmholtz", smoke=True)
    man = run_case(cfg, tmp_path)
    assert man["relative_L2_error"] < 1e-2
