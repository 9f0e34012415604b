"""Config parsing, sweep determinism, and command exit codes."""

import csv

import numpy as np
import pytest

from liftconv.cli import (
    ConfigError,
    ESTIMATE_FIELDS,
    RECOVER_FIELDS,
    SweepConfig,
    main,
    parse_config,
    run_sweep,
)
from liftconv.concentration import estimate_rip
from liftconv.measurement import Ensemble
from liftconv.models import ModelSpec
from liftconv.util import derive_seed, fmt_float

RIP_CONFIG = """
# two-cell isometry sweep
kind = rip
n = 8
m = 4,6
s1 = 1
s2 = 1
trials = 3
seed = 5
"""

RECOVER_CONFIG = """
kind = recover
n = 16
m = 12
s1 = 1
s2 = 1
trials = 2
seed = 5
restarts = 2
max_outer_iters = 8
"""


# -- config parsing -----------------------------------------------------------


def test_parse_config_minimal_defaults():
    cfg = parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\n")
    assert cfg.kind == "rip"
    assert cfg.n == [8] and cfg.m == [4]
    assert cfg.mu1 == [None] and cfg.mu2 == [None]
    assert cfg.trials == 100 and cfg.seed == 0
    assert cfg.phi == "gaussian" and cfg.omega_mode == "without_replacement"


def test_parse_config_grid_lists_and_comments():
    cfg = parse_config(RIP_CONFIG)
    assert cfg.m == [4, 6]
    assert cfg.trials == 3


def test_parse_config_mu_none_token():
    cfg = parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\nmu1=none,2.0\n")
    assert cfg.mu1 == [None, 2.0]


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\ncolor=blue\n")


def test_parse_config_rejects_key_for_wrong_kind():
    with pytest.raises(ConfigError, match="does not apply"):
        parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\ndiagonal=true\n")


def test_parse_config_requires_core_keys():
    with pytest.raises(ConfigError, match="missing required key"):
        parse_config("kind=rip\nn=8\nm=4\ns1=1\n")
    with pytest.raises(ConfigError, match="kind"):
        parse_config("n=8\nm=4\ns1=1\ns2=1\n")


def test_parse_config_rejects_bad_values():
    with pytest.raises(ConfigError, match="bad value"):
        parse_config("kind=rip\nn=eight\nm=4\ns1=1\ns2=1\n")
    with pytest.raises(ConfigError, match="expected key=value"):
        parse_config("kind=rip\nn 8\nm=4\ns1=1\ns2=1\n")


def test_parse_config_overrides_win():
    cfg = parse_config(RIP_CONFIG, overrides=["trials=9", "seed=77"])
    assert cfg.trials == 9 and cfg.seed == 77


def test_parse_config_validates_cells():
    with pytest.raises(ConfigError, match="m > n"):
        parse_config("kind=rip\nn=4\nm=8\ns1=1\ns2=1\n")
    with pytest.raises(ConfigError, match="bad cell"):
        parse_config("kind=rip\nn=8\nm=4\ns1=9\ns2=1\n")
    with pytest.raises(ConfigError, match="enforce_flatness"):
        parse_config(
            "kind=recover\nn=8\nm=4\ns1=1\ns2=1\nenforce_flatness=true\n")
    with pytest.raises(ConfigError, match="noise"):
        parse_config("kind=recover\nn=8\nm=4\ns1=1\ns2=1\nnoise=-0.5\n")
    with pytest.raises(ConfigError, match="trials"):
        parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\ntrials=0\n")


def test_cells_enumeration_order():
    cfg = parse_config("kind=rip\nn=8\nm=4,6\ns1=1,2\ns2=1\n")
    coords = [(c["m"], c["s1"]) for c in cfg.cells()]
    assert coords == [(4, 1), (4, 2), (6, 1), (6, 2)]


def test_noise_axis_applies_only_to_recovery():
    est = parse_config("kind=rip\nn=8\nm=4\ns1=1\ns2=1\n")
    assert [c["noise"] for c in est.cells()] == [None]
    rec = parse_config(
        "kind=recover\nn=8\nm=4\ns1=1\ns2=1\nnoise=0.0,0.1\n")
    assert [c["noise"] for c in rec.cells()] == [0.0, 0.1]


def test_cell_seed_depends_on_coordinates():
    cfg = parse_config(RIP_CONFIG)
    cells = cfg.cells()
    assert cfg.cell_seed(cells[0]) != cfg.cell_seed(cells[1])
    assert cfg.cell_seed(cells[0]) == cfg.cell_seed(dict(cells[0]))


# -- sweep execution ----------------------------------------------------------


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_rip_sweep_layout_and_replayability(tmp_path):
    out = tmp_path / "rip.csv"
    cfg = parse_config(RIP_CONFIG)
    assert run_sweep(cfg, str(out)) == 2

    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert list(rows[0]) == list(ESTIMATE_FIELDS)

    # a row carries enough to replay its cell in isolation
    row = rows[1]
    seed = int(row["seed"])
    assert seed == cfg.cell_seed(cfg.cells()[1])
    ens = Ensemble.generate(8, 6, seed=derive_seed(seed, "ensemble"))
    rep = estimate_rip(ens, ModelSpec(8, 1, side="left"),
                       ModelSpec(8, 1, side="right"), 3, seed=seed)
    assert row["delta_hat"] == fmt_float(rep.delta_hat)


def test_sweep_meta_sidecar(tmp_path):
    out = tmp_path / "rip.csv"
    run_sweep(parse_config(RIP_CONFIG), str(out))
    meta = dict(line.split("=", 1)
                for line in _read(str(out) + ".meta").decode().splitlines())
    assert meta["kind"] == "rip" and meta["cells"] == "2"
    assert meta["m"] == "4,6" and "version" in meta
    assert "workers" not in meta


def test_sweep_reruns_are_byte_identical(tmp_path):
    cfg = parse_config(RIP_CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_sweep(cfg, str(a))
    run_sweep(cfg, str(b))
    assert _read(a) == _read(b)
    assert _read(str(a) + ".meta") == _read(str(b) + ".meta")


def test_sweep_bytes_do_not_depend_on_worker_count(tmp_path):
    cfg = parse_config(RIP_CONFIG)
    one, two = tmp_path / "w1.csv", tmp_path / "w2.csv"
    run_sweep(cfg, str(one), workers=1)
    run_sweep(cfg, str(two), workers=2)
    assert _read(one) == _read(two)


def test_recover_sweep_fields(tmp_path):
    out = tmp_path / "rec.csv"
    run_sweep(parse_config(RECOVER_CONFIG), str(out))
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert list(rows[0]) == list(RECOVER_FIELDS)
    assert 0.0 <= float(rows[0]["success_rate"]) <= 1.0
    assert rows[0]["noise"] == "0.0"


# -- command line entry ---------------------------------------------------------


def test_cli_rip_estimate_prints_report(tmp_path, capsys):
    csv_path = tmp_path / "one.csv"
    code = main(["rip-estimate", "--n", "8", "--m", "4", "--s1", "1",
                 "--s2", "1", "--trials", "3", "--seed", "4",
                 "--csv", str(csv_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "delta_hat=" in out and "wall_time=" in out
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["kind"] == "rip"


def test_cli_recover_roundtrip(capsys):
    code = main(["recover", "--n", "16", "--m", "12", "--s1", "1",
                 "--s2", "1", "--seed", "3", "--restarts", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "rel_error=" in out and "noise_ratio=" in out


def test_cli_isotropy_defaults_to_dense_signals(capsys):
    code = main(["isotropy", "--n", "6", "--m", "3", "--draws", "20",
                 "--seed", "2"])
    assert code == 0
    assert "rel_error=" in capsys.readouterr().out


def test_cli_bounds_table(capsys):
    code = main(["bounds", "--n", "64", "--m", "16", "--s1", "2", "--s2", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "a_star=" in out and "m_required_orthogonal=" in out


def test_cli_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_cli_sweep_with_overrides(tmp_path, capsys):
    cfg_path = tmp_path / "sweep.cfg"
    cfg_path.write_text(RIP_CONFIG)
    out = tmp_path / "out.csv"
    code = main(["sweep", "--config", str(cfg_path), "--out", str(out),
                 "--set", "trials=5"])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["trials"] == "5"


def test_cli_exit_codes():
    assert main(["rip-estimate", "--n", "8"]) == 2        # missing arguments
    assert main(["sweep", "--config", "/no/such/file", "--out", "x.csv"]) == 2
    assert main(["--help"]) == 0
    # orthogonal partners cannot exist in a one-dimensional model
    assert main(["rop-estimate", "--n", "1", "--m", "1", "--s1", "1",
                 "--s2", "1", "--trials", "1"]) == 3


def test_cli_rejects_bad_config_file(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("kind=rip\nn=8\nm=4\ns1=1\ns2=1\ncolor=blue\n")
    assert main(["sweep", "--config", str(cfg_path),
                 "--out", str(tmp_path / "o.csv")]) == 2
