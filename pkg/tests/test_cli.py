import csv
import json

import numpy as np
import pytest

from scatterbound import experiments
from scatterbound.cli import main
from scatterbound.forward import SingularSystemError

SMALL = {"polarizations": ["TE"], "radii": [0.05], "contrasts": [-0.5, 0.5],
         "spacing": 0.025, "restarts": 2, "weak_duality_samples": 10}


def write_config(tmp_path, **changes):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({**SMALL, **changes}))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bound_run_and_verify(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert main(["bound", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_rows(out / "bound.csv")
    assert len(rows) == 2
    for row in rows:
        assert row["status"] == "ok"
        assert row["cert_verified"] == "true"
        assert row["weak_duality_violations"] == "0"
        assert float(row["neg_d_over_lambda"]) >= float(row["localopt_best_over_lambda"])
    meta = json.loads((out / "run.json").read_text())
    assert meta["n_rows"] == 2 and meta["config_hash"] == rows[0]["config_hash"]
    assert main(["verify", str(out)]) == 0


def test_same_config_same_bytes(tmp_path):
    cfg = write_config(tmp_path)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["bound", "--config", str(cfg), "--out", str(out)]) == 0
    assert (outs[0] / "bound.csv").read_bytes() == (outs[1] / "bound.csv").read_bytes()
    certs = sorted(p.name for p in (outs[0] / "certs").iterdir())
    assert certs
    for name in certs:
        assert (outs[0] / "certs" / name).read_bytes() == (outs[1] / "certs" / name).read_bytes()


def test_tampered_certificate_fails_verify(tmp_path):
    cfg = write_config(tmp_path, contrasts=[0.5])
    out = tmp_path / "run"
    assert main(["bound", "--config", str(cfg), "--out", str(out)]) == 0
    path = next((out / "certs").iterdir())
    data = json.loads(path.read_text())
    data["value"] = data["value"] + 1e-3
    path.write_text(json.dumps(data))
    assert main(["verify", str(out)]) == 1


def test_verify_empty_directory(tmp_path):
    assert main(["verify", str(tmp_path)]) == 1


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, restarts=0)
    assert main(["bound", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_partial_failure_exit_code(tmp_path, monkeypatch):
    real = experiments._setup

    def flaky(config, cell):
        if cell.index == 1:
            raise SingularSystemError("forced")
        return real(config, cell)

    monkeypatch.setattr(experiments, "_setup", flaky)
    cfg = write_config(tmp_path)
    out = tmp_path / "o"
    assert main(["bound", "--config", str(cfg), "--out", str(out)]) == 3
    statuses = [r["status"] for r in read_rows(out / "bound.csv")]
    assert statuses == ["ok", "singular"]


def test_dual_at_alpha_monotone(tmp_path):
    alphas = [0.0, 0.05, 0.1, 0.2, 0.4]
    cfg = write_config(tmp_path, contrasts=[1.0])
    out = tmp_path / "o"
    argv = ["dual-at-alpha", "--config", str(cfg), "--out", str(out), "--alphas"]
    assert main(argv + [str(a) for a in alphas]) == 0
    rows = read_rows(out / "dual_alpha.csv")
    assert [float(r["alpha"]) for r in rows] == alphas
    bounds = np.array([float(r["neg_d_over_lambda"]) for r in rows])
    assert np.all(np.diff(bounds) >= -1e-12 * np.abs(bounds).max())
    alpha_ub = float(rows[0]["alpha_ub"])
    for r in rows:
        assert (r["is_certified_bound"] == "true") == (float(r["alpha"]) >= alpha_ub)


def test_dual_at_alpha_loc_records_excess(tmp_path):
    cfg = write_config(tmp_path, contrasts=[0.5, 1.0])
    out = tmp_path / "o"
    assert main(["dual-at-alpha", "--config", str(cfg), "--out", str(out),
                 "--alpha-mode", "loc"]) == 0
    rows = read_rows(out / "dual_alpha.csv")
    assert len(rows) == 2
    for r in rows:
        assert r["alpha_source"] == "alpha_loc"
        assert r["exceeds_bound"] in ("true", "false")
        local, bound = float(r["localopt_best_over_lambda"]), float(r["neg_d_over_lambda"])
        if r["exceeds_bound"] == "true":
            assert local > bound
        else:
            assert local <= bound * (1 + 1e-8)


def test_alpha_and_localopt_row_counts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "o"
    assert main(["alpha", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_rows(out / "alpha.csv")
    assert len(rows) == 2
    assert all(r["loc_le_ub"] == "true" for r in rows)
    assert len(read_rows(out / "alpha_distribution.csv")) == 2 * SMALL["restarts"]
    assert main(["localopt", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_rows(out / "localopt.csv")) == 2


def test_threads_do_not_change_results(tmp_path):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["localopt", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["localopt", "--config", str(cfg), "--out", str(b), "--threads", "2"]) == 0
    assert (a / "localopt.csv").read_bytes() == (b / "localopt.csv").read_bytes()


def test_verbose_flag_before_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path, contrasts=[0.5])
    assert main(["-v", "localopt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert "localopt: 1 rows" in capsys.readouterr().out
