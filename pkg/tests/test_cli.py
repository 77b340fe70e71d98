import io
import json
import math

import numpy as np
import pytest

from bvmbounds import cli
from bvmbounds.errors import ConfigError
from bvmbounds.examples import preset
from bvmbounds.harness import CSV_HEADER, read_sweep_csv, rows_to_csv, sweep


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_preset_reports_exact_wasserstein(capsys):
    code, out, _ = run(["bound", "--preset", "fig1c-normal", "--n", "100", "--seed", "7", "--format", "json"], capsys)
    assert code == 0
    recs = json.loads(out)
    wass = [r["value"] for r in recs if r["theorem"] == "normal-precision-closed" and r["metric"] == "Wass"]
    assert wass == [pytest.approx(math.sqrt(2) / math.sqrt(101), rel=1e-12)]


def test_bound_from_data_file(tmp_path, capsys):
    path = tmp_path / "x.csv"
    path.write_text("1\n0\n0\n1\n1\n0\n0\n0\n1\n0\n")
    code, out, _ = run(["bound", "--model", "bernoulli-beta", "--tau", "2,3", "--data-file", str(path),
                        "--format", "csv"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("theorem,metric,standardization,n")
    assert all(",10," in ln for ln in lines[1:])


def test_multinomial_data_file_accepts_category_indices(tmp_path, capsys):
    path = tmp_path / "cats.csv"
    path.write_text("\n".join(str(c) for c in [0, 1, 2, 2, 2, 1, 0, 2, 2, 2] * 5))
    code, out, _ = run(["bound", "--preset", "fig1d-multinomial", "--data-file", str(path),
                        "--theorems", "mode-tv-wass"], capsys)
    assert code == 0 and "mode-tv-wass" in out


def test_invalid_hyperparameters_exit_2(capsys):
    code, _, err = run(["bound", "--model", "normal-meanvar-conjugate", "--tau", "1,1,3,1", "--n", "50"], capsys)
    assert code == 2
    assert "4*tau4*tau2 > tau3^2" in err


def test_failed_assumption_exits_2(capsys):
    code, _, err = run(["bound", "--preset", "bernoulli-hyperbolic", "--n", "100", "--theorems", "mle-full"], capsys)
    assert code == 2 and "A3" in err


def test_missing_data_source_is_config_error(capsys):
    code, _, err = run(["bound", "--preset", "fig1b-poisson"], capsys)
    assert code == 2 and "--n" in err


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# poisson run\npreset = fig1b-poisson\nn = 40\nseed = 3\nformat = json\ntheorems = closed\n")
    code, out, _ = run(["bound", "--config", str(cfg), "--n", "60"], capsys)
    assert code == 0
    assert {r["n"] for r in json.loads(out)} == {60}


def test_config_file_errors_name_the_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("preset = fig1b-poisson\nseed = seven\n")
    code, _, err = run(["bound", "--config", str(cfg), "--n", "10"], capsys)
    assert code == 2 and "bad.cfg:2" in err and "seed" in err
    cfg.write_text("colour = blue\n")
    code, _, err = run(["bound", "--config", str(cfg), "--n", "10"], capsys)
    assert code == 2 and "bad.cfg:1" in err


def test_seed_falls_back_to_environment(monkeypatch):
    monkeypatch.setenv("BVM_SEED", "11")
    assert cli.RunConfig().resolved_seed() == 11
    assert cli.RunConfig(seed=4).resolved_seed() == 4
    monkeypatch.setenv("BVM_SEED", "x")
    with pytest.raises(ConfigError):
        cli.RunConfig().resolved_seed()


def test_grid_parsing():
    assert cli.parse_grid("50:200:50") == (50, 100, 150, 200)
    assert cli.RunConfig(n_grid=(300, 100)).n_grid == (100, 300)
    with pytest.raises(ConfigError):
        cli.parse_grid("a,b")


def test_simulate_csv_schema_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["simulate", "--preset", "fig1a-bernoulli", "--seed", "7", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    recs = read_sweep_csv(text)
    assert len(recs) == 10
    assert all(np.isfinite(r["rel_err"]) and r["rel_err"] >= 0 for r in recs)


def test_simulate_single_point_with_plot(tmp_path):
    svg = tmp_path / "c.svg"
    out = tmp_path / "c.csv"
    assert cli.main(["simulate", "--preset", "fig1c-normal", "--n-grid", "50", "--seed", "7",
                     "--out", str(out), "--plot", str(svg)]) == 0
    recs = read_sweep_csv(out.read_text())
    assert {r["n"] for r in recs} == {50}
    wass = [r for r in recs if r["theorem"] == "normal-precision-closed" and r["metric"] == "Wass"]
    assert wass[0]["rel_err"] < 1e-6
    assert svg.read_text().startswith("<svg")


def test_plot_rerenders_csv(tmp_path, capsys):
    out = tmp_path / "p.csv"
    cli.main(["simulate", "--preset", "fig1b-poisson", "--n-grid", "100,200", "--out", str(out)])
    code, svg, _ = run(["plot", str(out), "--log-y"], capsys)
    assert code == 0 and svg.count("<polyline") == 2


def test_sweep_failure_writes_trailer(monkeypatch):
    import bvmbounds.harness as harness

    def boom(*a, **k):
        raise RuntimeError("oracle exploded")

    spec = preset("fig1b-poisson")
    calls = {"n": 0}
    real = harness.posterior_oracles

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] > 1:
            boom()
        return real(*a, **k)

    monkeypatch.setattr(harness, "posterior_oracles", flaky)
    buf = io.StringIO()
    with pytest.raises(RuntimeError):
        sweep(spec, (100, 200), seed=1, out=buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[-1].startswith("# FAILED at n=200")
    assert len(read_sweep_csv(buf.getvalue())) == 2


def test_rows_round_trip():
    rows = sweep(preset("fig1b-poisson"), (100,), seed=2)
    recs = read_sweep_csv(rows_to_csv(rows))
    assert [r["bound"] for r in recs] == [r.bound for r in rows]


def test_verify_is_deterministic(capsys):
    code1, out1, _ = run(["verify", "oracles", "--seed", "7"], capsys)
    code2, out2, _ = run(["verify", "oracles", "--seed", "7"], capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["passed"] is True
