"""
Command-line front end: ranges, slope fits, output formats, config replay and
exit codes.
"""
import json
import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pytest

import cli
from cli import RunConfig, fit_slope, main, parse_config, parse_range, run
from errors import DegenerateAbscissae, DomainError, UsageError


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


# ── Ranges and fits ───────────────────────────────────────────────────────
def test_parse_range_forms():
    assert parse_range("7") == [7]
    assert parse_range("256:4096:x2") == [256, 512, 1024, 2048, 4096]
    assert parse_range("1:10:+3") == [1, 4, 7, 10]
    assert parse_range("2:4") == [2, 3, 4]


@pytest.mark.parametrize("text", ["", "a", "5:1:x2", "1:8:y2", "1:8:x1", "1:8:+0", "1:2:3:4"])
def test_parse_range_rejects(text):
    with pytest.raises(DomainError):
        parse_range(text)


def test_fit_slope_exact_line():
    slope, intercept, residual = fit_slope([(1, 3), (2, 5), (3, 7)])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(1.0)
    assert residual == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_residual_is_rms():
    _, _, residual = fit_slope([(0, 0), (1, 1), (2, 0), (3, 1)])
    assert residual == pytest.approx(0.44721359549995793, rel=1e-12)


def test_fit_slope_degenerate():
    with pytest.raises(DegenerateAbscissae):
        fit_slope([(1, 1), (2, 2)])
    with pytest.raises(DegenerateAbscissae):
        fit_slope([(1, 1), (1, 2), (2, 3)])


# ── Commands ──────────────────────────────────────────────────────────────
def test_det_csv(capsys):
    code, out = _run(capsys, "det", "--n", "1", "--ell", "1")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "n,ell,p_no_real"
    n, ell, p = lines[1].split(",")
    assert (n, ell) == ("1", "1")
    assert float(p) == pytest.approx(1 - 2 / math.pi, rel=1e-15)
    assert p.startswith("0.36338")
    assert out.endswith("\n") and "\r" not in out


def test_theta_command(capsys):
    code, out = _run(capsys, "theta")
    assert code == 0
    header, row = out.strip().split("\n")
    assert header == "ell,theta"
    assert float(row.split(",")[1]) == pytest.approx(0.1875, abs=1e-9)


def test_headers_are_fixed(capsys):
    cases = {
        ("mgf", "--n", "2", "--s", "-0.5"): "n,ell,s,mgf",
        ("dist", "--n", "2"): "n,ell,k,prob,stderr",
        ("hilbert", "--x", "1.0", "--n", "0:3"): "x,l,hatP",
        ("mc", "--n", "1", "--samples", "2000", "--seed", "3"): "n,ell,estimate,stderr,samples,seed",
        ("allreal", "--n", "1:3"): "n,ell,log_p_all_real",
    }
    for argv, header in cases.items():
        code, out = _run(capsys, *argv)
        assert code == 0, argv
        assert out.split("\n")[0] == header


def test_rows_are_sorted_by_key(capsys):
    code, out = _run(capsys, "det", "--n", "1:3", "--ell", "1:2")
    assert code == 0
    keys = [tuple(map(int, line.split(",")[:2])) for line in out.strip().split("\n")[1:]]
    assert keys == sorted(keys) and len(keys) == 6


def test_dist_rows_sum_to_one(capsys):
    code, out = _run(capsys, "dist", "--n", "3", "--ell", "2")
    assert code == 0
    probs = [float(line.split(",")[3]) for line in out.strip().split("\n")[1:]]
    assert len(probs) == 4
    assert math.fsum(probs) == pytest.approx(1.0, abs=1e-12)


def test_allreal_with_alpha_appends_phi_block(capsys):
    code, out = _run(capsys, "allreal", "--n", "4", "--alpha", "1")
    assert code == 0
    blocks = out.strip().split("\n\n")
    assert len(blocks) == 2
    header, row = blocks[1].split("\n")
    assert header == "alpha,phi"
    assert float(row.split(",")[1]) == pytest.approx(3 * math.log(2) - 0.5 - 2.25 * math.log(3), rel=1e-13)


def test_mc_output_is_determined_by_seed(capsys):
    _, first = _run(capsys, "mc", "--n", "2", "--samples", "3000", "--seed", "17")
    _, second = _run(capsys, "mc", "--n", "2", "--samples", "3000", "--seed", "17")
    _, other = _run(capsys, "mc", "--n", "2", "--samples", "3000", "--seed", "18")
    assert first == second
    assert first != other


def test_sweep_fit_block(capsys):
    code, out = _run(capsys, "sweep", "--command", "det", "--n", "8:64:x2", "--ell", "1", "--fit")
    assert code == 0
    main_block, fit_block = out.strip().split("\n\n")
    assert len(main_block.split("\n")) == 5
    header, row = fit_block.split("\n")
    assert header == "slope,intercept,residual"
    slope = float(row.split(",")[0])
    assert -0.6 < slope < -0.2


@pytest.mark.slow
def test_sweep_persistence_slope(capsys):
    code, out = _run(capsys, "sweep", "--command", "det", "--n", "256:4096:x2", "--ell", "1", "--fit")
    assert code == 0
    slope = float(out.strip().split("\n")[-1].split(",")[0])
    assert -0.45 <= slope <= -0.31


# ── JSON and config replay ────────────────────────────────────────────────
def test_json_output_replays_as_config(tmp_path, capsys):
    out_path = tmp_path / "det.json"
    code = main(["det", "--n", "1:4:+1", "--ell", "2", "--format", "json", "--out", str(out_path), "--fit"])
    assert code == 0
    doc = json.loads(out_path.read_text(encoding="utf-8"))
    assert set(doc) == {"meta", "rows", "fit"}
    assert list(doc["rows"][0]) == ["n", "ell", "p_no_real"]
    assert doc["rows"][0]["p_no_real"] == pytest.approx(1 / 3, rel=1e-14)

    replay = parse_config(["--config", str(out_path)])
    assert replay == RunConfig(**doc["meta"])
    assert main(["--config", str(out_path)]) == 0
    assert json.loads(out_path.read_text(encoding="utf-8")) == doc


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "det", "n": "5", "ell": "1"}), encoding="utf-8")
    config = parse_config(["--config", str(path), "--ell", "3"])
    assert config.ell == "3" and config.n == "5" and config.command == "det"


def test_integer_ranges_in_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "det", "n": 5}), encoding="utf-8")
    assert parse_config(["--config", str(path)]).n == "5"


# ── Exit codes ────────────────────────────────────────────────────────────
def test_usage_errors_exit_64(capsys, tmp_path):
    assert main(["det", "--bogus"]) == 64
    assert main(["nonsense"]) == 64
    assert main(["det", "--n", "1", "--samples", "0"]) == 64
    assert main(["det"]) == 64
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["--config", str(bad)]) == 64


def test_domain_errors_exit_2(capsys):
    assert main(["det", "--n", "0"]) == 2
    assert main(["det", "--n", "9:1"]) == 2
    assert main(["theta", "--ell", "20000"]) == 2


def test_numerical_errors_exit_3(capsys, monkeypatch):
    from errors import SpectralRadiusExceeded

    def failing(params):
        raise SpectralRadiusExceeded("largest eigenvalue is 1")

    monkeypatch.setattr(cli.ensemble, "p_no_real", failing)
    assert main(["det", "--n", "2"]) == 3


def test_fit_with_too_few_points_exits_3(capsys):
    assert main(["sweep", "--command", "det", "--n", "4:8:x2", "--fit"]) == 3


def test_run_accepts_model_directly(capsys):
    assert run(RunConfig(command="theta", ell="1:2")) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "ell,theta" and len(lines) == 3


def test_run_config_rejects_unknown_fields():
    with pytest.raises(Exception):
        RunConfig(command="det", colour="blue")
    with pytest.raises(UsageError):
        parse_config(["det", "--format", "xml"])
