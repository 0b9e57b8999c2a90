import json
import math
from pathlib import Path

import polars as pl
import pytest
from dirty_equals import IsFloat, IsPositiveFloat

from homodyne_herald import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, __version__, main


def test_revival_csv(tmp_path: Path) -> None:
    out = tmp_path / "revival.csv"
    assert main(["revival", "--tmax", "10", "--tsteps", "101", "--out", str(out)]) == EXIT_OK
    frame = pl.read_csv(out)
    assert frame.columns == ["t", "p_gg"]
    assert frame.height == 101
    assert frame["p_gg"][0] == IsFloat(approx=1.0, delta=1e-12)


def test_rerun_is_bit_identical(tmp_path: Path) -> None:
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    argv = ["revival", "--nbar", "12", "--tmax", "5", "--tsteps", "51", "--out"]
    assert main([*argv, str(first)]) == EXIT_OK
    assert main([*argv, str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_revival_json(tmp_path: Path) -> None:
    out = tmp_path / "revival.json"
    argv = ["revival", "--nbar", "12", "--tmax", "5", "--tsteps", "11", "--format", "json"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["config"]["nbar"] == [12.0]
    assert payload["config"]["command"] == "revival"
    assert len(payload["data"]["t"]) == 11
    assert payload["diagnostics"]["analytic"] is True
    assert payload["diagnostics"]["revival_time"] == IsFloat(
        approx=2 * math.pi * math.sqrt(12),
        delta=1e-9,
    )


def test_revival_svg(tmp_path: Path) -> None:
    out = tmp_path / "revival.svg"
    argv = ["revival", "--nbar", "12", "--tmax", "5", "--tsteps", "51", "--format", "svg"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    assert "<svg" in out.read_text(encoding="utf-8")[:200]


def test_config_file_feeds_the_run(tmp_path: Path) -> None:
    settings = tmp_path / "settings.yaml"
    settings.write_text("nbar: 8\ntmax: 3\ntsteps: 31\n", encoding="utf-8")
    out = tmp_path / "revival.csv"
    assert main(["revival", "--config", str(settings), "--out", str(out)]) == EXIT_OK
    assert pl.read_csv(out).height == 31


def test_qfunc_writes_markers(tmp_path: Path) -> None:
    out = tmp_path / "q.csv"
    assert main(["qfunc", "--nbar", "20", "--qpoints", "41", "--out", str(out)]) == EXIT_OK
    frame = pl.read_csv(out)
    assert frame.columns == ["re", "im", "q"]
    assert frame.height == 41 * 41
    markers = pl.read_csv(tmp_path / "q_markers.csv")
    assert markers["k"].to_list() == [-1, 0, 1]


def test_xdist_json(tmp_path: Path) -> None:
    out = tmp_path / "x.json"
    argv = ["xdist", "--nbar", "50", "--format", "json", "--out", str(out)]
    assert main(argv) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert list(payload["data"]) == [
        "x",
        "p_total",
        "p_gg",
        "p_ge",
        "p_eg",
        "p_ee",
        "p_sym",
        "p_anti",
    ]
    diagnostics = payload["diagnostics"]
    assert diagnostics["normalisation"] == IsFloat(approx=1.0, delta=1e-6)
    assert set(diagnostics["branch_masses"]) == {"-1", "0", "1"}
    assert payload["markers"]["k"] == [-1, 0, 1]


def test_ps_columns_per_phase(tmp_path: Path) -> None:
    out = tmp_path / "ps.csv"
    argv = ["ps", "--nbar", "20", "--tmax", "2", "--tsteps", "5", "--phi", "0", "3.14159"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    frame = pl.read_csv(out)
    assert frame.columns == ["t", "p_s_phi_0", "p_s_phi_3.14159", "p_gg"]
    assert frame["p_s_phi_0"].is_between(0, 1 + 1e-9).all()


def test_ps_single_phase(tmp_path: Path) -> None:
    out = tmp_path / "ps.json"
    argv = ["ps", "--nbar", "20", "--tmax", "2", "--tsteps", "5", "--phi", "0"]
    assert main([*argv, "--format", "json", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert list(payload["data"]) == ["t", "p_s", "p_gg"]
    assert payload["diagnostics"]["grid_convergence_delta"] == IsFloat(ge=0)
    assert len(payload["diagnostics"]["probe_times"]) == 5


def test_herald_summary(tmp_path: Path) -> None:
    out = tmp_path / "shots.csv"
    argv = ["herald", "--nbar", "50", "--shots", "200", "--seed", "4", "--out", str(out)]
    assert main(argv) == EXIT_OK
    frame = pl.read_csv(out)
    assert frame.columns == ["shot", "x", "fidelity", "success", "probability_density"]
    assert frame.height == 200
    summary = pl.read_csv(tmp_path / "shots_summary.csv").row(0, named=True)
    assert summary["shots"] == 200
    assert summary["successes"] == frame["success"].sum()
    assert summary["p_s"] == IsPositiveFloat
    # default time is the phi = pi plateau, a multiple of pi for theta = 0
    assert summary["t"] / math.pi == IsFloat(approx=round(summary["t"] / math.pi), delta=1e-9)


def test_width_table(tmp_path: Path) -> None:
    out = tmp_path / "width.csv"
    argv = ["width", "--nbar", "50", "100", "--fmin", "0.75", "--out", str(out)]
    assert main(argv) == EXIT_OK
    frame = pl.read_csv(out)
    assert frame.columns == [
        "nbar",
        "f_min",
        "center",
        "width",
        "ideal_width",
        "excess",
        "k_fit",
        "status",
    ]
    assert frame["nbar"].to_list() == [50.0, 100.0]
    assert frame["ideal_width"].to_list() == [
        IsFloat(approx=math.pi / 3, delta=1e-9),
        IsFloat(approx=math.pi / 3, delta=1e-9),
    ]


def test_config_error_exit_code(tmp_path: Path) -> None:
    out = tmp_path / "shots.csv"
    assert main(["herald", "--fmin", "1.5", "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_truncation_exit_code(tmp_path: Path) -> None:
    out = tmp_path / "revival.csv"
    assert main(["revival", "--nbar", "30", "--nmax", "3", "--out", str(out)]) == EXIT_NUMERICAL
    assert not out.exists()


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert capsys.readouterr().out.strip() == __version__
