import json
import os
import time

import pytest

from phasetop.cli import main
from phasetop.runio import RunConfig, RunSummary


def test_dry_run_emits_everything(tmp_path, capsys):
    out = tmp_path / "run"
    t0 = time.perf_counter()
    code = main(["run", "--benchmark", "a", "--mode", "adaptive", "--rounds", "1",
                 "--target-h", "0.3", "--outer", "1", "--inner", "1",
                 "--out", str(out), "--figures"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    assert elapsed < 5.0
    assert (out / "history.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "round_0.vtk").exists()
    figs = list((out / "figures").glob("*.png"))
    assert any("design" in f.name for f in figs)
    assert any("convergence" in f.name for f in figs)
    assert all(f.stat().st_size > 1000 for f in figs)
    assert "finished" in capsys.readouterr().out


def test_cli_compare_and_report(tmp_path, capsys):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["run", "-b", "a", "--rounds", "1", "--target-h", "0.35",
                     "--outer", "1", "--inner", "0", "--out", str(out)]) == 0
    capsys.readouterr()
    code = main(["compare", "--left", str(out_a / "summary.json"),
                 "--right", str(out_b / "summary.json")])
    assert code == 0
    txt = capsys.readouterr().out
    assert "time saving" in txt

    code = main(["report", "--run", str(out_a)])
    assert code == 0
    listed = capsys.readouterr().out.strip().splitlines()
    assert listed and all(p.endswith(".png") for p in listed)


def test_cli_error_exit_codes(tmp_path, capsys):
    # unknown benchmark -> config error
    code = main(["run", "-b", "zz", "--rounds", "1", "--out", str(tmp_path / "x")])
    assert code == 2
    # mismatched benchmarks in compare -> config error
    s1 = RunSummary(benchmark="a", mode="adaptive", final_vertices=1,
                    final_objective=1.0, total_seconds=1.0, stop_reason="r", rounds=())
    s2 = RunSummary(benchmark="b", mode="uniform", final_vertices=1,
                    final_objective=1.0, total_seconds=1.0, stop_reason="r", rounds=())
    p1, p2 = tmp_path / "s1.json", tmp_path / "s2.json"
    s1.save(p1)
    s2.save(p2)
    assert main(["compare", "--left", str(p1), "--right", str(p2)]) == 2
    # missing file -> I/O error category
    assert main(["compare", "--left", str(tmp_path / "none.json"),
                 "--right", str(p1)]) == 4


def test_cli_config_file_with_flag_overrides(tmp_path):
    cfg = RunConfig(benchmark="a", rounds=1, target_h=0.35, n_outer=1, m_inner=0,
                    out_dir="ignored")
    path = tmp_path / "cfg.json"
    cfg.save(path)
    out = tmp_path / "out"
    code = main(["run", "--config", str(path), "--out", str(out)])
    assert code == 0
    stored = RunConfig.load(out / "config.json")
    assert stored.rounds == 1 and stored.target_h == 0.35
    assert stored.out_dir == str(out)
