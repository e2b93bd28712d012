import pytest

from spectralforge.errors import UnknownFigureError
from spectralforge.figures import _fig8, reproduce_figure
from spectralforge.io import read_json


def test_unknown_figure_rejected(tmp_path):
    with pytest.raises(UnknownFigureError):
        reproduce_figure("fig99", tmp_path)


def test_fig12_outputs_and_determinism(tmp_path):
    kwargs = dict(seed=7, restarts=2, plot=True)
    first = tmp_path / "a"
    second = tmp_path / "b"
    reproduce_figure("fig12", first, **kwargs)
    reproduce_figure("fig12", second, **kwargs)
    csv_a = (first / "fig12_curves.csv").read_bytes()
    csv_b = (second / "fig12_curves.csv").read_bytes()
    assert csv_a == csv_b
    assert (first / "fig12.png").exists()
    assert (first / "fig12_manifest.json").exists()
    manifest = read_json(first / "fig12_manifest.json")
    assert any(o["path"].endswith("fig12_curves.csv") for o in manifest["outputs"])


def test_fig4_byte_identical_reruns(tmp_path):
    kwargs = dict(seed=7, budget=8, restarts=2, plot=False)
    reproduce_figure("fig4", tmp_path / "a", **kwargs)
    reproduce_figure("fig4", tmp_path / "b", **kwargs)
    assert (tmp_path / "a" / "fig4_curves.csv").read_bytes() == (
        tmp_path / "b" / "fig4_curves.csv"
    ).read_bytes()


def test_figA_small_run(tmp_path):
    reproduce_figure("figA", tmp_path, seed=1, samples=30, jobs=1, plot=True)
    lines = (tmp_path / "figA_study.csv").read_text().splitlines()
    assert lines[0] == "n,mean_range,mean_min_range,samples,seed"
    assert len(lines) == 10  # n = 2..10
    summary = read_json(tmp_path / "figA_summary.json")
    assert "slope_mean_range" in summary["summary"]
    assert (tmp_path / "figA.png").exists()


def test_fig6_small_run(tmp_path):
    reproduce_figure("fig6", tmp_path, seed=2, budget=8, restarts=2, plot=True)
    lines = (tmp_path / "fig6_curves.csv").read_text().splitlines()
    assert lines[0] == "series,tau,bmse,qfi,restart_winner,iters"
    assert (tmp_path / "fig6.png").exists()
    summary = read_json(tmp_path / "fig6_summary.json")
    assert len(summary["summary"]["levels"]) == 4


def test_fig8_tables_shape():
    tables, summary = _fig8(seed=0, budget=6, restarts=2, n_values=(3,))
    header, rows = tables["fig8_bottom"]
    assert header[-1] == "relative_improvement"
    assert len(rows) == 1
    assert abs(rows[0]["relative_improvement"]) < 0.05


def test_fig10_small_run(tmp_path):
    reproduce_figure(
        "fig10", tmp_path, seed=3, budget=12, restarts=2, plot=False
    )
    lines = (tmp_path / "fig10_costs.csv").read_text().splitlines()
    assert lines[0].startswith("n,cost_linear,cost_optimized")
    assert len(lines) == 5  # n = 3..6
    assert not (tmp_path / "fig10.png").exists()
