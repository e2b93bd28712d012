import json

import numpy as np
import pytest

from spectralforge.cli import main
from spectralforge.io import read_json, weights_from_json


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "s.json").write_text(
        json.dumps({"label": "demo", "levels": [0, 0, 0, 3]})
    )
    (tmp_path / "t.json").write_text(json.dumps({"ratios": [0, 1, 1, 1]}))
    (tmp_path / "prior.json").write_text(json.dumps({"type": "flat"}))
    return tmp_path


def test_design_pipeline_smoke(workdir):
    out = workdir / "r.json"
    rc = main(
        [
            "design",
            "--spectrum", str(workdir / "s.json"),
            "--target", str(workdir / "t.json"),
            "--method", "lp",
            "--out", str(out),
        ]
    )
    assert rc == 0
    payload = read_json(out)
    weights = weights_from_json(payload)  # validates bi-stochasticity
    assert payload["achieved_range"] == pytest.approx(1.0, abs=1e-9)
    assert weights.n == 4
    manifest = read_json(str(out) + ".manifest.json")
    assert manifest["outputs"][0]["path"] == str(out)


def test_design_analytic_and_minimal(workdir):
    for method in ("analytic", "minimal"):
        out = workdir / f"r_{method}.json"
        rc = main(
            [
                "design",
                "--spectrum", str(workdir / "s.json"),
                "--target", str(workdir / "t.json"),
                "--method", method,
                "--seed", "1",
                "--out", str(out),
            ]
        )
        assert rc == 0
        weights_from_json(read_json(out))


def test_schedule_simulate_chain(workdir):
    main(
        [
            "design",
            "--spectrum", str(workdir / "s.json"),
            "--target", str(workdir / "t.json"),
            "--out", str(workdir / "r.json"),
        ]
    )
    rc = main(
        [
            "schedule",
            "--weights", str(workdir / "r.json"),
            "--total-time", "1.0",
            "--out", str(workdir / "sched.json"),
            "--decomposition-out", str(workdir / "d.json"),
        ]
    )
    assert rc == 0
    rc = main(
        [
            "simulate",
            "--spectrum", str(workdir / "s.json"),
            "--schedule", str(workdir / "sched.json"),
            "--omega", "1.5",
            "--out", str(workdir / "final.json"),
        ]
    )
    assert rc == 0
    final = read_json(workdir / "final.json")
    amps = np.array([complex(re, im) for re, im in final["amplitudes"]])
    assert abs(np.sum(np.abs(amps) ** 2) - 1.0) < 1e-12


def test_estimate_freq_deterministic(workdir):
    args = [
        "estimate-freq",
        "--spectrum", str(workdir / "s.json"),
        "--tau", "0..1",
        "--points", "4",
        "--restarts", "2",
        "--seed", "5",
    ]
    rc = main(args + ["--out", str(workdir / "a.csv")])
    assert rc == 0
    rc = main(args + ["--out", str(workdir / "b.csv")])
    assert rc == 0
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()
    header = (workdir / "a.csv").read_text().splitlines()[0]
    assert header == "tau,bmse,qfi,restart_winner,iters"


def test_estimate_phase_outputs(workdir):
    rc = main(
        [
            "estimate-phase",
            "--spectrum", str(workdir / "s.json"),
            "--prior", str(workdir / "prior.json"),
            "--restarts", "2",
            "--seed", "1",
            "--out", str(workdir / "phase.json"),
            "--csv", str(workdir / "phase.csv"),
        ]
    )
    assert rc == 0
    payload = read_json(workdir / "phase.json")
    assert payload["cost"] == pytest.approx(
        4.0 * (0.5 - payload["trace_norm"]), abs=1e-12
    )
    lines = (workdir / "phase.csv").read_text().splitlines()
    assert lines[0] == "n,cost,trace_norm"
    assert lines[1].startswith("4,")


def test_reduction_study_csv(workdir):
    rc = main(
        [
            "reduction-study",
            "--n", "2..3",
            "--samples", "20",
            "--seed", "2",
            "--jobs", "1",
            "--out", str(workdir / "study.csv"),
        ]
    )
    assert rc == 0
    lines = (workdir / "study.csv").read_text().splitlines()
    assert lines[0] == "n,mean_range,mean_min_range,samples,seed"
    assert len(lines) == 3
    manifest = read_json(str(workdir / "study.csv") + ".manifest.json")
    assert "spectrum_law" in manifest


def test_validation_error_exit_code(workdir, capsys):
    rc = main(
        [
            "design",
            "--spectrum", str(workdir / "s.json"),
            "--target", str(workdir / "s.json"),  # wrong schema
            "--out", str(workdir / "x.json"),
        ]
    )
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("spectralforge: error:")
    assert len(err.strip().splitlines()) == 1


def test_usage_error_exit_code(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["design", "--nonsense"])
    assert exc.value.code == 64


def test_unknown_figure_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "fig99", "--out", "/tmp/x"])
    assert exc.value.code == 64


def test_internal_error_exit_code(workdir, monkeypatch, capsys):
    import spectralforge.cli as cli

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(cli, "bmse_curve", boom)
    rc = main(
        [
            "estimate-freq",
            "--spectrum", str(workdir / "s.json"),
            "--tau", "0.5",
            "--out", str(workdir / "x.csv"),
        ]
    )
    assert rc == 70
    assert "internal-error" in capsys.readouterr().err


def test_env_seed_fallback(workdir, monkeypatch):
    monkeypatch.setenv("SPECTRALFORGE_SEED", "77")
    rc = main(
        [
            "estimate-freq",
            "--spectrum", str(workdir / "s.json"),
            "--tau", "0.5",
            "--restarts", "2",
            "--out", str(workdir / "env.csv"),
        ]
    )
    assert rc == 0
    manifest = read_json(str(workdir / "env.csv") + ".manifest.json")
    assert manifest["seed"] == 77


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "spectralforge 0.1.0" in capsys.readouterr().out
