import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from lpvsync import cli

REPO = Path(__file__).resolve().parents[1]
TRIANGLE_CFG = REPO / "demos" / "configs" / "triangle.yaml"


def _write_cfg(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return path


def _triangle_doc():
    with open(TRIANGLE_CFG) as fh:
        return yaml.safe_load(fh)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    rc = cli.main(["synthesize", "--config", str(TRIANGLE_CFG),
                   "--out", str(out)])
    assert rc == cli.EXIT_OK
    return out


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def test_malformed_yaml_exits_config(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("network: [unclosed\n  - mapping: {\n")
    rc = cli.main(["synthesize", "--config", str(path)])
    assert rc == cli.EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_non_mapping_top_level_exits_config(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    assert cli.main(["synthesize", "--config", str(path)]) == cli.EXIT_CONFIG


def test_missing_config_file_exits_config(tmp_path):
    rc = cli.main(["synthesize", "--config", str(tmp_path / "nope.yaml")])
    assert rc == cli.EXIT_CONFIG


def test_unknown_field_exits_config(tmp_path, capsys):
    doc = _triangle_doc()
    doc["network"]["bogus"] = 1
    rc = cli.main(["synthesize", "--config",
                   str(_write_cfg(tmp_path, doc))])
    assert rc == cli.EXIT_CONFIG
    assert "network.bogus" in capsys.readouterr().err


def test_unknown_section_exits_config(tmp_path):
    doc = _triangle_doc()
    doc["extras"] = {}
    rc = cli.main(["synthesize", "--config", str(_write_cfg(tmp_path, doc))])
    assert rc == cli.EXIT_CONFIG


def test_resolve_config_fills_defaults():
    cfg = cli.resolve_config(_triangle_doc())
    assert cfg["synthesis"]["tol"] == 0.01
    assert cfg["synthesis"]["solver"]["max_iter"] == 50000
    assert cfg["simulation"]["disturbance"]["pole"] == 10.0
    assert cfg["output"]["formats"] == ["csv", "json"]


def test_scenario_defaults_fill_benchmark_values():
    from lpvsync import chaos
    cfg = cli.resolve_config({
        "network": {"scenario": "chaos-ring5"},
        "simulation": {"signal": {"kind": "chaos-master", "theta": 0.0},
                       "x0": None},
    })
    cfg = cli._scenario_defaults(cfg)
    assert cfg["synthesis"]["grid"]["count"] == chaos.BENCHMARK_GRID_COUNT
    assert cfg["synthesis"]["grid"]["alpha_sq"] == chaos.BENCHMARK_ALPHA_SQ
    assert cfg["synthesis"]["delta"] == chaos.BENCHMARK_DELTA
    assert cfg["synthesis"]["Q"] == chaos.BENCHMARK_Q_SCALE
    assert cfg["simulation"]["x0"] == [0.3, 0.3]


def test_build_network_uses_one_based_labels():
    net = cli.build_network(cli.resolve_config(_triangle_doc())["network"])
    assert net.N == 3
    # edges [[1,2],[2,3],[3,1]] mean agent 0 listens to agent 2, etc.
    assert net.graph.in_neighbors[0] == (2,)
    assert net.graph.in_neighbors[1] == (0,)
    assert net.graph.in_neighbors[2] == (1,)


# ---------------------------------------------------------------------------
# Synthesize / simulate / verify flow
# ---------------------------------------------------------------------------

def test_synthesize_artifacts_and_manifest(synth_dir):
    names = {"schedule.json", "synthesis_report.json", "manifest.json"}
    assert names <= {p.name for p in synth_dir.iterdir()}
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert manifest["format"] == "lpvsync-manifest"
    assert manifest["command"] == "synthesize"
    for name, digest in manifest["artifacts"].items():
        assert cli._sha256(synth_dir / name) == digest
    report = json.loads((synth_dir / "synthesis_report.json").read_text())
    assert report["gamma_sq"] == 1.05
    assert len(report["gamma_sq_table"]) == 3
    assert all(m > 0 for m in report["margins"])
    assert report["covering"]["max_spacing"] < 2.0


def test_simulate_flow(synth_dir, tmp_path, capsys):
    out = tmp_path / "sim"
    rc = cli.main(["simulate", "--config", str(TRIANGLE_CFG),
                   "--schedule", str(synth_dir / "schedule.json"),
                   "--out", str(out), "--seed", "5"])
    assert rc == cli.EXIT_OK
    shown = capsys.readouterr().out
    assert "attenuation ratio" in shown

    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["hinf_within_level"] is True
    assert metrics["rate"]["weak_ok"] is True
    assert metrics["dissipation"]["fraction_satisfied"] == 1.0
    assert max(metrics["final_errors"]) < 1e-2

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["simulation"]["disturbance"]["seed"] == 5
    for name in ("trace.csv", "plot_errors.py", "metrics.json"):
        assert cli._sha256(out / name) == manifest["artifacts"][name]


def test_simulate_is_reproducible(synth_dir, tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        rc = cli.main(["simulate", "--config", str(TRIANGLE_CFG),
                       "--schedule", str(synth_dir / "schedule.json"),
                       "--out", str(out), "--horizon", "2.0"])
        assert rc == cli.EXIT_OK
        outs.append((out / "trace.csv").read_bytes())
    assert outs[0] == outs[1]


def test_verify_flow(synth_dir, tmp_path, capsys):
    out = tmp_path / "verify"
    rc = cli.main(["verify", "--config", str(TRIANGLE_CFG),
                   "--schedule", str(synth_dir / "schedule.json"),
                   "--out", str(out)])
    assert rc == cli.EXIT_OK
    assert "certificates: pass" in capsys.readouterr().out
    report = json.loads((out / "verification_report.json").read_text())
    assert report["passed"] is True
    assert report["interpolants"]["failures"] == []
    assert report["continuity"]["max_ratio"] <= 1.0
    assert report["rate"]["weak_ok"] is True


def test_schedule_rejected_for_different_network(synth_dir, tmp_path,
                                                 capsys):
    doc = _triangle_doc()
    doc["network"]["agents"][0]["C2"] = [[0.9, 0.3]]
    cfg = _write_cfg(tmp_path, doc)
    rc = cli.main(["verify", "--config", str(cfg),
                   "--schedule", str(synth_dir / "schedule.json"),
                   "--out", str(tmp_path / "v")])
    assert rc == cli.EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_infeasible_synthesis_exits_two(tmp_path, capsys):
    doc = _triangle_doc()
    doc["synthesis"]["gamma_sq"] = 1e-4
    doc["synthesis"]["solver"] = {"max_iter": 3000, "restarts": 1}
    rc = cli.main(["synthesize", "--config", str(_write_cfg(tmp_path, doc)),
                   "--out", str(tmp_path / "out")])
    assert rc == cli.EXIT_INFEASIBLE
    assert "grid point" in capsys.readouterr().err


def test_outdir_env_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path))
    path = cli.resolve_outdir(None, {"directory": "nested/run"})
    assert path == tmp_path / "nested" / "run"
    assert path.is_dir()
    # absolute --out ignores the root
    absolute = cli.resolve_outdir(str(tmp_path / "direct"), {})
    assert absolute == tmp_path / "direct"


def test_signal_builders_cover_kinds():
    sig = cli.build_signal({"kind": "constant", "value": 0.7, "times": None,
                            "values": None, "theta": None, "rho0": None},
                           (0.0, 2.0))
    assert sig(3.0) == 0.7
    with pytest.raises(cli.ConfigError):
        cli.build_signal({"kind": "mystery", "value": None, "times": None,
                          "values": None, "theta": None, "rho0": None},
                         (0.0, 2.0))
