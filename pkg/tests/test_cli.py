import math
from pathlib import Path

import numpy as np
import pytest

from etconsensus import (
    CentralizedNorm,
    PeriodicStateDependent,
    TimeDependent,
    WeightedDigraph,
    min_inter_event_bound_centralized,
)
from etconsensus.cli import check_bounds, main
from etconsensus.metrics import RunMetrics, parse_metrics_csv

GRAPH_BLOCK = """
[graph]
n = 2
mode = undirected
edges = 0 1 1.0
"""


def make_config(tmp_path, law_block, horizon=5, x0="1, -1", extra="", name="exp.cfg"):
    text = GRAPH_BLOCK + f"""
[law]
{law_block}

[sim]
horizon = {horizon}

[run]
x0 = {x0}
output_dir = {tmp_path / 'out'}
{extra}
"""
    path = tmp_path / name
    path.write_text(text)
    return path


def test_run_writes_outputs(tmp_path, capsys):
    cfg = make_config(tmp_path, "type = state_dependent\nsigma_i = 0.5", horizon=20)
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    for fname in ("trace.csv", "events.csv", "metrics.csv", "metrics.txt"):
        assert (out / fname).exists()
    _, rows = parse_metrics_csv((out / "metrics.csv").read_text())
    m = rows[0][1]
    assert m.final_disagreement <= 1e-3
    assert m.conservation_error <= 1e-8
    captured = capsys.readouterr()
    assert "PASS" in captured.out


def test_run_rejects_self_loop(tmp_path, capsys):
    cfg = make_config(tmp_path, "type = state_dependent")
    cfg.write_text(cfg.read_text().replace("edges = 0 1 1.0", "edges = 1 1 0.5"))
    assert main(["run", str(cfg)]) == 2
    assert "self-loop" in capsys.readouterr().err


def test_run_zeno_abort_exit_code(tmp_path, capsys):
    law = "type = decentralized_state\na = 0.999999999999999\nsigma_i = 0.999"
    cfg = make_config(tmp_path, law, horizon=0.001)
    cfg.write_text(cfg.read_text().replace(
        "[sim]\nhorizon = 0.001",
        "[sim]\nhorizon = 0.001\ndt = 0.0005\nevent_tol = 1e-9",
    ))
    assert main(["run", str(cfg)]) == 3
    assert "zeno" in capsys.readouterr().err.lower()
    assert (tmp_path / "out" / "events.csv").exists()


def test_run_is_byte_deterministic(tmp_path):
    cfg = make_config(tmp_path, "type = centralized\nsigma = 0.5",
                      x0="random(9, -1, 1)")
    assert main(["run", str(cfg), "--quiet", "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", str(cfg), "--quiet", "--output-dir", str(tmp_path / "b")]) == 0
    for fname in ("metrics.csv", "trace.csv", "events.csv"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_run_sweep_outputs(tmp_path):
    cfg = make_config(
        tmp_path,
        "type = centralized\nsigma = 0.5",
        extra="\n[sweep]\nlaw.sigma = 0.1, 0.5, 0.9\n",
    )
    assert main(["run", str(cfg), "--quiet"]) == 0
    extra, rows = parse_metrics_csv((tmp_path / "out" / "metrics.csv").read_text())
    assert extra == ("law.sigma",)
    assert [r[0][0] for r in rows] == ["0.1", "0.5", "0.9"]
    assert (tmp_path / "out" / "point_002" / "trace.csv").exists()


def test_bounds_subcommand(tmp_path, capsys):
    cfg = make_config(tmp_path, "type = centralized\nsigma = 0.5")
    assert main(["run", str(cfg), "--quiet"]) == 0
    metrics = tmp_path / "out" / "metrics.csv"
    assert main(["bounds", str(metrics), str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "min_inter_event_gap" in out and "PASS" in out


def test_periodic_inadmissible_h_warns_but_runs(tmp_path, capsys):
    # h* = 0.5/4 = 0.125 on P2; h = 0.2 violates the admissibility condition
    cfg = make_config(tmp_path, "type = periodic_state_dependent\nh = 0.2", horizon=3)
    assert main(["run", str(cfg), "--quiet"]) == 0
    assert "admissible period" in capsys.readouterr().err


def test_linear_et_subcommand(tmp_path, capsys):
    text = f"""
[linear_et]
n = 2
m = 1
a = 0, 1, 0, 0
b = 0, 1
k = -2, -3
q = 1, 0, 0, 1
r = 0.5, 0, 0, 0.5
x0 = 1, 0
horizon = 6

[run]
output_dir = {tmp_path / 'let'}
"""
    cfg = tmp_path / "linear.cfg"
    cfg.write_text(text)
    assert main(["linear-et", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "t_min" in out and "PASS" in out and "FAIL" not in out
    assert (tmp_path / "let" / "linear_et_trace.csv").exists()
    assert (tmp_path / "let" / "linear_et_events.csv").exists()


def test_missing_config_is_validation_error(capsys):
    assert main(["run", "/nonexistent/exp.cfg"]) == 2


# -- check_bounds unit behaviour ------------------------------------------------

def metrics_stub(**kw) -> RunMetrics:
    base = dict(
        final_disagreement=1e-6,
        conservation_error=1e-12,
        events_total=10,
        events_per_agent=(5, 5),
        min_gap=0.2,
        mean_gap=0.3,
        decay_rate=2.1,
        zeno_suspect=False,
    )
    base.update(kw)
    return RunMetrics(**base)


def test_check_bounds_centralized(p2):
    tau = min_inter_event_bound_centralized(p2, 0.5)
    ok = check_bounds(metrics_stub(min_gap=tau + 0.01), CentralizedNorm(0.5), p2)
    assert all(c.passed for c in ok)
    bad = check_bounds(metrics_stub(min_gap=tau - 0.01), CentralizedNorm(0.5), p2)
    assert any(not c.passed and c.name == "min_inter_event_gap" for c in bad)


def test_check_bounds_time_dependent_radius(p2):
    law = TimeDependent(c0=0.1, c1=0.0, alpha=1.0)
    good = check_bounds(metrics_stub(final_disagreement=0.1), law, p2)
    assert all(c.passed for c in good)
    bad = check_bounds(metrics_stub(final_disagreement=0.2), law, p2)
    assert any(not c.passed for c in bad)


def test_check_bounds_ideal_decay(p2):
    assert all(c.passed for c in check_bounds(metrics_stub(decay_rate=2.0), None, p2))
    nan = check_bounds(metrics_stub(decay_rate=math.nan), None, p2)
    assert any(not c.passed and c.name == "decay_rate" for c in nan)


def test_check_bounds_periodic(p2):
    law = PeriodicStateDependent(h=0.05)
    checks = check_bounds(metrics_stub(min_gap=0.05), law, p2)
    names = {c.name: c.passed for c in checks}
    assert names["period_h"] and names["min_inter_event_gap"]
