import csv
import json
import math
import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracleibniz.xlab import cli
from fracleibniz.xlab.emit import COLUMNS, emit, read_csv, svg_plot
from fracleibniz.xlab.fit import fit_slope
from fracleibniz.xlab.probes import (
    PROBES,
    ConfigError,
    ProbeRecord,
    ProbeResolutionError,
    load_config,
    probe_from_config,
    run_probe,
)
from fracleibniz.xlab.verify import CHECKS, oracle_coverage, run_checks

EXPERIMENTS = Path(__file__).resolve().parents[1] / "experiments"


def rec(param, ratio, probe="t"):
    return ProbeRecord(probe, float(param), ratio, 1.0, ratio, 64, 1.0, 0, 0.0)


def small_cfg(**over):
    cfg = {
        "probe": "kato_ponce",
        "params": {"s": 1.5, "pairs": 3},
        "grid": {"dim": 1, "n": 128, "L": 32.0},
        "norms": {"p": 2},
        "seed": 0,
    }
    cfg.update(over)
    return cfg


# --------------------------------------------------------------------------
# configs


def test_every_experiment_config_loads():
    paths = sorted(EXPERIMENTS.glob("*.json"))
    assert len(paths) >= 15
    for path in paths:
        probe = load_config(path)
        assert probe.name in PROBES and probe.sweep


def test_pairs_become_the_sweep_axis():
    probe = probe_from_config(small_cfg())
    assert probe.sweep_name == "pair" and probe.sweep == (0, 1, 2)


@pytest.mark.parametrize(
    "cfg",
    [
        {"params": {}},
        small_cfg(probe="nope"),
        small_cfg(grid={"dim": 1, "n": 100, "L": 1.0}),
        small_cfg(grid={"dim": 1, "n": 64}),
        small_cfg(params={"s": [1.0, 2.0], "k": [1, 2]}),
        small_cfg(params={"s": 1.5}),
        small_cfg(params={"s": []}),
        small_cfg(params={"s": 1.5, "pairs": 0}),
        small_cfg(norms={"p": -1}),
    ],
)
def test_malformed_configs_rejected(cfg):
    with pytest.raises(ConfigError):
        probe_from_config(cfg)


@pytest.mark.parametrize(
    "norms,ok",
    [
        ({"p": 2, "p1": 4, "p2": 4}, True),
        ({"p": 2, "p1": 3, "p2": 6}, True),
        ({"p": 2, "p1": "inf", "p2": 2}, True),
        ({"p": 2, "p1": 4, "p2": 3}, False),
        ({"p": 2, "p1": 4, "p2": 4, "p3": 3, "p4": 5}, False),
    ],
)
def test_holder_relation_enforced(norms, ok):
    cfg = small_cfg(probe="kato_ponce_holder", norms=norms)
    if ok:
        probe_from_config(cfg)
    else:
        with pytest.raises(ConfigError, match="differs from 1/p"):
            probe_from_config(cfg)


def test_overrides():
    probe = probe_from_config(small_cfg(), grid_n=256, seed=9)
    assert probe.make_grid().n == 256 and probe.seed == 9


def test_record_rejects_non_finite():
    with pytest.raises(ValueError):
        rec(1.0, math.nan)
    with pytest.raises(ValueError):
        ProbeRecord("t", 1.0, -1.0, 1.0, 1.0, 8, 1.0, 0, 0.0)


# --------------------------------------------------------------------------
# running


def test_run_is_deterministic_and_thread_independent(tmp_path):
    probe = probe_from_config(small_cfg())
    a = run_probe(probe, threads=1)
    b = run_probe(probe, threads=3)
    strip = lambda rs: [(r.param, r.lhs, r.rhs, r.ratio) for r in rs]
    assert strip(a) == strip(b)
    emit(a, "csv", tmp_path / "a.csv")
    emit(b, "csv", tmp_path / "b.csv")
    drop = lambda p: [line.rsplit(",", 1)[0] for line in p.read_text().splitlines()]
    assert drop(tmp_path / "a.csv") == drop(tmp_path / "b.csv")


def test_seed_changes_pairs():
    a = run_probe(probe_from_config(small_cfg()))
    b = run_probe(probe_from_config(small_cfg(seed=1)))
    assert [r.lhs for r in a] != [r.lhs for r in b]


def test_resolution_error_names_the_point():
    cfg = {
        "probe": "log_stack_growth",
        "params": {"s": 0.5, "k": 4.0, "width": 0.5, "N": [2, 12]},
        "grid": {"dim": 1, "n": 256, "L": 25.0},
        "norms": {"p": 2},
    }
    with pytest.raises(ProbeResolutionError, match="N=12"):
        run_probe(probe_from_config(cfg))


# --------------------------------------------------------------------------
# slope fits


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_fit_recovers_power_law(slope, c):
    recs = [rec(k, math.exp(c) * k**slope) for k in (16, 32, 64, 128, 256)]
    fit = fit_slope(recs)
    assert math.isclose(fit.slope, slope, abs_tol=1e-10)
    assert fit.residual < 1e-10


def test_fit_half_and_constant():
    assert math.isclose(fit_slope([rec(k, k**0.5) for k in (1, 2, 4, 8)]).slope, 0.5, abs_tol=1e-12)
    assert abs(fit_slope([rec(k, 3.0) for k in (1, 2, 4)]).slope) < 1e-12


def test_fit_linear_axis():
    recs = [rec(j, 2.0 ** (2.5 * j)) for j in (1, 2, 3, 4, 5)]
    assert math.isclose(fit_slope(recs, "param").slope / math.log(2), 2.5, rel_tol=1e-12)


@pytest.mark.parametrize(
    "recs,axis",
    [
        ([rec(1, 1.0)], "log_param"),
        ([rec(1, 1.0), rec(2, 2.0)], "log_param"),
        ([rec(-1, 1.0), rec(1, 1.0), rec(2, 1.0)], "log_param"),
        ([rec(1, 0.0), rec(2, 1.0), rec(3, 1.0)], "log_param"),
        ([rec(1, 1.0), rec(2, 1.0), rec(3, 1.0)], "sqrt"),
    ],
)
def test_fit_refusals(recs, axis):
    with pytest.raises(ValueError):
        fit_slope(recs, axis)


# --------------------------------------------------------------------------
# emitters


def test_csv_round_trip(tmp_path):
    recs = [rec(2**k, 1.0 / 3 * k + 0.1) for k in range(1, 5)]
    path = emit(recs, "csv", tmp_path / "r.csv")
    with open(path) as fh:
        assert next(csv.reader(fh)) == list(COLUMNS)
    back = read_csv(path)
    assert [(r.param, r.lhs, r.ratio) for r in back] == [(r.param, r.lhs, r.ratio) for r in recs]


def test_empty_csv_is_header_only(tmp_path):
    path = emit([], "csv", tmp_path / "e.csv")
    assert path.read_text() == ",".join(COLUMNS) + "\n"
    assert read_csv(path) == []


def test_read_csv_rejects_foreign_columns(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_json_emit(tmp_path):
    recs = [rec(1, 2.0), rec(2, 3.0)]
    data = json.loads(emit(recs, "json", tmp_path / "r.json").read_text())
    assert [d["ratio"] for d in data] == [2.0, 3.0] and set(data[0]) == set(COLUMNS)
    with pytest.raises(ValueError):
        emit(recs, "xml", tmp_path / "r.xml")


def test_svg_structure():
    svg = svg_plot([rec(k, k**0.5) for k in (1, 2, 4, 8)], title="demo")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 1
    label = re.findall(r'<text class="slope"[^>]*>([^<]*)<', svg)
    assert label == ["slope = 0.5"]


def test_svg_short_sweep_has_no_slope():
    svg = svg_plot([rec(1, 1.0)])
    assert "slope: n/a" in svg and svg.count("<polyline") == 1
    assert "<polyline" not in svg_plot([])


# --------------------------------------------------------------------------
# verification registry


def test_oracle_coverage_complete():
    assert oracle_coverage() == []


def test_fast_checks_pass():
    results = run_checks(fast=True)
    assert results and all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_check_filtering():
    assert all(r.check.module == "dyadic" for r in run_checks("dyadic", fast=True))
    with pytest.raises(ValueError):
        run_checks("nope")
    assert any(not c.fast for c in CHECKS)


# --------------------------------------------------------------------------
# command line


def test_cli_verify_fast(capsys):
    assert cli.main(["verify", "--fast", "--module", "symbols"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "checks passed" in out


def test_cli_sweep_and_report(tmp_path, capsys):
    cfg = tmp_path / "kp.json"
    cfg.write_text(json.dumps(small_cfg()))
    out = tmp_path / "out"
    assert cli.main(["sweep", str(cfg), "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"kp.csv", "kp.json", "kp.svg"}
    assert len(read_csv(out / "kp.csv")) == 3
    assert cli.main(["report", str(out)]) == 0
    summary = (out / "summary.md").read_text()
    assert "| kp | kato_ponce | 3 |" in summary


@pytest.mark.parametrize(
    "content,code",
    [
        ("{not json", 2),
        (json.dumps(small_cfg(probe="missing")), 2),
        (json.dumps(small_cfg(probe="kato_ponce_holder", norms={"p": 2, "p1": 4, "p2": 3})), 2),
        (
            json.dumps({
                "probe": "log_stack_growth",
                "params": {"s": 0.5, "k": 4.0, "width": 0.5, "N": [12]},
                "grid": {"dim": 1, "n": 256, "L": 25.0},
            }),
            3,
        ),
    ],
)
def test_cli_exit_codes(tmp_path, content, code):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path / "o")]) == code


def test_cli_missing_inputs(tmp_path):
    assert cli.main(["sweep", str(tmp_path / "absent.json")]) == 2
    assert cli.main(["report", str(tmp_path / "absent")]) == 2


def test_cli_unwritable_output(tmp_path):
    cfg = tmp_path / "kp.json"
    cfg.write_text(json.dumps(small_cfg()))
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["sweep", str(cfg), "--out", str(blocker / "sub")]) == 2


def test_cli_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
