import io

import numpy as np
import pytest

from udwrates import (
    NoBracket,
    OptimizerControl,
    SweepSpec,
    ValidationError,
    emit_csv,
    find_threshold,
    params_from_dimensionless,
    run_sweep,
)
from udwrates.sweep import build_points, csv_columns, csv_text, parse_csv

MILD = params_from_dimensionless(10.0, 1.0, 0.0, 0.5)
FIG4_BASE = params_from_dimensionless(98.0, 30.0, 0.0, 0.581)
FAST_OPT = OptimizerControl(restarts=2, max_iters=200, seed=9)


def _mild_spec(**kw):
    defaults = dict(
        base=MILD,
        axis="lambda",
        points=(0.0, 0.25, 0.5),
        measures=("eof", "coh_info", "negativity"),
        optimizer_control=FAST_OPT,
    )
    defaults.update(kw)
    return SweepSpec(**defaults)


def test_build_points_forms():
    assert build_points([1.0, 2.0, 3.0]) == (1.0, 2.0, 3.0)
    assert build_points(dict(min=0.0, max=1.0, count=3, scale="linear")) == (0.0, 0.5, 1.0)
    log = build_points(dict(min=1.0, max=100.0, count=3, scale="log"))
    assert log == pytest.approx((1.0, 10.0, 100.0))
    with pytest.raises(ValidationError):
        build_points(dict(min=0.0, max=1.0, count=3, scale="log"))


def test_spec_validation():
    with pytest.raises(ValidationError):
        _mild_spec(points=(0.3, 0.2))
    with pytest.raises(ValidationError):
        _mild_spec(points=(0.0, 1.5))
    with pytest.raises(ValidationError):
        _mild_spec(measures=("eof", "banana"))
    with pytest.raises(ValidationError):
        _mild_spec(axis="sideways")


def test_lambda_sweep_rows_and_scaling():
    rows = run_sweep(_mild_spec())
    assert [r.axis_value for r in rows] == [0.0, 0.25, 0.5]
    assert rows[0].state.a1 == 1.0  # uncoupled point stays in the ground state
    assert all(r.error == "" for r in rows)
    # matrix elements scale as lambda^2
    assert rows[1].elements.I1 == pytest.approx(rows[2].elements.I1 / 4.0, rel=1e-12)


def test_empty_measures_still_reports_state():
    rows = run_sweep(_mild_spec(measures=()))
    assert rows[1].measures == {}
    assert rows[1].state is not None and rows[1].trace == pytest.approx(1.0)


def test_sweep_captures_breakdown_rows():
    spec = SweepSpec(
        base=FIG4_BASE,
        axis="lambda",
        points=(0.1, 0.27, 0.5),
        measures=("eof",),
        optimizer_control=FAST_OPT,
    )
    rows = run_sweep(spec)
    assert rows[0].error == "" and rows[1].error == ""
    assert "PerturbationBreakdown" in rows[2].error
    assert rows[2].measures == {}


def test_L_independent_elements_constant_across_sweep(set_a):
    spec = SweepSpec(
        base=set_a,
        axis="aL",
        points=(0.0, 3.34, 33.4),
        measures=(),
    )
    rows = run_sweep(spec)
    i1 = {r.elements.I1 for r in rows}
    i4 = {r.elements.I4 for r in rows}
    assert len(i1) == 1 and len(i4) == 1
    assert rows[0].elements.provenance == "series"
    assert rows[1].elements.provenance == "quadrature"
    # cross-wedge elements do decay
    assert abs(rows[2].elements.I2) < abs(rows[0].elements.I2)


def test_fig4_shape_eof_vs_lambda():
    spec = SweepSpec(
        base=FIG4_BASE,
        axis="lambda",
        points=(0.05, 0.15, 0.25, 0.2625, 0.2675, 0.2725, 0.2775),
        measures=("eof",),
        optimizer_control=FAST_OPT,
    )
    rows = run_sweep(spec)
    eofs = [r.measures["eof"] for r in rows]
    assert eofs[0] == eofs[1] == eofs[2] == 0.0
    assert eofs[3] == 0.0  # still below the onset
    assert all(b > a for a, b in zip(eofs[4:], eofs[5:]))
    assert eofs[-1] > 0.0


def test_find_threshold_fig4_lambda_star():
    spec = SweepSpec(
        base=FIG4_BASE,
        axis="lambda",
        points=tuple(np.linspace(0.0, 0.581, 25)),
        measures=(),
    )
    lam_star = find_threshold(spec, "separability")
    # frozen build-time golden for the separability onset
    assert lam_star == pytest.approx(0.26392, rel=2e-3)
    assert 0.0 < lam_star < 0.581


def test_find_threshold_no_bracket():
    spec = _mild_spec(points=(0.01, 0.02, 0.03))
    with pytest.raises(NoBracket):
        find_threshold(spec, "separability")


def test_csv_roundtrip_and_columns():
    spec = _mild_spec()
    rows = run_sweep(spec)
    text = csv_text(rows, spec.measures)
    header, recs = parse_csv(text)
    assert header == csv_columns(spec.measures)
    assert len(recs) == len(rows)
    for rec, row in zip(recs, rows):
        assert rec["axis_value"] == row.axis_value
        assert rec["I1"] == row.elements.I1
        assert rec["a1"] == row.state.a1
        assert rec["eof"] == row.measures["eof"]
    # every column name appears exactly once
    assert len(set(header)) == len(header)


def test_csv_empty_rows_header_only():
    text = csv_text([], ("eof",))
    assert text.count("\n") == 1
    header, recs = parse_csv(text)
    assert recs == []


def test_csv_single_row_two_lines():
    rows = run_sweep(_mild_spec(points=(0.25,), measures=()))
    text = csv_text(rows, ())
    assert text.count("\n") == 2


def test_csv_deterministic_bytes():
    spec = _mild_spec(measures=("eof", "esq_id"))
    t1 = csv_text(run_sweep(spec), spec.measures)
    t2 = csv_text(run_sweep(spec), spec.measures)
    assert t1.encode() == t2.encode()


def test_csv_error_rows_are_annotated_and_parse():
    spec = SweepSpec(
        base=FIG4_BASE, axis="lambda", points=(0.1, 0.5), measures=("eof",),
        optimizer_control=FAST_OPT,
    )
    rows = run_sweep(spec)
    text = csv_text(rows, spec.measures)
    header, recs = parse_csv(text)
    assert recs[1]["error"].startswith("PerturbationBreakdown")
    assert recs[1]["eof"] is None


def test_emit_csv_to_path(tmp_path):
    spec = _mild_spec(measures=())
    rows = run_sweep(spec)
    dest = tmp_path / "out.csv"
    emit_csv(rows, str(dest), spec.measures)
    assert parse_csv(dest.read_text())[1][0]["axis_value"] == 0.0


def test_parallel_workers_preserve_order_and_values():
    spec = _mild_spec(measures=("eof",))
    seq = csv_text(run_sweep(spec), spec.measures)
    par = csv_text(run_sweep(_mild_spec(measures=("eof",), workers=2)), spec.measures)
    assert seq == par
