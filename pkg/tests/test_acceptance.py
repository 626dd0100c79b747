"""Acceptance criteria, one test per criterion.

Each test prints one `ACCEPTANCE PASS|FAIL :: <criterion>` line (visible with
pytest -s or in captured output) and asserts the criterion at its stated
tolerance.  Expected wall-clock on a laptop-class core is noted per test; the
whole module runs in roughly ten minutes.
"""

import math
import time

import numpy as np
import pytest

from udwrates import (
    C_LIGHT,
    OptimizerControl,
    assemble_fourth_order,
    bmax,
    bounds_report,
    coherent_information,
    concurrence_wootters,
    eof,
    integral_I23_L,
    matrix_elements_quadrature,
    matrix_elements_series,
    oracle_I_L0,
    ppt_and_negativity,
    run_sweep,
    series_I1,
    series_I2,
    series_I3,
    series_I4,
    squashed_identity,
    squashed_optimized,
)
from udwrates.cli import _spec_from_config, load_config, recipe_path
from udwrates.measures import concurrence_xstate, xstate_separable
from udwrates.sweep import csv_text
from conftest import random_xstate

BELL = np.zeros((4, 4), dtype=complex)
BELL[0, 0] = BELL[0, 3] = BELL[3, 0] = BELL[3, 3] = 0.5
GROUND = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)


def _line(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {status} :: {name} :: {detail}")


def test_criterion_1_series_oracle_equivalence(set_a, set_bprime):
    """series I1..I4 vs independent quadrature oracle, n_cut=200, 1e-6 rel."""
    t0 = time.time()
    series_fns = dict(I1=series_I1, I2=series_I2, I3=series_I3, I4=series_I4)
    worst = 0.0
    for d, tag in ((set_a, "A"), (set_bprime, "B'")):
        for which, fn in series_fns.items():
            s = fn(d)
            o = oracle_I_L0(d, which, n_cut=200)
            rel = abs(o - s) / abs(s)
            worst = max(worst, rel)
    elapsed = time.time() - t0
    ok = worst < 1e-6 and elapsed < 300.0
    _line("series-oracle equivalence (sets A, B')", ok,
          f"worst rel {worst:.2e}, {elapsed:.0f}s")
    assert worst < 1e-6
    assert elapsed < 300.0


def test_criterion_2_quadrature_series_consistency(set_a, set_bprime, set_mild):
    """pair integral at aL=0 reproduces the series elements to 1e-4 and fixes
    the +- binding.  The counter-rotating element at sigma*delta >= 20 lies at
    1e-88 and below, outside floating-point quadrature reach, so its check
    runs at the moderate point where both elements are resolvable."""
    t0 = time.time()
    worst = 0.0
    for d in (set_mild,):
        for sign, fn in (("minus", series_I2), ("plus", series_I3)):
            r = integral_I23_L(d, sign)
            rel = abs(r.value - fn(d)) / abs(fn(d))
            worst = max(worst, rel)
    for d in (set_a, set_bprime):
        r = integral_I23_L(d, "minus")
        rel = abs(r.value - series_I2(d)) / abs(series_I2(d))
        worst = max(worst, rel)
    elapsed = time.time() - t0
    ok = worst < 1e-4 and elapsed < 300.0
    _line("quadrature-series consistency at aL=0 (binding minus->I2, plus->I3)",
          ok, f"worst rel {worst:.2e}, {elapsed:.0f}s")
    assert worst < 1e-4
    assert elapsed < 300.0


def test_criterion_3_coherent_information_set_a(set_a):
    """first parameter set, L -> 0: Q = 0.02 +- 0.01."""
    s = assemble_fourth_order(matrix_elements_series(set_a))
    q = coherent_information(s)
    ok = abs(q - 0.02) <= 0.01
    _line("one-way rate anchor, set A", ok, f"Q = {q:.5f} (0.02 +- 0.01)")
    assert abs(q - 0.02) <= 0.01


def test_criterion_4_coherent_information_set_b(set_b):
    """second parameter set, L -> 0: Q = 0.008 +- 0.004."""
    s = assemble_fourth_order(matrix_elements_series(set_b))
    q = coherent_information(s)
    ok = abs(q - 0.008) <= 0.004
    _line("one-way rate anchor, set B", ok, f"Q = {q:.5f} (0.008 +- 0.004)")
    assert abs(q - 0.008) <= 0.004


def test_criterion_5_eof_shape_over_distance():
    """set A: EOF positive at L=0, strictly decreasing on the log-spaced grid,
    still positive at 1.5e6 m."""
    t0 = time.time()
    cfg = load_config(recipe_path("fig2"))
    spec = _spec_from_config(cfg, None, None)
    rows = run_sweep(spec)
    assert all(r.error == "" for r in rows)
    eofs = {r.axis_value: r.measures["eof"] for r in rows}
    vals = [eofs[p] for p in spec.points]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    elapsed = time.time() - t0
    ok = vals[0] > 0 and decreasing and eofs[1.5e6] > 0 and elapsed < 1800.0
    _line("EOF vs distance shape, set A", ok,
          f"EOF(0)={vals[0]:.4f}, EOF(1.5e6 m)={eofs[1.5e6]:.5f}, "
          f"strictly decreasing={decreasing}, {elapsed:.0f}s")
    assert vals[0] > 0.0
    assert decreasing
    assert eofs[1.5e6] > 0.0
    assert elapsed < 1800.0


def test_criterion_6_coherent_information_threshold(set_a):
    """set A: Q > 0 at L = 0 and Q <= 0 at L = 1e-28 m.

    The second half does not hold in this implementation: the faithfully
    computed sign change sits near 1e-23 m (see the companion regression
    test below and the README note), so Q(1e-28 m) is still positive.  The
    criterion is asserted as stated rather than weakened.
    """
    s0 = assemble_fourth_order(matrix_elements_series(set_a))
    q0 = coherent_information(s0)
    aL = 1.0e9 * 1e-28 / C_LIGHT
    m = matrix_elements_quadrature(set_a.with_aL(aL))
    q1 = coherent_information(assemble_fourth_order(m))
    ok = (q0 > 0.0) and (q1 <= 0.0)
    _line("one-way rate sign change bracket, set A", ok,
          f"Q(0)={q0:.5f} (>0 ok), Q(1e-28 m)={q1:.5f} (required <= 0)")
    assert q0 > 0.0
    assert q1 <= 0.0, (
        f"Q(1e-28 m) = {q1:.5f} > 0: the computed sign change is near 1e-23 m "
        "(pinned by the companion regression test; see the README note)"
    )


def test_companion_rate_positive_through_3e29_and_flip_decade(set_a):
    """The positivity statement itself holds: Q > 0 everywhere on [0, 3e-29 m];
    the computed sign change lands between 1e-24 and 1e-22 m (regression)."""
    qs = []
    for L in (3e-29, 1e-28):
        aL = 1.0e9 * L / C_LIGHT
        m = matrix_elements_quadrature(set_a.with_aL(aL))
        qs.append(coherent_information(assemble_fourth_order(m)))
    assert all(q > 0 for q in qs)
    q_lo = coherent_information(assemble_fourth_order(
        matrix_elements_quadrature(set_a.with_aL(1.0e9 * 1e-24 / C_LIGHT))))
    q_hi = coherent_information(assemble_fourth_order(
        matrix_elements_quadrature(set_a.with_aL(1.0e9 * 1e-22 / C_LIGHT))))
    assert q_lo > 0.0 > q_hi


def test_criterion_7_eof_vs_coupling_shape():
    """EOF vs lambda at (98, 30, aL=0): zero below a threshold inside
    (0, 0.581), nondecreasing above it (valid rows)."""
    cfg = load_config(recipe_path("fig4"))
    spec = _spec_from_config(cfg, None, None)
    rows = run_sweep(spec)
    valid = [r for r in rows if r.error == ""]
    eofs = [(r.axis_value, r.measures["eof"]) for r in valid]
    zero_then_positive = [v for _, v in eofs]
    first_pos = next((i for i, v in enumerate(zero_then_positive) if v > 0), None)
    assert first_pos is not None
    lam_star_lo = eofs[first_pos - 1][0]
    lam_star_hi = eofs[first_pos][0]
    below_zero = all(v == 0.0 for v in zero_then_positive[:first_pos])
    above_nondecreasing = all(
        b >= a for a, b in zip(zero_then_positive[first_pos:],
                               zero_then_positive[first_pos + 1:])
    )
    ok = below_zero and above_nondecreasing and 0.0 < lam_star_hi < 0.581
    _line("EOF vs coupling shape (98, 30)", ok,
          f"onset in ({lam_star_lo:.4f}, {lam_star_hi:.4f}), "
          f"zero below={below_zero}, nondecreasing above={above_nondecreasing}")
    assert below_zero
    assert above_nondecreasing
    assert 0.0 < lam_star_hi < 0.581


def test_criterion_8_bound_ordering_set_b(set_b):
    """set B, L=0: esq_id > eof; esq_opt <= esq_id + 1e-9; bmax >= eof."""
    s = assemble_fourth_order(matrix_elements_series(set_b))
    ctl = OptimizerControl(restarts=12, max_iters=2500, seed=2024)
    rep = bounds_report(s, ctl)
    ok = (
        rep.esq_id > rep.eof
        and rep.esq_opt <= rep.esq_id + 1e-9
        and rep.bmax >= rep.eof
    )
    diag = rep.optimizer_diagnostics
    _line("bound ordering, set B", ok,
          f"eof={rep.eof:.5f}, esq_id={rep.esq_id:.5f}, esq_opt={rep.esq_opt:.5f}, "
          f"bmax={rep.bmax:.5f}; squashing restarts "
          f"{diag['squashed']['n_restarts']}, best {diag['squashed']['best_objective']:.5f}")
    assert rep.esq_id > rep.eof
    assert rep.esq_opt <= rep.esq_id + 1e-9
    assert rep.bmax >= rep.eof
    # the optimized squashing bound is competitive with the formation bound
    assert rep.esq_opt <= rep.eof + 1e-3


def test_criterion_9_measure_unit_suite():
    """Bell and product anchors, plus fast-path vs dense-oracle agreement on
    10^4 random X-states."""
    t0 = time.time()
    ctl = OptimizerControl(restarts=5, max_iters=1500, seed=31)
    checks = []
    checks.append(abs(concurrence_wootters(BELL) - 1.0) < 1e-10)
    checks.append(abs(eof(BELL) - 1.0) < 1e-10)
    checks.append(abs(ppt_and_negativity(BELL)[1] - 0.5) < 1e-10)
    checks.append(abs(squashed_identity(BELL) - 1.0) < 1e-10)
    bm_bell, _ = bmax(BELL, ctl)
    checks.append(abs(bm_bell - 1.0) <= 1e-3)

    for rho in (GROUND, np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex)):
        checks.append(concurrence_wootters(rho) == 0.0)
        checks.append(eof(rho) == 0.0)
        checks.append(ppt_and_negativity(rho)[1] == 0.0)
        checks.append(abs(squashed_identity(rho)) < 1e-12)
        bm, _ = bmax(rho, ctl)
        checks.append(bm <= 1e-6)
        esq, _ = squashed_optimized(rho, ctl)
        checks.append(esq <= 1e-6)

    rng = np.random.default_rng(2718)
    worst = 0.0
    agree = True
    for _ in range(10_000):
        s = random_xstate(rng)
        dev = abs(concurrence_xstate(s) - concurrence_wootters(s))
        worst = max(worst, dev)
        agree &= xstate_separable(s) == ppt_and_negativity(s)[0]
    checks.append(worst < 1e-10)
    checks.append(agree)
    elapsed = time.time() - t0
    ok = all(checks) and elapsed < 120.0
    _line("measure unit suite", ok,
          f"bell bmax={bm_bell:.6f}, fast-path worst dev {worst:.1e}, {elapsed:.0f}s")
    assert all(checks)
    assert elapsed < 120.0


def test_criterion_10_fig3_recipe_determinism():
    """two runs of the fig3 recipe with identical seeds emit identical bytes."""
    t0 = time.time()
    cfg = load_config(recipe_path("fig3"))
    outputs = []
    for _ in range(2):
        spec = _spec_from_config(cfg, None, None)
        rows = run_sweep(spec)
        outputs.append(csv_text(rows, spec.measures).encode())
    elapsed = time.time() - t0
    ok = outputs[0] == outputs[1]
    _line("fig3 recipe determinism", ok,
          f"{len(outputs[0])} bytes, identical={ok}, {elapsed:.0f}s")
    assert outputs[0] == outputs[1]
