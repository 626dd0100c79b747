"""Parameter sweeps, threshold search and CSV emission.

A sweep walks one axis (separation in meters, dimensionless aL, or the
coupling), evaluates the matrix elements (series at aL = 0, quadrature for the
cross-wedge pair at aL > 0), assembles the fourth-order state and the requested
measures, and emits rows whose byte representation is reproducible for fixed
controls and seeds.  A failing point (for instance perturbation breakdown at
strong coupling) is captured as an annotated row instead of aborting the run.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measures import (
    DEFAULT_OPTIMIZER_CONTROL,
    OptimizerControl,
    bmax,
    coherent_information,
    concurrence_xstate,
    eof,
    ppt_and_negativity,
    squashed_identity,
    squashed_optimized,
)
from .params import C_LIGHT, DimensionlessParams, ValidationError
from .quadrature import (
    DEFAULT_QUADRATURE_CONTROL,
    QuadratureControl,
    matrix_elements_quadrature,
)
from .series import (
    DEFAULT_SERIES_CONTROL,
    MatrixElements,
    SeriesControl,
    matrix_elements_series,
)
from .state import PerturbationBreakdown, XState, assemble_fourth_order, min_eigenvalue

MEASURES = ("eof", "coh_info", "esq_id", "esq_opt", "bmax", "negativity")
AXES = ("L_meters", "aL", "lambda")


@dataclass(frozen=True)
class SweepSpec:
    base: DimensionlessParams
    axis: str
    points: tuple[float, ...]
    measures: tuple[str, ...] = ()
    series_control: SeriesControl = DEFAULT_SERIES_CONTROL
    quadrature_control: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
    optimizer_control: OptimizerControl = DEFAULT_OPTIMIZER_CONTROL
    pole_prescription: str = "principal_value"
    detector_a: float = 1.0e9  # Hz; converts L in meters to aL
    workers: int = 1

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValidationError(f"axis: must be one of {AXES}")
        if not self.points:
            raise ValidationError("points: must be nonempty")
        pts = list(self.points)
        if any(not math.isfinite(p) for p in pts):
            raise ValidationError("points: must be finite")
        if sorted(pts) != pts or len(set(pts)) != len(pts):
            raise ValidationError("points: must be strictly increasing")
        if self.axis == "lambda" and (pts[0] < 0.0 or pts[-1] > 1.0):
            raise ValidationError("points: lambda axis values must lie in [0, 1]")
        if self.axis != "lambda" and pts[0] < 0.0:
            raise ValidationError("points: separations must be >= 0")
        unknown = set(self.measures) - set(MEASURES)
        if unknown:
            raise ValidationError(f"measures: unknown {sorted(unknown)}")
        if self.workers < 1:
            raise ValidationError("workers: must be >= 1")


def build_points(spec: dict) -> tuple[float, ...]:
    """Resolve a points description: explicit list, or min/max/count with scale."""
    if isinstance(spec, (list, tuple)):
        return tuple(float(p) for p in spec)
    scale = spec.get("scale", "linear")
    lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
    if count < 1:
        raise ValidationError("points.count: must be >= 1")
    if scale == "linear":
        return tuple(np.linspace(lo, hi, count))
    if scale == "log":
        if lo <= 0:
            raise ValidationError("points.min: log scale needs min > 0")
        return tuple(np.geomspace(lo, hi, count))
    raise ValidationError(f"points.scale: unknown {scale!r}")


@dataclass
class SweepRow:
    axis_value: float
    elements: Optional[MatrixElements] = None
    state: Optional[XState] = None
    trace: Optional[float] = None
    min_eigenvalue: Optional[float] = None
    measures: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    error: str = ""


def _params_at(spec: SweepSpec, value: float) -> DimensionlessParams:
    if spec.axis == "lambda":
        return spec.base.with_lam(value)
    if spec.axis == "aL":
        return spec.base.with_aL(value)
    return spec.base.with_aL(spec.detector_a * value / C_LIGHT)


def evaluate_point(spec: SweepSpec, index: int, value: float) -> SweepRow:
    """Evaluate one sweep point; numerical failures land in row.error."""
    row = SweepRow(axis_value=value)
    try:
        d = _params_at(spec, value)
        if d.aL == 0.0:
            m = matrix_elements_series(d, spec.series_control)
        else:
            m = matrix_elements_quadrature(
                d, spec.quadrature_control, spec.pole_prescription, spec.series_control
            )
        row.elements = m
        s = assemble_fourth_order(m)
        row.state = s
        row.trace = s.a1 + s.b1 + s.a2 + s.b2
        row.min_eigenvalue = min_eigenvalue(s)
        octl = OptimizerControl(
            restarts=spec.optimizer_control.restarts,
            max_iters=spec.optimizer_control.max_iters,
            seed=int(np.random.SeedSequence(
                [spec.optimizer_control.seed, index]).generate_state(1)[0]),
            xatol=spec.optimizer_control.xatol,
            fatol=spec.optimizer_control.fatol,
        )
        for name in spec.measures:
            if name == "eof":
                row.measures["eof"] = eof(s)
            elif name == "coh_info":
                row.measures["coh_info"] = coherent_information(s)
            elif name == "esq_id":
                row.measures["esq_id"] = squashed_identity(s)
            elif name == "negativity":
                row.measures["negativity"] = ppt_and_negativity(s)[1]
            elif name == "esq_opt":
                val, diag = squashed_optimized(s, octl)
                row.measures["esq_opt"] = val
                row.diagnostics["esq_opt"] = _compact_diag(diag)
            elif name == "bmax":
                val, diag = bmax(s, octl)
                row.measures["bmax"] = val
                row.diagnostics["bmax"] = _compact_diag(diag)
    except (PerturbationBreakdown, ArithmeticError, RuntimeError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _compact_diag(diag: dict) -> dict:
    return dict(
        n_restarts=diag.get("n_restarts"),
        best_objective=diag.get("best_objective"),
        all_converged=all(r.get("converged", False) for r in diag.get("runs", [])),
    )


def _worker(args) -> SweepRow:
    spec, index, value = args
    return evaluate_point(spec, index, value)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every point; rows come back in axis order regardless of workers."""
    jobs = [(spec, i, v) for i, v in enumerate(spec.points)]
    if spec.workers == 1:
        return [_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(_worker, jobs))


# ---------------------------------------------------------------------------
# threshold search
# ---------------------------------------------------------------------------

class NoBracket(RuntimeError):
    """The target quantity does not change sign over the sweep range."""


def _threshold_metric(spec: SweepSpec, target: str):
    def metric(value: float) -> float:
        d = _params_at(spec, value)
        if d.aL == 0.0:
            m = matrix_elements_series(d, spec.series_control)
        else:
            m = matrix_elements_quadrature(
                d, spec.quadrature_control, spec.pole_prescription, spec.series_control
            )
        s = assemble_fourth_order(m)
        if target == "separability":
            return concurrence_xstate(s)
        return coherent_information(s)

    return metric


def find_threshold(spec: SweepSpec, target: str = "separability",
                   rel_tol: float = 1e-3) -> float:
    """Bisect the axis value where the target first becomes positive.

    target 'separability' locates the concurrence onset; 'coherent_information'
    locates the sign change of the one-way rate.  Points where the state is
    invalid (perturbation breakdown) are skipped while scanning for a bracket.
    """
    if target not in ("separability", "coherent_information"):
        raise ValidationError("target: 'separability' or 'coherent_information'")
    metric = _threshold_metric(spec, target)

    samples: list[tuple[float, float]] = []
    for v in spec.points:
        try:
            samples.append((v, metric(v)))
        except (PerturbationBreakdown, ArithmeticError):
            continue
    lo = hi = None
    for (v0, m0), (v1, m1) in zip(samples, samples[1:]):
        if (m0 <= 0.0 < m1) or (m1 <= 0.0 < m0):
            lo, hi = v0, v1
            break
    if lo is None:
        raise NoBracket(f"{target} does not cross zero over the sweep range")

    f_lo = metric(lo)
    while hi - lo > rel_tol * max(abs(hi), abs(lo), 1e-300):
        mid = 0.5 * (lo + hi)
        try:
            f_mid = metric(mid)
        except (PerturbationBreakdown, ArithmeticError):
            hi = mid
            continue
        if (f_lo <= 0.0) == (f_mid <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# CSV contract
# ---------------------------------------------------------------------------

_BASE_COLUMNS = [
    "axis_value",
    "I1", "I2_re", "I2_im", "I3_re", "I3_im", "I4_re", "I4_im",
    "I2_error", "I3_error", "provenance",
    "a1", "b1", "a2", "b2", "c1_re", "c1_im", "c2_re", "c2_im",
    "trace", "min_eigenvalue",
]
_DIAG_COLUMNS = ["{m}_restarts", "{m}_best", "{m}_converged"]


def csv_columns(measures: tuple[str, ...]) -> list[str]:
    cols = list(_BASE_COLUMNS)
    for m in measures:
        cols.append(m)
        if m in ("esq_opt", "bmax"):
            cols.extend(c.format(m=m) for c in _DIAG_COLUMNS)
    cols.append("error")
    return cols


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _row_values(row: SweepRow, measures: tuple[str, ...]) -> list[str]:
    m, s = row.elements, row.state
    vals = [_fmt(row.axis_value)]
    if m is None:
        vals += [""] * 9 + [""]
    else:
        vals += [_fmt(m.I1), _fmt(m.I2.real), _fmt(m.I2.imag), _fmt(m.I3.real),
                 _fmt(m.I3.imag), _fmt(m.I4.real), _fmt(m.I4.imag),
                 _fmt(m.I2_error), _fmt(m.I3_error), m.provenance]
    if s is None:
        vals += [""] * 10
    else:
        vals += [_fmt(s.a1), _fmt(s.b1), _fmt(s.a2), _fmt(s.b2),
                 _fmt(s.c1.real), _fmt(s.c1.imag), _fmt(s.c2.real), _fmt(s.c2.imag),
                 _fmt(row.trace), _fmt(row.min_eigenvalue)]
    for name in measures:
        vals.append(_fmt(row.measures.get(name)))
        if name in ("esq_opt", "bmax"):
            d = row.diagnostics.get(name, {})
            vals += [_fmt(d.get("n_restarts")), _fmt(d.get("best_objective")),
                     _fmt(d.get("all_converged"))]
    # the annotation must stay a single CSV cell
    vals.append(row.error.replace(",", ";").replace("\n", " "))
    return vals


def emit_csv(rows: list[SweepRow], destination, measures: tuple[str, ...] = ()) -> None:
    """Write header plus one line per row; full round-trip precision, LF endings."""
    close = False
    if isinstance(destination, (str, bytes)):
        destination = open(destination, "w", encoding="utf-8", newline="")
        close = True
    try:
        destination.write(",".join(csv_columns(measures)) + "\n")
        for row in rows:
            destination.write(",".join(_row_values(row, measures)) + "\n")
    finally:
        if close:
            destination.close()


def csv_text(rows: list[SweepRow], measures: tuple[str, ...] = ()) -> str:
    buf = io.StringIO()
    emit_csv(rows, buf, measures)
    return buf.getvalue()


def parse_csv(text: str) -> tuple[list[str], list[dict]]:
    """Parse an emitted sweep CSV back into header and typed row dictionaries."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"row has {len(cells)} cells, header has {len(header)}")
        rec = {}
        for key, cell in zip(header, cells):
            if cell == "":
                rec[key] = None
            elif key in ("provenance", "error"):
                rec[key] = cell
            elif cell in ("true", "false"):
                rec[key] = cell == "true"
            else:
                rec[key] = float(cell)
        out.append(rec)
    return header, out
