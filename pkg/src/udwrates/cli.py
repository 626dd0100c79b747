"""Command-line interface.

Subcommands: point (one bounds report), sweep (CSV), threshold (single number),
oracle (series vs quadrature cross-validation).  Configuration comes from a
YAML file; --seed and --tol override the file.  Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import math
import sys
from importlib.resources import files

import click
import yaml

from .measures import (
    OptimizerControl,
    OptimizerDiverged,
    bounds_report,
)
from .params import (
    DetectorParams,
    DimensionlessParams,
    ValidationError,
    derive_dimensionless,
    params_from_dimensionless,
)
from .quadrature import (
    QuadratureControl,
    SingularDenominator,
    ToleranceNotMet,
    matrix_elements_quadrature,
    oracle_I_L0,
)
from .series import (
    NonConvergence,
    SeriesControl,
    matrix_elements_series,
    series_I1,
    series_I2,
    series_I3,
    series_I4,
)
from .state import PerturbationBreakdown, assemble_fourth_order
from .sweep import (
    NoBracket,
    SweepSpec,
    build_points,
    emit_csv,
    find_threshold,
    run_sweep,
)

_NUMERICAL = (NonConvergence, ToleranceNotMet, NoBracket, OptimizerDiverged,
              PerturbationBreakdown, SingularDenominator)


def recipe_path(name: str) -> str:
    """Filesystem path of a shipped figure recipe (fig2, fig3, fig4)."""
    res = files("udwrates") / "recipes" / f"{name}.yaml"
    return str(res)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = yaml.safe_load(fh) or {}
    if not isinstance(cfg, dict):
        raise ValidationError("config: top level must be a mapping")
    return cfg


def _base_params(cfg: dict) -> tuple[DimensionlessParams, float]:
    """Returns (dimensionless base, detector a in Hz for meter conversions)."""
    p = cfg.get("params", {})
    if "a_sigma" in p:
        base = params_from_dimensionless(
            float(p["a_sigma"]), float(p["sigma_delta"]),
            float(p.get("aL", 0.0)), float(p.get("lam", 1.0)),
        )
        return base, float(p.get("a", 1.0e9))
    phys = DetectorParams(
        a=float(p["a"]), sigma=float(p["sigma"]), delta=float(p["delta"]),
        lam=float(p.get("lam", 1.0)), L=float(p.get("L", 0.0)),
    )
    return derive_dimensionless(phys), phys.a


def _controls(cfg: dict, seed: int | None, tol: float | None):
    s = cfg.get("series", {})
    q = dict(cfg.get("quadrature", {}))
    o = dict(cfg.get("optimizer", {}))
    if tol is not None:
        q["rel_tol"] = tol
    if seed is not None:
        o["seed"] = seed
    return (
        SeriesControl(**{k: v for k, v in s.items()}),
        QuadratureControl(**{k: v for k, v in q.items()}),
        OptimizerControl(**{k: v for k, v in o.items()}),
    )


def _spec_from_config(cfg: dict, seed: int | None, tol: float | None) -> SweepSpec:
    base, det_a = _base_params(cfg)
    sctl, qctl, octl = _controls(cfg, seed, tol)
    return SweepSpec(
        base=base,
        axis=cfg.get("axis", "aL"),
        points=build_points(cfg.get("points", [0.0])),
        measures=tuple(cfg.get("measures", [])),
        series_control=sctl,
        quadrature_control=qctl,
        optimizer_control=octl,
        pole_prescription=cfg.get("pole_prescription", "principal_value"),
        detector_a=det_a,
        workers=int(cfg.get("workers", 1)),
    )


def _effective_config(cfg: dict, seed, tol) -> dict:
    out = dict(cfg)
    if seed is not None:
        out.setdefault("optimizer", {})
        out["optimizer"] = dict(out["optimizer"], seed=seed)
    if tol is not None:
        out.setdefault("quadrature", {})
        out["quadrature"] = dict(out["quadrature"], rel_tol=tol)
    return out


def _fail(exc: Exception) -> "click.exceptions.Exit":
    kind = type(exc).__name__
    click.echo(f"error ({kind}): {exc}", err=True)
    if isinstance(exc, (ValidationError, KeyError, yaml.YAMLError)):
        sys.exit(1)
    if isinstance(exc, _NUMERICAL):
        sys.exit(2)
    if isinstance(exc, OSError):
        sys.exit(3)
    raise exc


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML configuration file (see recipes/ for examples).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Output file; stdout when omitted.")
@click.option("--seed", type=int, default=None, help="Override optimizer seed.")
@click.option("--tol", type=float, default=None,
              help="Override quadrature relative tolerance / oracle threshold.")
@click.option("--print-config", is_flag=True,
              help="Dump the effective merged configuration and exit.")
@click.pass_context
def main(ctx, config_path, out_path, seed, tol, print_config):
    """Two-detector vacuum response and covert-communication rate bounds."""
    try:
        cfg = load_config(config_path)
    except (OSError, yaml.YAMLError, ValidationError) as exc:
        _fail(exc)
    ctx.obj = dict(cfg=cfg, out=out_path, seed=seed, tol=tol)
    if print_config:
        click.echo(yaml.safe_dump(_effective_config(cfg, seed, tol),
                                  default_flow_style=False, sort_keys=True).rstrip())
        ctx.exit(0)


@main.command()
@click.pass_context
def point(ctx):
    """Evaluate every bound at the configured parameter point."""
    o = ctx.obj
    try:
        base, _ = _base_params(o["cfg"])
        sctl, qctl, octl = _controls(o["cfg"], o["seed"], o["tol"])
        prescription = o["cfg"].get("pole_prescription", "principal_value")
        if base.aL == 0.0:
            m = matrix_elements_series(base, sctl)
        else:
            m = matrix_elements_quadrature(base, qctl, prescription, sctl)
        s = assemble_fourth_order(m)
        rep = bounds_report(s, octl, optimize=True)
        lines = [
            f"a_sigma={base.a_sigma:g} sigma_delta={base.sigma_delta:g} "
            f"aL={base.aL:g} lambda={base.lam:g}",
            f"I1={m.I1:.12g}  I2={m.I2:.12g}  I3={m.I3:.12g}  I4={m.I4:.12g}",
            f"state: a1={s.a1:.12g} b1={s.b1:.12g} a2={s.a2:.12g} b2={s.b2:.12g}",
            f"       c1={s.c1:.12g} c2={s.c2:.12g}",
            f"ppt={rep.ppt}  negativity={rep.negativity:.9g}  "
            f"concurrence={rep.concurrence:.9g}",
            f"eof={rep.eof:.9g}  coherent_info={rep.coherent_info:.9g}",
            f"esq_id={rep.esq_id:.9g}  esq_opt={rep.esq_opt:.9g}  bmax={rep.bmax:.9g}",
        ]
        text = "\n".join(lines) + "\n"
        if o["out"]:
            with open(o["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        _fail(exc)


@main.command()
@click.pass_context
def sweep(ctx):
    """Run the configured sweep and emit CSV."""
    o = ctx.obj
    try:
        spec = _spec_from_config(o["cfg"], o["seed"], o["tol"])
        rows = run_sweep(spec)
        if o["out"]:
            emit_csv(rows, o["out"], spec.measures)
        else:
            emit_csv(rows, sys.stdout, spec.measures)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@click.option("--target", type=click.Choice(["separability", "coherent_information"]),
              default="separability")
@click.pass_context
def threshold(ctx, target):
    """Locate the axis value where the target quantity changes sign."""
    o = ctx.obj
    try:
        spec = _spec_from_config(o["cfg"], o["seed"], o["tol"])
        value = find_threshold(spec, target)
        text = f"{value:.17g}\n"
        if o["out"]:
            with open(o["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@click.option("--n-cut", type=int, default=200, show_default=True)
@click.pass_context
def oracle(ctx, n_cut):
    """Cross-validate the series elements against the quadrature oracle."""
    o = ctx.obj
    tol = o["tol"] if o["tol"] is not None else 1e-6
    try:
        base, _ = _base_params(o["cfg"])
        if base.aL != 0.0:
            raise ValidationError("oracle validation runs at aL = 0")
        sctl, qctl, _ = _controls(o["cfg"], o["seed"], None)
        series_vals = {
            "I1": series_I1(base, sctl), "I2": series_I2(base, sctl),
            "I3": series_I3(base, sctl), "I4": series_I4(base, sctl),
        }
        worst = 0.0
        lines = []
        for which, sv in series_vals.items():
            ov = oracle_I_L0(base, which, n_cut, qctl)
            rel = abs(ov - sv) / max(abs(sv), 1e-300)
            worst = max(worst, rel)
            lines.append(f"{which}: series={sv:.15e} oracle={ov.real:.15e} rel={rel:.3e}")
        lines.append(f"worst relative deviation: {worst:.3e} (tolerance {tol:g})")
        click.echo("\n".join(lines))
        if not math.isfinite(worst) or worst > tol:
            raise ToleranceNotMet(f"worst deviation {worst:.3e} exceeds {tol:g}")
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


if __name__ == "__main__":
    main()
