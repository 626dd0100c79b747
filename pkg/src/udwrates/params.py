"""Detector parameters and their dimensionless reduction.

Physical inputs (acceleration scale a, Gaussian window width sigma, energy gap
delta, coupling lambda, spatial separation L) appear in every downstream
formula only through the dimensionless groups a*sigma, sigma*delta, a*L/c and
delta/a, plus the conformal measurement offset a*tau0 = ln(aL + 1).  Units are
confined to this module; everything else consumes DimensionlessParams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

C_LIGHT = 299_792_458.0  # m/s, applied once when converting L in meters


class ValidationError(ValueError):
    """A parameter is non-finite or outside its allowed range."""


def _require(cond: bool, field: str, msg: str) -> None:
    if not cond:
        raise ValidationError(f"{field}: {msg}")


@dataclass(frozen=True)
class DetectorParams:
    """Physical inputs; both detectors share a, sigma, delta, lam.

    a:     acceleration scale (Hz)
    sigma: Gaussian window width (s)
    delta: detector energy gap (Hz)
    lam:   coupling strength, in [0, 1]
    L:     spatial separation (m)
    """

    a: float
    sigma: float
    delta: float
    lam: float
    L: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "sigma", "delta", "lam", "L"):
            _require(math.isfinite(getattr(self, name)), name, "must be finite")
        _require(self.a > 0, "a", "must be > 0")
        _require(self.sigma > 0, "sigma", "must be > 0")
        _require(self.delta >= 0, "delta", "must be >= 0")
        _require(0.0 <= self.lam <= 1.0, "lam", "must lie in [0, 1]")
        _require(self.L >= 0, "L", "must be >= 0")


@dataclass(frozen=True)
class DimensionlessParams:
    """The groups every matrix-element formula is written in."""

    a_sigma: float
    sigma_delta: float
    aL: float
    lam: float

    def __post_init__(self) -> None:
        for name in ("a_sigma", "sigma_delta", "aL", "lam"):
            _require(math.isfinite(getattr(self, name)), name, "must be finite")
            _require(getattr(self, name) >= 0, name, "must be >= 0")
        _require(self.a_sigma > 0, "a_sigma", "must be > 0")
        _require(self.lam <= 1.0, "lam", "must lie in [0, 1]")

    @property
    def delta_over_a(self) -> float:
        return self.sigma_delta / self.a_sigma

    @property
    def a_tau0(self) -> float:
        """Conformal offset of the future-wedge measurement, ln(aL + 1)."""
        return math.log1p(self.aL)

    def with_lam(self, lam: float) -> "DimensionlessParams":
        return replace(self, lam=lam)

    def with_aL(self, aL: float) -> "DimensionlessParams":
        return replace(self, aL=aL)


def derive_dimensionless(p: DetectorParams) -> DimensionlessParams:
    """Reduce physical detector parameters to their dimensionless groups."""
    return DimensionlessParams(
        a_sigma=p.a * p.sigma,
        sigma_delta=p.sigma * p.delta,
        aL=p.a * p.L / C_LIGHT,
        lam=p.lam,
    )


def params_from_dimensionless(
    a_sigma: float, sigma_delta: float, aL: float, lam: float
) -> DimensionlessParams:
    """Build DimensionlessParams directly (parameter-study entry point)."""
    return DimensionlessParams(a_sigma=a_sigma, sigma_delta=sigma_delta, aL=aL, lam=lam)


def aL_from_meters(a: float, L_meters: float) -> float:
    _require(math.isfinite(L_meters) and L_meters >= 0, "L", "must be finite and >= 0")
    return a * L_meters / C_LIGHT
