"""Two-detector density matrix at second and fourth perturbative order.

The joint state of the two detectors is X-structured in the energy basis
(00, 01, 10, 11): populations on the diagonal, one coherence pair linking
00<->11 (c1) and one linking 01<->10 (c2).  Both perturbative assemblies have
unit trace as an algebraic identity, no renormalization involved.

The fourth-order entry formulas are printed for real correlators; complex
inputs (nonzero separation) enter as squared moduli on the diagonal entries,
whose defining expectation values are manifestly nonnegative operators, and
literally on the coherences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import MatrixElements


class PerturbationBreakdown(ArithmeticError):
    """Populations or spectrum incompatible with a weak-coupling state."""


@dataclass(frozen=True)
class XState:
    """X-structured two-qubit state; a1, b1 on the outer (00, 11) block,
    a2, b2 on the inner (01, 10) block."""

    a1: float
    b1: float
    a2: float
    b2: float
    c1: complex
    c2: complex

    def validate(self, pop_floor: float = -1e-10) -> "XState":
        pops = (self.a1, self.b1, self.a2, self.b2)
        if any(not math.isfinite(p) for p in pops):
            raise PerturbationBreakdown(f"non-finite populations {pops}")
        if any(p < pop_floor or p > 1.0 + 1e-12 for p in pops):
            raise PerturbationBreakdown(
                f"populations outside [{pop_floor}, 1]: "
                f"a1={self.a1:.6g} b1={self.b1:.6g} a2={self.a2:.6g} b2={self.b2:.6g}"
            )
        tr = self.a1 + self.b1 + self.a2 + self.b2
        if abs(tr - 1.0) > 1e-12:
            raise PerturbationBreakdown(f"trace deviates from 1 by {tr - 1.0:.3e}")
        return self


def assemble_second_order(m: MatrixElements) -> XState:
    """Lowest nontrivial order; not positive semidefinite whenever c1 != 0."""
    i1 = m.I1
    return XState(
        a1=1.0 - 2.0 * i1,
        b1=0.0,
        a2=i1,
        b2=i1,
        c1=-m.I2,
        c2=m.I3,
    )


def assemble_fourth_order(m: MatrixElements) -> XState:
    """Fourth-order assembly; raises PerturbationBreakdown when the coupling is
    too strong for the truncation (populations leave [0, 1])."""
    i1 = m.I1
    m2, m3, m4 = abs(m.I2) ** 2, abs(m.I3) ** 2, abs(m.I4) ** 2
    quad_sum = i1 * i1 + m2 + m3
    ff_sum = 2.0 * i1 * i1 + m4
    s = XState(
        a1=1.0 - 2.0 * i1 + quad_sum + (2.0 / 3.0) * ff_sum,
        b1=quad_sum,
        a2=i1 - quad_sum - ff_sum / 3.0,
        b2=i1 - quad_sum - ff_sum / 3.0,
        c1=-m.I2 + (4.0 / 3.0) * (2.0 * i1 * m.I2 + m.I3 * m.I4),
        c2=m.I3 - (4.0 / 3.0) * (2.0 * i1 * m.I3 + m.I2 * m.I4),
    )
    return s.validate()


def eigenvalues_xstate(s: XState) -> np.ndarray:
    """All four eigenvalues from the two 2x2 blocks, descending within blocks."""
    out = np.empty(4)
    for i, (a, b, c) in enumerate(((s.a1, s.b1, s.c1), (s.a2, s.b2, s.c2))):
        half_gap = 0.5 * math.hypot(a - b, 2.0 * abs(c))
        mid = 0.5 * (a + b)
        out[2 * i] = mid + half_gap
        out[2 * i + 1] = mid - half_gap
    return out


def min_eigenvalue(s: XState) -> float:
    return float(eigenvalues_xstate(s).min())


def marginal_B(s: XState) -> tuple[float, float]:
    """Second detector's marginal, diag(a1 + b2, a2 + b1)."""
    return (s.a1 + s.b2, s.a2 + s.b1)


def marginal_A(s: XState) -> tuple[float, float]:
    """First detector's marginal, diag(a1 + a2, b2 + b1)."""
    return (s.a1 + s.a2, s.b2 + s.b1)


def to_dense(s: XState) -> np.ndarray:
    """4x4 Hermitian matrix in the (00, 01, 10, 11) basis."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = s.a1
    rho[1, 1] = s.a2
    rho[2, 2] = s.b2
    rho[3, 3] = s.b1
    rho[0, 3] = s.c1
    rho[3, 0] = np.conj(s.c1)
    rho[1, 2] = s.c2
    rho[2, 1] = np.conj(s.c2)
    return rho


def from_dense(rho: np.ndarray) -> XState:
    """Extract the X entries; off-X elements must vanish."""
    rho = np.asarray(rho, dtype=complex)
    mask = np.ones((4, 4), dtype=bool)
    for i, j in ((0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)):
        mask[i, j] = False
    if np.max(np.abs(rho[mask])) > 1e-12:
        raise ValueError("matrix is not X-structured")
    return XState(
        a1=rho[0, 0].real, a2=rho[1, 1].real, b2=rho[2, 2].real, b1=rho[3, 3].real,
        c1=complex(rho[0, 3]), c2=complex(rho[1, 2]),
    )


def validate_dense_state(rho: np.ndarray, eig_floor: float = -1e-9) -> np.ndarray:
    """Check Hermiticity, unit trace and near-positivity of a 4x4 state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("matrix is not Hermitian to 1e-12")
    if abs(np.trace(rho).real - 1.0) > 1e-12 or abs(np.trace(rho).imag) > 1e-12:
        raise ValueError("trace differs from 1 by more than 1e-12")
    if float(np.linalg.eigvalsh(rho).min()) < eig_floor:
        raise PerturbationBreakdown(
            f"minimum eigenvalue {np.linalg.eigvalsh(rho).min():.3e} below {eig_floor}"
        )
    return rho
