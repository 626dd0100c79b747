"""Entanglement measures and secret-key-rate bounds on two-qubit states.

Closed forms (negativity, Wootters concurrence, entanglement of formation,
coherent information, identity-squashed entanglement) are evaluated directly;
the squashed entanglement over two-dimensional squashing systems and the
max-relative-entropy bound over separable states need derivative-free
minimization, run as seeded multi-restart Nelder-Mead so results are
bit-reproducible for a fixed control block.

All entropies and logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .params import ValidationError
from .special import binary_entropy
from .state import XState, eigenvalues_xstate, marginal_A, marginal_B, to_dense

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SY, _SY)

# floor keeping the inverse square root of the separable reference defined
_BMAX_MU = 1e-12

# eigenvalue dust tolerated from fourth-order truncation before flagging
_EIG_CLAMP = 1e-9


class InvalidSpectrum(ValueError):
    """Spectrum outside the tolerated deviation from a probability vector."""


class OptimizerDiverged(RuntimeError):
    """No optimizer restart produced a finite objective."""


@dataclass(frozen=True)
class OptimizerControl:
    restarts: int = 24
    max_iters: int = 2000
    seed: int = 0
    xatol: float = 1e-7
    fatol: float = 1e-11

    def __post_init__(self) -> None:
        if self.restarts < 1 or self.max_iters < 1:
            raise ValidationError("restarts/max_iters: must be >= 1")
        if self.xatol <= 0 or self.fatol <= 0:
            raise ValidationError("xatol/fatol: must be > 0")


DEFAULT_OPTIMIZER_CONTROL = OptimizerControl()


@dataclass
class BoundsReport:
    """Every computed bound for one parameter point."""

    ppt: bool
    negativity: float
    concurrence: float
    eof: float
    coherent_info: float
    esq_id: float
    esq_opt: Optional[float] = None
    bmax: Optional[float] = None
    optimizer_diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# entropies and closed-form measures
# ---------------------------------------------------------------------------

def von_neumann_entropy(spectrum: Sequence[float]) -> float:
    """-sum p log2 p with 0 log 0 = 0; tiny negatives are clamped."""
    p = np.asarray(spectrum, dtype=float)
    if p.min() < -_EIG_CLAMP:
        raise InvalidSpectrum(f"eigenvalue {p.min():.3e} below -{_EIG_CLAMP}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidSpectrum(f"spectrum sums to {p.sum():.12f}, not 1")
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def _entropy_of(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(rho)
    return von_neumann_entropy(ev)


def _as_dense(s) -> np.ndarray:
    return to_dense(s) if isinstance(s, XState) else np.asarray(s, dtype=complex)


def partial_trace_B(rho: np.ndarray) -> np.ndarray:
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("abxb->ax", r)


def partial_trace_A(rho: np.ndarray) -> np.ndarray:
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("abay->by", r)


def partial_transpose_B(rho: np.ndarray) -> np.ndarray:
    r = rho.reshape(2, 2, 2, 2)
    return np.transpose(r, (0, 3, 2, 1)).reshape(4, 4)


def ppt_and_negativity(s) -> tuple[bool, float]:
    """PPT flag and negativity; for two qubits PPT is exactly separability."""
    rho = _as_dense(s)
    ev = np.linalg.eigvalsh(partial_transpose_B(rho))
    negativity = float(-ev[ev < 0.0].sum())
    return negativity < 1e-12, negativity


def xstate_separable(s: XState) -> bool:
    """Closed-form PPT test: |c1| <= sqrt(a2 b2) and |c2| <= sqrt(a1 b1)."""
    return (
        abs(s.c1) <= math.sqrt(max(s.a2 * s.b2, 0.0))
        and abs(s.c2) <= math.sqrt(max(s.a1 * s.b1, 0.0))
    )


def concurrence_wootters(s) -> float:
    """Spin-flip concurrence from the eigenvalues of rho (Y x Y) rho* (Y x Y)."""
    rho = _as_dense(s)
    r = rho @ _YY @ rho.conj() @ _YY
    ev = np.linalg.eigvals(r)
    lam = np.sqrt(np.clip(np.sort(ev.real)[::-1], 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_xstate(s: XState) -> float:
    """X-structure fast path: 2 max(0, |c1| - sqrt(a2 b2), |c2| - sqrt(a1 b1))."""
    return 2.0 * max(
        0.0,
        abs(s.c1) - math.sqrt(max(s.a2 * s.b2, 0.0)),
        abs(s.c2) - math.sqrt(max(s.a1 * s.b1, 0.0)),
    )


def eof(s) -> float:
    """Entanglement of formation from the concurrence, in bits."""
    c = concurrence_xstate(s) if isinstance(s, XState) else concurrence_wootters(s)
    if c <= 0.0:
        return 0.0
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c))))


def coherent_information(s: XState) -> float:
    """H(B) - H(AB); a lower bound on the one-way rate, may be negative."""
    hb = von_neumann_entropy(marginal_B(s))
    ev = np.clip(eigenvalues_xstate(s), 0.0, None)
    hab = von_neumann_entropy(ev / ev.sum() if abs(ev.sum() - 1) < 1e-9 else ev)
    return hb - hab


def squashed_identity(s) -> float:
    """Half the mutual information, the trivial-squashing upper bound."""
    if isinstance(s, XState):
        ha = von_neumann_entropy(marginal_A(s))
        hb = von_neumann_entropy(marginal_B(s))
        hab = von_neumann_entropy(np.clip(eigenvalues_xstate(s), 0.0, None))
    else:
        rho = _as_dense(s)
        ha = _entropy_of(partial_trace_B(rho))
        hb = _entropy_of(partial_trace_A(rho))
        hab = _entropy_of(rho)
    return 0.5 * (ha + hb - hab)


# ---------------------------------------------------------------------------
# optimized squashed entanglement
#
# The state is purified into a four-dimensional environment; squashing
# channels with a two-dimensional output are parametrized through Stinespring
# isometries W: E -> E~ (x) F built as exp of an anti-Hermitian generator
# acting on a base isometry.  Restarts ladder through Kraus ranks 2 and 4
# (where the simplex converges reliably) and a final polish runs in the full
# 2 (x) 8 family around the best point found.
# ---------------------------------------------------------------------------

_RANK_LADDER = {"rank2": 2, "rank4": 4, "rank8": 8}


def _purify(rho: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(rho)
    ev = np.clip(ev, 0.0, None)
    return vec * np.sqrt(ev)[None, :]  # psi[ab, k]


def _n_params(dim_f: int) -> int:
    n = 2 * dim_f
    return 16 + 8 * (n - 4) if n > 4 else 16


def _generator(theta: np.ndarray, dim_f: int) -> np.ndarray:
    n = 2 * dim_f
    a11 = np.zeros((4, 4), dtype=complex)
    idx = 0
    for i in range(4):
        for j in range(i + 1, 4):
            a11[i, j] = theta[idx] + 1j * theta[idx + 1]
            a11[j, i] = -theta[idx] + 1j * theta[idx + 1]
            idx += 2
    for i in range(4):
        a11[i, i] = 1j * theta[idx]
        idx += 1
    a = np.zeros((n, n), dtype=complex)
    a[:4, :4] = a11
    if n > 4:
        m = n - 4
        g = (theta[idx: idx + 4 * m] + 1j * theta[idx + 4 * m: idx + 8 * m]).reshape(m, 4)
        a[4:, :4] = g
        a[:4, 4:] = -g.conj().T
    return a


def _isometry(theta: np.ndarray, dim_f: int, base: Optional[np.ndarray]) -> np.ndarray:
    u = expm(_generator(theta, dim_f))
    w = u[:, :4] if base is None else u @ base
    return w


def _embed_isometry(w: np.ndarray, dim_f_from: int, dim_f_to: int) -> np.ndarray:
    """Pad the F factor with zero rows: (2*f1, 4) -> (2*f2, 4), f2 >= f1."""
    out = np.zeros((2 * dim_f_to, 4), dtype=complex)
    w3 = w.reshape(2, dim_f_from, 4)
    out3 = out.reshape(2, dim_f_to, 4)
    out3[:, :dim_f_from, :] = w3
    return out


def _cmi_objective(theta: np.ndarray, psi: np.ndarray, dim_f: int,
                   base: Optional[np.ndarray]) -> float:
    try:
        w = _isometry(theta, dim_f, base)
        wr = w.reshape(2, dim_f, 4)
        chi = np.einsum("sk,efk->sef", psi, wr).reshape(2, 2, 2, dim_f)
        rho_abe = np.einsum("abef,xyzf->abexyz", chi, chi.conj()).reshape(8, 8)
        rho_ae = np.einsum("abef,xbzf->aexz", chi, chi.conj()).reshape(4, 4)
        rho_be = np.einsum("abef,ayzf->beyz", chi, chi.conj()).reshape(4, 4)
        rho_e = np.einsum("abef,abzf->ez", chi, chi.conj())
        h = []
        for m in (rho_ae, rho_be, rho_abe, rho_e):
            ev = np.clip(np.linalg.eigvalsh(m), 0.0, None)
            ev = ev[ev > 1e-16]
            h.append(float(-(ev * np.log2(ev)).sum()))
        return 0.5 * (h[0] + h[1] - h[2] - h[3])
    except np.linalg.LinAlgError:
        return math.inf


def squashed_optimized(
    s, ctl: OptimizerControl = DEFAULT_OPTIMIZER_CONTROL
) -> tuple[float, dict]:
    """Squashed entanglement minimized over two-dimensional squashing outputs.

    Returns (value, diagnostics); the value is an upper bound on the true
    infimum restricted to |E~| = 2 and never exceeds the identity squashing.
    """
    rho = _as_dense(s)
    psi = _purify(rho)
    esq_id = squashed_identity(rho)

    n_r = ctl.restarts
    schedule: list[str] = ["rank2" if r % 2 == 0 else "rank4" for r in range(max(1, n_r - 1))]
    runs: list[dict] = []
    best_val, best_w, best_dim = math.inf, None, 2

    def run(kind: str, x0: np.ndarray, base, tag: int, budget: int) -> None:
        nonlocal best_val, best_w, best_dim
        dim_f = _RANK_LADDER[kind]
        res = minimize(
            _cmi_objective, x0, args=(psi, dim_f, base), method="Nelder-Mead",
            options=dict(maxiter=budget, maxfev=budget,
                         xatol=ctl.xatol, fatol=ctl.fatol, adaptive=True),
        )
        runs.append(dict(kind=kind, restart=tag, value=float(res.fun),
                         nfev=int(res.nfev), converged=bool(res.success)))
        if math.isfinite(res.fun) and res.fun < best_val:
            best_val = float(res.fun)
            best_w = _isometry(res.x, dim_f, base)
            best_dim = dim_f

    for tag, kind in enumerate(schedule):
        n_par = _n_params(_RANK_LADDER[kind])
        rng = np.random.default_rng([ctl.seed, 211, tag])
        x0 = rng.normal(scale=0.7, size=n_par)
        # the simplex needs walltime proportional to the chart dimension
        run(kind, x0, None, tag, budget=ctl.max_iters * max(1, n_par // 16))

    if n_r > 1 and best_w is not None and math.isfinite(best_val):
        # final polish in the full 2 (x) 8 Stinespring family around the best
        base8 = _embed_isometry(best_w, best_dim, 8)
        run("rank8", np.zeros(_n_params(8)), base8, len(schedule), budget=ctl.max_iters)

    diagnostics = dict(
        n_restarts=len(runs), runs=runs, esq_id=esq_id,
        best_objective=best_val if math.isfinite(best_val) else None,
        diverged=not math.isfinite(best_val),
    )
    if not math.isfinite(best_val):
        return esq_id, diagnostics
    return max(0.0, min(best_val, esq_id)), diagnostics


# ---------------------------------------------------------------------------
# max-relative-entropy bound over separable states
# ---------------------------------------------------------------------------

def _qubit(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2.0),
                     complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)])


def _xi_from_params(p: np.ndarray) -> np.ndarray:
    w = p[:16] ** 2
    tot = w.sum()
    w = w / tot if tot > 0 else np.full(16, 1.0 / 16.0)
    ang = p[16:].reshape(16, 4)
    xi = np.zeros((4, 4), dtype=complex)
    for i in range(16):
        v = np.kron(_qubit(ang[i, 0], ang[i, 1]), _qubit(ang[i, 2], ang[i, 3]))
        xi += w[i] * np.outer(v, v.conj())
    return xi


def _dmax_objective(p: np.ndarray, rho: np.ndarray) -> float:
    xi = (1.0 - _BMAX_MU) * _xi_from_params(p) + _BMAX_MU * np.eye(4) / 4.0
    try:
        ev, vec = np.linalg.eigh(xi)
        inv_sqrt = (vec * np.clip(ev, 1e-300, None) ** -0.5) @ vec.conj().T
        lam = np.linalg.eigvalsh(inv_sqrt @ rho @ inv_sqrt)[-1]
        return math.log2(max(lam, 1e-300))
    except np.linalg.LinAlgError:
        return math.inf


def _angles_of(v: np.ndarray) -> tuple[float, float]:
    theta = 2.0 * math.atan2(abs(v[1]), abs(v[0]))
    phi = math.atan2(v[1].imag, v[1].real) - math.atan2(v[0].imag, v[0].real)
    return theta, phi


def separable_start(weights: Sequence[float],
                    product_vectors: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Parameter vector representing a known product-state mixture."""
    if len(weights) > 16 or len(weights) != len(product_vectors):
        raise ValidationError("separable_start: up to 16 weighted product terms")
    p = np.zeros(80)
    for i, (w, (va, vb)) in enumerate(zip(weights, product_vectors)):
        p[i] = math.sqrt(max(w, 0.0))
        ta, pa = _angles_of(np.asarray(va, dtype=complex))
        tb, pb = _angles_of(np.asarray(vb, dtype=complex))
        p[16 + 4 * i: 16 + 4 * i + 4] = (ta, pa, tb, pb)
    return p


def _structured_starts(rho: np.ndarray) -> list[np.ndarray]:
    basis = np.eye(2, dtype=complex)
    diag = separable_start(
        [max(rho[i, i].real, 0.0) for i in range(4)],
        [(basis[i // 2], basis[i % 2]) for i in range(4)],
    )
    eva, veca = np.linalg.eigh(partial_trace_B(rho))
    evb, vecb = np.linalg.eigh(partial_trace_A(rho))
    marg = separable_start(
        [max(eva[i], 0.0) * max(evb[j], 0.0) for i in range(2) for j in range(2)],
        [(veca[:, i], vecb[:, j]) for i in range(2) for j in range(2)],
    )
    return [diag, marg]


def bmax(
    s,
    ctl: OptimizerControl = DEFAULT_OPTIMIZER_CONTROL,
    extra_starts: Optional[Sequence[np.ndarray]] = None,
) -> tuple[float, dict]:
    """Upper bound min over separable xi of log2 ||xi^-1/2 rho xi^-1/2||_inf.

    The reference state is a convex mixture of 16 pure product states (enough
    for any two-qubit separable state), floored by mu * I/4 so the inverse
    square root exists.  Structured starts (the diagonal part and the product
    of marginals) anchor the search; extra_starts lets callers seed known
    decompositions.
    """
    rho = _as_dense(s)
    starts = [np.asarray(p, dtype=float) for p in (extra_starts or [])]
    starts.extend(_structured_starts(rho))

    runs: list[dict] = []
    # every anchor start is at least evaluated, independent of the restart budget
    best = min(float(_dmax_objective(p, rho)) for p in starts)
    for tag in range(ctl.restarts):
        rng = np.random.default_rng([ctl.seed, 907, tag])
        if tag < len(starts):
            x0 = starts[tag]
        elif tag < 2 * len(starts):
            x0 = starts[tag - len(starts)] + rng.normal(scale=0.2, size=80)
        else:
            x0 = rng.normal(scale=1.0, size=80)
        res = minimize(
            _dmax_objective, x0, args=(rho,), method="Nelder-Mead",
            options=dict(maxiter=ctl.max_iters, maxfev=ctl.max_iters,
                         xatol=ctl.xatol, fatol=ctl.fatol, adaptive=True),
        )
        val = min(float(res.fun), float(_dmax_objective(x0, rho)))
        runs.append(dict(restart=tag, value=val, nfev=int(res.nfev),
                         converged=bool(res.success)))
        if val < best:
            best = val
    diagnostics = dict(n_restarts=len(runs), runs=runs,
                       best_objective=best if math.isfinite(best) else None,
                       diverged=not math.isfinite(best))
    if not math.isfinite(best):
        raise OptimizerDiverged("no bmax restart produced a finite objective")
    return max(0.0, best), diagnostics


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------

def bounds_report(
    s: XState,
    ctl: OptimizerControl = DEFAULT_OPTIMIZER_CONTROL,
    optimize: bool = True,
) -> BoundsReport:
    """Evaluate every bound of interest on one X-state."""
    ppt, neg = ppt_and_negativity(s)
    conc = concurrence_xstate(s)
    report = BoundsReport(
        ppt=ppt,
        negativity=neg,
        concurrence=conc,
        eof=eof(s),
        coherent_info=coherent_information(s),
        esq_id=squashed_identity(s),
    )
    if optimize:
        esq, d1 = squashed_optimized(s, ctl)
        bm, d2 = bmax(s, ctl)
        report.esq_opt = esq
        report.bmax = bm
        report.optimizer_diagnostics = dict(squashed=d1, bmax=d2)
    return report
