"""Splitting solvers over a proximal pair and a step parameter.

Four algorithmically equivalent drivers are provided: a two-point
Douglas-Rachford recursion on the governing sequence, an ADMM form, a
primal-dual form, and a primal-dual variant with explicit feasibility
iterate. Under matched initializations they generate the same governing
sequence up to roundoff; all four report the same trace columns.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import frob_inner, frob_norm
from .params import OperatorParam
from .prox import ProxPair

TRACE_SCHEMA = "proxsplit-trace v1"
DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """Raised when an iterate leaves the trust region or turns non-finite."""


@dataclass
class StopRule:
    """Stopping policy: iteration cap plus optional thresholds.

    ``opt_eps`` bounds the primal optimality residual; ``mse_eps`` bounds the
    per-entry squared distance to ``reference`` and requires it.
    """

    max_iters: int = 10_000
    opt_eps: float | None = 1e-8
    mse_eps: float | None = None
    reference: np.ndarray | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.mse_eps is not None and self.reference is None:
            raise ValueError("mse threshold needs a reference")

    def reason(self, opt_res: float, mse_val: float | None) -> str | None:
        if self.opt_eps is not None and opt_res <= self.opt_eps:
            return "opt_eps"
        if self.mse_eps is not None and mse_val is not None and mse_val <= self.mse_eps:
            return "mse_eps"
        return None


@dataclass
class SplitState:
    """Terminal iterates of a run.

    ``psi = S x + adjoint_inverse(S, lam)`` holds by construction, ``z`` is
    the resolvent output paired with ``x`` in the optimality residual.
    """

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    psi: np.ndarray
    k: int


@dataclass
class ConvergenceTrace:
    """Per-iteration diagnostics of one run."""

    fp_residual_sq: list[float] = field(default_factory=list)
    opt_residual: list[float] = field(default_factory=list)
    mse: list[float] | None = None
    elapsed_ms: list[float] = field(default_factory=list)
    anchor_sq: float = 0.0
    converged: bool = False
    stop_reason: str = "max_iters"

    @property
    def iterations(self) -> int:
        return len(self.fp_residual_sq)

    def write_csv(self, path) -> None:
        """Write the trace with a versioned header comment."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# {TRACE_SCHEMA}\n")
            writer = csv.writer(fh)
            writer.writerow(["k", "fp_residual_sq", "opt_residual", "mse", "elapsed_ms"])
            for k in range(self.iterations):
                mse_cell = "" if self.mse is None else repr(self.mse[k])
                writer.writerow([k, repr(self.fp_residual_sq[k]),
                                 repr(self.opt_residual[k]), mse_cell,
                                 repr(self.elapsed_ms[k])])


def optimality_residual(state: SplitState) -> float:
    """Distance between the paired primal iterates; zero exactly at a fixed point."""
    return frob_norm(state.x - state.z)


def _guard(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError("iterate turned non-finite")
        if np.linalg.norm(a) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"iterate norm exceeded {DIVERGENCE_LIMIT:g}")


def _mse_or_none(x: np.ndarray, reference: np.ndarray | None) -> float | None:
    if reference is None:
        return None
    d = x - reference
    return float(np.real(np.vdot(d, d))) / d.size


def run_drs(pair: ProxPair, param: OperatorParam, psi0: np.ndarray, stop: StopRule,
            psi_hook=None) -> tuple[SplitState, ConvergenceTrace]:
    """Two-point recursion on the governing sequence.

    Each iteration evaluates the g-prox at the current governing iterate,
    reflects, evaluates the f-prox and averages back.
    """
    psi = np.array(psi0, copy=True)
    psi_first = psi.copy()
    trace = ConvergenceTrace(mse=None if stop.reference is None else [])
    x = z = lam = psi
    for k in range(stop.max_iters):
        t0 = time.perf_counter()
        z = pair.g_prox(param, psi)
        sz = param.apply(z)
        x = pair.f_prox(param, 2.0 * sz - psi)
        lam = param.adjoint(psi - sz)
        psi_next = param.apply(x) + psi - sz
        _guard(x, psi_next)
        fp_sq = float(np.real(np.vdot(psi_next - psi, psi_next - psi)))
        opt_res = frob_norm(x - z)
        mse_val = _mse_or_none(x, stop.reference)
        psi = psi_next
        trace.fp_residual_sq.append(fp_sq)
        trace.opt_residual.append(opt_res)
        if trace.mse is not None:
            trace.mse.append(mse_val)
        trace.elapsed_ms.append((time.perf_counter() - t0) * 1e3)
        if psi_hook is not None:
            psi_hook(k + 1, psi)
        reason = stop.reason(opt_res, mse_val)
        if reason is not None:
            trace.converged = True
            trace.stop_reason = reason
            break
    trace.anchor_sq = float(np.real(np.vdot(psi - psi_first, psi - psi_first)))
    return SplitState(x=x, z=z, lam=lam, psi=psi, k=trace.iterations), trace


def run_admm(pair: ProxPair, param: OperatorParam, z0: np.ndarray, lam0: np.ndarray,
             stop: StopRule, psi_hook=None) -> tuple[SplitState, ConvergenceTrace]:
    """Alternating-direction form with scaled dual updates."""
    z = np.array(z0, copy=True)
    lam = np.array(lam0, copy=True)
    psi_prev = param.apply(z) + param.adjoint_inverse(lam)
    psi_first = psi_prev.copy()
    trace = ConvergenceTrace(mse=None if stop.reference is None else [])
    x = psi = psi_prev
    z_state, lam_state = z, lam
    for k in range(stop.max_iters):
        t0 = time.perf_counter()
        x = pair.f_prox(param, param.apply(z) - param.adjoint_inverse(lam))
        psi = param.apply(x) + param.adjoint_inverse(lam)
        z_next = pair.g_prox(param, psi)
        lam_next = lam + param.adjoint(param.apply(x - z_next))
        _guard(x, psi)
        fp_sq = float(np.real(np.vdot(psi - psi_prev, psi - psi_prev)))
        opt_res = frob_norm(x - z)
        mse_val = _mse_or_none(x, stop.reference)
        z_state, lam_state = z, lam
        z, lam, psi_prev = z_next, lam_next, psi
        trace.fp_residual_sq.append(fp_sq)
        trace.opt_residual.append(opt_res)
        if trace.mse is not None:
            trace.mse.append(mse_val)
        trace.elapsed_ms.append((time.perf_counter() - t0) * 1e3)
        if psi_hook is not None:
            psi_hook(k + 1, psi)
        reason = stop.reason(opt_res, mse_val)
        if reason is not None:
            trace.converged = True
            trace.stop_reason = reason
            break
    trace.anchor_sq = float(np.real(np.vdot(psi - psi_first, psi - psi_first)))
    return SplitState(x=x, z=z_state, lam=lam_state, psi=psi, k=trace.iterations), trace


def run_pdf(pair: ProxPair, param: OperatorParam, psi0: np.ndarray, lam0: np.ndarray,
            stop: StopRule, psi_hook=None) -> tuple[SplitState, ConvergenceTrace]:
    """Primal-dual form carrying the governing iterate explicitly."""
    psi = np.array(psi0, copy=True)
    lam = np.array(lam0, copy=True)
    psi_first = psi.copy()
    z_prev = pair.g_prox(param, psi)
    trace = ConvergenceTrace(mse=None if stop.reference is None else [])
    x = psi
    z_state, lam_state = z_prev, lam
    for k in range(stop.max_iters):
        t0 = time.perf_counter()
        x = pair.f_prox(param, psi - 2.0 * param.adjoint_inverse(lam))
        psi_next = param.apply(x) + param.adjoint_inverse(lam)
        z = pair.g_prox(param, psi_next)
        lam_next = param.adjoint(psi_next - param.apply(z))
        _guard(x, psi_next)
        fp_sq = float(np.real(np.vdot(psi_next - psi, psi_next - psi)))
        opt_res = frob_norm(x - z_prev)
        mse_val = _mse_or_none(x, stop.reference)
        z_state, lam_state = z_prev, lam
        psi, lam, z_prev = psi_next, lam_next, z
        trace.fp_residual_sq.append(fp_sq)
        trace.opt_residual.append(opt_res)
        if trace.mse is not None:
            trace.mse.append(mse_val)
        trace.elapsed_ms.append((time.perf_counter() - t0) * 1e3)
        if psi_hook is not None:
            psi_hook(k + 1, psi)
        reason = stop.reason(opt_res, mse_val)
        if reason is not None:
            trace.converged = True
            trace.stop_reason = reason
            break
    trace.anchor_sq = float(np.real(np.vdot(psi - psi_first, psi - psi_first)))
    return SplitState(x=x, z=z_state, lam=lam_state, psi=psi, k=trace.iterations), trace


def run_pd(pair: ProxPair, param: OperatorParam, x0: np.ndarray, lam_prev: np.ndarray,
           lam0: np.ndarray, stop: StopRule, psi_hook=None) -> tuple[SplitState, ConvergenceTrace]:
    """Primal-dual form on the primal iterate and two dual memories.

    The dual prox is evaluated through the parametrized conjugate
    decomposition, so only the g-prox itself is required. The stopping
    residual equals the governing-sequence residual of the other forms.
    """
    x = np.array(x0, copy=True)
    lm, lam = np.array(lam_prev, copy=True), np.array(lam0, copy=True)
    psi_prev = param.apply(x) + param.adjoint_inverse(lm)
    psi_first = psi_prev.copy()
    z_prev = pair.g_prox(param, psi_prev)
    trace = ConvergenceTrace(mse=None if stop.reference is None else [])
    psi = psi_prev
    z_state, lam_state = z_prev, lam
    for k in range(stop.max_iters):
        t0 = time.perf_counter()
        x_next = pair.f_prox(param, param.apply(x) + param.adjoint_inverse(lm - 2.0 * lam))
        psi = param.apply(x_next) + param.adjoint_inverse(lam)
        z = pair.g_prox(param, psi)
        lam_next = param.adjoint(psi - param.apply(z))
        _guard(x_next, psi)
        fp_sq = float(np.real(np.vdot(psi - psi_prev, psi - psi_prev)))
        opt_res = frob_norm(x_next - z_prev)
        mse_val = _mse_or_none(x_next, stop.reference)
        z_state, lam_state = z_prev, lam
        x, lm, lam = x_next, lam, lam_next
        psi_prev, z_prev = psi, z
        trace.fp_residual_sq.append(fp_sq)
        trace.opt_residual.append(opt_res)
        if trace.mse is not None:
            trace.mse.append(mse_val)
        trace.elapsed_ms.append((time.perf_counter() - t0) * 1e3)
        if psi_hook is not None:
            psi_hook(k + 1, psi)
        reason = stop.reason(opt_res, mse_val)
        if reason is not None:
            trace.converged = True
            trace.stop_reason = reason
            break
    trace.anchor_sq = float(np.real(np.vdot(psi - psi_first, psi - psi_first)))
    return SplitState(x=x, z=z_state, lam=lam_state, psi=psi, k=trace.iterations), trace


def matched_admm_init(pair: ProxPair, param: OperatorParam,
                      psi0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ADMM start reproducing the governing sequence launched from ``psi0``."""
    z0 = pair.g_prox(param, psi0)
    lam0 = param.adjoint(np.asarray(psi0) - param.apply(z0))
    return z0, lam0


def matched_pdf_init(pair: ProxPair, param: OperatorParam,
                     psi0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Feasibility-variant start reproducing the governing sequence from ``psi0``."""
    _, lam0 = matched_admm_init(pair, param, psi0)
    return np.asarray(psi0), lam0


def matched_pd_init(pair: ProxPair, param: OperatorParam,
                    psi0: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Primal-dual start reproducing the governing sequence from ``psi0``."""
    x0 = param.inverse(np.asarray(psi0))
    lam_prev = np.zeros_like(np.asarray(psi0))
    _, lam0 = matched_admm_init(pair, param, psi0)
    return x0, lam_prev, lam0


def drs_fixed_point_map(pair: ProxPair, param: OperatorParam):
    """One governing-sequence update as a plain callable (an averaged map)."""

    def step(psi: np.ndarray) -> np.ndarray:
        z = pair.g_prox(param, psi)
        sz = param.apply(z)
        x = pair.f_prox(param, 2.0 * sz - psi)
        return param.apply(x) + psi - sz

    return step


def sharp_rate_factor(l_coco: float, k: int) -> float:
    """Tight decay factor for the k-th squared step of an averaged map.

    ``l_coco`` is the inverse cocoercivity constant in ``(0, 1]``. The factor
    multiplies the squared distance from the start to a fixed point. At
    ``l_coco == 1`` the geometric expression degenerates to ``1/(k+1)``.
    """
    if not 0.0 < l_coco <= 1.0:
        raise ValueError("cocoercivity level must lie in (0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if l_coco == 1.0:
        return 1.0 / (k + 1)
    a = l_coco / (2.0 - l_coco)
    return (a ** k) * (1.0 - a) / (1.0 - a ** (k + 1))


@dataclass(frozen=True)
class RateBound:
    """Decay-rate certificate: cocoercivity level plus the squared start distance.

    ``anchor_sq`` is the squared distance from the first governing iterate to
    a fixed point; in practice the final iterate stands in for the fixed
    point, which rate checks flag as approximate.
    """

    l_coco: float
    anchor_sq: float

    def __post_init__(self):
        if not 0.0 < self.l_coco <= 1.0:
            raise ValueError("cocoercivity level must lie in (0, 1]")
        if self.anchor_sq < 0.0:
            raise ValueError("anchor must be nonnegative")

    @property
    def a(self) -> float:
        return self.l_coco / (2.0 - self.l_coco)

    def factor(self, k: int) -> float:
        return sharp_rate_factor(self.l_coco, k)


@dataclass
class RateReport:
    """Outcome of auditing a trace against a rate bound."""

    ok: bool
    first_violation: int | None
    checked: int
    approximate_fixed_point: bool = True


def rate_check(trace: ConvergenceTrace, bound: RateBound,
               rel_slack: float = 0.0) -> RateReport:
    """Verify each squared step of a trace against the rate bound.

    The bound's anchor is taken at face value; when it comes from a final
    iterate rather than a true fixed point the report marks the check as
    approximate.
    """
    first = None
    for k, fp_sq in enumerate(trace.fp_residual_sq):
        limit = bound.factor(k) * bound.anchor_sq
        if fp_sq > limit * (1.0 + rel_slack):
            first = k
            break
    return RateReport(first is None, first, trace.iterations)


def estimate_cocoercivity(pairs) -> float:
    """Empirical inverse cocoercivity level of a map from (input, output) samples.

    Maximizes ``||F y1 - F y2||^2 / <F y1 - F y2, y1 - y2>`` over sample
    pairs, skipping degenerate denominators, and clamps into ``(0, 1]``.
    Enlarging the sample can only increase the estimate.
    """
    samples = [(np.asarray(y), np.asarray(fy)) for y, fy in pairs]
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    best = 0.0
    found = False
    for i in range(len(samples)):
        yi, fyi = samples[i]
        for j in range(i + 1, len(samples)):
            yj, fyj = samples[j]
            df = fyi - fyj
            num = float(np.real(np.vdot(df, df)))
            den = frob_inner(df, yi - yj)
            if den <= 1e-300:
                continue
            found = True
            best = max(best, num / den)
    if not found:
        raise ValueError("all sample pairs were degenerate")
    return float(np.clip(best, 1e-16, 1.0))
