"""The two shipped applications as 2x2 block semidefinite problems.

Boolean least squares via semidefinite relaxation (unit-diagonal constraint)
and super-resolution of point sources via a lifted Toeplitz program
(fixed observed entries). Both package their data, the linear objective
matrix, proximal evaluators, and a high-precision self-computed reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import partial

import numpy as np

from .linalg import frob_norm, gaussian_sample
from .params import BlockShape, OperatorParam
from .prox import FixedEntrySet, ProxPair, prox_linear_diag1, prox_linear_sr, prox_psd_indicator
from .splitting import StopRule, run_drs

INSTANCE_SCHEMA = "proxsplit-instance v1"


@dataclass(frozen=True)
class BqpInstance:
    """Boolean least-squares data: ``k`` measurement rows over ``n`` unknowns."""

    a: np.ndarray
    b: np.ndarray
    g_f: np.ndarray
    shape: BlockShape
    seed: int
    sigma_a: float
    sigma_b: float

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def k(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class SrInstance:
    """Point-source data: ``k`` separated spikes sampled at ``n`` points."""

    n: int
    k: int
    taus: np.ndarray
    c: np.ndarray
    x_star: np.ndarray
    omega: np.ndarray
    g_f: np.ndarray
    sigma: float
    obs_frac: float
    seed: int

    @property
    def shape(self) -> BlockShape:
        return BlockShape(self.n, 1)

    @property
    def m_avg(self) -> float:
        """Average spike magnitude."""
        return float(np.mean(np.abs(self.c)))

    @property
    def t_star(self) -> float:
        """Total spike magnitude: the lifted solution's trailing entry."""
        return float(np.sum(np.abs(self.c)))

    @property
    def u_star(self) -> np.ndarray:
        """Diagonal coordinates of the lifted solution's Toeplitz block."""
        return np.exp(-2j * np.pi * np.outer(np.arange(self.n), self.taus)) @ np.abs(self.c)


def bqp_objective(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Lifted linear objective matrix of ``||a x - b||^2`` (constant term dropped)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[1]
    g = np.zeros((n + 1, n + 1))
    g[:n, :n] = a.T @ a
    atb = a.T @ b
    g[:n, n] = -atb
    g[n, :n] = -atb
    return g


def gen_bqp(n: int, k: int, sigma_a: float, sigma_b: float, seed: int) -> BqpInstance:
    """Random Boolean least-squares instance with Gaussian data."""
    if n < 1 or k < 1:
        raise ValueError("need positive dimensions")
    a = gaussian_sample(k, n, sigma_a, [seed, 0])
    b = gaussian_sample(k, 1, sigma_b, [seed, 1]).ravel()
    return BqpInstance(a=a, b=b, g_f=bqp_objective(a, b), shape=BlockShape(n, 1),
                       seed=seed, sigma_a=sigma_a, sigma_b=sigma_b)


def _min_circular_gap(taus: np.ndarray) -> float:
    t = np.sort(taus)
    return float(np.min(np.diff(t, append=t[0] + 1.0)))


def gen_sr(n: int, k: int, sigma: float, obs_frac: float, seed: int,
           max_tries: int = 100_000) -> SrInstance:
    """Random separated point sources, Gaussian amplitudes, partial observations.

    Spike locations are drawn uniformly on the circle and redrawn until every
    circular gap is at least ``1/n``; amplitudes are real Gaussian; a fixed
    fraction of the samples is observed.
    """
    if n < 1 or k < 1 or sigma <= 0:
        raise ValueError("need positive dimensions and amplitude scale")
    if not 0.0 < obs_frac <= 1.0:
        raise ValueError("observed fraction must lie in (0, 1]")
    if k > n:
        raise ValueError("cannot separate more spikes than samples")
    rng = np.random.default_rng([seed, 0])
    for _ in range(max_tries):
        taus = rng.random(k)
        if _min_circular_gap(taus) >= 1.0 / n:
            break
    else:
        raise RuntimeError("failed to draw separated spike locations")
    c = gaussian_sample(k, 1, sigma, [seed, 1]).ravel()
    x_star = np.exp(-2j * np.pi * np.outer(np.arange(n), taus)) @ c
    m = int(round(obs_frac * n))
    omega = np.sort(np.random.default_rng([seed, 2]).choice(n, size=m, replace=False))
    g_f = np.zeros((n + 1, n + 1))
    g_f[:n, :n] = np.eye(n) / (2.0 * n)
    g_f[n, n] = 0.5
    return SrInstance(n=n, k=k, taus=taus, c=c, x_star=x_star, omega=omega,
                      g_f=g_f, sigma=sigma, obs_frac=obs_frac, seed=seed)


def build_prox_pair(inst) -> ProxPair:
    """Proximal evaluators of an instance's splitting."""
    if isinstance(inst, BqpInstance):
        return ProxPair(f_prox=partial(prox_linear_diag1, inst.g_f),
                        g_prox=prox_psd_indicator, g_f=inst.g_f,
                        constraint="diag-ones", dim=inst.n + 1, is_complex=False)
    if isinstance(inst, SrInstance):
        observed = FixedEntrySet(inst.omega, inst.x_star[inst.omega])
        return ProxPair(f_prox=partial(prox_linear_sr, inst.g_f, observed),
                        g_prox=prox_psd_indicator, g_f=inst.g_f,
                        constraint="fixed-toeplitz", dim=inst.n + 1, is_complex=True)
    raise TypeError(f"unsupported instance type: {type(inst).__name__}")


@dataclass
class ReferenceSolution:
    """High-precision solution pair from a long tightly-thresholded run."""

    x_ref: np.ndarray
    lam_ref: np.ndarray
    iterations: int
    residual: float
    converged: bool
    param_config: dict


def reference_solve(pair: ProxPair, param: OperatorParam, opt_eps: float = 1e-10,
                    max_iters: int = 200_000) -> ReferenceSolution:
    """Drive the splitting to a tight optimality residual and report the pair.

    The dual solution is read off the final governing iterate, which makes it
    exactly cone-feasible and exactly orthogonal to the matching resolvent
    output. If the cap is hit, the partial-precision result is returned with
    its achieved residual and ``converged=False``.
    """
    stop = StopRule(max_iters=max_iters, opt_eps=opt_eps)
    state, trace = run_drs(pair, param, pair.zeros(), stop)
    z_plus = pair.g_prox(param, state.psi)
    lam_plus = param.adjoint(state.psi - param.apply(z_plus))
    return ReferenceSolution(x_ref=state.x, lam_ref=lam_plus,
                             iterations=trace.iterations,
                             residual=trace.opt_residual[-1],
                             converged=trace.converged,
                             param_config=param.to_config())


def mse(x: np.ndarray, x_ref: np.ndarray) -> float:
    """Per-entry squared distance."""
    d = np.asarray(x) - np.asarray(x_ref)
    return float(np.real(np.vdot(d, d))) / d.size


def _encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"shape": list(a.shape), "dtype": "complex",
                "re": a.real.tolist(), "im": a.imag.tolist()}
    kind = "int" if np.issubdtype(a.dtype, np.integer) else "float"
    return {"shape": list(a.shape), "dtype": kind, "data": a.tolist()}


def _decode_array(d: dict) -> np.ndarray:
    if d["dtype"] == "complex":
        a = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    elif d["dtype"] == "int":
        a = np.asarray(d["data"], dtype=np.int64)
    else:
        a = np.asarray(d["data"], dtype=float)
    return a.reshape(d["shape"])


def save_instance(inst, path) -> None:
    """Write an instance as self-describing JSON that round-trips bit-exactly."""
    if isinstance(inst, BqpInstance):
        doc = {"schema": INSTANCE_SCHEMA, "kind": "bqp", "seed": inst.seed,
               "n": inst.n, "k": inst.k,
               "sigma_a": inst.sigma_a, "sigma_b": inst.sigma_b,
               "a": _encode_array(inst.a), "b": _encode_array(inst.b),
               "g_f": _encode_array(inst.g_f)}
    elif isinstance(inst, SrInstance):
        doc = {"schema": INSTANCE_SCHEMA, "kind": "sr", "seed": inst.seed,
               "n": inst.n, "k": inst.k, "sigma": inst.sigma,
               "obs_frac": inst.obs_frac,
               "taus": _encode_array(inst.taus), "c": _encode_array(inst.c),
               "x_star": _encode_array(inst.x_star),
               "omega": _encode_array(inst.omega), "g_f": _encode_array(inst.g_f)}
    else:
        raise TypeError(f"unsupported instance type: {type(inst).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_instance(path):
    """Rebuild a saved instance, restoring every array verbatim."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != INSTANCE_SCHEMA:
        raise ValueError(f"unrecognized instance schema: {doc.get('schema')!r}")
    if doc["kind"] == "bqp":
        return BqpInstance(a=_decode_array(doc["a"]), b=_decode_array(doc["b"]),
                           g_f=_decode_array(doc["g_f"]),
                           shape=BlockShape(doc["n"], 1), seed=doc["seed"],
                           sigma_a=doc["sigma_a"], sigma_b=doc["sigma_b"])
    if doc["kind"] == "sr":
        return SrInstance(n=doc["n"], k=doc["k"], taus=_decode_array(doc["taus"]),
                          c=_decode_array(doc["c"]), x_star=_decode_array(doc["x_star"]),
                          omega=_decode_array(doc["omega"]), g_f=_decode_array(doc["g_f"]),
                          sigma=doc["sigma"], obs_frac=doc["obs_frac"], seed=doc["seed"])
    raise ValueError(f"unknown instance kind: {doc['kind']!r}")


def bqp_multipliers(lam_ref: np.ndarray, g_f: np.ndarray) -> np.ndarray:
    """Diagonal multipliers recovered from a converged dual solution."""
    return np.diag(np.asarray(lam_ref) + np.asarray(g_f)).copy()
