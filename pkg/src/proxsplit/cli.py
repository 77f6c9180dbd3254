"""Experiment driver.

Subcommands: ``run`` (one parametrized solve with trace, summary and
reference artifacts), ``sweep`` (iteration counts over a parameter grid),
``ratecheck`` (empirical cocoercivity level and decay-bound audit of a run),
``gen`` (instance generation to a reusable file). Configuration comes from
flat key=value files overridden by command-line flags; the ``PROXSPLIT_SEED``
environment variable supplies the seed when neither source does.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import Identity, OperatorParam, Scalar, SdpHadamard
from .problems import (BqpInstance, _encode_array, build_prox_pair, gen_bqp, gen_sr,
                       load_instance, reference_solve, save_instance)
from .splitting import (RateBound, StopRule, estimate_cocoercivity, rate_check, run_admm,
                        run_drs, run_pd, run_pdf, matched_admm_init, matched_pd_init,
                        matched_pdf_init, sharp_rate_factor)
from .tuning import (SolutionPair, acceleration_gain, bqp_estimate, optimal_scalar,
                     sdp_joint_search, sdp_separate_choices, sr_estimate)

SUMMARY_SCHEMA = "proxsplit-summary v1"
SWEEP_SCHEMA = "proxsplit-sweep v1"
RATECHECK_SCHEMA = "proxsplit-ratecheck v1"

APPS = ("bqp", "sr")
ALGOS = ("drs", "admm", "pd", "pdf")
PARAM_MODES = ("identity", "scalar-opt", "diag-opt", "sdp-separate-alpha",
               "sdp-separate-beta", "sdp-joint-opt", "estimate", "manual", "sweep")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class ExperimentConfig:
    """Resolved settings of one driver invocation."""

    app: str = "bqp"
    n: int | None = None
    k: int | None = None
    sigma_a: float = 0.05
    sigma_b: float = 1.0
    sigma: float = 2.0
    obs_frac: float = 0.8
    seed: int = 0
    param_mode: str = "estimate"
    alpha: float | None = None
    beta: float | None = None
    algo: str = "drs"
    mse_eps: float | None = 1e-6
    opt_eps: float | None = None
    max_iters: int = 100_000
    ref_eps: float = 1e-10
    ref_max_iters: int = 200_000
    out: str = "out"
    jobs: int = 1
    alpha_grid: str | None = None
    beta_grid: str | None = None
    instance: str | None = None

    def validate(self) -> None:
        if self.app not in APPS:
            raise ConfigError(f"unknown app {self.app!r}; expected one of {APPS}")
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algo {self.algo!r}; expected one of {ALGOS}")
        if self.param_mode not in PARAM_MODES:
            raise ConfigError(f"unknown param-mode {self.param_mode!r}; "
                              f"expected one of {PARAM_MODES}")
        if self.n is None:
            self.n = 40 if self.app == "bqp" else 50
        if self.k is None:
            self.k = 50 if self.app == "bqp" else 10
        for name in ("n", "k", "max_iters", "jobs", "ref_max_iters"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        for name in ("sigma_a", "sigma_b", "sigma", "ref_eps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 < self.obs_frac <= 1.0:
            raise ConfigError("obs_frac must lie in (0, 1]")
        for name in ("alpha", "beta", "mse_eps", "opt_eps"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ConfigError(f"{name} must be positive when set")
        if self.param_mode == "manual" and (self.alpha is None or self.beta is None):
            raise ConfigError("manual mode needs both --alpha and --beta")
        if self.param_mode == "diag-opt":
            raise ConfigError("diag-opt acts per coordinate and does not preserve the "
                              "semidefinite cone; pick a block mode for these apps")


_INT_KEYS = {"n", "k", "seed", "max_iters", "jobs", "ref_max_iters"}
_FLOAT_KEYS = {"sigma_a", "sigma_b", "sigma", "obs_frac", "alpha", "beta", "ref_eps"}
_OPT_FLOAT_KEYS = {"mse_eps", "opt_eps"}
_STR_KEYS = {"app", "param_mode", "algo", "out", "alpha_grid", "beta_grid", "instance"}


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return raw


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _OPT_FLOAT_KEYS:
            return None if value.lower() in ("none", "off") else float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then config file, then flags; environment seed as fallback."""
    merged: dict = {}
    if getattr(args, "config", None):
        file_cfg = read_config_file(args.config)
        unknown = set(file_cfg) - (_INT_KEYS | _FLOAT_KEYS | _OPT_FLOAT_KEYS | _STR_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in (_INT_KEYS | _FLOAT_KEYS | _OPT_FLOAT_KEYS | _STR_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if "seed" not in merged and os.environ.get("PROXSPLIT_SEED"):
        merged["seed"] = os.environ["PROXSPLIT_SEED"]
    cfg = ExperimentConfig()
    for key, value in merged.items():
        setattr(cfg, key, _coerce(key, value))
    cfg.validate()
    return cfg


def make_instance(cfg: ExperimentConfig):
    if cfg.instance:
        inst = load_instance(cfg.instance)
        kind = "bqp" if isinstance(inst, BqpInstance) else "sr"
        if kind != cfg.app:
            raise ConfigError(f"instance file holds a {kind} problem, but app={cfg.app}")
        return inst
    if cfg.app == "bqp":
        return gen_bqp(cfg.n, cfg.k, cfg.sigma_a, cfg.sigma_b, cfg.seed)
    return gen_sr(cfg.n, cfg.k, cfg.sigma, cfg.obs_frac, cfg.seed)


def estimate_param(inst) -> SdpHadamard:
    """The app's a-priori joint parameter (also used to compute references)."""
    if isinstance(inst, BqpInstance):
        return bqp_estimate(inst.a, inst.b, inst.n)
    return sr_estimate(inst.n, inst.k, inst.sigma, "joint")


def make_param(cfg: ExperimentConfig, inst, ref_pair: SolutionPair) -> OperatorParam:
    shape = inst.shape
    mode = cfg.param_mode
    if mode == "identity":
        return Identity()
    if mode == "manual":
        return SdpHadamard(cfg.alpha, cfg.beta, shape)
    if mode == "estimate":
        return estimate_param(inst)
    if mode == "scalar-opt":
        return Scalar(optimal_scalar(ref_pair))
    if mode == "sdp-separate-alpha":
        return SdpHadamard(sdp_separate_choices(ref_pair)[0], 1.0, shape)
    if mode == "sdp-separate-beta":
        return SdpHadamard(1.0, sdp_separate_choices(ref_pair)[1], shape)
    if mode == "sdp-joint-opt":
        return SdpHadamard(*sdp_joint_search(ref_pair), shape)
    raise ConfigError(f"param-mode {mode!r} is not runnable here")


def solve(pair, param, algo: str, stop: StopRule, psi_hook=None):
    """Run the chosen algorithm from a zero governing iterate (matched starts)."""
    psi0 = pair.zeros()
    if algo == "drs":
        return run_drs(pair, param, psi0, stop, psi_hook)
    if algo == "admm":
        z0, lam0 = matched_admm_init(pair, param, psi0)
        return run_admm(pair, param, z0, lam0, stop, psi_hook)
    if algo == "pdf":
        psi0, lam0 = matched_pdf_init(pair, param, psi0)
        return run_pdf(pair, param, psi0, lam0, stop, psi_hook)
    if algo == "pd":
        x0, lam_prev, lam0 = matched_pd_init(pair, param, psi0)
        return run_pd(pair, param, x0, lam_prev, lam0, stop, psi_hook)
    raise ConfigError(f"unknown algo {algo!r}")


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _reference_doc(ref) -> dict:
    return {"schema": "proxsplit-reference v1",
            "iterations": ref.iterations, "residual": ref.residual,
            "converged": ref.converged, "param": ref.param_config,
            "x_ref": _encode_array(ref.x_ref), "lam_ref": _encode_array(ref.lam_ref)}


def _prepare(cfg: ExperimentConfig):
    inst = make_instance(cfg)
    pair = build_prox_pair(inst)
    ref = reference_solve(pair, estimate_param(inst), opt_eps=cfg.ref_eps,
                          max_iters=cfg.ref_max_iters)
    ref_pair = SolutionPair(ref.x_ref, ref.lam_ref, shape=inst.shape)
    return inst, pair, ref, ref_pair


def cmd_run(cfg: ExperimentConfig) -> int:
    if cfg.param_mode == "sweep":
        raise ConfigError("param-mode sweep belongs to the sweep command")
    inst, pair, ref, ref_pair = _prepare(cfg)
    param = make_param(cfg, inst, ref_pair)
    stop = StopRule(max_iters=cfg.max_iters, opt_eps=cfg.opt_eps,
                    mse_eps=cfg.mse_eps, reference=ref.x_ref)
    state, trace = solve(pair, param, cfg.algo, stop)
    gain = acceleration_gain(param, ref_pair)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    trace.write_csv(outdir / "trace.csv")
    summary = {"schema": SUMMARY_SCHEMA, "app": cfg.app, "algo": cfg.algo,
               "param_mode": cfg.param_mode, "param": param.to_config(),
               "seed": cfg.seed, "n": inst.n, "k": inst.k,
               "iterations": trace.iterations, "converged": trace.converged,
               "stop_reason": trace.stop_reason,
               "final_mse": None if trace.mse is None else trace.mse[-1],
               "final_opt_residual": trace.opt_residual[-1],
               "mse_eps": cfg.mse_eps, "opt_eps": cfg.opt_eps,
               "max_iters": cfg.max_iters,
               "xi": gain.xi, "xi_numerator": gain.numerator,
               "xi_denominator": gain.denominator,
               "reference": {"iterations": ref.iterations, "residual": ref.residual,
                             "converged": ref.converged, "param": ref.param_config}}
    _write_json(outdir / "summary.json", summary)
    _write_json(outdir / "reference.json", _reference_doc(ref))
    print(f"{cfg.app}/{cfg.algo} {cfg.param_mode}: {trace.iterations} iterations, "
          f"stop={trace.stop_reason}, final_mse={summary['final_mse']}")
    return 0 if trace.converged else 2


def _parse_grid(spec: str) -> np.ndarray:
    """``lo:hi:count`` is log-spaced; a comma list is taken verbatim."""
    try:
        if ":" in spec:
            lo_s, hi_s, count_s = spec.split(":")
            lo, hi, count = float(lo_s), float(hi_s), int(count_s)
            if lo <= 0 or hi < lo or count < 1:
                raise ValueError
            if count == 1:
                return np.array([lo])
            return np.logspace(np.log10(lo), np.log10(hi), count)
        vals = np.array([float(tok) for tok in spec.split(",") if tok.strip()])
        if vals.size == 0 or np.any(vals <= 0):
            raise ValueError
        return vals
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}; use lo:hi:count or v1,v2,...") from exc


def cmd_sweep(cfg: ExperimentConfig) -> int:
    if cfg.alpha_grid is None and cfg.beta_grid is None:
        raise ConfigError("sweep needs --alpha-grid and/or --beta-grid")
    alphas = _parse_grid(cfg.alpha_grid) if cfg.alpha_grid else np.array([1.0])
    betas = _parse_grid(cfg.beta_grid) if cfg.beta_grid else np.array([1.0])
    inst, pair, ref, _ = _prepare(cfg)
    cells = [(float(a), float(b)) for a in alphas for b in betas]

    def run_cell(cell):
        a, b = cell
        stop = StopRule(max_iters=cfg.max_iters, opt_eps=cfg.opt_eps,
                        mse_eps=cfg.mse_eps, reference=ref.x_ref)
        _, trace = solve(pair, SdpHadamard(a, b, inst.shape), cfg.algo, stop)
        final_mse = None if trace.mse is None else trace.mse[-1]
        return trace.iterations, final_mse

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(cell) for cell in cells]
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "sweep.csv"
    with open(path, "w") as fh:
        fh.write(f"# {SWEEP_SCHEMA}\n")
        fh.write("alpha,beta,iterations,final_mse\n")
        for (a, b), (iters, final_mse) in zip(cells, results):
            mse_cell = "" if final_mse is None else repr(final_mse)
            fh.write(f"{a!r},{b!r},{iters},{mse_cell}\n")
    _write_json(outdir / "reference.json", _reference_doc(ref))
    print(f"swept {len(cells)} cells -> {path}")
    return 0


def cmd_ratecheck(cfg: ExperimentConfig) -> int:
    if cfg.param_mode == "sweep":
        raise ConfigError("param-mode sweep belongs to the sweep command")
    inst, pair, ref, ref_pair = _prepare(cfg)
    param = make_param(cfg, inst, ref_pair)
    stop = StopRule(max_iters=cfg.max_iters, opt_eps=cfg.opt_eps,
                    mse_eps=cfg.mse_eps, reference=ref.x_ref)
    snaps = [pair.zeros()]

    def hook(k, psi):
        if k <= 32:
            snaps.append(psi.copy())

    state, trace = solve(pair, param, cfg.algo, stop, psi_hook=hook)
    l_hat = estimate_cocoercivity([(snaps[i], snaps[i + 1]) for i in range(len(snaps) - 1)])
    basic = rate_check(trace, RateBound(1.0, trace.anchor_sq))
    sharp = rate_check(trace, RateBound(l_hat, trace.anchor_sq))
    doc = {"schema": RATECHECK_SCHEMA, "app": cfg.app, "algo": cfg.algo,
           "param_mode": cfg.param_mode, "iterations": trace.iterations,
           "l_hat": l_hat, "approximate_fixed_point": True,
           "basic": {"ok": basic.ok, "first_violation": basic.first_violation,
                     "checked": basic.checked},
           "sharp": {"ok": sharp.ok, "first_violation": sharp.first_violation,
                     "checked": sharp.checked},
           "calibration": {"l": 0.99,
                           "k20": sharp_rate_factor(0.99, 20),
                           "k100": sharp_rate_factor(0.99, 100)}}
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "ratecheck.json", doc)
    print(f"l_hat={l_hat:.6g}, basic bound ok={basic.ok}, sharp bound ok={sharp.ok}")
    return 0 if basic.ok else 2


def cmd_gen(cfg: ExperimentConfig) -> int:
    inst = make_instance(cfg)
    out = Path(cfg.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_instance(inst, out)
    print(f"wrote {cfg.app} instance (n={inst.n}, k={inst.k}, seed={cfg.seed}) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proxsplit",
                                     description="Parametrized splitting experiments "
                                                 "on block-structured SDPs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (("run", "single parametrized solve with artifacts"),
                        ("sweep", "iteration counts over a parameter grid"),
                        ("ratecheck", "decay-bound audit of a run"),
                        ("gen", "write a problem instance file")):
        sp = sub.add_parser(name, help=descr)
        sp.add_argument("--app", choices=APPS)
        sp.add_argument("--param-mode", dest="param_mode", choices=PARAM_MODES)
        sp.add_argument("--alpha")
        sp.add_argument("--beta")
        sp.add_argument("--algo", choices=ALGOS)
        sp.add_argument("--mse-eps", dest="mse_eps")
        sp.add_argument("--opt-eps", dest="opt_eps")
        sp.add_argument("--max-iters", dest="max_iters")
        sp.add_argument("--ref-eps", dest="ref_eps")
        sp.add_argument("--ref-max-iters", dest="ref_max_iters")
        sp.add_argument("--seed")
        sp.add_argument("--out")
        sp.add_argument("--jobs")
        sp.add_argument("--config")
        sp.add_argument("--instance")
        sp.add_argument("--n")
        sp.add_argument("--k")
        sp.add_argument("--sigma-a", dest="sigma_a")
        sp.add_argument("--sigma-b", dest="sigma_b")
        sp.add_argument("--sigma")
        sp.add_argument("--obs-frac", dest="obs_frac")
        sp.add_argument("--alpha-grid", dest="alpha_grid")
        sp.add_argument("--beta-grid", dest="beta_grid")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    commands = {"run": cmd_run, "sweep": cmd_sweep,
                "ratecheck": cmd_ratecheck, "gen": cmd_gen}
    try:
        cfg = resolve_config(args)
        return commands[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
