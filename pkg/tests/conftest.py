"""Shared fixtures for the acceptance protocols.

The two reference setups (Boolean quadratic relaxation and spectral
super-resolution) are expensive, so they are built once per session and
reused by every criterion that needs them.
"""

import numpy as np
import pytest

from proxsplit import (
    Identity,
    SdpHadamard,
    StopRule,
    bqp_estimate,
    bqp_separate_estimates,
    build_prox_pair,
    gen_bqp,
    gen_sr,
    reference_solve,
    run_drs,
    sdp_joint_search,
    sdp_separate_choices,
    sr_estimate,
)
from proxsplit.tuning import GridSpec, SolutionPair

BQP_SEED = 0
SR_SEED = 2
MSE_EPS = 1e-6


def mse_stop(reference: np.ndarray, cap: int) -> StopRule:
    """Experiment stopping: MSE-vs-reference only, no optimality shortcut."""
    return StopRule(max_iters=cap, opt_eps=None, mse_eps=MSE_EPS, reference=reference)


@pytest.fixture(scope="session")
def bqp_setup():
    inst = gen_bqp(40, 50, 0.05, 1.0, BQP_SEED)
    pair = build_prox_pair(inst)
    ref = reference_solve(pair, bqp_estimate(inst.a, inst.b, inst.n))
    assert ref.converged
    return inst, pair, ref


@pytest.fixture(scope="session")
def bqp_protocol(bqp_setup):
    """Iteration-count protocol: identity vs estimated vs optimal parameters."""
    inst, pair, ref = bqp_setup
    alpha_est, beta_est = bqp_separate_estimates(inst.a, inst.b, inst.n)
    sol = SolutionPair(ref.x_ref, ref.lam_ref, shape=inst.shape)
    alpha_opt, beta_opt = sdp_separate_choices(sol)
    joint_opt = sdp_joint_search(sol, GridSpec())
    params = {
        "identity": Identity(),
        "est-alpha": SdpHadamard(alpha_est, 1.0, inst.shape),
        "est-beta": SdpHadamard(1.0, beta_est, inst.shape),
        "est-joint": bqp_estimate(inst.a, inst.b, inst.n),
        "opt-alpha": SdpHadamard(alpha_opt, 1.0, inst.shape),
        "opt-beta": SdpHadamard(1.0, beta_opt, inst.shape),
        "opt-joint": SdpHadamard(joint_opt[0], joint_opt[1], inst.shape),
    }
    runs = {}
    for name, param in params.items():
        _, trace = run_drs(pair, param, pair.zeros(), mse_stop(ref.x_ref, 100_000))
        runs[name] = trace
    return runs


@pytest.fixture(scope="session")
def sr_setup():
    inst = gen_sr(50, 10, 2.0, 0.8, SR_SEED)
    pair = build_prox_pair(inst)
    ref = reference_solve(pair, sr_estimate(inst.n, inst.k, inst.sigma, "joint"))
    assert ref.converged
    return inst, pair, ref


@pytest.fixture(scope="session")
def sr_protocol(sr_setup):
    inst, pair, ref = sr_setup
    params = {
        "identity": Identity(),
        "est-joint": sr_estimate(inst.n, inst.k, inst.sigma, "joint"),
        "est-alpha": sr_estimate(inst.n, inst.k, inst.sigma, "alpha"),
        "est-beta": sr_estimate(inst.n, inst.k, inst.sigma, "beta"),
    }
    runs = {}
    for name, param in params.items():
        _, trace = run_drs(pair, param, pair.zeros(), mse_stop(ref.x_ref, 150_000))
        runs[name] = trace
    return runs
