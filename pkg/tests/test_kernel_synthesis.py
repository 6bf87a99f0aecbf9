import numpy as np
import pytest

from stopbridge import (
    NonStochasticOutput,
    ScalingMismatch,
    ScalingPair,
    StageKernel,
    StateSpace,
    enumerate_paths,
    induced_marginals,
    prior_arrival_distribution,
    sinkhorn_partial,
    solve_bridge,
    synthesize,
    telescopic_expand,
    validate_marginals,
    validate_prior,
)
from conftest import random_instance

# Golden posterior kernels for the fair-game instance.
DM_B = [
    np.array([[0.5, 0], [0, 0], [0, 0], [0, 0.5]]),
    np.array([[0.933, 0], [0, 0], [0, 0], [0, 0.5]]),
    np.array([[0.5, 0], [0, 0], [0, 0], [0, 0.657]]),
]
DM_A = [
    np.array([[0, 0.5, 0, 0], [0.858, 0, 0.142, 0], [0, 0.5, 0, 0.5], [0, 0, 0.5, 0]]),
    np.array([[0, 0.067, 0, 0], [0.5, 0, 0.5, 0], [0, 0.407, 0, 0.593], [0, 0, 0.5, 0]]),
    np.array([[0, 0.5, 0, 0], [0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5], [0, 0, 0.343, 0]]),
]

TRAFFIC_D = [
    np.array([1.114, 0.987, 0.981, 1.0, 0.957]),
    np.array([1.133, 1.147, 1.104, 0.944, 0.908]),
    np.array([1.0, 1.133, 1.2, 1.104, 1.154]),
    np.array([1.0, 1.0, 1.0, 1.2, 1.2]),
    np.ones(5),
]


def test_fair_game_policy_matches_golden_kernels(de_moivre):
    policy, _, _ = solve_bridge(de_moivre.prior, de_moivre.marginals)
    for tau in range(3):
        assert np.max(np.abs(policy.stages[tau].B - DM_B[tau])) <= 1e-3
        assert np.max(np.abs(policy.stages[tau].A - DM_A[tau])) <= 1e-3


def test_traffic_d_vectors_match_golden_tables(traffic):
    policy, _, _ = solve_bridge(traffic.prior, traffic.marginals)
    for tau in range(5):
        assert np.max(np.abs(policy.d_vectors[tau] - TRAFFIC_D[tau])) <= 1e-3


def test_consistent_marginals_return_the_prior(de_moivre):
    prior = de_moivre.prior
    arrival, _ = prior_arrival_distribution(prior, prior.mu0)
    marginals = validate_marginals(prior.space, prior.horizon, prior.mu0, arrival)
    policy, scalings, _ = solve_bridge(prior, marginals)
    assert np.array_equal(scalings.Lambda, np.ones(6))
    assert np.array_equal(scalings.kernel_scaling, np.ones(4))
    for d in policy.d_vectors:
        assert np.array_equal(d, np.ones(4))
    for got, want in zip(policy.stages, prior.stages):
        assert np.array_equal(got.B, want.B)
        assert np.array_equal(got.A, want.A)
    # and the induced marginals are then literally the prior's
    ind = induced_marginals(policy, prior.mu0)
    ref = prior_arrival_distribution(prior, prior.mu0)
    assert np.array_equal(ind[0], ref[0]) and np.array_equal(ind[1], ref[1])


def test_policy_rows_are_stochastic_or_flagged(de_moivre, traffic):
    for problem in (de_moivre, traffic):
        policy, _, _ = solve_bridge(problem.prior, problem.marginals)
        assert policy.unreachable == ()
        for stage in policy.stages:
            assert np.max(np.abs(stage.row_sums() - 1.0)) <= 1e-10


def test_induced_marginals_hit_targets(de_moivre, traffic):
    for problem in (de_moivre, traffic):
        policy, _, diag = solve_bridge(problem.prior, problem.marginals, tol=1e-10)
        arrival, residual = induced_marginals(policy, problem.marginals.mu_hat0)
        assert np.max(np.abs(arrival - problem.marginals.nu_hat)) <= 10 * 1e-10
        assert arrival.sum() + residual.sum() == pytest.approx(1.0, abs=1e-10)


def test_traffic_induced_rows_match_golden_targets(traffic):
    policy, _, _ = solve_bridge(traffic.prior, traffic.marginals)
    arrival, _ = induced_marginals(policy, traffic.marginals.mu_hat0)
    bridge2 = traffic.space.absorbing_index("bridge2")
    assert np.max(np.abs(arrival[bridge2] - [0.05, 0.158, 0.142, 0.142, 0.142])) <= 1e-3


def test_scaled_expansion_identity(de_moivre, traffic):
    # reassembling the policy stages telescopically reproduces
    # diag(D0) @ [Bcal | Acal] with the Lambda blocks applied
    for problem, seeds in ((de_moivre, []), (traffic, []), (None, range(6))):
        cases = [problem] if problem else [random_instance(s) for s in seeds]
        for case in cases:
            prior, marginals = (case.prior, case.marginals) if problem else case
            policy, scalings, _ = solve_bridge(prior, marginals)
            part = telescopic_expand(prior)
            t, m = part.horizon, part.m
            scaled_B = (
                scalings.kernel_scaling[:, None] * part.Bcal * scalings.Lambda[None, :]
            )
            scaled_A = scalings.kernel_scaling[:, None] * part.Acal
            repart = telescopic_expand(policy)
            assert np.max(np.abs(repart.Bcal - scaled_B)) <= 1e-10
            assert np.max(np.abs(repart.Acal - scaled_A)) <= 1e-10


def test_zero_mass_rows_are_zeroed_and_flagged():
    space = StateSpace(absorbing=("j",), transient=("a", "b"))
    stage1 = StageKernel(np.array([[0.5], [0.5]]), np.array([[0.25, 0.25], [0.25, 0.25]]))
    stage2 = StageKernel(np.array([[1.0], [0.5]]), np.array([[0.0, 0.0], [0.0, 0.5]]))
    prior = validate_prior(space, [stage1, stage2], [1.0, 0.0])
    # all absorption must happen at tau=1: the tau=2 target is zero, and
    # state "a" at time 1 could only absorb, so it must become unreachable
    marginals = validate_marginals(space, 2, [1.0, 0.0], np.array([[0.5, 0.0]]))
    policy, scalings, _ = solve_bridge(prior, marginals)
    assert (2, "a") in policy.unreachable  # d_1("a") = 0
    assert (1, "b") in policy.unreachable  # no initial mass on "b"
    assert np.all(policy.stages[1].B[0] == 0) and np.all(policy.stages[1].A[0] == 0)
    # no mass reaches "a" at time 1 under the policy
    law = enumerate_paths(policy, marginals.mu_hat0)
    a_full = space.m + space.transient_index("a")
    assert law.probs[law.paths[:, 1] == a_full].sum() == 0.0
    # reachable rows still stochastic
    assert policy.stages[1].row_sums()[1] == pytest.approx(1.0, abs=1e-12)
    arrival, _ = induced_marginals(policy, marginals.mu_hat0)
    assert np.max(np.abs(arrival - marginals.nu_hat)) <= 1e-9


def test_scaling_mismatch_is_rejected(de_moivre):
    prior = de_moivre.prior
    bad = ScalingPair(D=np.ones(4), Lambda=np.ones(5), mu_hat=np.full(4, 0.25))
    with pytest.raises(ScalingMismatch):
        synthesize(prior, bad)
    with pytest.raises(ScalingMismatch):
        synthesize(prior, "not a scaling pair")


def test_corrupted_scalings_raise_non_stochastic_output(de_moivre):
    prior = de_moivre.prior
    part = telescopic_expand(prior)
    nu_vec = np.asarray(de_moivre.marginals.nu_hat).T.ravel()
    scalings, _ = sinkhorn_partial(part.Bcal, part.Acal, prior.mu0, nu_vec)
    corrupted = ScalingPair(D=scalings.D * 2.0, Lambda=scalings.Lambda, mu_hat=scalings.mu_hat)
    with pytest.raises(NonStochasticOutput):
        synthesize(prior, corrupted)


def test_random_instances_hit_their_targets():
    for seed in range(20):
        prior, marginals = random_instance(seed)
        policy, _, diag = solve_bridge(prior, marginals, tol=1e-10)
        assert diag.converged
        arrival, _ = induced_marginals(policy, marginals.mu_hat0)
        assert np.max(np.abs(arrival - marginals.nu_hat)) <= 1e-8
