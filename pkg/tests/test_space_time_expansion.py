import numpy as np
import pytest

from stopbridge import (
    StageKernel,
    StateSpace,
    enumerate_paths,
    prior_arrival_distribution,
    telescopic_expand,
    validate_prior,
)
from conftest import random_instance


def test_single_stage_expansion_is_the_kernel_itself(de_moivre):
    stage = de_moivre.prior.stages[0]
    prior = validate_prior(de_moivre.prior.space, [stage], de_moivre.prior.mu0)
    part = telescopic_expand(prior)
    assert np.array_equal(part.Bcal, stage.B)
    assert np.array_equal(part.Acal, stage.A)


def test_expanded_rows_are_stochastic(de_moivre):
    part = telescopic_expand(de_moivre.prior)
    totals = part.Bcal.sum(axis=1) + part.Acal.sum(axis=1)
    assert np.max(np.abs(totals - 1.0)) <= 1e-10


def test_fair_game_two_step_ruin_block_entry(de_moivre):
    # From wealth "2" the only two-step ruin route is 2 -> 1 -> ruin,
    # probability 1/4; from wealth "1" there is none (oracle-checked).
    part = telescopic_expand(de_moivre.prior)
    block2 = part.block(2)
    ruin = de_moivre.prior.space.absorbing_index("ruin")
    assert block2[de_moivre.prior.space.transient_index("2"), ruin] == pytest.approx(0.25, abs=1e-15)
    assert block2[de_moivre.prior.space.transient_index("1"), ruin] == 0.0


def test_blocks_equal_prefix_products(traffic):
    # block tau is (A_1 ... A_{tau-1}) @ B_tau, recomputed directly
    part = telescopic_expand(traffic.prior)
    prefix = np.eye(traffic.space.n)
    for tau in range(1, traffic.horizon + 1):
        stage = traffic.prior.stages[tau - 1]
        assert np.max(np.abs(part.block(tau) - prefix @ stage.B)) <= 1e-14
        prefix = prefix @ stage.A


def test_column_index_layout(traffic):
    part = telescopic_expand(traffic.prior)
    assert part.column(0, 1) == 0
    assert part.column(1, 1) == 1
    assert part.column(0, 3) == 4
    with pytest.raises(IndexError):
        part.column(0, 6)


def test_fair_game_arrival_matches_exact_fractions(de_moivre):
    arrival, residual = prior_arrival_distribution(de_moivre.prior, de_moivre.prior.mu0)
    expected = np.array([[1 / 8, 1 / 16, 1 / 16], [1 / 8, 1 / 16, 1 / 16]])
    assert np.max(np.abs(arrival - expected)) <= 1e-15
    assert residual.sum() == pytest.approx(0.5, abs=1e-15)


def test_traffic_prior_arrival_matches_reference_row(traffic):
    # bridge-2 arrivals under the closed-bridge prior
    arrival, _ = prior_arrival_distribution(traffic.prior, traffic.prior.mu0)
    bridge2 = traffic.prior.space.absorbing_index("bridge2")
    expected = np.array([0.05, 0.158, 0.197, 0.127, 0.101])
    assert np.max(np.abs(arrival[bridge2] - expected)) <= 5e-4
    bridge1 = traffic.prior.space.absorbing_index("bridge1")
    assert np.max(np.abs(arrival[bridge1] - np.array([0.05, 0.158, 0, 0, 0]))) <= 5e-4


def test_no_absorption_means_zero_arrivals():
    space = StateSpace(absorbing=("sink",), transient=("u", "v"))
    A = np.array([[0.25, 0.75], [0.5, 0.5]])
    prior = validate_prior(space, [StageKernel(np.zeros((2, 1)), A)] * 3, [0.5, 0.5])
    arrival, residual = prior_arrival_distribution(prior, prior.mu0)
    assert np.all(arrival == 0)
    assert np.allclose(residual, np.array([0.5, 0.5]) @ np.linalg.matrix_power(A, 3))


def test_arrival_plus_residual_is_one(de_moivre, traffic):
    for problem in (de_moivre, traffic):
        arrival, residual = prior_arrival_distribution(problem.prior, problem.prior.mu0)
        assert arrival.sum() + residual.sum() == pytest.approx(1.0, abs=1e-10)
    for seed in range(25):
        prior, marginals = random_instance(seed, t_max=5)
        arrival, residual = prior_arrival_distribution(prior, marginals.mu_hat0)
        assert arrival.sum() + residual.sum() == pytest.approx(1.0, abs=1e-10)


def test_expansion_agrees_with_path_enumeration():
    # the expanded blocks and the explicit path law compute the same
    # first-arrival masses by entirely different routes
    for seed in range(15):
        prior, marginals = random_instance(seed, t_max=5)
        arrival, residual = prior_arrival_distribution(prior, marginals.mu_hat0)
        law = enumerate_paths(prior, marginals.mu_hat0)
        oracle_arrival, oracle_residual = law.arrival_matrix()
        assert np.max(np.abs(arrival - oracle_arrival)) <= 1e-12
        assert np.max(np.abs(residual - oracle_residual)) <= 1e-12
