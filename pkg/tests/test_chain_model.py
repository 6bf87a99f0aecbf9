import json

import numpy as np
import pytest

from stopbridge import (
    DimensionMismatch,
    InitialMassOnAbsorbing,
    MassExceedsOne,
    NegativeEntry,
    RowSumViolation,
    StageKernel,
    StateSpace,
    load_problem,
    problem_to_dict,
    support_feasibility_report,
    validate_marginals,
    validate_prior,
)
from conftest import random_instance

SPACE = StateSpace(absorbing=("ruin", "win"), transient=("1", "2", "3", "4"))
FAIR_B = np.array([[0.5, 0], [0, 0], [0, 0], [0, 0.5]])
FAIR_A = np.array([[0, 0.5, 0, 0], [0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5], [0, 0, 0.5, 0]])


def fair_prior(t=3):
    return validate_prior(SPACE, [StageKernel(FAIR_B, FAIR_A)] * t, np.full(4, 0.25))


class TestStateSpace:
    def test_counts_and_lookup(self):
        assert SPACE.m == 2 and SPACE.n == 4
        assert SPACE.absorbing_index("win") == 1
        assert SPACE.transient_index("3") == 2

    def test_overlap_rejected(self):
        with pytest.raises(DimensionMismatch):
            StateSpace(absorbing=("a",), transient=("a", "b"))

    def test_empty_side_rejected(self):
        with pytest.raises(DimensionMismatch):
            StateSpace(absorbing=(), transient=("a",))


class TestValidatePrior:
    def test_fair_game_prior_is_valid(self, de_moivre):
        prior = fair_prior()
        assert prior.horizon == 3
        assert prior == de_moivre.prior

    def test_frozen_walkers_are_valid(self):
        # B = 0, A = identity: walkers never move or absorb
        prior = validate_prior(
            SPACE, [StageKernel(np.zeros((4, 2)), np.eye(4))] * 2, np.full(4, 0.25)
        )
        assert np.allclose(prior.stages[0].row_sums(), 1.0)

    def test_row_sum_violation_names_row_and_stage(self):
        bad_B = FAIR_B.copy()
        bad_B[0, 0] = 0.6  # row for state "1" now sums to 1.1
        with pytest.raises(RowSumViolation, match=r"stage 1, row '1'"):
            validate_prior(SPACE, [StageKernel(bad_B, FAIR_A)], np.full(4, 0.25))

    def test_negative_entry(self):
        bad_A = FAIR_A.copy()
        bad_A[1, 0] = -0.5
        with pytest.raises(NegativeEntry):
            validate_prior(SPACE, [StageKernel(FAIR_B, bad_A)], np.full(4, 0.25))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            validate_prior(SPACE, [StageKernel(np.zeros((3, 2)), np.eye(3))], np.full(3, 1 / 3))

    def test_initial_mass_on_absorbing(self):
        full = np.zeros(6)
        full[0] = 0.5  # "ruin" takes mass in full-chain layout
        full[2:] = 0.125
        with pytest.raises(InitialMassOnAbsorbing, match="ruin"):
            validate_prior(SPACE, [StageKernel(FAIR_B, FAIR_A)], full)

    def test_full_length_mu0_with_zero_absorbing_mass(self):
        full = np.concatenate([np.zeros(2), np.full(4, 0.25)])
        prior = validate_prior(SPACE, [StageKernel(FAIR_B, FAIR_A)], full)
        assert prior.mu0.shape == (4,)

    def test_renormalize_flag(self):
        scaled = StageKernel(FAIR_B * 2, FAIR_A * 2)
        with pytest.raises(RowSumViolation):
            validate_prior(SPACE, [scaled], np.full(4, 0.25))
        prior = validate_prior(SPACE, [scaled], np.full(4, 1.0), renormalize=True)
        assert np.allclose(prior.stages[0].row_sums(), 1.0)
        assert np.allclose(prior.mu0.sum(), 1.0)

    def test_validation_idempotent(self):
        prior = fair_prior()
        again = validate_prior(prior.space, prior.stages, prior.mu0)
        assert again == prior

    def test_row_sums_within_tolerance_for_random_instances(self):
        for seed in range(20):
            prior, _ = random_instance(seed)
            for stage in prior.stages:
                assert np.max(np.abs(stage.row_sums() - 1.0)) <= 1e-12


class TestValidateMarginals:
    def test_de_moivre_targets(self, de_moivre):
        spec = validate_marginals(
            SPACE, 3, np.full(4, 0.25),
            [[1 / 8, 1 / 5, 1 / 16], [1 / 8, 1 / 16, 1 / 16]],
        )
        assert spec.total_arrival_mass == pytest.approx(0.6375)
        assert spec == de_moivre.marginals

    def test_all_zero_targets_are_valid(self):
        spec = validate_marginals(SPACE, 3, np.full(4, 0.25), np.zeros((2, 3)))
        assert spec.total_arrival_mass == 0.0

    def test_mass_exceeds_one(self):
        nu = np.full((2, 3), 0.2)
        nu[0] = [0.4, 0.4, 0.4]  # total 1.2
        with pytest.raises(MassExceedsOne, match="nu_hat"):
            validate_marginals(SPACE, 3, np.full(4, 0.25), nu)

    def test_negative_target(self):
        nu = np.zeros((2, 3))
        nu[1, 2] = -0.1
        with pytest.raises(NegativeEntry):
            validate_marginals(SPACE, 3, np.full(4, 0.25), nu)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch, match="nu_hat"):
            validate_marginals(SPACE, 3, np.full(4, 0.25), np.zeros((2, 4)))


class TestSupportFeasibility:
    def test_de_moivre_passes(self, de_moivre):
        report = support_feasibility_report(de_moivre.prior, de_moivre.marginals)
        assert report.ok

    def test_traffic_passes(self, traffic):
        report = support_feasibility_report(traffic.prior, traffic.marginals)
        assert report.ok

    def test_unreachable_first_step_target_is_reported(self):
        # nobody can reach "win" at tau=1: its B column is zero
        B = np.array([[0.5, 0], [0, 0], [0, 0], [0.5, 0]])
        A = FAIR_A
        prior = validate_prior(SPACE, [StageKernel(B, A)] * 2, np.full(4, 0.25))
        nu = np.zeros((2, 2))
        nu[1, 0] = 0.05
        spec = validate_marginals(SPACE, 2, np.full(4, 0.25), nu)
        report = support_feasibility_report(prior, spec)
        assert report.blocked == (("win", 1),)


class TestSerialization:
    def test_round_trip_is_bit_exact(self, tmp_path, de_moivre):
        doc = problem_to_dict(de_moivre)
        path = tmp_path / "round.json"
        path.write_text(json.dumps(doc))
        again = load_problem(path)
        assert again.prior == de_moivre.prior
        assert again.marginals == de_moivre.marginals

    def test_decimal_entries_survive(self, tmp_path, traffic):
        # 15-significant-digit decimals written by json.dump reload bit-exactly
        doc = problem_to_dict(traffic)
        path = tmp_path / "traffic_round.json"
        path.write_text(json.dumps(doc))
        again = load_problem(path)
        for s1, s2 in zip(again.prior.stages, traffic.prior.stages):
            assert np.array_equal(s1.B, s2.B) and np.array_equal(s1.A, s2.A)
        assert np.array_equal(again.marginals.nu_hat, traffic.marginals.nu_hat)

    def test_fraction_strings_parse(self):
        problem = load_problem(
            {
                "states": {"absorbing": ["a"], "transient": ["x"]},
                "horizon": 1,
                "stages": {"B": [["1/8"]], "A": [["7/8"]]},
                "mu0": [1],
                "mu_hat0": [1],
                "nu_hat": [["1/8"]],
            }
        )
        assert problem.prior.stages[0].B[0, 0] == 0.125

    def test_missing_field_names_it(self):
        with pytest.raises(DimensionMismatch, match="nu_hat"):
            load_problem(
                {
                    "states": {"absorbing": ["a"], "transient": ["x"]},
                    "horizon": 1,
                    "stages": {"B": [[0.5]], "A": [[0.5]]},
                    "mu0": [1],
                    "mu_hat0": [1],
                }
            )


class TestImmutability:
    def test_arrays_are_read_only(self, de_moivre):
        with pytest.raises(ValueError):
            de_moivre.prior.mu0[0] = 0.5
        with pytest.raises(ValueError):
            de_moivre.prior.stages[0].B[0, 0] = 0.9
