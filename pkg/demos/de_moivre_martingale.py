#!/usr/bin/env python3
"""Catching a rigged betting game from its exit statistics.

Players hold 1 to 4 tokens and bet one token per round on a fair coin; a
player at 0 tokens is ruined, a player at 5 tokens takes the win and leaves.
Over three observed rounds the fraction of players leaving ruined in round
two (1/5) is far above what the fair game predicts (1/16).  The solver finds
the likeliest per-round transition kernels that explain the observed exit
distributions, and those kernels point straight at the tampered rounds.
"""

import numpy as np

from stopbridge import (
    bundled_example_path,
    enumerate_paths,
    induced_marginals,
    ipf_project,
    kl_divergence,
    load_problem,
    prior_arrival_distribution,
    sample_paths,
    solve_bridge,
    total_variation,
)

np.set_printoptions(precision=3, suppress=True)

problem = load_problem(bundled_example_path("de_moivre"))
prior = problem.prior
space = prior.space
print(f"states: transient {space.transient}, absorbing {space.absorbing}")
print(f"observed rounds: {prior.horizon}")

# What the fair game would produce, next to what was actually observed.
fair_arrival, fair_residual = prior_arrival_distribution(prior, prior.mu0)
print("\nfair-game exit probabilities (rows ruin/win, columns round 1..3):")
print(fair_arrival)
print("observed exit fractions:")
print(np.asarray(problem.marginals.nu_hat))
print("-> round-2 ruin is 1/5 observed vs 1/16 expected: suspicious.")

# The likeliest explanation: the closest Markov law (in relative entropy)
# that reproduces the observed exits.
policy, scalings, diagnostics = solve_bridge(prior, problem.marginals)
print(f"\nsolved in {diagnostics.iterations} sweeps "
      f"(residual {diagnostics.final_residual:.1e})")
for tau, stage in enumerate(policy.stages, start=1):
    print(f"\nround {tau}: transient-to-absorbing block")
    print(stage.B)
    print(f"round {tau}: transient-to-transient block")
    print(stage.A)

down = policy.stages[0].A[1, 0]
out = policy.stages[1].B[0, 0]
print(f"\nround 1 sends 2-token players down with probability {down:.3f},")
print(f"round 2 then ruins 1-token players with probability {out:.3f};")
print(f"jointly {down * out:.0%}: the game was very likely staged there.")

# Sanity: the policy reproduces the observations...
arrival, residual = induced_marginals(policy, problem.marginals.mu_hat0)
print("\npolicy exit probabilities (should match the observations):")
print(arrival)

# ...and it really is the likeliest law: brute-force I-projection over the
# explicit path table lands on the same law.
Q = enumerate_paths(prior, prior.mu0)
P = enumerate_paths(policy, problem.marginals.mu_hat0)
projected = ipf_project(Q, problem.marginals.mu_hat0, problem.marginals.nu_hat)
print(f"\nKL(policy || fair game) = {kl_divergence(P, Q):.6f}")
print(f"total variation to the brute-force projection: "
      f"{total_variation(P, projected):.2e}")

# A million simulated players agree with the targets.
emp = sample_paths(policy, problem.marginals.mu_hat0, 1_000_000, seed=7)
print("\nempirical exit fractions from 10^6 sampled players:")
print(emp.arrival_frequencies)
