"""Entropic-regularized transport: tilt the prior by edge costs, then bridge.

Charging edge (x, y) at stage tau a cost U_tau(x, y) and trading expected
cost against relative entropy at inverse temperature beta turns the free
energy J(P) + (1/beta) * D(P || Q) into a plain relative entropy against the
unnormalized measure Q * exp(-beta * U).  That tilted measure keeps the
Markov factor structure, so the whole partial-marginal pipeline runs on it
unchanged; the Sinkhorn scalings absorb the missing normalization.

The stopped process accrues no further cost: absorbing self-loops are free,
and the arrival step is charged through the B-block of its stage.
"""

import math
from dataclasses import dataclass

import numpy as np

from .chain_model import StageKernel, _as_readonly
from .errors import DimensionMismatch, NegativeEntry, Overflow
from .kernel_synthesis import solve_bridge
from .path_oracle import kl_divergence
from .sinkhorn import DEFAULT_MAX_ITER, DEFAULT_TOL

#: exp() argument guard; beyond this the tilt would overflow/underflow.
EXP_GUARD = 700.0


@dataclass(frozen=True, eq=False)
class EdgeCostSchedule:
    """Per-stage edge costs in the same block layout as the stage kernels.

    ``stages[tau-1]`` is a pair (UB, UA): UB is n x m (cost of arriving at
    each absorbing state), UA is n x n (cost of each transient move).  All
    entries must be finite.  ``beta_inv`` is the temperature; the config
    convention supplies beta itself.
    """

    stages: tuple
    beta_inv: float

    def __post_init__(self):
        if self.beta_inv <= 0:
            raise NegativeEntry(f"beta must be positive, got beta_inv={self.beta_inv!r}")
        checked = []
        for k, (UB, UA) in enumerate(self.stages, start=1):
            UB = _as_readonly(UB)
            UA = _as_readonly(UA)
            if not (np.all(np.isfinite(UB)) and np.all(np.isfinite(UA))):
                raise DimensionMismatch(f"cost stage {k} has non-finite entries")
            if UA.shape[0] != UA.shape[1] or UB.shape[0] != UA.shape[0]:
                raise DimensionMismatch(
                    f"cost stage {k}: blocks {UB.shape}/{UA.shape} are inconsistent"
                )
            checked.append((UB, UA))
        object.__setattr__(self, "stages", tuple(checked))

    @property
    def beta(self):
        return 1.0 / self.beta_inv

    @property
    def horizon(self):
        return len(self.stages)

    @classmethod
    def zeros(cls, space, horizon, beta=1.0):
        """All-free edges (useful as the U = 0 reduction)."""
        n, m = space.n, space.m
        return cls(
            stages=tuple((np.zeros((n, m)), np.zeros((n, n))) for _ in range(horizon)),
            beta_inv=1.0 / beta,
        )


@dataclass(frozen=True, eq=False)
class TiltedPrior:
    """A prior with stage factors reweighted by exp(-beta * U).

    Rows need not sum to one; this is a nonnegative reference measure, not a
    probability law.  It exposes the same ``space``/``horizon``/``stages``
    surface as :class:`PriorLaw` so expansion and Sinkhorn run unchanged.
    """

    space: object
    horizon: int
    stages: tuple
    mu0: np.ndarray


def tilt_prior(prior, costs):
    """Reweight each stage kernel entrywise by exp(-beta * U_tau).

    Raises
    ------
    Overflow
        If beta * max|U| exceeds the exp() range guard.
    DimensionMismatch
        If the cost schedule does not match the prior's shape.
    """
    if costs.horizon != prior.horizon:
        raise DimensionMismatch(
            f"cost schedule has {costs.horizon} stages, prior has {prior.horizon}"
        )
    beta = costs.beta
    worst = max(
        max(np.abs(UB).max(initial=0.0), np.abs(UA).max(initial=0.0))
        for UB, UA in costs.stages
    )
    if beta * worst > EXP_GUARD:
        raise Overflow(f"beta * max|U| = {beta * worst:.3e} exceeds exp guard {EXP_GUARD}")
    stages = []
    for stage, (UB, UA) in zip(prior.stages, costs.stages):
        if UB.shape != stage.B.shape or UA.shape != stage.A.shape:
            raise DimensionMismatch(
                f"cost blocks {UB.shape}/{UA.shape} do not match kernel "
                f"{stage.B.shape}/{stage.A.shape}"
            )
        stages.append(StageKernel(stage.B * np.exp(-beta * UB), stage.A * np.exp(-beta * UA)))
    return TiltedPrior(
        space=prior.space, horizon=prior.horizon, stages=tuple(stages), mu0=prior.mu0
    )


def path_costs(path_law, costs):
    """Cumulative cost U(x) of every enumerated path (absorbing steps free)."""
    m = path_law.space.m
    paths = path_law.paths
    total = np.zeros(len(paths))
    for tau, (UB, UA) in enumerate(costs.stages):
        full = np.hstack([UB, UA])
        src = paths[:, tau]
        alive = src >= m
        total[alive] += full[src[alive] - m, paths[alive, tau + 1]]
    return total


def transport_cost(path_law, costs):
    """Expected cumulative path cost J(P) = sum_x P(x) U(x)."""
    return float(path_law.probs @ path_costs(path_law, costs))


def free_energy(P, Q, costs):
    """J(P) + (1/beta) * D(P || Q); +inf when P escapes the support of Q."""
    kl = kl_divergence(P, Q)
    if math.isinf(kl):
        return float("inf")
    return transport_cost(P, costs) + costs.beta_inv * kl


def tilted_divergence(P, Q, costs):
    """sum P log(P / (Q exp(-beta U))), the unnormalized tilted relative entropy.

    Equals beta * free_energy(P, Q, costs) identically; against the
    *normalized* tilted law the identity picks up the additive constant
    log Z of the tilted mass, which callers track explicitly.
    """
    kl = kl_divergence(P, Q)
    if math.isinf(kl):
        return float("inf")
    return kl + costs.beta * float(P.probs @ path_costs(P, costs))


def tilted_path_law(Q, costs):
    """Normalize the tilted mass Q exp(-beta U) into a law; also return log Z."""
    mass = Q.probs * np.exp(-costs.beta * path_costs(Q, costs))
    Z = mass.sum()
    return Q.with_probs(mass / Z), float(np.log(Z))


def solve_regularized(prior, costs, marginals, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Solve the cost-aware bridge: tilt the prior, then run the pipeline.

    With U = 0 the tilt multiplies every entry by exp(0) = 1.0, so the
    iterate sequence is bit-for-bit the unregularized one.

    Returns ``(Policy, ScalingPair, SinkhornDiagnostics)``.
    """
    return solve_bridge(tilt_prior(prior, costs), marginals, tol=tol, max_iter=max_iter)
