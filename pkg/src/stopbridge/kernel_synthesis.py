"""Turn converged scalings into per-stage Markov transition kernels.

The scaled whole-horizon matrix ``diag(D0) @ [Bcal | Acal]``-with-``Lambda``
is re-factored into stage kernels by a right-to-left sweep: with

    d_tau = B_{tau+1} @ lambda_{tau+1} + A_{tau+1} @ d_{tau+1},   d_t = 1,

the optimal stages are ``B*_tau = diag(1/d_{tau-1}) B_tau diag(lambda_tau)``
and ``A*_tau = diag(1/d_{tau-1}) A_tau diag(d_tau)`` (reciprocals taken as 0
on zero entries), where ``d_0`` is replaced by the Sinkhorn kernel scaling.
Rows with ``d_{tau-1} = 0`` receive no mass under the policy; they stay
all-zero and are reported rather than filled with a default distribution.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .chain_model import StageKernel
from .errors import NonStochasticOutput, ScalingMismatch
from .sinkhorn import DEFAULT_MAX_ITER, DEFAULT_TOL, ScalingPair, recip0, sinkhorn_partial
from .space_time_expansion import prior_arrival_distribution, telescopic_expand

#: A reachable synthesized row may deviate from sum one by at most this much.
STOCHASTIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Policy:
    """Synthesized posterior kernels plus the diagnostics behind them.

    ``d_vectors[tau-1]`` holds the pre-inversion suffix row sums d_tau for
    tau = 1..t (d_t is all ones).  ``unreachable`` lists (tau, label) pairs
    whose row is all-zero because no posterior mass can reach that state at
    time tau-1; ``provenance`` records solver settings when the policy came
    out of :func:`solve_bridge`.
    """

    space: object
    horizon: int
    stages: tuple
    d_vectors: tuple
    unreachable: tuple = ()
    provenance: dict = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return (
            self.space == other.space
            and self.horizon == other.horizon
            and all(a == b for a, b in zip(self.stages, other.stages))
        )


def synthesize(prior, scalings):
    """Build the optimal policy for ``prior`` from converged scalings.

    Parameters
    ----------
    prior : PriorLaw
        The (possibly cost-tilted) staged prior the scalings were fitted on.
    scalings : ScalingPair
        Output of :func:`~stopbridge.sinkhorn.sinkhorn_partial` for the
        telescopic expansion of ``prior``.

    Returns
    -------
    Policy

    Raises
    ------
    ScalingMismatch
        If the scaling vectors do not match the prior's dimensions.
    NonStochasticOutput
        If a reachable synthesized row drifts from sum one by more than
        1e-8, which signals a numerical pathology upstream.
    """
    if not isinstance(scalings, ScalingPair):
        raise ScalingMismatch(f"expected a ScalingPair, got {type(scalings).__name__}")
    stages = prior.stages
    t = len(stages)
    n, m = stages[0].n, stages[0].m
    if scalings.D.shape != (n,) or scalings.Lambda.shape != (m * t,):
        raise ScalingMismatch(
            f"scalings sized {scalings.D.shape}/{scalings.Lambda.shape}, "
            f"prior needs ({n},)/({m * t},)"
        )
    lam = scalings.Lambda.reshape(t, m)

    # Right-to-left sweep; only the d vectors are kept, never the suffix
    # matrices themselves.
    d = [None] * (t + 1)
    d[t] = np.ones(n)
    for tau in range(t - 1, 0, -1):
        nxt = stages[tau]
        d[tau] = nxt.B @ lam[tau] + nxt.A @ d[tau + 1]

    d0_kernel = scalings.kernel_scaling
    out = []
    unreachable = []
    for tau in range(1, t + 1):
        stage = stages[tau - 1]
        left = d0_kernel if tau == 1 else recip0(d[tau - 1])
        B_star = left[:, None] * stage.B * lam[tau - 1][None, :]
        A_star = left[:, None] * stage.A * d[tau][None, :]
        sums = B_star.sum(axis=1) + A_star.sum(axis=1)
        for x in range(n):
            if left[x] == 0:
                unreachable.append((tau, prior.space.transient[x]))
            elif abs(sums[x] - 1.0) > STOCHASTIC_TOL:
                raise NonStochasticOutput(
                    f"stage {tau}, row {prior.space.transient[x]!r}: synthesized row "
                    f"sums to {sums[x]!r}"
                )
        out.append(StageKernel(B_star, A_star))

    return Policy(
        space=prior.space,
        horizon=t,
        stages=tuple(out),
        d_vectors=tuple(np.asarray(d[tau]) for tau in range(1, t + 1)),
        unreachable=tuple(unreachable),
    )


def induced_marginals(policy, mu_hat0):
    """Arrival matrix and terminal residual of a policy started at ``mu_hat0``.

    Same semantics as
    :func:`~stopbridge.space_time_expansion.prior_arrival_distribution`; for
    a converged policy the arrival matrix equals the target ``nu_hat`` up to
    solver tolerance.
    """
    return prior_arrival_distribution(policy, mu_hat0)


def solve_bridge(prior, marginals, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Expand, fit scalings, and synthesize the policy in one call.

    Returns ``(Policy, ScalingPair, SinkhornDiagnostics)``; the policy's
    ``provenance`` records the tolerance, iteration budget and convergence
    numbers.
    """
    part = telescopic_expand(prior)
    nu_vec = np.asarray(marginals.nu_hat, dtype=float).T.ravel()
    scalings, diagnostics = sinkhorn_partial(
        part.Bcal, part.Acal, marginals.mu_hat0, nu_vec, tol=tol, max_iter=max_iter
    )
    policy = dataclasses.replace(
        synthesize(prior, scalings),
        provenance={
            "tol": tol,
            "max_iter": max_iter,
            "iterations": diagnostics.iterations,
            "final_residual": diagnostics.final_residual,
        },
    )
    return policy, scalings, diagnostics
