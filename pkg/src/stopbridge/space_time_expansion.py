"""Whole-horizon expansion of a staged chain into first-arrival blocks.

The t stage kernels collapse into one wide row-stochastic matrix
``[Bcal | Acal]`` where column block tau of ``Bcal`` is
``A_1 ... A_{tau-1} B_tau`` (probability of first arrival at each absorbing
state exactly at time tau) and ``Acal = A_1 ... A_t`` (probability of
surviving on each transient state through the whole window).
"""

from dataclasses import dataclass

import numpy as np

from .chain_model import PriorLaw

#: Row-sum tolerance for the expanded matrix (a few products looser than
#: the per-stage 1e-12).
EXPANSION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PartitionedMatrix:
    """The expanded pair (Bcal, Acal) for one staged chain.

    Column blocks of ``Bcal`` are ordered by arrival time, absorbing states
    in state-space order inside each block: flat column index
    ``(tau - 1) * m + j``.  Downstream code must index through
    :meth:`column` / :meth:`block`, never raw offsets.
    """

    Bcal: np.ndarray
    Acal: np.ndarray
    m: int
    horizon: int

    def block(self, tau):
        """Columns of ``Bcal`` for first arrival exactly at time ``tau`` (1-based)."""
        if not 1 <= tau <= self.horizon:
            raise IndexError(f"tau must be in 1..{self.horizon}, got {tau}")
        lo = (tau - 1) * self.m
        return self.Bcal[:, lo : lo + self.m]

    def column(self, j, tau):
        """Flat Bcal column index for absorbing state ``j`` at time ``tau``."""
        if not 0 <= j < self.m:
            raise IndexError(f"absorbing index must be in 0..{self.m - 1}, got {j}")
        if not 1 <= tau <= self.horizon:
            raise IndexError(f"tau must be in 1..{self.horizon}, got {tau}")
        return (tau - 1) * self.m + j


def telescopic_expand(prior):
    """Expand stage kernels into a :class:`PartitionedMatrix`.

    Accepts a validated :class:`~stopbridge.chain_model.PriorLaw` or any
    object with the same ``stages`` layout (e.g. a cost-tilted prior whose
    rows do not sum to one); row-stochasticity of the result is asserted
    only for validated priors.
    """
    stages = prior.stages
    n = stages[0].n
    m = stages[0].m
    blocks = []
    prefix = np.eye(n)
    for stage in stages:
        blocks.append(prefix @ stage.B)
        prefix = prefix @ stage.A
    Bcal = np.hstack(blocks)
    Acal = prefix
    if isinstance(prior, PriorLaw) and prior.validated:
        total = Bcal.sum(axis=1) + Acal.sum(axis=1)
        err = np.max(np.abs(total - 1.0))
        assert err <= EXPANSION_TOL, f"expanded rows drifted from stochastic by {err:.3e}"
    Bcal.setflags(write=False)
    Acal.setflags(write=False)
    return PartitionedMatrix(Bcal=Bcal, Acal=Acal, m=m, horizon=len(stages))


def prior_arrival_distribution(prior, mu):
    """First-arrival probabilities and surviving mass under a staged law.

    Parameters
    ----------
    prior : PriorLaw or Policy
        Anything carrying ``stages``.
    mu : array-like, length n
        Starting distribution over transient states.

    Returns
    -------
    arrival : ndarray, m x t
        Entry (j, tau-1) is the probability of first arrival at absorbing
        state j at time tau, starting from ``mu``.
    residual : ndarray, length n
        Probability of sitting unabsorbed on each transient state at the
        final time.
    """
    mu = np.asarray(mu, dtype=float)
    part = telescopic_expand(prior)
    t, m = part.horizon, part.m
    arrival = (mu @ part.Bcal).reshape(t, m).T.copy()
    residual = mu @ part.Acal
    return arrival, residual
