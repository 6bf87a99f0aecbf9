"""State space, prior Markov law and marginal specifications.

A chain lives on a finite vertex set split into ``m`` absorbing and ``n``
transient states.  Absorbing states keep their index block first, so a full
one-step kernel is ``[[I, 0], [B, A]]``; only the ``B`` (transient to
absorbing) and ``A`` (transient to transient) blocks are ever stored.  All
containers here are immutable after validation and safe to share across
threads.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InitialMassOnAbsorbing,
    MassExceedsOne,
    NegativeEntry,
    RowSumViolation,
)

#: Tolerance for row-stochasticity and normalization checks.
ROW_TOL = 1e-12


def _as_readonly(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StateSpace:
    """Ordered, disjoint partition of the vertex set.

    Parameters
    ----------
    absorbing : tuple of str
        Labels of the absorbing states; their order fixes row/column 0..m-1.
    transient : tuple of str
        Labels of the transient states; their order fixes indices 0..n-1
        inside the B/A blocks (and m..m+n-1 in full-chain indexing).
    """

    absorbing: tuple
    transient: tuple

    def __post_init__(self):
        absorbing = tuple(str(s) for s in self.absorbing)
        transient = tuple(str(s) for s in self.transient)
        object.__setattr__(self, "absorbing", absorbing)
        object.__setattr__(self, "transient", transient)
        if len(absorbing) < 1 or len(transient) < 1:
            raise DimensionMismatch(
                "need at least one absorbing and one transient state, got "
                f"m={len(absorbing)}, n={len(transient)}"
            )
        if len(set(absorbing)) != len(absorbing) or len(set(transient)) != len(transient):
            raise DimensionMismatch("state labels must be unique")
        if set(absorbing) & set(transient):
            raise DimensionMismatch(
                f"absorbing and transient labels overlap: {sorted(set(absorbing) & set(transient))}"
            )

    @property
    def m(self):
        return len(self.absorbing)

    @property
    def n(self):
        return len(self.transient)

    def absorbing_index(self, label):
        return self.absorbing.index(str(label))

    def transient_index(self, label):
        return self.transient.index(str(label))


@dataclass(frozen=True, eq=False)
class StageKernel:
    """One stage of transition probabilities, stored as its two live blocks.

    ``B`` is n x m (transient to absorbing), ``A`` is n x n (transient to
    transient).  The absorbing identity block is implicit and never stored.
    The container itself does not validate; :func:`validate_prior` enforces
    row-stochasticity for priors, while synthesized policies may carry
    all-zero rows for unreachable states.
    """

    B: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", _as_readonly(self.B))
        object.__setattr__(self, "A", _as_readonly(self.A))
        if self.B.ndim != 2 or self.A.ndim != 2:
            raise DimensionMismatch("B and A must be matrices")
        if self.A.shape[0] != self.A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != self.A.shape[0]:
            raise DimensionMismatch(
                f"B and A must have equal row counts, got {self.B.shape[0]} and {self.A.shape[0]}"
            )

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def row_sums(self):
        return self.B.sum(axis=1) + self.A.sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, StageKernel):
            return NotImplemented
        return np.array_equal(self.B, other.B) and np.array_equal(self.A, other.A)


@dataclass(frozen=True, eq=False)
class PriorLaw:
    """A validated Markov prior: state space, horizon, stage kernels, mu0."""

    space: StateSpace
    horizon: int
    stages: tuple
    mu0: np.ndarray
    #: Set for objects produced by :func:`validate_prior`; downstream code
    #: relies on it to skip re-checking stochasticity.
    validated: bool = field(default=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, PriorLaw):
            return NotImplemented
        return (
            self.space == other.space
            and self.horizon == other.horizon
            and all(a == b for a, b in zip(self.stages, other.stages))
            and np.array_equal(self.mu0, other.mu0)
        )


@dataclass(frozen=True, eq=False)
class MarginalSpec:
    """Validated targets: initial distribution and first-arrival masses.

    ``nu_hat`` is m x t; entry (j, tau-1) is the probability mass required
    to first arrive at absorbing state j exactly at time tau.
    """

    mu_hat0: np.ndarray
    nu_hat: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, MarginalSpec):
            return NotImplemented
        return np.array_equal(self.mu_hat0, other.mu_hat0) and np.array_equal(
            self.nu_hat, other.nu_hat
        )

    @property
    def total_arrival_mass(self):
        return float(self.nu_hat.sum())


@dataclass(frozen=True)
class FeasibilityReport:
    """Targets demanding arrivals the prior gives zero probability.

    ``blocked`` lists (absorbing_label, tau) pairs with a positive target but
    zero prior first-arrival probability.  An empty list means the obvious
    necessary condition passed; it is not sufficient for feasibility.
    """

    blocked: tuple

    @property
    def ok(self):
        return len(self.blocked) == 0


def _check_nonnegative(a, what):
    if np.any(a < 0):
        idx = tuple(int(i) for i in np.argwhere(a < 0)[0])
        raise NegativeEntry(f"{what} has negative entry {a[idx]!r} at {idx}")


def _check_probability_vector(v, what, renormalize=False):
    _check_nonnegative(v, what)
    s = v.sum()
    if renormalize and s > 0:
        return v / s
    if abs(s - 1.0) > ROW_TOL:
        raise RowSumViolation(f"{what} sums to {s!r}, deviation {s - 1.0:.3e} exceeds {ROW_TOL}")
    return v


def validate_prior(space, stages, mu0, renormalize=False):
    """Validate stage kernels and an initial distribution into a PriorLaw.

    Parameters
    ----------
    space : StateSpace
    stages : sequence of StageKernel
        One kernel per time step (the horizon is ``len(stages)``).
    mu0 : array-like
        Initial distribution.  Either length n over the transient states, or
        length m+n over the full chain, in which case the absorbing block
        must be exactly zero.
    renormalize : bool, optional
        When True, rows (and mu0) with positive sum are rescaled to sum one
        instead of being rejected.  Off by default: silent renormalization
        masks modeling errors.

    Returns
    -------
    PriorLaw

    Raises
    ------
    DimensionMismatch, NegativeEntry, RowSumViolation, InitialMassOnAbsorbing
    """
    m, n = space.m, space.n
    stages = tuple(stages)
    if len(stages) < 1:
        raise DimensionMismatch("need at least one stage kernel")
    checked = []
    for k, stage in enumerate(stages, start=1):
        if not isinstance(stage, StageKernel):
            stage = StageKernel(np.asarray(stage[0]), np.asarray(stage[1]))
        if stage.m != m or stage.n != n:
            raise DimensionMismatch(
                f"stage {k}: blocks are {stage.n}x{stage.m}/{stage.n}x{stage.n}, "
                f"expected {n}x{m}/{n}x{n}"
            )
        _check_nonnegative(stage.B, f"stage {k} B")
        _check_nonnegative(stage.A, f"stage {k} A")
        if np.any(stage.B > 1 + ROW_TOL) or np.any(stage.A > 1 + ROW_TOL):
            raise RowSumViolation(f"stage {k}: probability entry exceeds one")
        sums = stage.row_sums()
        bad = np.abs(sums - 1.0) > ROW_TOL
        if np.any(bad):
            if renormalize and np.all(sums[bad] > 0):
                scale = 1.0 / sums
                stage = StageKernel(stage.B * scale[:, None], stage.A * scale[:, None])
            else:
                x = int(np.argmax(np.abs(sums - 1.0)))
                raise RowSumViolation(
                    f"stage {k}, row {space.transient[x]!r}: row sum {sums[x]!r} "
                    f"deviates by {sums[x] - 1.0:.3e}"
                )
        checked.append(stage)

    mu0 = np.array(mu0, dtype=float)
    if mu0.shape == (m + n,):
        if np.any(mu0[:m] != 0):
            j = int(np.argmax(mu0[:m] != 0))
            raise InitialMassOnAbsorbing(
                f"mu0 places mass {mu0[j]!r} on absorbing state {space.absorbing[j]!r}"
            )
        mu0 = mu0[m:]
    if mu0.shape != (n,):
        raise DimensionMismatch(f"mu0 has shape {mu0.shape}, expected ({n},) or ({m + n},)")
    mu0 = _check_probability_vector(mu0, "mu0", renormalize=renormalize)

    return PriorLaw(
        space=space,
        horizon=len(checked),
        stages=tuple(checked),
        mu0=_as_readonly(mu0),
        validated=True,
    )


def validate_marginals(space, horizon, mu_hat0, nu_hat):
    """Validate target marginals against a state space and horizon.

    ``nu_hat`` must be m x horizon with nonnegative entries and total mass
    at most one; the remaining mass stays on transient states at the final
    time.

    Raises
    ------
    DimensionMismatch, NegativeEntry, RowSumViolation, MassExceedsOne
    """
    m, n = space.m, space.n
    mu_hat0 = np.array(mu_hat0, dtype=float)
    if mu_hat0.shape == (m + n,):
        if np.any(mu_hat0[:m] != 0):
            j = int(np.argmax(mu_hat0[:m] != 0))
            raise InitialMassOnAbsorbing(
                f"mu_hat0 places mass {mu_hat0[j]!r} on absorbing state {space.absorbing[j]!r}"
            )
        mu_hat0 = mu_hat0[m:]
    if mu_hat0.shape != (n,):
        raise DimensionMismatch(f"mu_hat0 has shape {mu_hat0.shape}, expected ({n},)")
    mu_hat0 = _check_probability_vector(mu_hat0, "mu_hat0")

    nu_hat = np.array(nu_hat, dtype=float)
    if nu_hat.shape != (m, horizon):
        raise DimensionMismatch(
            f"nu_hat has shape {nu_hat.shape}, expected ({m}, {horizon}) "
            "(one row per absorbing state, one column per time step)"
        )
    _check_nonnegative(nu_hat, "nu_hat")
    total = nu_hat.sum()
    if total > 1.0 + ROW_TOL:
        raise MassExceedsOne(f"nu_hat total mass {total!r} exceeds one")

    return MarginalSpec(mu_hat0=_as_readonly(mu_hat0), nu_hat=_as_readonly(nu_hat))


def support_feasibility_report(prior, spec):
    """Flag targets that the prior cannot reach from the target start.

    Computes prior first-arrival probabilities started from ``spec.mu_hat0``
    and reports every (state, tau) whose target mass is positive while that
    probability is zero.  Passing is necessary, not sufficient, for
    feasibility.
    """
    from .space_time_expansion import prior_arrival_distribution

    arrival, _ = prior_arrival_distribution(prior, spec.mu_hat0)
    blocked = []
    m, t = spec.nu_hat.shape
    for tau in range(1, t + 1):
        for j in range(m):
            if spec.nu_hat[j, tau - 1] > 0 and arrival[j, tau - 1] == 0:
                blocked.append((prior.space.absorbing[j], tau))
    return FeasibilityReport(blocked=tuple(blocked))
