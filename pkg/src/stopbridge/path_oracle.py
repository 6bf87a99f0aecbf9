"""Ground truth on explicitly enumerated path spaces.

Everything here works on the full table of length-(t+1) state sequences, so
it is exponentially expensive and guarded by an enumeration cap, but it is
independent of the diagonal-scaling solver: laws are evaluated path by path,
the I-projection is computed by iterative proportional fitting directly on
path masses, and structural properties (Markovianity, shared bridges) are
measured rather than assumed.

Paths use full-chain indexing (absorbing states 0..m-1, transient
m..m+n-1) and absorbed paths are padded with absorbing self-loops so every
law lives on one common alphabet; the enumeration covers *all*
absorption-respecting sequences, including zero-mass ones, which keeps any
two laws over the same space index-aligned.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import NotConverged, StateSpaceTooLarge

#: Default cap on (m+n)**(t+1); override per call or via STOPBRIDGE_CAP.
DEFAULT_ENUMERATION_CAP = 2_000_000


def enumeration_cap(override=None):
    """Resolve the path-space cap: explicit override, else env, else default."""
    if override is not None:
        return int(override)
    env = os.environ.get("STOPBRIDGE_CAP")
    return int(env) if env else DEFAULT_ENUMERATION_CAP


@dataclass(frozen=True, eq=False)
class PathLaw:
    """A probability law written out over every admissible path.

    ``paths`` is K x (t+1) in full-chain indexing; ``probs`` aligns with its
    rows.  Derived index arrays: ``start`` (transient index of x_0),
    ``arrival_state``/``arrival_time`` (absorbing index and 1-based time of
    first absorption, or -1 for paths that survive the window).
    """

    space: object
    paths: np.ndarray
    probs: np.ndarray
    start: np.ndarray
    arrival_state: np.ndarray
    arrival_time: np.ndarray

    @property
    def horizon(self):
        return self.paths.shape[1] - 1

    def with_probs(self, probs):
        """Same enumeration, different masses."""
        probs = np.asarray(probs, dtype=float)
        probs.setflags(write=False)
        return PathLaw(
            space=self.space, paths=self.paths, probs=probs,
            start=self.start, arrival_state=self.arrival_state,
            arrival_time=self.arrival_time,
        )

    def aligned_with(self, other):
        return self.paths is other.paths or np.array_equal(self.paths, other.paths)

    def arrival_matrix(self):
        """m x t matrix of first-arrival mass, plus terminal-residual vector."""
        m, t = self.space.m, self.horizon
        arrival = np.zeros((m, t))
        absorbed = self.arrival_time > 0
        np.add.at(
            arrival,
            (self.arrival_state[absorbed], self.arrival_time[absorbed] - 1),
            self.probs[absorbed],
        )
        residual = np.zeros(self.space.n)
        np.add.at(residual, self.paths[~absorbed, -1] - m, self.probs[~absorbed])
        return arrival, residual


def _all_paths(space, horizon, cap=None):
    """Enumerate every absorption-respecting sequence, in lexicographic order."""
    m, n = space.m, space.n
    if (m + n) ** (horizon + 1) > enumeration_cap(cap):
        raise StateSpaceTooLarge(
            f"(m+n)^(t+1) = {(m + n) ** (horizon + 1)} exceeds cap {enumeration_cap(cap)}"
        )
    paths = np.arange(m, m + n, dtype=np.int64)[:, None]
    for _ in range(horizon):
        alive = paths[:, -1] >= m
        done = paths[~alive]
        done = np.hstack([done, done[:, -1:]])
        live = paths[alive]
        ext = np.repeat(live, m + n, axis=0)
        nxt = np.tile(np.arange(m + n, dtype=np.int64), live.shape[0])[:, None]
        paths = np.vstack([np.hstack([ext, nxt]), done])
        # keep lexicographic order after splitting absorbed rows out
        order = np.lexsort(paths.T[::-1])
        paths = paths[order]
    return paths


def _evaluate(law, mu, paths):
    """Product-of-kernels mass for every enumerated path."""
    m = law.space.m
    probs = np.asarray(mu, dtype=float)[paths[:, 0] - m].copy()
    for tau, stage in enumerate(law.stages):
        full = np.hstack([stage.B, stage.A])
        src = paths[:, tau]
        dst = paths[:, tau + 1]
        alive = src >= m
        step = np.ones(len(paths))
        step[alive] = full[src[alive] - m, dst[alive]]
        # absorbed rows must self-loop; anything else has zero mass
        step[~alive & (dst != src)] = 0.0
        probs *= step
    return probs


def enumerate_paths(law, mu, cap=None):
    """Write out the explicit path law of a staged chain started at ``mu``.

    Parameters
    ----------
    law : PriorLaw or Policy
        Anything with ``space``, ``horizon`` and ``stages``.
    mu : array-like, length n
        Starting distribution over transient states.
    cap : int, optional
        Enumeration cap on (m+n)**(t+1); defaults to the module cap or the
        ``STOPBRIDGE_CAP`` environment variable.

    Raises
    ------
    StateSpaceTooLarge
    """
    space = law.space
    paths = _all_paths(space, law.horizon, cap=cap)
    probs = _evaluate(law, mu, paths)
    m = space.m
    absorbing = paths < m
    has = absorbing.any(axis=1)
    first = np.where(has, absorbing.argmax(axis=1), -1)
    arrival_state = np.where(has, paths[np.arange(len(paths)), first], -1)
    arrival_time = np.where(has, first, -1)
    paths.setflags(write=False)
    probs.setflags(write=False)
    return PathLaw(
        space=space, paths=paths, probs=probs,
        start=paths[:, 0] - m,
        arrival_state=arrival_state.astype(np.int64),
        arrival_time=arrival_time.astype(np.int64),
    )


def kl_divergence(P, Q):
    """Relative entropy sum(P log P/Q); +inf without absolute continuity."""
    assert P.aligned_with(Q), "laws must share one enumeration"
    p, q = P.probs, Q.probs
    pos = p > 0
    if np.any(pos & (q == 0)):
        return float("inf")
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def total_variation(P, Q):
    assert P.aligned_with(Q), "laws must share one enumeration"
    return 0.5 * float(np.abs(P.probs - Q.probs).sum())


def _arrival_masks(law):
    """Boolean mask per (j, tau) first-arrival class, tau-major order."""
    masks = []
    for tau in range(1, law.horizon + 1):
        for j in range(law.space.m):
            masks.append(((law.arrival_state == j) & (law.arrival_time == tau), j, tau))
    return masks


def ipf_project(Q, mu_hat0, nu_hat=None, sweeps=5000, tol=1e-12):
    """I-projection of ``Q`` onto the initial and first-arrival constraints.

    Cycles two constraint families until every constraint holds within
    ``tol``: the initial-state partition is rescaled to ``mu_hat0``, then
    each (j, tau) class is rescaled to its target with the complement
    rescaled to keep total mass one.  The cycle order affects the iterate
    trajectory but not the limit, which is the relative-entropy minimizer
    over the constraint set.  With ``nu_hat=None`` only the initial marginal
    is imposed and a single sweep is exact.

    Raises
    ------
    NotConverged
        Budget exhausted, or some positive target sits on a zero-mass class
        (infeasible data).
    """
    mu_hat0 = np.asarray(mu_hat0, dtype=float)
    p = Q.probs.copy()
    init_masks = [Q.start == i for i in range(Q.space.n)]
    if nu_hat is None:
        arr_masks = []
    else:
        nu_hat = np.asarray(nu_hat, dtype=float)
        arr_masks = _arrival_masks(Q)

    for sweep in range(sweeps):
        for i, mask in enumerate(init_masks):
            s = p[mask].sum()
            if s > 0:
                p[mask] *= mu_hat0[i] / s
            elif mu_hat0[i] > 0:
                raise NotConverged(
                    f"initial mass {mu_hat0[i]!r} demanded on start state "
                    f"{Q.space.transient[i]!r} which has zero prior mass",
                    law=Q.with_probs(p),
                )
        for mask, j, tau in arr_masks:
            target = nu_hat[j, tau - 1]
            s = p[mask].sum()
            if s > 0:
                p[mask] *= target / s
                rest = p[~mask].sum()
                if rest > 0:
                    p[~mask] *= (1.0 - target) / rest
            elif target > 0:
                raise NotConverged(
                    f"target mass {target!r} demanded at ({Q.space.absorbing[j]!r}, "
                    f"tau={tau}) which has zero prior mass",
                    law=Q.with_probs(p),
                )
        viol = max(abs(p[mask].sum() - mu_hat0[i]) for i, mask in enumerate(init_masks))
        for mask, j, tau in arr_masks:
            viol = max(viol, abs(p[mask].sum() - nu_hat[j, tau - 1]))
        if viol <= tol:
            return Q.with_probs(p)
    raise NotConverged(
        f"IPF did not meet tol {tol} in {sweeps} sweeps (violation {viol:.3e})",
        law=Q.with_probs(p),
    )


def ipf_project_endpoints(Q, mu_hat0, mu_hat_t, sweeps=5000, tol=1e-12):
    """I-projection onto two full endpoint marginals (the classical bridge).

    ``mu_hat_t`` is over the full state set (length m+n): absorbed paths sit
    on their absorbing state at the final time thanks to padding.
    """
    mu_hat0 = np.asarray(mu_hat0, dtype=float)
    mu_hat_t = np.asarray(mu_hat_t, dtype=float)
    p = Q.probs.copy()
    init_masks = [Q.start == i for i in range(Q.space.n)]
    end_masks = [Q.paths[:, -1] == s for s in range(Q.space.m + Q.space.n)]

    for sweep in range(sweeps):
        for masks, targets, what in (
            (init_masks, mu_hat0, "start"),
            (end_masks, mu_hat_t, "terminal"),
        ):
            for i, mask in enumerate(masks):
                s = p[mask].sum()
                if s > 0:
                    p[mask] *= targets[i] / s
                elif targets[i] > 0:
                    raise NotConverged(
                        f"{what} mass {targets[i]!r} demanded on a zero-mass class",
                        law=Q.with_probs(p),
                    )
        viol = max(abs(p[m].sum() - mu_hat0[i]) for i, m in enumerate(init_masks))
        viol = max(viol, max(abs(p[m].sum() - mu_hat_t[i]) for i, m in enumerate(end_masks)))
        if viol <= tol:
            return Q.with_probs(p)
    raise NotConverged(
        f"endpoint IPF did not meet tol {tol} in {sweeps} sweeps (violation {viol:.3e})",
        law=Q.with_probs(p),
    )


@dataclass(frozen=True)
class MarkovianityReport:
    """Worst disagreement between next-step conditionals sharing a state."""

    worst_violation: float
    worst_site: tuple  # (tau, state label) or () when nothing to compare
    tol: float = 0.0
    passed: bool = True


def markovianity_check(P, tol=1e-9):
    """Measure how far ``P`` is from being a Markov law.

    For every time tau and every pair of positive-mass histories ending in
    the same state, the conditional next-step distributions must agree
    within ``tol``; the report carries the worst entrywise gap found.
    """
    space = P.space
    worst = 0.0
    site = ()
    K, width = P.paths.shape
    for tau in range(width - 1):
        prefix = P.paths[:, : tau + 1]
        _, group = np.unique(prefix, axis=0, return_inverse=True)
        g = group.max() + 1
        mass = np.zeros((g, space.m + space.n))
        np.add.at(mass, (group, P.paths[:, tau + 1]), P.probs)
        totals = mass.sum(axis=1)
        live = totals > 0
        conds = mass[live] / totals[live, None]
        states = np.zeros(g, dtype=np.int64)
        states[group] = P.paths[:, tau]
        states = states[live]
        for x in np.unique(states):
            rows = conds[states == x]
            if rows.shape[0] < 2:
                continue
            gap = float((rows.max(axis=0) - rows.min(axis=0)).max())
            if gap > worst:
                m = space.m
                label = space.transient[x - m] if x >= m else space.absorbing[x]
                worst, site = gap, (tau, label)
    return MarkovianityReport(
        worst_violation=worst, worst_site=site, tol=tol, passed=worst <= tol
    )


@dataclass(frozen=True)
class SharedBridgesReport:
    """Worst gap between pinned conditional path masses of two laws."""

    worst_violation: float
    worst_class: tuple
    classes_compared: int
    tol: float = 0.0
    passed: bool = True


def shared_bridges_check(Q, P, tol=1e-9):
    """Compare conditional path distributions pinned at both endpoints.

    Classes are (start state, first-arrival site and time) for absorbed
    paths and (start state, terminal transient state) for survivors.  On
    each class with positive mass under both laws, the conditional masses of
    individual paths must agree on the common support.
    """
    assert Q.aligned_with(P), "laws must share one enumeration"
    keys = np.stack(
        [Q.start, Q.arrival_state, Q.arrival_time, Q.paths[:, -1]], axis=1
    ).copy()
    # survivors are pinned by (start, terminal state); absorbed by (start, j, tau)
    absorbed = Q.arrival_time > 0
    keys[absorbed, 3] = -1
    _, group = np.unique(keys, axis=0, return_inverse=True)
    g = group.max() + 1
    q_mass = np.bincount(group, weights=Q.probs, minlength=g)
    p_mass = np.bincount(group, weights=P.probs, minlength=g)

    worst = 0.0
    worst_class = ()
    compared = 0
    live = (q_mass[group] > 0) & (p_mass[group] > 0)
    both = live & (Q.probs > 0) & (P.probs > 0)
    if np.any(both):
        qc = Q.probs[both] / q_mass[group[both]]
        pc = P.probs[both] / p_mass[group[both]]
        gaps = np.abs(qc - pc)
        k = int(np.argmax(gaps))
        worst = float(gaps[k])
        idx = np.flatnonzero(both)[k]
        worst_class = tuple(int(v) for v in keys[idx])
        compared = int(np.unique(group[both]).size)
    return SharedBridgesReport(
        worst_violation=worst, worst_class=worst_class, classes_compared=compared,
        tol=tol, passed=worst <= tol,
    )


def cumulative_constraint_eval(P, j, tau):
    """Probability mass sitting on absorbing state ``j`` at or before ``tau``.

    ``j`` may be an absorbing label or index.  Padding makes this a plain
    indicator sum: every path absorbed at or before tau shows state j at
    position tau.
    """
    if not isinstance(j, (int, np.integer)):
        j = P.space.absorbing_index(j)
    return float(P.probs[P.paths[:, tau] == j].sum())
