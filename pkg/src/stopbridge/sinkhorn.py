"""Diagonal-scaling solvers for partially and fully specified marginals.

:func:`sinkhorn_partial` fits the single-stage bridge with a full row
marginal and a partial column marginal (only the first-arrival columns are
pinned; the survivor block is free).  :func:`classical_sb` is the standard
two-marginal special case.  Both alternate entrywise-division updates that
are contractive in the Hilbert projective metric, so convergence is linear.

Scaling convention
------------------
The iteration works on the *joint-law* scale: at a fixed point,
``diag(D) @ [Bcal | Acal]`` has row sums ``mu_hat`` and
``diag(D) @ Bcal @ diag(Lambda)`` has column sums ``nu_hat``.  Hence
``D ~ mu_hat`` entrywise when the data are nearly consistent.  The
row-stochastic *kernel* scaling used for policy synthesis is
``D / mu_hat`` (0/0 := 0), exposed as :attr:`ScalingPair.kernel_scaling`.
This is the single place the convention lives.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivisionBlowup, NotConverged

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


def div0(num, den, what="target"):
    """Entrywise ``num / den`` with 0/0 := 0.

    A positive numerator over a zero denominator is a hard infeasibility
    and raises :class:`DivisionBlowup`; silent conventions there would let
    impossible problems "converge".
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    zero = den == 0
    if np.any(zero & (num > 0)):
        k = int(np.argmax(zero & (num > 0)))
        raise DivisionBlowup(
            f"{what} entry {k} is positive ({num[k]!r}) but its prior-side mass is zero"
        )
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=~zero)
    return out


def recip0(v):
    """Entrywise reciprocal with 0 -> 0 (Moore-Penrose inverse of diag(v))."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    np.divide(1.0, v, out=out, where=v != 0)
    return out


@dataclass(frozen=True, eq=False)
class ScalingPair:
    """Converged diagonal scalings, joint-law convention.

    Attributes
    ----------
    D : ndarray, length n
        Row scaling; ``diag(D) @ [Bcal | Acal]`` row-sums to ``mu_hat``.
    Lambda : ndarray, length m*t
        Column scaling of ``Bcal``; zero exactly on zero-target columns.
    mu_hat : ndarray, length n
        The row marginal the pair was fitted to; kept so the kernel-scale
        view below is self-contained.
    """

    D: np.ndarray
    Lambda: np.ndarray
    mu_hat: np.ndarray

    @property
    def kernel_scaling(self):
        """Row scaling ``D / mu_hat`` (0/0 := 0) making the scaled kernel row-stochastic."""
        return div0(self.D, self.mu_hat, what="joint row scaling")

    def __eq__(self, other):
        if not isinstance(other, ScalingPair):
            return NotImplemented
        return (
            np.array_equal(self.D, other.D)
            and np.array_equal(self.Lambda, other.Lambda)
            and np.array_equal(self.mu_hat, other.mu_hat)
        )


@dataclass(frozen=True)
class SinkhornDiagnostics:
    """Convergence record: iterations, final residual, residual per sweep."""

    iterations: int
    final_residual: float
    converged: bool
    residual_history: tuple


def _residuals(Bcal, Arow, D, Lam, mu_hat, nu_hat):
    row = np.max(np.abs(D * (Bcal @ Lam + Arow) - mu_hat))
    col = np.max(np.abs(Lam * (Bcal.T @ D) - nu_hat))
    return max(row, col)


def sinkhorn_partial(Bcal, Acal, mu_hat, nu_hat, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Fit diagonal scalings for a full row and partial column marginal.

    Alternates, starting from ``Lambda = 1``::

        D      = mu_hat / (Bcal @ Lambda + Acal @ 1)
        Lambda = nu_hat / (Bcal.T @ D)

    until the worst row/column constraint residual of the current pair is
    at most ``tol``.  Division is entrywise with 0/0 := 0, so zero-target
    columns get ``Lambda = 0`` exactly.

    Parameters
    ----------
    Bcal : ndarray, n x (m*t)
        Pinned-column block (first-arrival kernels, flattened by time).
    Acal : ndarray, n x n
        Free-column block (survivors).
    mu_hat : ndarray, length n
        Target row sums; a probability vector.
    nu_hat : ndarray, length m*t
        Target column sums for ``Bcal``, total at most one.
    tol, max_iter : float, int
        Stopping rule: max residual <= tol, or give up after max_iter sweeps.

    Returns
    -------
    (ScalingPair, SinkhornDiagnostics)

    Raises
    ------
    DivisionBlowup
        If some positive target column is unreachable from the support of
        ``mu_hat`` (hard infeasibility).
    NotConverged
        Iteration budget exhausted; the exception carries the last iterate
        and diagnostics.
    """
    Bcal = np.asarray(Bcal, dtype=float)
    Acal = np.asarray(Acal, dtype=float)
    mu_hat = np.asarray(mu_hat, dtype=float)
    nu_hat = np.asarray(nu_hat, dtype=float)
    if Bcal.shape[0] != Acal.shape[0] or Acal.shape[0] != Acal.shape[1]:
        raise DivisionBlowup(f"inconsistent blocks {Bcal.shape} / {Acal.shape}")

    Arow = Acal.sum(axis=1)
    Lam = np.ones(Bcal.shape[1])
    history = []
    D = None
    for it in range(max_iter + 1):
        D = div0(mu_hat, Bcal @ Lam + Arow, what="mu_hat")
        res = _residuals(Bcal, Arow, D, Lam, mu_hat, nu_hat)
        history.append(res)
        if res <= tol:
            pair = ScalingPair(D=D, Lambda=Lam, mu_hat=mu_hat)
            return pair, SinkhornDiagnostics(
                iterations=it, final_residual=res, converged=True,
                residual_history=tuple(history),
            )
        Lam = div0(nu_hat, Bcal.T @ D, what="nu_hat")

    pair = ScalingPair(D=D, Lambda=Lam, mu_hat=mu_hat)
    diag = SinkhornDiagnostics(
        iterations=max_iter, final_residual=history[-1], converged=False,
        residual_history=tuple(history),
    )
    raise NotConverged(
        f"no convergence after {max_iter} sweeps (residual {history[-1]:.3e}); "
        "the problem may be infeasible or tol too tight",
        scalings=pair, diagnostics=diag,
    )


def classical_sb(G, mu_hat0, mu_hat_t, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Two-marginal diagonal scaling: ``diag(L) @ G @ diag(R)``.

    Fits row sums ``mu_hat0`` and column sums ``mu_hat_t`` on a nonnegative
    matrix ``G`` (typically the product of all stage kernels).  Same
    conventions and errors as :func:`sinkhorn_partial`.

    Returns
    -------
    (L, R, SinkhornDiagnostics)
    """
    G = np.asarray(G, dtype=float)
    mu_hat0 = np.asarray(mu_hat0, dtype=float)
    mu_hat_t = np.asarray(mu_hat_t, dtype=float)

    R = np.ones(G.shape[1])
    history = []
    L = None
    for it in range(max_iter + 1):
        L = div0(mu_hat0, G @ R, what="mu_hat0")
        row = np.max(np.abs(L * (G @ R) - mu_hat0))
        col = np.max(np.abs(R * (G.T @ L) - mu_hat_t))
        res = max(row, col)
        history.append(res)
        if res <= tol:
            return L, R, SinkhornDiagnostics(
                iterations=it, final_residual=res, converged=True,
                residual_history=tuple(history),
            )
        R = div0(mu_hat_t, G.T @ L, what="mu_hat_t")

    diag = SinkhornDiagnostics(
        iterations=max_iter, final_residual=history[-1], converged=False,
        residual_history=tuple(history),
    )
    raise NotConverged(
        f"no convergence after {max_iter} sweeps (residual {history[-1]:.3e})",
        scalings=(L, R), diagnostics=diag,
    )
