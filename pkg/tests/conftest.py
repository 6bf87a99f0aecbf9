import numpy as np
import pytest

from stopbridge import (
    StageKernel,
    StateSpace,
    bundled_example_path,
    load_problem,
    prior_arrival_distribution,
    validate_marginals,
    validate_prior,
)


@pytest.fixture(scope="session")
def de_moivre():
    return load_problem(bundled_example_path("de_moivre"))


@pytest.fixture(scope="session")
def traffic():
    return load_problem(bundled_example_path("traffic"))


def random_instance(seed, n_max=4, m_max=2, t_max=4):
    """A dense random prior plus feasible targets.

    Every kernel entry is positive, so any target built as a convex mixture
    of arrival distributions of two such priors (started from the target
    initial distribution) is feasible.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    t = int(rng.integers(1, t_max + 1))
    space = StateSpace(
        absorbing=tuple(f"abs{j}" for j in range(m)),
        transient=tuple(f"trs{x}" for x in range(n)),
    )

    def one_prior():
        stages = []
        for _ in range(t):
            rows = rng.dirichlet(np.ones(m + n), size=n)
            rows /= rows.sum(axis=1, keepdims=True)
            stages.append(StageKernel(rows[:, :m], rows[:, m:]))
        mu = rng.dirichlet(np.ones(n))
        return validate_prior(space, stages, mu / mu.sum())

    prior = one_prior()
    other = one_prior()
    mu_hat0 = rng.dirichlet(np.ones(n))
    mu_hat0 /= mu_hat0.sum()
    mix = rng.uniform(0.1, 0.9)
    a1, _ = prior_arrival_distribution(prior, mu_hat0)
    a2, _ = prior_arrival_distribution(other, mu_hat0)
    marginals = validate_marginals(space, t, mu_hat0, (1 - mix) * a1 + mix * a2)
    return prior, marginals


#: Filled by tests/test_acceptance.py; printed after the run.
ACCEPTANCE_RESULTS = {}


def record_acceptance(number, description, passed):
    ACCEPTANCE_RESULTS[number] = (description, bool(passed))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        description, passed = ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {description}")
