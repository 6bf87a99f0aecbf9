"""Problem files: a JSON schema for chains, targets, costs and solver options.

Schema (see README for the full description)::

    {
      "states":  {"absorbing": [...], "transient": [...]},
      "horizon": t,
      "stages":  {"B": [[...]], "A": [[...]]}     # one kernel, replicated, or
                 [{"B": ..., "A": ...}, ...]      # one kernel per stage
      "mu0":     [...],                           # over transient labels
      "mu_hat0": [...],
      "nu_hat":  [[...], ...],                    # m rows of t entries
      "costs":   same shape as "stages",          # optional
      "beta":    1.0,                             # required with costs
      "solver":  {"tol": 1e-10, "max_iter": 10000}  # optional
    }

Numbers may be JSON numerals or fraction strings such as ``"1/8"``; decimal
values with at most 15 significant digits survive a save/load round trip
bit-exactly.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .chain_model import StageKernel, StateSpace, validate_marginals, validate_prior
from .cost_transport import EdgeCostSchedule
from .errors import DimensionMismatch, NegativeEntry
from .sinkhorn import DEFAULT_MAX_ITER, DEFAULT_TOL


@dataclass(frozen=True)
class ProblemFile:
    """A loaded, fully validated problem instance."""

    prior: object
    marginals: object
    costs: object = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    name: str = ""
    source: str = ""

    @property
    def space(self):
        return self.prior.space

    @property
    def horizon(self):
        return self.prior.horizon


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise DimensionMismatch(f"{where}: expected a number or fraction string, got {value!r}")
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise DimensionMismatch(f"{where}: cannot parse number {value!r}") from exc
    return float(value)


def _vector(value, where):
    if not isinstance(value, list):
        raise DimensionMismatch(f"{where}: expected an array")
    return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _matrix(value, where):
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise DimensionMismatch(f"{where}: expected an array of rows")
    widths = {len(r) for r in value}
    if len(widths) != 1:
        raise DimensionMismatch(f"{where}: ragged rows {sorted(widths)}")
    return np.array(
        [[_number(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(value)]
    )


def _stage_list(value, horizon, where):
    """A single {B, A} object is replicated across the horizon."""
    if isinstance(value, dict):
        value = [value] * horizon
    if not isinstance(value, list):
        raise DimensionMismatch(f"{where}: expected an object or array of objects")
    if len(value) != horizon:
        raise DimensionMismatch(f"{where}: got {len(value)} stages for horizon {horizon}")
    out = []
    for k, stage in enumerate(value):
        if not isinstance(stage, dict) or "B" not in stage or "A" not in stage:
            raise DimensionMismatch(f"{where}[{k}]: expected an object with B and A")
        out.append((_matrix(stage["B"], f"{where}[{k}].B"), _matrix(stage["A"], f"{where}[{k}].A")))
    return out


def load_problem(source):
    """Load and validate a problem from a path, JSON string, or dict.

    Raises the relevant :mod:`stopbridge.errors` exception naming the
    offending field when the file is malformed or fails validation.
    """
    name = ""
    origin = ""
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        origin = str(path)
        doc = json.loads(path.read_text())
    if not isinstance(doc, dict):
        raise DimensionMismatch("problem document must be a JSON object")

    for key in ("states", "horizon", "stages", "mu0", "mu_hat0", "nu_hat"):
        if key not in doc:
            raise DimensionMismatch(f"missing required field {key!r}")
    states = doc["states"]
    if not isinstance(states, dict) or "absorbing" not in states or "transient" not in states:
        raise DimensionMismatch("states: expected an object with absorbing and transient arrays")
    space = StateSpace(absorbing=tuple(states["absorbing"]), transient=tuple(states["transient"]))

    horizon = doc["horizon"]
    if not isinstance(horizon, int) or horizon < 1:
        raise DimensionMismatch(f"horizon: expected a positive integer, got {horizon!r}")

    kernels = [StageKernel(B, A) for B, A in _stage_list(doc["stages"], horizon, "stages")]
    prior = validate_prior(space, kernels, _vector(doc["mu0"], "mu0"))
    marginals = validate_marginals(
        space, horizon, _vector(doc["mu_hat0"], "mu_hat0"), _matrix(doc["nu_hat"], "nu_hat")
    )

    costs = None
    if "costs" in doc:
        if "beta" not in doc:
            raise DimensionMismatch("costs given without beta")
        beta = _number(doc["beta"], "beta")
        if beta <= 0:
            raise NegativeEntry(f"beta must be positive, got {beta!r}")
        costs = EdgeCostSchedule(
            stages=tuple(_stage_list(doc["costs"], horizon, "costs")), beta_inv=1.0 / beta
        )

    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise DimensionMismatch("solver: expected an object")
    tol = _number(solver.get("tol", DEFAULT_TOL), "solver.tol")
    max_iter = int(solver.get("max_iter", DEFAULT_MAX_ITER))

    name = doc.get("name", "") or (Path(origin).stem if origin else "")
    return ProblemFile(
        prior=prior, marginals=marginals, costs=costs,
        tol=tol, max_iter=max_iter, name=name, source=origin,
    )


def problem_to_dict(problem):
    """Serialize back to the schema (floats, not fraction strings)."""
    prior, marginals = problem.prior, problem.marginals
    doc = {
        "name": problem.name,
        "states": {
            "absorbing": list(prior.space.absorbing),
            "transient": list(prior.space.transient),
        },
        "horizon": prior.horizon,
        "stages": [
            {"B": stage.B.tolist(), "A": stage.A.tolist()} for stage in prior.stages
        ],
        "mu0": prior.mu0.tolist(),
        "mu_hat0": marginals.mu_hat0.tolist(),
        "nu_hat": marginals.nu_hat.tolist(),
    }
    if problem.costs is not None:
        doc["costs"] = [{"B": UB.tolist(), "A": UA.tolist()} for UB, UA in problem.costs.stages]
        doc["beta"] = problem.costs.beta
    doc["solver"] = {"tol": problem.tol, "max_iter": problem.max_iter}
    return doc


def save_problem(problem, path):
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")


def policy_document(policy, diagnostics=None):
    """Policy JSON: stages in the input format plus d vectors and provenance."""
    doc = {
        "states": {
            "absorbing": list(policy.space.absorbing),
            "transient": list(policy.space.transient),
        },
        "horizon": policy.horizon,
        "stages": [
            {"B": stage.B.tolist(), "A": stage.A.tolist()} for stage in policy.stages
        ],
        "d_vectors": [d.tolist() for d in policy.d_vectors],
        "unreachable": [[tau, label] for tau, label in policy.unreachable],
    }
    if policy.provenance:
        doc["provenance"] = dict(policy.provenance)
    if diagnostics is not None:
        doc["diagnostics"] = {
            "iterations": diagnostics.iterations,
            "final_residual": diagnostics.final_residual,
            "converged": diagnostics.converged,
        }
    return doc


def bundled_examples():
    """Names of the problem files shipped with the package."""
    root = resources.files("stopbridge").joinpath("data")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_example_path(name):
    """Filesystem path of a bundled problem file."""
    path = resources.files("stopbridge").joinpath("data", f"{name}.json")
    if not path.is_file():
        raise FileNotFoundError(f"no bundled example named {name!r}; have {bundled_examples()}")
    return Path(str(path))
