"""Command-line front end.

Exit codes are frozen: 0 success, 1 invalid input, 2 solver did not
converge, 3 path space exceeds the enumeration cap.
"""

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import __version__
from .cost_transport import solve_regularized, tilted_path_law
from .errors import NotConverged, StateSpaceTooLarge, StopbridgeError
from .kernel_synthesis import induced_marginals, solve_bridge
from .path_oracle import (
    enumerate_paths,
    ipf_project,
    kl_divergence,
    markovianity_check,
    shared_bridges_check,
    total_variation,
)
from .problem_io import bundled_example_path, bundled_examples, load_problem, policy_document
from .simulator import empirical_distance, sample_paths
from .space_time_expansion import prior_arrival_distribution

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_TOO_LARGE = 3


class _Parser(argparse.ArgumentParser):
    # bad command lines are invalid input, not "not converged"
    def error(self, message):
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _fmt_matrix(M, row_labels, col_labels, indent="  "):
    width = max(8, *(len(c) for c in col_labels)) + 1
    head = indent + " " * 8 + "".join(f"{c:>{width}}" for c in col_labels)
    lines = [head]
    for label, row in zip(row_labels, M):
        cells = "".join(f"{v:>{width}.6g}" for v in row)
        lines.append(f"{indent}{label:>8}{cells}")
    return "\n".join(lines)


def _emit(doc, args, human):
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        human(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def _solve(problem):
    if problem.costs is not None:
        return solve_regularized(
            problem.prior, problem.costs, problem.marginals,
            tol=problem.tol, max_iter=problem.max_iter,
        )
    return solve_bridge(
        problem.prior, problem.marginals, tol=problem.tol, max_iter=problem.max_iter
    )


def _load(args):
    problem = load_problem(args.problem)
    overrides = {}
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    return dataclasses.replace(problem, **overrides) if overrides else problem


def cmd_solve(args):
    problem = _load(args)
    policy, scalings, diagnostics = _solve(problem)
    arrival, residual = induced_marginals(policy, problem.marginals.mu_hat0)
    doc = policy_document(policy, diagnostics)
    doc["scalings"] = {
        "kernel_D0": scalings.kernel_scaling.tolist(),
        "Lambda": scalings.Lambda.reshape(policy.horizon, policy.space.m).tolist(),
    }
    doc["induced_arrival"] = arrival.tolist()
    doc["induced_residual"] = residual.tolist()
    doc["target_arrival"] = np.asarray(problem.marginals.nu_hat).tolist()

    def human(doc):
        space = policy.space
        print(f"solved {problem.name or args.problem}: "
              f"{diagnostics.iterations} iterations, residual {diagnostics.final_residual:.3e}")
        for tau, stage in enumerate(policy.stages, start=1):
            print(f"stage {tau} B*:")
            print(_fmt_matrix(stage.B, space.transient, space.absorbing))
            print(f"stage {tau} A*:")
            print(_fmt_matrix(stage.A, space.transient, space.transient))
        print("induced first-arrival mass (rows: absorbing states, cols: tau=1..t):")
        print(_fmt_matrix(arrival, space.absorbing, [str(k) for k in range(1, policy.horizon + 1)]))
        if policy.unreachable:
            print(f"unreachable rows: {list(policy.unreachable)}")

    _emit(doc, args, human)
    return EXIT_OK


def cmd_verify(args):
    problem = _load(args)
    policy, scalings, diagnostics = _solve(problem)
    Q = enumerate_paths(problem.prior, problem.prior.mu0, cap=args.cap)
    policy_law = enumerate_paths(policy, problem.marginals.mu_hat0, cap=args.cap)
    Q_from_target = Q if np.array_equal(problem.prior.mu0, problem.marginals.mu_hat0) else (
        enumerate_paths(problem.prior, problem.marginals.mu_hat0, cap=args.cap)
    )
    if problem.costs is not None:
        # a cost-aware policy minimizes divergence from the tilted prior
        Q = tilted_path_law(Q, problem.costs)[0]
        Q_from_target = tilted_path_law(Q_from_target, problem.costs)[0]
    ipf_law = ipf_project(
        Q_from_target, problem.marginals.mu_hat0, problem.marginals.nu_hat,
        sweeps=args.max_iter or 5000, tol=1e-13,
    )
    arrival, _ = policy_law.arrival_matrix()
    checks = {
        "tv_policy_vs_ipf": total_variation(policy_law, ipf_law),
        "kl_policy": kl_divergence(policy_law, Q_from_target),
        "kl_ipf": kl_divergence(ipf_law, Q_from_target),
        "markovianity_ipf": markovianity_check(ipf_law).worst_violation,
        "markovianity_policy": markovianity_check(policy_law).worst_violation,
        "shared_bridges": shared_bridges_check(Q, policy_law).worst_violation,
        "arrival_residual": float(np.abs(arrival - problem.marginals.nu_hat).max()),
    }
    tol = args.check_tol
    passed = (
        checks["tv_policy_vs_ipf"] <= tol
        and checks["markovianity_ipf"] <= tol
        and checks["markovianity_policy"] <= tol
        and checks["shared_bridges"] <= tol
        and checks["arrival_residual"] <= tol
        and checks["kl_policy"] <= checks["kl_ipf"] + 1e-9
    )
    doc = {
        "problem": problem.name or str(args.problem),
        "paths": int(len(Q.probs)),
        "checks": checks,
        "check_tol": tol,
        "passed": bool(passed),
    }

    def human(doc):
        print(f"verify {doc['problem']}: {doc['paths']} paths enumerated")
        for key, value in checks.items():
            print(f"  {key:24s} {value:.3e}")
        print("PASS" if passed else "FAIL")

    _emit(doc, args, human)
    return EXIT_OK if passed else EXIT_INVALID


def cmd_arrival(args):
    problem = _load(args)
    arrival, residual = prior_arrival_distribution(problem.prior, problem.prior.mu0)
    doc = {
        "problem": problem.name or str(args.problem),
        "arrival": arrival.tolist(),
        "residual": residual.tolist(),
    }

    def human(doc):
        space = problem.space
        print("prior first-arrival mass (rows: absorbing states, cols: tau=1..t):")
        print(_fmt_matrix(arrival, space.absorbing, [str(k) for k in range(1, problem.horizon + 1)]))
        print("terminal transient mass:")
        print(_fmt_matrix(residual[None, :], ["mass"], space.transient))

    _emit(doc, args, human)
    return EXIT_OK


def cmd_simulate(args):
    if args.n < 1:
        raise StopbridgeError(f"--n must be at least 1, got {args.n}")
    problem = _load(args)
    policy, scalings, diagnostics = _solve(problem)
    emp = sample_paths(policy, problem.marginals.mu_hat0, args.n, args.seed)
    exact, _ = induced_marginals(policy, problem.marginals.mu_hat0)
    to_target = empirical_distance(emp, problem.marginals.nu_hat)
    to_exact = empirical_distance(emp, exact)
    doc = {
        "problem": problem.name or str(args.problem),
        "n": args.n,
        "seed": args.seed,
        "counts": emp.counts.tolist(),
        "residual_counts": emp.residual_counts.tolist(),
        "distance_to_target": {"linf": to_target[0], "l1": to_target[1]},
        "distance_to_induced": {"linf": to_exact[0], "l1": to_exact[1]},
    }

    def human(doc):
        space = problem.space
        print(f"simulated {args.n} walkers under the solved policy (seed {args.seed})")
        print("arrival counts:")
        print(_fmt_matrix(emp.counts, space.absorbing, [str(k) for k in range(1, problem.horizon + 1)]))
        print(f"L-inf to target nu_hat:   {to_target[0]:.6g}")
        print(f"L-inf to induced arrival: {to_exact[0]:.6g}")

    _emit(doc, args, human)
    return EXIT_OK


def cmd_example(args):
    if args.what == "list":
        for name in bundled_examples():
            print(f"{name}\t{bundled_example_path(name)}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="stopbridge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stopbridge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out=True):
        p.add_argument("problem", help="path to a problem JSON file")
        p.add_argument("--tol", type=float, default=None, help="solver tolerance override")
        p.add_argument("--max-iter", type=int, default=None, help="solver iteration budget override")
        p.add_argument("--json", action="store_true", help="emit one machine-readable JSON document")
        if out:
            p.add_argument("--out", default=None, help="also write the JSON document to this file")

    p = sub.add_parser("solve", help="solve the bridge and print the policy")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the full path-space oracle battery")
    add_common(p)
    p.add_argument("--cap", type=int, default=None, help="path enumeration cap override")
    p.add_argument("--check-tol", type=float, default=1e-6, help="pass/fail threshold for the checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("arrival", help="print the prior first-arrival distribution")
    add_common(p)
    p.set_defaults(func=cmd_arrival)

    p = sub.add_parser("simulate", help="sample walkers under the solved policy")
    add_common(p)
    p.add_argument("--n", type=int, default=100_000, help="number of walkers")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="bundled example problems")
    p.add_argument("what", choices=["list"], help="'list' prints names and paths")
    p.set_defaults(func=cmd_example)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StateSpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.diagnostics is not None:
            print(
                f"iterations: {exc.diagnostics.iterations}, "
                f"final residual: {exc.diagnostics.final_residual:.3e}",
                file=sys.stderr,
            )
        return EXIT_NOT_CONVERGED
    except (StopbridgeError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
