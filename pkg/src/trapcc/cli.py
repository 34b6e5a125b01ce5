"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 no realizable solution, 3 more than
one realizable solution (a uniqueness anomaly), 4 identity or certificate
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .certify import certify_minimum
from .errors import NotConverged
from .explore import DEFAULT_SEED, mass_sweep, probe_uniqueness, rows_to_csv, simplex_grid
from .kkt import Solution, SolverConfig
from .potential import MassVector
from .verify import faulty_k_invariant, run_identity_suite
from . import geometry as geo

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2
EXIT_ANOMALY = 3
EXIT_FAILURE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _masses(text: str) -> MassVector:
    try:
        return MassVector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text.rstrip("\n"))


def _solver_config(args) -> SolverConfig:
    kwargs = {}
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    if args.tol_residual is not None:
        kwargs["tol_residual"] = args.tol_residual
    if args.tol_step is not None:
        kwargs["tol_step"] = args.tol_step
    return SolverConfig(**kwargs)


def _probe(args):
    cfg = _solver_config(args)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            return probe_uniqueness(args.masses, args.starts, args.seed, cfg, executor=pool)
    return probe_uniqueness(args.masses, args.starts, args.seed, cfg)


def _probe_exit_code(report) -> int:
    n = report.distinct_realizable_clusters
    if n == 0:
        return EXIT_NO_SOLUTION
    if n > 1:
        return EXIT_ANOMALY
    cert = report.realizable_clusters[0].representative.certificate
    return EXIT_OK if cert is not None and cert.passed else EXIT_FAILURE


def cmd_solve(args) -> int:
    report = _probe(args)
    if report.realizable_clusters:
        payload = report.realizable_clusters[0].representative.to_dict()
    elif report.clusters:
        # the critical point on {I = 1, F = 0} exists but is not a trapezoid
        payload = max(report.clusters, key=lambda c: c.count).representative.to_dict()
    else:
        payload = report.to_dict()
    _emit(_dump(payload), args.output)
    return _probe_exit_code(report)


def cmd_probe(args) -> int:
    report = _probe(args)
    _emit(_dump(report.to_dict()), args.output)
    return _probe_exit_code(report)


def cmd_certify(args) -> int:
    try:
        with open(args.input) as fh:
            sol = Solution.from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read solution from {args.input}: {exc}") from None
    try:
        report = certify_minimum(sol, tol_residual=args.tol_residual or 1e-10)
    except NotConverged as exc:
        print(f"certificate failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    _emit(_dump(report.to_dict()), args.output)
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_sweep(args) -> int:
    cfg = _solver_config(args)
    grid = simplex_grid(args.grid, ratio=args.ratio)
    rows, reports = mass_sweep(grid, args.starts, args.seed, cfg, workers=args.threads)
    if args.format == "csv":
        text = rows_to_csv(rows)
    else:
        text = _dump([rep.to_dict() for rep in reports])
    _emit(text, args.output)
    if any(rep.distinct_realizable_clusters > 1 for rep in reports):
        return EXIT_ANOMALY
    return EXIT_OK


def cmd_verify_identities(args) -> int:
    k_fn = faulty_k_invariant if args.inject_fault == "k-sign" else geo.k_invariant
    results = run_identity_suite(args.seed, args.samples, k_fn=k_fn)
    lines = [res.line() for res in results]
    code = EXIT_OK
    for res in results:
        if not res.ok:
            lines.append(f"witness for {res.name}: {json.dumps(res.witness)}")
            code = EXIT_FAILURE
    _emit("\n".join(lines), args.output)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trapcc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, starts_default):
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        p.add_argument("--starts", type=_positive_int, default=starts_default)
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--max-iters", type=_positive_int)
        p.add_argument("--tol-residual", type=float)
        p.add_argument("--tol-step", type=float)
        p.add_argument("--output", "-o")

    p = sub.add_parser("solve", help="find and certify the trapezoidal central configuration")
    p.add_argument("--masses", type=_masses, required=True)
    common(p, 64)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("probe", help="multi-start uniqueness probe, full report")
    p.add_argument("--masses", type=_masses, required=True)
    common(p, 200)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("sweep", help="uniqueness probes over an interior mass-simplex grid")
    p.add_argument("--grid", type=_positive_int, default=5, help="grid points per axis")
    p.add_argument("--ratio", type=float, default=4.0, help="largest mass ratio on each axis")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    common(p, 50)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="re-certify a solution JSON file")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--tol-residual", type=float)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-identities", help="run the seeded identity checks")
    p.add_argument("--samples", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--inject-fault", choices=("k-sign",), help=argparse.SUPPRESS)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_verify_identities)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"trapcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
