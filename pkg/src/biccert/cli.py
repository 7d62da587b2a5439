"""Command-line front end.

Subcommands: ``construct`` (build and validate a POVM), ``certify`` (run the
Bell, SOS, certification-relation and entropy checks on a POVM file),
``classical`` (exact classical value of a Gram-matrix file), and ``report``
(the full reproduction suite).

Exit codes: 0 success, 2 certification/validation failure, 3 usage or
parameter error.  JSON outputs are authoritative; ``--format csv-summary``
additionally writes flat CSV files with the scalar quantities.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import algebra, bell, bic, classical, randomness, reproduce
from .linalg import dump_json, load_json

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_seed() -> int:
    return int(os.environ.get("BICCERT_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="biccert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-9, help="relative tolerance")
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help="RNG seed (default from BICCERT_SEED, else 0)")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory for result files")
        p.add_argument("--format", choices=("json", "csv-summary"), default="json",
                       help="csv-summary also writes flat CSV files")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap (all current code paths are single-threaded)")

    p = sub.add_parser("construct", help="construct and validate a BIC-POVM")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--construction", choices=("weyl", "generic"), default="weyl")
    p.add_argument("--r", type=float, default=0.3, help="fiducial radius (weyl)")
    p.add_argument("--t", type=float, default=0.137, help="fiducial phase (weyl)")
    common(p)

    p = sub.add_parser("certify", help="full certification run on a POVM file")
    p.add_argument("povm", type=Path, help="BicPovm JSON file")
    common(p)

    p = sub.add_parser("classical", help="exact classical value of a Gram file")
    p.add_argument("gram", type=Path, help="GramMatrix JSON file")
    p.add_argument("--allow-d5", action="store_true",
                   help="enable the d=5 enumeration (~4e6 subsets)")
    p.add_argument("--max-subsets", type=int, default=classical.MAX_SUBSETS_DEFAULT,
                   help="hard cap on enumerated subsets")
    common(p)

    p = sub.add_parser("report", help="run the full reproduction suite")
    p.add_argument("--d-max", type=int, default=4,
                   help="extend certification checks up to this dimension")
    common(p)

    return parser


def _write_csv(path: Path, rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _flatten(prefix: str, obj, rows: list[tuple]) -> None:
    if isinstance(obj, dict):
        for key, value in obj.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), value, rows)
    elif isinstance(obj, (int, float, bool)):
        rows.append((prefix, obj))


def cmd_construct(args) -> int:
    if args.construction == "weyl":
        fiducial = bic.geometric_fiducial(args.d, args.r, args.t)
        povm = bic.construct_weyl_bic(args.d, fiducial)
    else:
        povm = bic.construct_generic_bic(args.d, args.seed)
    gm = bic.gram(povm)
    povm_report = bic.validate_bic(povm, tol=args.tol)
    gram_report = bic.validate_gram(gm, tol=args.tol)

    args.out.mkdir(parents=True, exist_ok=True)
    dump_json(bic.povm_to_json(povm), args.out / "povm.json")
    dump_json(bic.gram_to_json(gm), args.out / "gram.json")
    validation = {
        "d": args.d,
        "construction": args.construction,
        "povm": povm_report.to_json(),
        "gram": gram_report.to_json(),
        "passed": povm_report.passed and gram_report.passed,
    }
    dump_json(validation, args.out / "construct_validation.json")
    if args.format == "csv-summary":
        rows: list[tuple] = [("key", "value")]
        _flatten("", validation, rows)
        _write_csv(args.out / "construct_validation.csv", rows)

    ok = povm_report.passed and gram_report.passed
    print(f"constructed d={args.d} ({args.construction}); validation "
          f"{'passed' if ok else 'FAILED: ' + ', '.join(povm_report.failures() + gram_report.failures())}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_certify(args) -> int:
    povm = bic.povm_from_json(load_json(args.povm))
    validation = bic.validate_bic(povm, tol=args.tol)
    if not validation.passed:
        print("input POVM failed validation: " + ", ".join(validation.failures()),
              file=sys.stderr)
        args.out.mkdir(parents=True, exist_ok=True)
        dump_json({"inputValidation": validation.to_json(), "passed": False},
                  args.out / "certify_report.json")
        return EXIT_FAILED

    S = bic.gram(povm)
    ref = bell.reference_strategy(povm)
    value = bell.bell_value(ref, S)
    sos = bell.sos_certificate(ref, S)
    cert = algebra.verify_certification(ref, S, tol=args.tol)
    rand = randomness.randomness_report(ref, S, tol=args.tol)

    d2 = povm.d**2
    breaches = {
        "bell value": abs(value.value - d2) > args.tol * d2,
        "sos identity": sos.identity_residual > args.tol * d2,
        "sos positivity": sos.theta_min_eigenvalue < -10 * args.tol,
        "sos theta.rho": sos.theta_rho_residual > args.tol * d2,
        "certification relations": not cert.passed,
        "entropy": abs(rand.conditional_entropy_bits - 2 * np.log2(povm.d)) > args.tol,
    }
    report = {
        "d": povm.d,
        "bell": value.to_json(),
        "sos": sos.to_json(),
        "certification": cert.to_json(),
        "randomness": rand.to_json(),
        "breaches": {k: bool(v) for k, v in breaches.items()},
        "passed": not any(breaches.values()),
    }
    args.out.mkdir(parents=True, exist_ok=True)
    dump_json(report, args.out / "certify_report.json")
    if args.format == "csv-summary":
        rows: list[tuple] = [("key", "value")]
        _flatten("", report, rows)
        _write_csv(args.out / "certify_report.csv", rows)

    ok = report["passed"]
    failing = [k for k, v in breaches.items() if v]
    print(f"d={povm.d}: bell value {value.value:.9f}, entropy "
          f"{rand.conditional_entropy_bits:.9f} bits; "
          f"{'all checks passed' if ok else 'FAILED: ' + ', '.join(failing)}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_classical(args) -> int:
    gm = bic.gram_from_json(load_json(args.gram))
    validation = bic.validate_gram(gm, tol=max(args.tol, 1e-9))
    if not validation.passed:
        print("input Gram matrix failed validation: "
              + ", ".join(validation.failures()), file=sys.stderr)
        return EXIT_FAILED
    result = classical.classical_value(
        gm, allow_d5=args.allow_d5, max_subsets=args.max_subsets
    )
    payload = result.to_json()
    args.out.mkdir(parents=True, exist_ok=True)
    dump_json(payload, args.out / "classical.json")
    if args.format == "csv-summary":
        rows: list[tuple] = [("key", "value")]
        _flatten("", payload, rows)
        _write_csv(args.out / "classical.csv", rows)
    print(f"d={gm.d}: classical value {result.best_value:.9f} "
          f"(upper bound {result.upper_bound:.9f}, gap {result.quantum_gap:.9f})")
    return EXIT_OK


def cmd_report(args) -> int:
    outcomes = reproduce.run_full_suite(
        tol=args.tol, d_max=args.d_max, seed=args.seed, verbose=True
    )
    all_passed = all(o.passed for o in outcomes)
    payload = {
        "criteria": [o.to_json() for o in outcomes],
        "allPassed": all_passed,
        "config": {
            "tol": args.tol,
            "dMax": args.d_max,
            "seed": args.seed,
            "threads": args.threads,
        },
    }
    args.out.mkdir(parents=True, exist_ok=True)
    dump_json(payload, args.out / "report.json")
    if args.format == "csv-summary":
        rows: list[tuple] = [
            ("criterion", "name", "passed", "seconds", "metric", "value", "threshold")
        ]
        for o in outcomes:
            for metric, value in o.measured.items():
                rows.append((
                    o.cid, o.name, o.passed, round(o.seconds, 3),
                    metric, value, o.thresholds.get(metric, ""),
                ))
        _write_csv(args.out / "report.csv", rows)
    total = sum(o.seconds for o in outcomes)
    print(f"{'all criteria passed' if all_passed else 'FAILURES PRESENT'} "
          f"({total:.1f}s total)")
    return EXIT_OK if all_passed else EXIT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "construct": cmd_construct,
        "certify": cmd_certify,
        "classical": cmd_classical,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, OSError) as exc:
        detail = f"missing field {exc}" if isinstance(exc, KeyError) else exc
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
