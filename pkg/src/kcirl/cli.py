"""Command-line front end.

Exit codes: 0 verified/holds/models, 1 refuted/violated (with certificate),
2 usage error, 3 precondition error.  All commands are deterministic for a
fixed seed; the thread count never changes any output byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import FiniteRL
from .canonical import CanonicalFormula, DSpec, build_canonical, refutation_certificate
from .enumeration import Catalog, check_lattice, enumerate_kcirl
from .errors import (
    FormulaSyntaxError,
    KcirlError,
    KMismatch,
    LawViolation,
    MalformedTables,
    NotRefuted,
    NotSI,
    PreconditionViolation,
    TrivialAlgebra,
)
from .formula import holds, parse
from .verify import THEOREM_SUITES, load_formula_suite, run_suite

USAGE_ERROR = 2
PRECONDITION_ERROR = 3


def _load_algebra(path: str) -> FiniteRL:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedTables(f"cannot read algebra file {path}: {exc}") from exc
    return FiniteRL.from_json(doc)


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    """Comma-separated a-b index pairs, e.g. 0-1,2-1."""
    pairs = []
    if not text:
        return pairs
    for chunk in text.split(","):
        left, sep, right = chunk.partition("-")
        if not sep:
            raise MalformedTables(f"bad pair {chunk!r}, expected a-b")
        pairs.append((int(left), int(right)))
    return pairs


def cmd_enumerate(args) -> int:
    spec = args.filter
    if args.lattice is not None:
        doc = json.loads(Path(args.lattice).read_text())
        spec = ("lattice_reduct", check_lattice(doc["join"]))
    catalog = enumerate_kcirl(args.k, args.max_size, spec, threads=args.threads)
    catalog.save(args.out)
    if args.json:
        print(json.dumps(catalog.header()))
    else:
        sizes = " ".join(f"{s}:{c}" for s, c in sorted(catalog.counts_per_size.items()))
        print(f"k={catalog.k} max_size={catalog.max_size} filter={catalog.filter} "
              f"count={catalog.count} sizes[{sizes}] -> {args.out}")
    return 0


def cmd_check(args) -> int:
    A = _load_algebra(args.algebra)
    phi = parse(args.formula)
    ok, witness = holds(A, phi)
    if ok:
        print(json.dumps({"status": "holds"}) if args.json else "holds")
        return 0
    assignment = dict(sorted(witness.assignment.items()))
    if args.json:
        print(json.dumps({"status": "fails", "witness": assignment}))
    else:
        rendered = " ".join(f"{x}:{e}" for x, e in assignment.items())
        print(f"fails  {rendered}")
    return 1


def cmd_canon(args) -> int:
    A = _load_algebra(args.algebra)
    if args.mode == "stable":
        dspec = DSpec.empty()
    elif args.mode == "splitting":
        dspec = DSpec.full(A.size)
    else:
        dspec = DSpec.of(_parse_pairs(args.dwedge), _parse_pairs(args.dto))
    for a, b in sorted(dspec.dwedge | dspec.dto):
        if not (0 <= a < A.size and 0 <= b < A.size):
            raise MalformedTables(f"pair {a}-{b} out of range for size {A.size}")
    cf = build_canonical(A, dspec, anchor_bottom=args.anchor_bottom)
    print(cf.dumps())
    return 0


def cmd_certify(args) -> int:
    B = _load_algebra(args.algebra)
    cf = CanonicalFormula.from_json(json.loads(Path(args.canon).read_text()))
    cert = refutation_certificate(B, cf)
    if cert is None:
        print(json.dumps({"status": "models"}) if args.json else "models")
        return 0
    print(json.dumps(cert.to_json()))
    return 1


def cmd_verify(args) -> int:
    formulas = load_formula_suite(args.formulas) if args.formulas else None
    report = run_suite(
        args.theorem,
        k=args.k,
        max_size=args.max_size,
        formulas=formulas,
        seed=args.seed,
        h=args.h,
        threads=args.threads,
    )
    if args.json:
        print(json.dumps(report))
    else:
        print(f"{report['claim']}: {report['status']} "
              f"(k={report['k']}, bound={report['bound']}, checked={report.get('checked')})")
        for w in report.get("witnesses", [])[:20]:
            print(f"  witness: {json.dumps(w)}")
        if "readings" in report:
            for name, sub in report["readings"].items():
                print(f"  reading {name}: {sub['status']}")
    return 0 if report["status"] == "verified" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kcirl",
        description="Finite k-potent commutative integral residuated lattices: "
                    "enumeration, validity checking, canonical formulas, "
                    "refutation certificates and theorem-scale verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--threads", type=int, default=1, help="worker pool size")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")

    p = sub.add_parser("enumerate", help="generate a catalog up to isomorphism")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--filter", choices=["all", "si", "linear"], default="all")
    p.add_argument("--lattice", help="JSON file with a join table fixing the lattice reduct")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("check", help="decide whether a formula holds in an algebra")
    p.add_argument("--algebra", required=True)
    p.add_argument("--formula", required=True)
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("canon", help="synthesize a canonical formula")
    p.add_argument("--algebra", required=True)
    p.add_argument("--mode", choices=["stable", "splitting", "custom"], default="stable")
    p.add_argument("--dwedge", default="", help="meet pairs a-b,c-d (custom mode)")
    p.add_argument("--dto", default="", help="residual pairs a-b,c-d (custom mode)")
    p.add_argument("--anchor-bottom", action="store_true",
                   help="pin the least element's variable to the bottom constant")
    common(p)
    p.set_defaults(fn=cmd_canon)

    p = sub.add_parser("certify", help="refutation certificate or 'models'")
    p.add_argument("--algebra", required=True)
    p.add_argument("--canon", required=True, help="canonical formula JSON file")
    common(p)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--theorem", required=True, choices=sorted(THEOREM_SUITES))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--formulas", help="formula suite file, one per line, # comments")
    p.add_argument("--h", type=int, default=3, help="height bound for lemma5.3")
    common(p)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", 1) < 1:
        parser.error("--k must be a positive integer")
    if getattr(args, "max_size", 1) < 1:
        parser.error("--max-size must be a positive integer")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be a positive integer")
    try:
        return args.fn(args)
    except FormulaSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except MalformedTables as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (NotSI, TrivialAlgebra, NotRefuted, KMismatch, LawViolation,
            PreconditionViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PRECONDITION_ERROR
    except KcirlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PRECONDITION_ERROR


if __name__ == "__main__":
    sys.exit(main())
