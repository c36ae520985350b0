"""Command-line entry point: ``multibell <command> [flags]``.

Every command prints JSON on stdout (or a plain table with --table).
Exit status is 0 on success, 1 when a verification fails and 2 on usage
errors, unknown ids and exhausted budgets.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import catalog
from .algebra import format_rational, parse_rational
from .bell import BellFunction, iterate, restrict, to_probability_form
from .lhv import DEFAULT_BUDGET as LHV_BUDGET
from .lhv import BudgetExceeded as LhvBudgetExceeded
from .lhv import lhv_bound
from .quantum import optimize_phases, verify_projector_identity
from .search import SearchConfig, default_workers, run_search, verify_candidate
from .symmetry import DEFAULT_BUDGET as GROUP_BUDGET
from .symmetry import BudgetExceeded as GroupBudgetExceeded
from .symmetry import canonical_form, equivalent, find_transformation, invariant_certificate, orbit


class UsageError(Exception):
    pass


def _rat(x: Fraction) -> dict:
    return {"rational": format_rational(x), "decimal": float(x)}


# ---------------------------------------------------------------- inputs


def _functions(args) -> list[BellFunction]:
    out = []
    for ref in args.id or []:
        try:
            out.append(catalog.function(ref, corrected=args.corrected))
        except KeyError:
            raise UsageError(f"unknown catalog id {ref!r} (see `multibell catalog list`)") from None
    for path in args.file or []:
        try:
            out.append(BellFunction.from_json(path))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read Bell function from {path}: {exc}") from None
    return out


def _one(args) -> BellFunction:
    fs = _functions(args)
    if len(fs) != 1:
        raise UsageError("give exactly one function via --id or --file")
    return fs[0]


def _two(args) -> tuple[BellFunction, BellFunction]:
    fs = _functions(args)
    if len(fs) != 2:
        raise UsageError("give exactly two functions via --id/--file (repeat the flag)")
    return fs[0], fs[1]


def _rational_list(text: str) -> list[Fraction]:
    try:
        return [parse_rational(t) for t in text.replace("{", "").replace("}", "").split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad rational list {text!r}: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_construct_iterate(args):
    f00, f01 = _two(args)
    return iterate(f00, f01).to_json(), 0


def cmd_restrict(args):
    f = _one(args)
    return restrict(f, args.k0, args.k1).to_json(), 0


def cmd_prob_form(args):
    pf = to_probability_form(_one(args))
    if args.canonical:
        pf = pf.canonical()
    return pf.to_json(), 0


def cmd_lhv(args):
    rep = lhv_bound(_one(args), args.budget)
    out = rep.to_json()
    out["bound_decimal"] = float(rep.bound)
    out["strategies"] = rep.strategies
    out["argmax"] = [list(x) for x in rep.argmax]
    return out, 0


def cmd_spectrum(args):
    rep = lhv_bound(_one(args), args.budget)
    out = {"spectrum": [format_rational(x) for x in rep.spectrum],
           "spectrum_decimal": [float(x) for x in rep.spectrum]}
    status = 0
    if args.expect:
        target = sorted(set(_rational_list(args.expect)))
        out["expected"] = [format_rational(x) for x in target]
        out["match"] = list(rep.spectrum) == target
        status = 0 if out["match"] else 1
    return out, status


def _quantum(args):
    f = _one(args)
    return optimize_phases(f, restarts=args.restarts, tol=args.tol, seed=args.seed, budget=args.budget)


def cmd_quantum_max(args):
    return _quantum(args).to_json(), 0


def cmd_visibility(args):
    rep = _quantum(args)
    out = {"vc": rep.vc, "violation": rep.violation, "nl_psi": rep.nl_psi, "nl_mix": rep.nl_mix,
           "lhv": _rat(rep.lhv), "restarts": rep.restarts_used}
    return out, 0


def cmd_orbit(args):
    rep = orbit(_one(args), args.budget)
    return rep.to_json(), 0


def cmd_canon(args):
    return canonical_form(_one(args), args.budget).to_json(), 0


def cmd_equiv(args):
    f, g = _two(args)
    verdict = equivalent(f, g, args.budget)
    out = {"result": verdict}
    if verdict == "equivalent":
        out["transformation"] = find_transformation(f, g, args.budget).to_json()
    return out, 0


def cmd_certificate(args):
    cert = invariant_certificate(_one(args))
    return {"certificate": [{"class": [format_rational(a) for a in alpha], "count": k}
                            for alpha, k in cert]}, 0


def cmd_catalog(args):
    action = args.action
    if action == "list":
        rows = []
        for e in catalog.load_catalog():
            rows.append({"id": e.id, "n": e.n, "d": e.d, "suspect": e.suspect is not None,
                         "provenance": e.provenance})
        return {"entries": rows}, 0
    if action == "show":
        if not args.entry:
            raise UsageError("catalog show needs an id")
        try:
            return catalog.get(args.entry).to_json(), 0
        except KeyError:
            raise UsageError(f"unknown catalog id {args.entry!r}") from None
    checks = catalog.verify_all(corrected=args.corrected)
    failed = [c for c in checks if not c.ok]
    out = {
        "checks": len(checks),
        "failed": len(failed),
        "failures": [c.to_json() for c in failed],
        "suspects": [e.id for e in catalog.suspects()],
    }
    return out, 0 if not failed else 1


def cmd_verify_appendix_a(args):
    ds = [int(x) for x in args.dims.split(",")]
    res = {str(d): verify_projector_identity(d, trials=args.trials, seed=args.seed) for d in ds}
    return {"passed": res}, 0 if all(res.values()) else 1


def cmd_search(args):
    cfg = SearchConfig(
        seed00=args.seed00, orbit_source=args.orbit, d=args.d, restarts=args.restarts,
        refine_restarts=args.refine_restarts, tol=args.tol, seed=args.seed,
        vc_tie_tolerance=args.tie_tol, workers=args.workers, corrected=not args.raw,
        orbit_budget=args.budget,
    )
    return run_search(cfg).to_json(with_functions=args.with_functions), 0


def cmd_verify_candidate(args):
    f = _one(args)
    spectrum = _rational_list(args.spectrum) if args.spectrum else None
    rep = verify_candidate(f, spectrum, args.vc, args.tol, args.restarts, args.seed, args.budget)
    return rep.to_json(), 0 if rep.ok else 1


def cmd_repro(args):
    from .acceptance import run_all

    results = run_all(slow=args.slow, workers=args.workers)
    out = {"criteria": [r.to_json() for r in results],
           "passed": sum(r.ok for r in results), "total": len(results)}
    return out, 0 if all(r.ok for r in results) else 1


# ---------------------------------------------------------------- table rendering


def _table(payload, out=None) -> None:
    out = out or sys.stdout
    if isinstance(payload, dict) and "criteria" in payload:
        for r in payload["criteria"]:
            out.write(f"{'PASS' if r['ok'] else 'FAIL'}  {r['number']:>2}  {r['title']}: {r['detail']}\n")
        out.write(f"{payload['passed']}/{payload['total']} passed\n")
        return
    if isinstance(payload, dict) and "histogram" in payload:
        out.write(f"candidates  {payload['candidates_evaluated']}\n")
        out.write(f"min vc      {payload['min_vc']:.6f}\n")
        out.write(f"winners     {payload['winners_dedup']} (raw {payload['winners_raw']})\n")
        out.write("vc histogram\n")
        for k, v in payload["histogram"].items():
            out.write(f"  {k}  {v}\n")
        return
    for k, v in (payload.items() if isinstance(payload, dict) else enumerate(payload)):
        if isinstance(v, (dict, list)):
            v = json.dumps(v)
        out.write(f"{k:<16} {v}\n")


# ---------------------------------------------------------------- parser


def _input_flags(p, budget=LHV_BUDGET):
    p.add_argument("--id", action="append", help="catalog id (repeatable)")
    p.add_argument("--file", action="append", help="Bell-function JSON file (repeatable)")
    p.add_argument("--corrected", action="store_true",
                   help="use the corrected coefficients of transcription-suspect entries")
    p.add_argument("--budget", type=int, default=budget)


def _optimizer_flags(p, restarts=64, tol=1e-9):
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multibell", description=__doc__.splitlines()[0])
    fmt = ap.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="table", action="store_false", help="JSON output (default)")
    fmt.add_argument("--table", dest="table", action="store_true", help="plain-text output")
    ap.set_defaults(table=False)
    ap.add_argument("--workers", type=int, default=default_workers())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct-iterate", help="iterate(f00, f01) from two inputs")
    _input_flags(p)
    p.set_defaults(func=cmd_construct_iterate)

    p = sub.add_parser("restrict", help="fix the last party's outcomes to v_k0, v_k1")
    _input_flags(p)
    p.add_argument("--k0", type=int, default=0)
    p.add_argument("--k1", type=int, default=1)
    p.set_defaults(func=cmd_restrict)

    p = sub.add_parser("prob-form", help="coincidence-probability form")
    _input_flags(p)
    p.add_argument("--canonical", action="store_true", help="mean-zero weights plus constant")
    p.set_defaults(func=cmd_prob_form)

    for name, func, helptext in (("lhv", cmd_lhv, "exact LHV bound"),
                                 ("spectrum", cmd_spectrum, "values on deterministic strategies")):
        p = sub.add_parser(name, help=helptext)
        _input_flags(p)
        if name == "spectrum":
            p.add_argument("--expect", help="comma-separated rationals; exit 1 on mismatch")
        p.set_defaults(func=func)

    for name, func in (("quantum-max", cmd_quantum_max), ("visibility", cmd_visibility)):
        p = sub.add_parser(name, help="GHZ maximum and critical visibility")
        _input_flags(p)
        _optimizer_flags(p)
        p.set_defaults(func=func)

    for name, func, n_in in (("orbit", cmd_orbit, 1), ("canon", cmd_canon, 1),
                             ("equiv", cmd_equiv, 2), ("certificate", cmd_certificate, 1)):
        p = sub.add_parser(name, help=f"equivalence group: {name}")
        _input_flags(p, GROUP_BUDGET)
        p.set_defaults(func=func)

    p = sub.add_parser("catalog", help="list, show or verify catalog entries")
    p.add_argument("action", choices=["list", "show", "verify"])
    p.add_argument("entry", nargs="?")
    p.add_argument("--corrected", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify-appendix-a", help="projector identity for random bases")
    p.add_argument("--dims", default="2,3,5,7")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_appendix_a)

    p = sub.add_parser("search", help="orbit search for minimal-vc iterated functions")
    p.add_argument("--seed00", required=True)
    p.add_argument("--orbit", required=True)
    p.add_argument("--d", type=int, required=True)
    _optimizer_flags(p, restarts=16)
    p.add_argument("--refine-restarts", type=int, default=64)
    p.add_argument("--tie-tol", type=float, default=1e-6)
    p.add_argument("--budget", type=int, default=GROUP_BUDGET)
    p.add_argument("--raw", action="store_true", help="use printed coefficients even for suspects")
    p.add_argument("--with-functions", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify-candidate", help="spectrum and vc check")
    _input_flags(p)
    # here --tol is the allowed |vc - expected| gap
    _optimizer_flags(p, restarts=32, tol=1e-4)
    p.add_argument("--spectrum", help="expected spectrum, comma-separated rationals")
    p.add_argument("--vc", type=float, required=True)
    p.set_defaults(func=cmd_verify_candidate)

    p = sub.add_parser("repro", help="run the acceptance criteria")
    p.add_argument("--slow", action="store_true", help="include the I_4_3_1 x I_4_3_1 orbit search")
    p.set_defaults(func=cmd_repro)
    return ap


def _validate(args) -> None:
    for name in ("restarts", "trials"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be >= 1")
    if getattr(args, "tol", 1) <= 0:
        raise UsageError("--tol must be positive")
    if getattr(args, "tie_tol", 1) <= 0:
        raise UsageError("--tie-tol must be positive")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _validate(args)
        payload, status = args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"multibell: error: {exc}", file=sys.stderr)
        return 2
    except LhvBudgetExceeded as exc:
        print(f"multibell: {exc}; raise --budget", file=sys.stderr)
        return 2
    except GroupBudgetExceeded as exc:
        print(f"multibell: {exc}; raise --budget", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"multibell: error: {exc}", file=sys.stderr)
        return 2
    if args.table:
        _table(payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
