"""Command-line driver.

JSON reports go to stdout, human-readable tables to stderr.

Exit codes:
  0  success, or a definite verdict
  1  verified negative outcome (Indefinite or IdenticallyZero)
  2  Unknown verdict, or a search that was truncated or left Unknowns
  3  usage error (bad arguments, refused obstruction without --force)
  4  input error (unreadable file, malformed JSON, invalid matrix or manifold)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .definiteness import DEFAULT_BUDGET, DEFINITE_KINDS, UNKNOWN, Budget, Verdict
from .errors import GoodPairError

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_INPUT = 4

log = logging.getLogger("goodpair")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _say(text: str = "") -> None:
    print(text, file=sys.stderr)


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def _write_json(path: str, obj) -> None:
    try:
        Path(path).write_text(json.dumps(obj, indent=2) + "\n")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror}") from None


def _budget(args) -> Budget:
    return Budget(max_boxes=args.max_boxes, max_depth=args.max_depth,
                  sample_count=args.samples, seed=args.seed)


def _verdict_exit(v: Verdict) -> int:
    if v.kind in DEFINITE_KINDS:
        return EXIT_OK
    if v.kind == UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_NEGATIVE


def _rationals(text: Optional[str]) -> Optional[list]:
    if text is None:
        return None
    try:
        return [Fraction(x) for x in text.replace(" ", "").split(",") if x]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse rational vector {text!r}") from None


# --- commands -------------------------------------------------------------------------


def _load_matrix(path: str):
    from .matrices.symbolic import SymbolicMatrix

    data = _read_json(path)
    try:
        return SymbolicMatrix.from_json(data), data
    except (GoodPairError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: invalid matrix: {e}") from None


def cmd_verify(args) -> int:
    from .certificates import verify_verdict
    from .definiteness import decide
    from .matrices.canonical import canonical_id, raw_id
    from .matrices.symbolic import det_symbolic, obstruction_check

    M, data = _load_matrix(args.matrix)
    n = int(data.get("n", M.l + M.size))
    P = det_symbolic(M)
    v = decide(P, _budget(args), args.workers)
    verify_verdict(P, v)
    obstruction = obstruction_check(M.l, n) if n > M.l else None
    report = {
        "l": M.l,
        "n": n,
        "canonical_id": canonical_id(M) if M.is_alphabet() else raw_id(M),
        "det": P.format(),
        "det_poly": P.to_json(),
        "degree": P.homogeneity_degree() if not P.is_zero else None,
        "obstruction": obstruction.status if obstruction else None,
        "verdict": v.to_json(),
    }
    if args.certificate_out:
        _write_json(args.certificate_out, v.to_json())
        report["certificate_path"] = args.certificate_out
    _emit(report)
    _say(M.format())
    _say(f"det = {P.format()}")
    if obstruction:
        _say(f"pair ({M.l}, {n}): {obstruction.describe()}")
    _say(f"verdict: {v.kind}")
    return _verdict_exit(v)


def cmd_search(args) -> int:
    from .matrices.search import EXHAUSTIVE, Truncation, search
    from .matrices.symbolic import obstruction_check

    if args.n <= args.l:
        raise UsageError("need n > l")
    report = obstruction_check(args.l, args.n)
    if not report.passes and not args.force:
        _say(f"refusing to search ({args.l}, {args.n}): {report.describe()}; pass --force to override")
        return EXIT_USAGE
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    run = search(
        args.l, args.n, _budget(args), mode=args.mode,
        checkpoint=Path(args.checkpoint) if args.checkpoint else None,
        alphabet=args.alphabet, coef_bound=args.coef_bound,
        max_candidates=args.max_candidates, seed=args.seed, workers=args.workers,
        force=args.force, record_refutations=args.record_refutations,
    )
    accepted = []
    for item in run:
        if isinstance(item, Truncation):
            _say(f"truncated after {item.scanned} candidates ({item.reason})")
            continue
        accepted.append(item.to_json())
    summary = run.summary.to_json()
    summary["accepted"] = len(accepted)
    summary["obstruction"] = report.status
    if out:
        with open(out / "candidates.jsonl", "w") as fh:
            for c in accepted:
                fh.write(json.dumps(c) + "\n")
        _write_json(str(out / "summary.json"), summary)
        if args.record_refutations:
            _write_json(str(out / "refutations.json"), run.refutations)
    else:
        summary["candidates"] = accepted
    _emit(summary)
    counts = summary["counts"]
    _say(f"search ({args.l}, {args.n}) mode={args.mode}")
    for key, val in counts.items():
        _say(f"  {key:<26}{val:>10}")
    _say(f"  exhaustive: {summary['exhaustive']}")
    if run.summary.truncated or counts["unknown"]:
        return EXIT_UNKNOWN
    return EXIT_OK


def _parse_L(text: Optional[str], l: int):
    from .poly import LinearForm

    if text is None:
        return None
    rows = [r for r in text.split(";") if r.strip()]
    forms = [LinearForm(_rationals(r)) for r in rows]
    if len(forms) != l:
        raise UsageError(f"--L needs {l} forms separated by ';'")
    return forms


def cmd_construct(args) -> int:
    from .manifolds import ManifoldSpec, build_quadratic_system

    M, data = _load_matrix(args.matrix)
    n = int(data.get("n", M.l + M.size))
    try:
        sys_ = build_quadratic_system(M, _parse_L(args.L, M.l))
    except GoodPairError as e:
        raise InputError(str(e)) from None
    spec = ManifoldSpec(n, M.l, sys_, args.label or Path(args.matrix).stem)
    if args.out:
        _write_json(args.out, spec.to_json())
    _emit(spec.to_json())
    for u, g in enumerate(sys_.coordinates(), start=1):
        _say(f"g{u} = {g.format('x')}")
    return EXIT_OK


def _load_manifold(path: str):
    from .manifolds import ManifoldSpec

    data = _read_json(path)
    try:
        return ManifoldSpec.from_json(data)
    except (GoodPairError, KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InputError(f"{path}: invalid manifold: {e}") from None


def cmd_check2(args) -> int:
    from .certificates import verify_verdict
    from .manifolds import check_condition_II, ex1_coefficients, lambda_det, lambda_matrix

    spec = _load_manifold(args.manifold)
    P = lambda_det(spec.system)
    v = check_condition_II(spec.system, _budget(args), args.workers)
    verify_verdict(P, v)
    report = {"n": spec.n, "l": spec.l, "label": spec.label,
              "lambda": lambda_matrix(spec.system).to_json(spec.n)["entries"],
              "det": P.format("s"), "verdict": v.to_json()}
    if spec.l == 2 and spec.system.dim == 2:
        a1, a2, a3 = ex1_coefficients(spec.system)
        report["coefficients_2x2"] = {"A1": str(a1), "A2": str(a2), "A3": str(a3),
                         "criterion_holds": a3 * a3 < 4 * a1 * a2}
    _emit(report)
    _say(lambda_matrix(spec.system).format("s"))
    _say(f"det = {P.format('s')}")
    _say(f"verdict: {v.kind}")
    return _verdict_exit(v)


def cmd_analyze(args) -> int:
    from .gbsp import PowerLawData, classify_series, critical_exponent, series_oracle

    try:
        d = PowerLawData(args.n, args.l, Fraction(args.tau), Fraction(args.s))
    except (GoodPairError, ValueError, ZeroDivisionError) as e:
        raise UsageError(str(e)) from None
    report = {
        "n": d.n, "l": d.l, "tau": str(d.tau), "s": str(d.s),
        "s_star": str(critical_exponent(d.n, d.l, d.tau)),
        "shell_exponent": str(d.shell_exponent),
        "classification": classify_series(d),
        "shells": [],
    }
    if args.qmax:
        rep = series_oracle(d, args.qmax)
        Q = 1
        while Q <= args.qmax:
            report["shells"].append({"Q": Q, "term": float(rep.shells[Q - 1]),
                                     "partial_sum": float(rep.partial_sums[Q - 1])})
            Q = Q * 2 if Q * 2 <= args.qmax or Q == args.qmax else args.qmax
        report["exact"] = rep.exact
    _emit(report)
    _say(f"s* = {report['s_star']}, shell exponent = {report['shell_exponent']}: {report['classification']}")
    return EXIT_OK


def _ladder(text: str):
    from .gbsp import delta_ladder

    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError("--delta-ladder expects LO:HI, e.g. 3:9") from None
    return delta_ladder(lo, hi)


def cmd_cover(args) -> int:
    from .gbsp import affine_quadratic, covering_slope
    from .poly import Poly

    if args.slab:
        phi = Poly.variable(args.slab, 0)
        dim = args.slab
    else:
        if not args.manifold:
            raise UsageError("cover needs --manifold or --slab DIM")
        spec = _load_manifold(args.manifold)
        dim = spec.system.dim
        r = _rationals(args.r) or [1] + [0] * (dim - 1)
        s = _rationals(args.s) or [1] + [0] * (spec.l - 1)
        try:
            phi = affine_quadratic(spec.system, r, s, Fraction(args.a))
        except GoodPairError as e:
            raise UsageError(str(e)) from None
    center = _rationals(args.center) or [0] * dim
    try:
        rep = covering_slope(phi, center, Fraction(args.alpha), _ladder(args.delta_ladder),
                             C=Fraction(args.C), enforce=args.enforce)
    except GoodPairError as e:
        raise UsageError(str(e)) from None
    out = rep.to_json()
    out["phi"] = phi.format("x")
    _emit(out)
    for d, c in zip(rep.deltas, rep.counts):
        _say(f"  delta={str(d):<8} cells={c}")
    _say(f"slope = {rep.slope:.4f} (expected {rep.expected}); precondition holds: {rep.precondition.holds}")
    return EXIT_OK


def cmd_catalog(args) -> int:
    from .manifolds import all_power_range, check_condition_II, example_catalog

    rows = []
    for spec in example_catalog():
        rng = all_power_range(spec.n, spec.l)
        v = check_condition_II(spec.system, _budget(args), args.workers)
        rows.append({
            "label": spec.label, "l": spec.l, "n": spec.n,
            "condition_I_range": list(rng) if rng else None,
            "condition_I": "holds on [%d, %d)" % rng if rng else f"(I) fails: dim {spec.n - spec.l}",
            "condition_II": v.kind,
        })
    _emit(rows)
    _say(f"{'label':<20}{'l':>3}{'n':>4}  {'(I)':<22}{'(II)'}")
    for r in rows:
        _say(f"{r['label']:<20}{r['l']:>3}{r['n']:>4}  {r['condition_I']:<22}{r['condition_II']}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------------------


def _add_budget(p) -> None:
    p.add_argument("--max-boxes", type=int, default=DEFAULT_BUDGET.max_boxes, help="branch-and-bound box budget")
    p.add_argument("--max-depth", type=int, default=DEFAULT_BUDGET.max_depth, help="maximum bisection depth")
    p.add_argument("--samples", type=int, default=DEFAULT_BUDGET.sample_count, help="probe points for quick refutation")
    p.add_argument("--seed", type=int, default=DEFAULT_BUDGET.seed, help="seed for sampling")


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GOODPAIR_WORKERS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="goodpair", description="Good-pair matrices, definiteness certificates and power-law checks.")
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="worker processes (default: $GOODPAIR_WORKERS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="determinant and definiteness of a matrix")
    v.add_argument("--matrix", required=True, help="matrix JSON file")
    v.add_argument("--certificate-out", help="write the verdict and certificate here")
    _add_budget(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="search for matrices with definite determinant")
    s.add_argument("l", type=int)
    s.add_argument("n", type=int)
    s.add_argument("--mode", choices=["exhaustive", "randomized"], default="exhaustive")
    s.add_argument("--alphabet", choices=["basic", "general"], default="basic",
                   help="entries in {0, ±z_v} (basic) or small integer combinations (general)")
    s.add_argument("--coef-bound", type=int, default=1, help="coefficient bound for the general alphabet")
    s.add_argument("--max-candidates", type=int, help="stop after scanning this many candidates")
    s.add_argument("--force", action="store_true", help="search even when an obstruction applies")
    s.add_argument("--checkpoint", help="checkpoint file (resumed when present)")
    s.add_argument("--out", help="directory for candidates.jsonl and summary.json")
    s.add_argument("--record-refutations", action="store_true", help="keep a witness for every rejected candidate")
    _add_budget(s)
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("construct", help="quadratic system and manifold from a matrix")
    c.add_argument("--matrix", required=True)
    c.add_argument("--L", help="independent forms L_v as rows 'a,b;c,d' (default: canonical basis)")
    c.add_argument("--label")
    c.add_argument("--out", help="write the manifold JSON here")
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("check2", help="regularity of the Hessian combination for a manifold")
    k.add_argument("--manifold", required=True)
    _add_budget(k)
    k.set_defaults(func=cmd_check2)

    a = sub.add_parser("analyze", help="series classification for power-law data")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--l", type=int, required=True)
    a.add_argument("--tau", required=True, help="rational approximation exponent")
    a.add_argument("--s", required=True, help="rational dimension-function exponent")
    a.add_argument("--qmax", type=int, default=0, help="also run the shell-sum oracle up to this shell")
    a.set_defaults(func=cmd_analyze)

    cv = sub.add_parser("cover", help="covering-count slope probe")
    cv.add_argument("--manifold", help="manifold JSON; phi = r.x + s.g(x) - a")
    cv.add_argument("--slab", type=int, metavar="DIM", help="use phi = x1 in DIM variables instead")
    cv.add_argument("--r", help="comma-separated rationals (default e1)")
    cv.add_argument("--s", help="comma-separated rationals (default e1)")
    cv.add_argument("--a", default="0")
    cv.add_argument("--center", help="ball center (default origin)")
    cv.add_argument("--alpha", default="1")
    cv.add_argument("--delta-ladder", default="3:9", help="exponents LO:HI for delta = 2^-k")
    cv.add_argument("--C", default="4", help="constant in the gradient precondition")
    cv.add_argument("--enforce", action="store_true", help="fail when the precondition does not hold")
    cv.set_defaults(func=cmd_cover)

    g = sub.add_parser("catalog", help="list the built-in example manifolds")
    _add_budget(g)
    g.set_defaults(func=cmd_catalog)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        parser.error("--workers must be positive")
    try:
        return args.func(args)
    except UsageError as e:
        _say(f"goodpair: {e}")
        return EXIT_USAGE
    except InputError as e:
        _say(f"goodpair: {e}")
        return EXIT_INPUT
    except GoodPairError as e:
        _say(f"goodpair: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
