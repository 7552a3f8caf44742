"""``concord`` command line.

Exit codes: 0 success, 1 bad input, 2 internal consistency failure,
3 undecided verdict under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import __version__
from .alternating import convergence_report
from .analysis import analyze
from .angles import angle_profile, concordance_verdict, global_angle, harmonious
from .corpus import CORPUS, corpus_pair
from .equivalence import DEFAULT_THRESHOLD, assert_equivalence, evaluate_conditions
from .errors import ConcordError, DiagnosticsError, InputError
from .formats import dumps, load_pair, pair_to_dict, profile_csv
from .linalg import DEFAULT_TOL, ToleranceConfig

EXIT_OK, EXIT_INPUT, EXIT_CONSISTENCY, EXIT_UNDECIDED = 0, 1, 2, 3

# CLI flag -> corpus builder keyword
_CORPUS_PARAMS = {"theta": "theta", "a": "a", "b": "b", "dim": "dim", "rank_p": "rank_p",
                  "rank_q": "rank_q", "shared": "shared", "smooth": "smoothness",
                  "grid": "grid", "seed": "seed"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="FILE", help="pair in the JSON input format")
    src.add_argument("--corpus", metavar="NAME", help="built-in example (see 'corpus list')")
    p.add_argument("--theta", type=float, help="angle for constant-angle")
    p.add_argument("--a", type=float, help="left end of the interval (universal)")
    p.add_argument("--b", type=float, help="right end of the interval (universal)")
    p.add_argument("--dim", type=int, help="fibre dimension")
    p.add_argument("--rank-p", type=int, dest="rank_p")
    p.add_argument("--rank-q", type=int, dest="rank_q")
    p.add_argument("--shared", type=int, help="shared dimension for random pairs")
    p.add_argument("--smooth", type=float, help="rotation amplitude for random pairs")
    p.add_argument("--grid", type=int, metavar="N", help="number of grid points")
    p.add_argument("--refine", type=int, default=0, metavar="R",
                   help="refine the grid R times before analysis")
    p.add_argument("--seed", type=int, metavar="S",
                   help="seed for random pairs and the section battery")
    p.add_argument("--tol-rank", type=float, default=DEFAULT_TOL.rank_cutoff)
    p.add_argument("--tol-eq", type=float, default=DEFAULT_TOL.equality_tol)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="concord", description="Two-projection analysis of module pairs.")
    parser.add_argument("--version", action="version", version=f"concord {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    sub.add_parser("angle", parents=[common], help="local and global Friedrichs angles")
    it = sub.add_parser("iterate", parents=[common], help="alternating projection convergence")
    it.add_argument("--max-n", type=int, default=200)
    conc = sub.add_parser("concordance", parents=[common], help="concordance verdict")
    conc.add_argument("--harmonious", action="store_true",
                      help="also judge the three complement pairs")
    eq = sub.add_parser("equivalence", parents=[common], help="ten closed-range conditions")
    eq.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    an = sub.add_parser("analyze", parents=[common], help="full analysis bundle (JSON)")
    an.add_argument("--strict", action="store_true", help="exit 3 on any undecided verdict")
    an.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    corpus = sub.add_parser("corpus", help="built-in examples")
    csub = corpus.add_subparsers(dest="corpus_command", required=True, parser_class=_Parser)
    ls = csub.add_parser("list", help="list corpus entries")
    ls.add_argument("--format", choices=("csv", "json"), default="json")
    ls.add_argument("--out", metavar="PATH")
    csub.add_parser("export", parents=[common], help="write a pair in the input format")
    return parser


def _tolerances(args) -> ToleranceConfig:
    try:
        return ToleranceConfig(rank_cutoff=args.tol_rank, idempotent_tol=DEFAULT_TOL.idempotent_tol,
                               equality_tol=args.tol_eq)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_from_args(args):
    tol = _tolerances(args)
    if args.input:
        pair = load_pair(args.input, tol)
    else:
        params = {kw: getattr(args, flag) for flag, kw in _CORPUS_PARAMS.items()
                  if getattr(args, flag) is not None}
        if params.get("grid") is not None and params["grid"] < 2:
            raise InputError("--grid needs at least 2 points")
        pair = corpus_pair(args.corpus, tol=tol, **params)
    if args.refine < 0:
        raise InputError("--refine must be non-negative")
    for _ in range(args.refine):
        pair = pair.refined(2)
    return pair


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _run(args) -> tuple[str, int]:
    cmd = args.command
    if cmd == "corpus" and args.corpus_command == "list":
        entries = [{"name": e.name, "description": e.description, "expected": e.expected,
                    "basis": e.basis} for e in CORPUS.values()]
        if args.format == "csv":
            return _rows_csv(("name", "description"),
                             [(e["name"], e["description"]) for e in entries]), EXIT_OK
        return dumps({"corpus": entries}), EXIT_OK

    pair = load_from_args(args)
    seed = args.seed if args.seed is not None else 0
    fmt = args.format

    if cmd == "corpus":
        return dumps(pair_to_dict(pair)), EXIT_OK

    if cmd == "angle":
        profile = angle_profile(pair)
        if fmt == "csv":
            return profile_csv(profile), EXIT_OK
        ga = global_angle(pair, profile=profile)
        return dumps({"profile": profile.as_dict(),
                      "global_angle": {"value": ga.value, "provenance": ga.provenance,
                                       "refinement_trend": ga.refinement_trend}}), EXIT_OK

    if cmd == "iterate":
        rep = convergence_report(pair, max_n=args.max_n, battery_seed=seed)
        if fmt == "csv":
            return _rows_csv(("n", "distance"), [(i + 1, _fmt(d)) for i, d in
                                                 enumerate(rep.distances)]), EXIT_OK
        return dumps(rep.as_dict()), EXIT_OK

    if cmd == "concordance":
        v = concordance_verdict(pair)
        doc = v.as_dict()
        if args.harmonious:
            doc["harmonious"] = harmonious(pair)
        if fmt == "csv":
            w = v.witness
            return _rows_csv(("status", "witness_label", "witness_coordinate", "witness_detail"),
                             [(v.status, w.label if w else "", _fmt(w.coordinate) if w else "",
                               w.detail if w else "")]), EXIT_OK
        return dumps(doc), EXIT_OK

    if cmd == "equivalence":
        rep = evaluate_conditions(pair, args.threshold)
        result = assert_equivalence(rep)
        code = EXIT_OK if result.passed else EXIT_CONSISTENCY
        if fmt == "csv":
            rows = [(e.id, e.name, "" if e.holds is None else str(e.holds).lower(),
                     _fmt(e.margin), _fmt(e.refined_margin), _fmt(e.threshold))
                    for e in rep.entries]
            return _rows_csv(("id", "name", "holds", "margin", "refined_margin", "threshold"),
                             rows), code
        return dumps(rep.as_dict()), code

    if cmd == "analyze":
        if fmt == "csv":
            raise InputError("analyze writes JSON only")
        bundle = analyze(pair, seed=seed, threshold=args.threshold)
        code = EXIT_OK
        if not bundle.consistent:
            code = EXIT_CONSISTENCY
        elif args.strict and bundle.undecided:
            code = EXIT_UNDECIDED
        return dumps(bundle.as_dict()), code

    raise InputError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:          # --help, --version and usage errors
        return int(exc.code or 0)
    try:
        text, code = _run(args)
    except DiagnosticsError as exc:
        print(f"concord: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InputError, ConcordError) as exc:
        print(f"concord: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_CONSISTENCY:
        print("concord: equivalence conditions disagree", file=sys.stderr)
    return code


run_cli = main
