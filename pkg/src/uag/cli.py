"""``uag`` command line front end.

Exit codes: 0 success (verdict true), 1 verdict false, 2 usage or parse
error, 3 semantic error (budget, precondition, failed transport).
"""
from __future__ import annotations

import argparse
import sys
import time

from . import dsl, geometry, verbal
from .errors import UagError
from .terms import TermMorphism

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_SEMANTIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uag", description="Universal algebraic geometry over finite algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--model", required=True, help=".uag model file")
        c.add_argument("--json", action="store_true", help="print the JSON report")
        c.add_argument("--out", help="write the report to FILE instead of stdout")
        c.add_argument("--point-budget", type=_positive, default=None)
        return c

    c = cmd("closure", "closed congruence generated by a system")
    c.add_argument("--algebra", required=True)
    c.add_argument("--system", required=True)
    c = cmd("closed-sets", "all H-closed congruences at one rank")
    c.add_argument("--algebra", required=True)
    c.add_argument("--rank", type=_positive, required=True)
    c = cmd("free", "relatively free algebra of Var(H)")
    c.add_argument("--algebra", required=True)
    c.add_argument("--rank", type=_positive, required=True)
    c = cmd("geomeq", "geometric equivalence up to a rank")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--max-rank", type=_positive, required=True)
    c = cmd("derive", "derived algebra H*_W")
    c.add_argument("--algebra", required=True)
    c.add_argument("--words", required=True)
    c = cmd("applicable", "applicability evidence relative to Var(h0)")
    c.add_argument("--h0", required=True)
    c.add_argument("--words", required=True)
    c.add_argument("--max-rank", type=_positive, required=True)
    c = cmd("autoeq", "automorphic equivalence through a word system")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--words", required=True)
    c.add_argument("--max-rank", type=_positive, required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--assume-applicable", action="store_true")
    g.add_argument("--h0")
    c = cmd("inner-search", "search for an inner witness c(x1)")
    c.add_argument("--h0", required=True)
    c.add_argument("--words", required=True)
    c.add_argument("--max-rank", type=_positive, required=True)
    c.add_argument("--max-depth", type=int, required=True)
    for name, help_ in (("check-hom", "is a term morphism a Cl_H morphism"),
                        ("lift", "lift a coordinate homomorphism to a term morphism")):
        c = cmd(name, help_)
        c.add_argument("--algebra", required=True)
        c.add_argument("--source", required=True, help="system closed to give T1")
        c.add_argument("--target", required=True, help="system closed to give T2")
        if name == "check-hom":
            c.add_argument("--images", required=True,
                           help="generator images separated by ';', e.g. 'mul(x1,x2); x1'")
        else:
            c.add_argument("--targets", required=True,
                           help="target coordinate element per generator, e.g. '1,0'")
    return p


def _lookup(table, name, kind):
    if name not in table:
        raise UsageError(f"unknown {kind} {name!r}")
    return table[name]


def _ref(model, kind, name):
    if kind == "algebra":
        obj = _lookup(model.algebras, name, "algebra")
        text = dsl.render_signature(obj.signature) + "\n" + dsl.render_algebra(name, obj)
    elif kind == "system":
        obj = _lookup(model.systems, name, "system")
        text = dsl.render_system(name, model.system_signatures[name], obj)
    else:
        obj = _lookup(model.word_systems, name, "word system")
        text = dsl.render_words(name, obj)
    return obj, {"name": name, "sha256": dsl.content_hash(text)}


def _parse_images(text, sig, source_rank, target_rank):
    parts = [p.strip() for p in text.split(";") if p.strip()]
    if len(parts) != source_rank:
        raise UsageError(f"expected {source_rank} generator images, got {len(parts)}")
    p = dsl._Parser(" ".join(parts))
    terms = []
    for _ in parts:
        terms.append(p.term(sig, target_rank))
    if p.tok.kind != "eof":
        raise UsageError("trailing text after generator images")
    return TermMorphism(source_rank, target_rank, tuple(terms))


def execute(args) -> tuple[dict, dict]:
    """Run one parsed invocation; returns (inputs, payload)."""
    model = dsl.load_model(args.model)
    budget = args.point_budget
    inputs = {}

    def get(kind, key, name):
        obj, info = _ref(model, kind, name)
        inputs[key] = info
        return obj

    c = args.command
    if c == "closure":
        H = get("algebra", "algebra", args.algebra)
        T = get("system", "system", args.system)
        return inputs, dsl.closure_payload(geometry.closure(H, T, budget))
    if c == "closed-sets":
        H = get("algebra", "algebra", args.algebra)
        return inputs, dsl.closed_sets_payload(geometry.enumerate_closed(H, args.rank, budget))
    if c == "free":
        H = get("algebra", "algebra", args.algebra)
        return inputs, dsl.free_payload(geometry.relatively_free(H, args.rank, budget))
    if c == "geomeq":
        A, B = get("algebra", "a", args.a), get("algebra", "b", args.b)
        return inputs, dsl.geom_payload(geometry.geom_equiv(A, B, args.max_rank, budget))
    if c == "derive":
        H = get("algebra", "algebra", args.algebra)
        W = get("words", "words", args.words)
        return inputs, dsl.algebra_payload(verbal.derive_algebra(H, W))
    if c == "applicable":
        h0 = get("algebra", "h0", args.h0)
        W = get("words", "words", args.words)
        return inputs, dsl.applicability_payload(verbal.check_applicable_rel(h0, W, args.max_rank))
    if c == "autoeq":
        A, B = get("algebra", "a", args.a), get("algebra", "b", args.b)
        W = get("words", "words", args.words)
        if args.assume_applicable:
            basis = verbal.USER_ASSERTED
        else:
            basis = verbal.check_applicable_rel(get("algebra", "h0", args.h0), W, args.max_rank)
        return inputs, dsl.autoeq_payload(verbal.auto_equiv(A, B, W, args.max_rank, basis, budget))
    if c == "inner-search":
        h0 = get("algebra", "h0", args.h0)
        W = get("words", "words", args.words)
        return inputs, dsl.inner_payload(verbal.inner_search(h0, W, args.max_rank, args.max_depth))
    if c in ("check-hom", "lift"):
        H = get("algebra", "algebra", args.algebra)
        T1 = geometry.closure(H, get("system", "source", args.source), budget)
        T2 = geometry.closure(H, get("system", "target", args.target), budget)
        if c == "check-hom":
            m = _parse_images(args.images, H.signature, T1.rank, T2.rank)
            ok = geometry.is_cl_morphism(m, T1, T2)
            return inputs, {"verdict": ok, "data": {"morphism": str(m)}}
        try:
            targets = [int(v) for v in args.targets.split(",")]
        except ValueError:
            raise UsageError("--targets must be comma-separated integers") from None
        if any(t < 0 or t >= len(T2.coordinate) for t in targets):
            raise UsageError("target element out of range")
        h = geometry.quotient_hom(T1, T2, targets)
        if h is None:
            return inputs, {"verdict": False, "data": {"reason": "assignment does not extend to a homomorphism"}}
        m = geometry.lift_hom(h)
        return inputs, {"verdict": True, "data": {"images": [str(t) for t in m.images],
                                                   "map": [int(v) for v in h.map]}}
    raise UsageError(f"unknown command {c!r}")


def _text(report) -> str:
    lines = [f"{report['command']}:"]
    if "verdict" in report:
        lines.append(f"  verdict: {str(report['verdict']).lower()}")
    if "checked_rank" in report:
        lines.append(f"  checked rank: {report['checked_rank']}")
    if "counterexample" in report:
        cx = report["counterexample"]
        lines.append(f"  counterexample (rank {cx['rank']}, not closed in {cx['not_closed_in']}): "
                     f"points {cx['points']}")
    if "basis" in report:
        lines.append(f"  basis: {report['basis']['kind']}")
    if "data" in report:
        for k, v in report["data"].items():
            lines.append(f"  {k}: {v}")
    for d in report.get("diagnostics", []):
        lines.append(f"  note: {d}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    out_path = None
    if "--out" in argv:
        i = argv.index("--out")
        out_path = argv[i + 1] if i + 1 < len(argv) else None
    command = argv[0] if argv else ""
    start = time.perf_counter()
    inputs = {}
    try:
        args = build_parser().parse_args(argv)
        inputs, payload = execute(args)
        code = EXIT_FALSE if payload.get("verdict") is False else EXIT_OK
    except (UsageError, dsl.DslError, OSError) as exc:
        payload, code = {"error": str(exc)}, EXIT_USAGE
    except UagError as exc:
        payload, code = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_SEMANTIC
    report = dsl.make_report(command, inputs, payload, (time.perf_counter() - start) * 1000)
    text = dsl.render_report(report) if want_json else _text(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stream = sys.stderr if code in (EXIT_USAGE, EXIT_SEMANTIC) and not want_json else sys.stdout
        stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
