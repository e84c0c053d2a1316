"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 grammar parse error,
3 resource limit, 4 mismatch in ``eval --mode compare``.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import corpus
from .enumeration import compile_spanner
from .errors import NotFunctionalError, ResourceLimitError
from .grammar import ExtractionGrammar, GrammarError, SpanMapping, parse_grammar, serialize_grammar
from .oracle import naive_evaluate
from .transforms import (
    compute_varop_sets,
    empty_doc_mapping,
    functionalize,
    is_regular_form,
    project,
    remove_useless,
    to_cnf,
    union,
)

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_RESOURCE = 3
EXIT_MISMATCH = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_grammar_arg(source: str) -> ExtractionGrammar:
    """Read a grammar from a path, or from the bundled corpus with ``corpus:NAME``."""
    if source.startswith("corpus:"):
        try:
            return parse_grammar(corpus.grammar_text(source[len("corpus:"):]))
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    return parse_grammar(Path(source).read_text(encoding="utf-8"))


def read_document(path: str) -> str:
    text = Path(path).read_text(encoding="utf-8")
    return text[:-1] if text.endswith("\n") else text


def mapping_line(m: SpanMapping) -> str:
    return json.dumps(m.as_json(), sort_keys=True, separators=(",", ":"))


def _document(args) -> str:
    if args.text is not None and args.document is not None:
        raise UsageError("give either a document path or --text, not both")
    if args.text is not None:
        return args.text
    if args.document is None:
        raise UsageError("a document path or --text is required")
    return read_document(args.document)


def cmd_eval(args, out) -> int:
    g = load_grammar_arg(args.grammar)
    d = _document(args)
    limit = args.limit
    if args.mode == "naive":
        result = sorted(naive_evaluate(g, d, args.oracle_budget), key=SpanMapping.sort_key)
        for m in result[:limit] if limit is not None else result:
            print(mapping_line(m), file=out)
        return 0

    run = compile_spanner(g).run(d, check_duplicates=args.check_duplicates or None)
    if args.dump_stage == "adjusted" and run.adjusted is not None:
        sys.stderr.write(run.adjusted.dump())
    elif args.dump_stage == "decorated" and run.decorated is not None:
        sys.stderr.write(run.decorated.dump())

    if args.mode == "enum":
        for count, m in enumerate(run):
            if limit is not None and count >= limit:
                break
            print(mapping_line(m), file=out)
        if args.check_duplicates and run.stats.duplicates and g.declared_unambiguous:
            print(f"warning: {run.stats.duplicates} duplicate mapping(s) suppressed; "
                  "the grammar is declared unambiguous but is not", file=sys.stderr)
        return 0

    fast = set(run)
    slow = naive_evaluate(g, d, args.oracle_budget)
    if fast != slow:
        for m in sorted(fast - slow, key=SpanMapping.sort_key):
            print(f"only in enum: {mapping_line(m)}", file=sys.stderr)
        for m in sorted(slow - fast, key=SpanMapping.sort_key):
            print(f"only in naive: {mapping_line(m)}", file=sys.stderr)
        return EXIT_MISMATCH
    result = sorted(fast, key=SpanMapping.sort_key)
    for m in result[:limit] if limit is not None else result:
        print(mapping_line(m), file=out)
    print(f"ok: {len(fast)} mapping(s) agree", file=sys.stderr)
    return 0


def cmd_transform(args, out) -> int:
    g = load_grammar_arg(args.grammar)
    target = args.target
    if target == "cnf":
        result = to_cnf(g)
    elif target == "functional":
        result = functionalize(to_cnf(g)).grammar
    elif target.startswith("project:"):
        names = [v.strip() for v in target[len("project:"):].split(",") if v.strip()]
        result = project(g, names)
    elif target.startswith("union:"):
        result = union(g, load_grammar_arg(target[len("union:"):]))
    else:
        raise UsageError(f"unknown transform target {target!r}")
    out.write(serialize_grammar(result))
    return 0


def cmd_check(args, out) -> int:
    g = load_grammar_arg(args.grammar)
    useful = remove_useless(g)
    report = {
        "well_formed": True,
        "variables": list(g.vars),
        "nonterminals": len(g.nonterminals),
        "productions": len(g.productions),
        "size": g.size,
        "declared_unambiguous": g.declared_unambiguous,
        "regular_form": is_regular_form(g),
        "cnf": g.is_cnf(),
        "useless_nonterminals": sorted(g.nonterminals - useful.nonterminals)
        if not useful.is_empty_language else sorted(g.nonterminals),
        "empty_language": useful.is_empty_language,
    }
    fg = functionalize(to_cnf(g))
    try:
        compute_varop_sets(fg)
        witness = "ok"
    except NotFunctionalError as exc:
        witness = str(exc)
    report["functional"] = {
        "nonterminals": len(fg.grammar.nonterminals),
        "productions": len(fg.grammar.productions),
        "varop_check": witness,
        "empty_language": fg.is_empty_language,
    }
    empty = empty_doc_mapping(g)
    report["empty_document_mapping"] = empty.as_json() if empty is not None else None
    print(json.dumps(report, indent=2, sort_keys=True), file=out)
    return 0


def _delay_summary(delays: list[int]) -> dict:
    if not delays:
        return {"max": 0, "mean": 0.0, "p99": 0.0, "histogram": {}}
    hist = Counter(delays)
    return {
        "max": max(delays),
        "mean": statistics.fmean(delays),
        "p99": float(np.percentile(delays, 99)),
        "histogram": {str(k): hist[k] for k in sorted(hist)},
    }


def cmd_bench(args, out) -> int:
    g = load_grammar_arg(args.grammar)
    docs = [(p, read_document(p)) for p in args.documents]
    docs += [(f"--text #{m + 1}", t) for m, t in enumerate(args.text or [])]
    if not docs:
        raise UsageError("bench needs at least one document")
    if args.repeats < 1:
        raise UsageError("--repeats must be at least 1")
    compiled = compile_spanner(g)
    runs = []
    for label, d in docs:
        stage_samples: dict[str, list[float]] = {}
        counts = set()
        delays: list[int] = []
        for _ in range(args.repeats):
            run = compiled.run(d)
            count = sum(1 for _ in run)
            counts.add(count)
            for stage, seconds in run.times.as_dict().items():
                stage_samples.setdefault(stage, []).append(seconds)
            delays = run.stats.delays
        runs.append({
            "document": label,
            "length": len(d),
            "count": min(counts),
            "deterministic": len(counts) == 1,
            "stages": {s: statistics.median(v) for s, v in stage_samples.items()},
            "delay": _delay_summary(delays),
        })
    report = {
        "grammar": args.grammar,
        "variables": list(g.vars),
        "repeats": args.repeats,
        "normalise_seconds": compiled.normalise_time,
        "runs": runs,
        "series": {
            "length": [r["length"] for r in runs],
            "max_delay": [r["delay"]["max"] for r in runs],
            "count": [r["count"] for r in runs],
        },
    }
    print(json.dumps(report, indent=2, sort_keys=True), file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cfspanner", description="Evaluate extraction grammars on documents.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="extract mappings from a document (JSON lines)")
    ev.add_argument("grammar", help="grammar file (.eg) or corpus:NAME")
    ev.add_argument("document", nargs="?", help="document file (UTF-8, one trailing newline dropped)")
    ev.add_argument("--text", help="inline document instead of a file")
    ev.add_argument("--mode", choices=["enum", "naive", "compare"], default="enum")
    ev.add_argument("--limit", type=int, help="stop after this many mappings")
    ev.add_argument("--dump-stage", choices=["adjusted", "decorated"],
                    help="print an intermediate grammar to stderr")
    ev.add_argument("--check-duplicates", action="store_true",
                    help="hash every output and drop repeats")
    ev.add_argument("--oracle-budget", type=int,
                    help="cap on candidate gap assignments for the naive evaluator")
    ev.set_defaults(func=cmd_eval)

    tr = sub.add_parser("transform", help="print a transformed grammar")
    tr.add_argument("grammar")
    tr.add_argument("target", help="cnf | functional | project:x,y | union:PATH")
    tr.set_defaults(func=cmd_transform)

    ck = sub.add_parser("check", help="report grammar properties as JSON")
    ck.add_argument("grammar")
    ck.set_defaults(func=cmd_check)

    be = sub.add_parser("bench", help="time preprocessing stages and enumeration delay")
    be.add_argument("grammar")
    be.add_argument("documents", nargs="*", help="document files")
    be.add_argument("--text", action="append", help="inline document (repeatable)")
    be.add_argument("--repeats", type=int, default=3)
    be.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"cfspanner: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cfspanner: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GrammarError as exc:
        print(f"cfspanner: grammar error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"cfspanner: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
