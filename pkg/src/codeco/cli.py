"""Command line interface.

Subcommands: check, parse, options, generate, test, serve. Exit codes:
0 success, 1 negative result (invalid grammar on check, rejected sentence
on parse, no options, findings on test, empty language on generate),
2 usage or grammar-loading error.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .chart import extract_trees, parse
from .genertest import ambiguity_check, equivalence_check
from .lookahead import next_tokens
from .model import Grammar
from .notation import GrammarError, parse_grammar, parse_grammar_file
from .reference import generate
from .validation import validate_grammar


def _load_grammar(path: str) -> Grammar:
    """Load or exit with code 2; callers rely on a usable grammar."""
    try:
        return parse_grammar_file(path)
    except OSError as exc:
        print(f"cannot read grammar: {exc}", file=sys.stderr)
        raise SystemExit(2)
    except GrammarError as exc:
        for issue in exc.issues:
            print(str(issue), file=sys.stderr)
        raise SystemExit(2)


def cmd_check(args: argparse.Namespace) -> int:
    try:
        with open(args.grammar, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read grammar: {exc}", file=sys.stderr)
        return 2
    try:
        grammar = parse_grammar(text)
    except GrammarError as exc:
        for issue in exc.issues:
            print(str(issue))
        print(f"invalid: {len(exc.issues)} problem(s)")
        return 1
    report = validate_grammar(grammar)
    for w in report.warnings:
        print(f"warning: {w}")
    print(f"ok: {len(grammar.rules)} rules, {len(grammar.lexicon)} lexical entries")
    return 0


def cmd_parse(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    tokens = grammar.tokenize(args.tokens)
    session = parse(grammar, tokens)
    print(session.status)
    if session.complete and args.tree:
        for tree in extract_trees(session):
            print(tree)
    return 0 if session.complete else 1


def cmd_options(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    tokens = grammar.tokenize(args.tokens)
    session = parse(grammar, tokens)
    abstract, concrete = next_tokens(session)
    print("abstract:")
    for a in abstract:
        print(f"  {a!r}")
    print("concrete:")
    for c in concrete:
        print(f"  {c!r}")
    return 0 if concrete else 1


def cmd_generate(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    sentences = generate(grammar, args.max_tokens)
    for s in sentences:
        print(" ".join(s.tokens))
    return 0 if sentences else 1


def cmd_test(args: argparse.Namespace) -> int:
    grammar = _load_grammar(args.grammar)
    amb = ambiguity_check(grammar, args.max_tokens)
    eq = equivalence_check(grammar, args.max_tokens)
    print("ambiguity check")
    print(amb.render_text(), end="")
    print("equivalence check")
    print(eq.render_text(), end="")
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            fh.write(amb.render_records())
            fh.write(eq.render_records())
    return 0 if amb.ok and eq.ok else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    path = args.grammar or os.environ.get("CODECO_GRAMMAR")
    if not path:
        print("no grammar given and CODECO_GRAMMAR not set", file=sys.stderr)
        return 2
    grammar = _load_grammar(path)
    grammar_id = os.path.splitext(os.path.basename(path))[0]
    app = create_app({grammar_id: grammar}, idle_seconds=args.session_ttl)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codeco",
        description="Grammar tools: validation, parsing, lookahead, "
                    "generation, testing, and an HTTP service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a grammar file")
    p.add_argument("grammar")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("parse", help="parse a sentence")
    p.add_argument("grammar")
    p.add_argument("--tokens", required=True,
                   help="sentence text; multi-word surfaces are recognized")
    p.add_argument("--tree", action="store_true", help="print syntax trees")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("options", help="show next-token options for a prefix")
    p.add_argument("grammar")
    p.add_argument("--tokens", required=True)
    p.set_defaults(func=cmd_options)

    p = sub.add_parser("generate", help="generate the language up to a length")
    p.add_argument("grammar")
    p.add_argument("--max-tokens", type=int, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("test", help="run ambiguity and equivalence checks")
    p.add_argument("grammar")
    p.add_argument("--max-tokens", type=int, required=True)
    p.add_argument("--records", help="also write machine-readable findings here")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("grammar", nargs="?",
                   help="grammar file (default: $CODECO_GRAMMAR)")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("CODECO_PORT", "8000")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--session-ttl", type=float, default=3600.0,
                   help="idle seconds before a session expires")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
