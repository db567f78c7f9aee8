"""Textual grammar notation: parser and serializer.

Format, one rule per line:

    start: text                  # first declaration names the start category
    # full-line comment
    head => element element ...  # normal rule
    head ~> ...                  # scope-closing rule
    pre(f:v) -> ['surface']      # lexical rule

Body elements: ``['terminal']`` (may contain spaces), ``$pre(...)``
pre-terminal, ``cat(...)`` non-terminal, ``>(...)`` forward reference,
``>>(...)`` strong forward reference, ``<(...)`` backward reference,
``<(+(...) +(...) -(...))`` complex backward reference, ``/<(...)`` negative
backward reference, ``//`` scope opener, ``#Var`` position operator.

Features are comma-separated ``name:value`` pairs in parentheses. Capitalized
identifiers are variables, everything else is a constant; ``'quoted atoms'``
are constants regardless of spelling. A trailing backslash continues a rule on
the next line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (BackwardRef, BodyElement, CatKind, Category, Constant,
                    EMPTY_FS, FeatureStructure, ForwardRef, Grammar,
                    NegativeRef, PositionOp, Rule, RuleKind, ScopeOpener,
                    Value, Variable, fresh_uid, terminal)


@dataclass(frozen=True)
class GrammarIssue:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


class GrammarError(Exception):
    """Raised for syntax or validation problems; carries all issues found."""

    def __init__(self, issues: list[GrammarIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<terminal>\['(?P<tsurf>[^']*)'\])
  | (?P<quoted>'(?P<qval>[^']*)')
  | (?P<arrow>=>|~>|->)
  | (?P<strong>>>)
  | (?P<negref>/<)
  | (?P<opener>//)
  | (?P<fwd>>)
  | (?P<bwd><)
  | (?P<hash>\#)
  | (?P<dollar>\$)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<colon>:)
  | (?P<comma>,)
  | (?P<plus>\+)
  | (?P<minus>-|–)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>[0-9]+)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _tokenize_line(text: str, line_no: int) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise GrammarError([GrammarIssue(line_no, pos + 1,
                                             f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind == "terminal":
            toks.append(_Tok("terminal", m.group("tsurf"), line_no, pos + 1))
        elif kind == "quoted":
            toks.append(_Tok("quoted", m.group("qval"), line_no, pos + 1))
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(0), line_no, pos + 1))
        pos = m.end()
    return toks


class _RuleParser:
    """Recursive-descent parser for one logical rule line."""

    def __init__(self, toks: list[_Tok], line_no: int):
        self.toks = toks
        self.i = 0
        self.line = line_no
        self.vars: dict[str, Variable] = {}

    def error(self, message: str) -> GrammarError:
        col = self.toks[self.i].column if self.i < len(self.toks) else (
            self.toks[-1].column + len(self.toks[-1].text) if self.toks else 1)
        return GrammarError([GrammarIssue(self.line, col, message)])

    def peek(self, k: int = 0) -> _Tok | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, kind: str | None = None) -> _Tok:
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of rule")
        if kind is not None and t.kind != kind:
            raise self.error(f"expected {kind}, found {t.text!r}")
        self.i += 1
        return t

    def at(self, kind: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == kind

    def parse_rule(self) -> Rule:
        head_name = self.take("ident").text
        head_fs = self.parse_feature_block() if self.at("lparen") else EMPTY_FS
        arrow = self.take("arrow").text
        kind = {"=>": RuleKind.NORMAL, "~>": RuleKind.SCOPE_CLOSING,
                "->": RuleKind.LEXICAL}[arrow]
        head_kind = CatKind.PRETERMINAL if kind is RuleKind.LEXICAL else CatKind.NONTERMINAL
        body: list[BodyElement] = []
        while self.peek() is not None:
            body.append(self.parse_element())
        if not body:
            raise self.error("rule has an empty body")
        if kind is RuleKind.LEXICAL:
            if len(body) != 1 or not isinstance(body[0], Category) \
                    or body[0].kind is not CatKind.TERMINAL:
                raise self.error("lexical rules expand to exactly one terminal")
        return Rule(Category(head_kind, head_name, head_fs), kind, tuple(body))

    def parse_element(self) -> BodyElement:
        t = self.peek()
        assert t is not None
        if t.kind == "terminal":
            self.take()
            if not t.text or t.text != " ".join(t.text.split()):
                raise self.error("terminal surface must be non-empty, "
                                 "single-spaced, and untrimmed of content")
            return terminal(t.text)
        if t.kind == "dollar":
            self.take()
            name = self.take("ident").text
            fs = self.parse_feature_block() if self.at("lparen") else EMPTY_FS
            return Category(CatKind.PRETERMINAL, name, fs)
        if t.kind == "ident":
            self.take()
            fs = self.parse_feature_block() if self.at("lparen") else EMPTY_FS
            return Category(CatKind.NONTERMINAL, t.text, fs)
        if t.kind == "strong":
            self.take()
            return ForwardRef(self.parse_feature_block(), strong=True)
        if t.kind == "fwd":
            self.take()
            return ForwardRef(self.parse_feature_block(), strong=False)
        if t.kind == "opener":
            self.take()
            return ScopeOpener()
        if t.kind == "hash":
            self.take()
            name = self.take("ident").text
            if not name[0].isupper():
                raise self.error("position operator takes a variable "
                                 "(capitalized identifier)")
            return PositionOp(self.get_var(name))
        if t.kind == "negref":
            self.take()
            return NegativeRef(self.parse_feature_block())
        if t.kind == "bwd":
            self.take()
            return self.parse_backward_ref()
        raise self.error(f"unexpected {t.text!r} in rule body")

    def parse_backward_ref(self) -> BackwardRef:
        self.take("lparen")
        nxt = self.peek()
        follows = self.peek(1)
        if nxt is not None and nxt.kind in ("plus", "minus") \
                and follows is not None and follows.kind == "lparen":
            positives: list[FeatureStructure] = []
            negatives: list[FeatureStructure] = []
            while not self.at("rparen"):
                sign = self.take()
                if sign.kind not in ("plus", "minus"):
                    raise self.error("expected +(...) or -(...) in complex "
                                     "backward reference")
                fs = self.parse_feature_block()
                (positives if sign.kind == "plus" else negatives).append(fs)
            self.take("rparen")
            if not positives:
                raise self.error("complex backward reference needs at least "
                                 "one positive structure")
            return BackwardRef(tuple(positives), tuple(negatives))
        fs = self.parse_features_until_rparen()
        return BackwardRef((fs,), ())

    def parse_feature_block(self) -> FeatureStructure:
        self.take("lparen")
        return self.parse_features_until_rparen()

    def parse_features_until_rparen(self) -> FeatureStructure:
        feats: dict[str, Value] = {}
        if self.at("rparen"):
            self.take()
            return EMPTY_FS
        while True:
            name = self.take("ident").text
            self.take("colon")
            value = self.parse_value()
            if name in feats:
                raise self.error(f"duplicate feature {name!r}")
            feats[name] = value
            if self.at("comma"):
                self.take()
                continue
            self.take("rparen")
            return FeatureStructure(feats)

    def parse_value(self) -> Value:
        t = self.peek()
        if t is None:
            raise self.error("expected a feature value")
        if t.kind in ("plus", "minus", "number"):
            self.take()
            return Constant("-" if t.kind == "minus" else t.text)
        if t.kind == "quoted":
            self.take()
            return Constant(t.text)
        if t.kind == "ident":
            self.take()
            if t.text[0].isupper():
                return self.get_var(t.text)
            return Constant(t.text)
        raise self.error(f"expected a feature value, found {t.text!r}")

    def get_var(self, name: str) -> Variable:
        v = self.vars.get(name)
        if v is None:
            v = Variable(fresh_uid(), name)
            self.vars[name] = v
        return v


def _logical_lines(text: str) -> list[tuple[int, str]]:
    """Join backslash-continued lines; return (first line number, content)."""
    out: list[tuple[int, str]] = []
    pending: str | None = None
    pending_line = 0
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if pending is not None:
            line = pending + " " + line.strip()
            n0 = pending_line
            pending = None
        else:
            n0 = n
        if line.endswith("\\"):
            pending = line[:-1].rstrip()
            pending_line = n0
            continue
        out.append((n0, line))
    if pending is not None:
        out.append((pending_line, pending))
    return out


def parse_grammar(text: str) -> Grammar:
    """Parse grammar text. Raises GrammarError with positioned issues on
    syntax problems or hard validation failures."""
    issues: list[GrammarIssue] = []
    start: str | None = None
    rules: list[Rule] = []
    lexicon: list[Rule] = []
    for line_no, line in _logical_lines(text):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            toks = _tokenize_line(line, line_no)
        except GrammarError as e:
            issues.extend(e.issues)
            continue
        if start is None:
            if (len(toks) == 3 and toks[0].kind == "ident"
                    and toks[0].text == "start" and toks[1].kind == "colon"
                    and toks[2].kind == "ident"):
                start = toks[2].text
                continue
            issues.append(GrammarIssue(line_no, 1,
                                       "the first declaration must be 'start: <category>'"))
            break
        try:
            rule = _RuleParser(toks, line_no).parse_rule()
        except GrammarError as e:
            issues.extend(e.issues)
            continue
        if rule.kind is RuleKind.LEXICAL:
            lexicon.append(rule)
        else:
            rules.append(rule)
    if start is None and not issues:
        issues.append(GrammarIssue(1, 1, "empty grammar: missing 'start:' declaration"))
    if issues:
        raise GrammarError(issues)
    grammar = Grammar(start, tuple(rules), tuple(lexicon))
    from .validation import validate_grammar
    report = validate_grammar(grammar)
    if report.errors:
        raise GrammarError([GrammarIssue(0, 0, e) for e in report.errors])
    return grammar


def parse_grammar_file(path: str) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return parse_grammar(f.read())


_PLAIN_CONST_RE = re.compile(r"[a-z_][A-Za-z0-9_]*|[0-9]+|[+-]")


def _show_value(v: Value, names: dict[int, str]) -> str:
    if isinstance(v, Variable):
        return names[v.uid]
    if v.name and _PLAIN_CONST_RE.fullmatch(v.name):
        return v.name
    return f"'{v.name}'"


def _show_fs(fs: FeatureStructure, names: dict[int, str]) -> str:
    inner = ", ".join(f"{n}:{_show_value(v, names)}" for n, v in fs.items())
    return f"({inner})"


def _show_element(e: BodyElement, names: dict[int, str]) -> str:
    if isinstance(e, Category):
        if e.kind is CatKind.TERMINAL:
            return f"['{e.name}']"
        prefix = "$" if e.kind is CatKind.PRETERMINAL else ""
        return f"{prefix}{e.name}{_show_fs(e.fs, names) if e.fs else ''}"
    if isinstance(e, ForwardRef):
        return f"{'>>' if e.strong else '>'}{_show_fs(e.fs, names)}"
    if isinstance(e, ScopeOpener):
        return "//"
    if isinstance(e, PositionOp):
        return f"#{names[e.var.uid]}"
    if isinstance(e, NegativeRef):
        return f"/<{_show_fs(e.fs, names)}"
    if isinstance(e, BackwardRef):
        if len(e.positives) == 1 and not e.negatives:
            return f"<{_show_fs(e.positives[0], names)}"
        parts = [f"+{_show_fs(p, names)}" for p in e.positives]
        parts += [f"-{_show_fs(n, names)}" for n in e.negatives]
        return f"<({' '.join(parts)})"
    raise TypeError(f"cannot serialize {e!r}")


def _rule_var_names(rule: Rule) -> dict[int, str]:
    """Unique, capitalized display names for a rule's variables."""
    names: dict[int, str] = {}
    used: set[str] = set()
    for v in rule.variables():
        base = v.name if v.name and v.name[0].isupper() else "V"
        candidate = base
        k = 2
        while candidate in used:
            candidate = f"{base}{k}"
            k += 1
        names[v.uid] = candidate
        used.add(candidate)
    return names


def serialize_rule(rule: Rule) -> str:
    names = _rule_var_names(rule)
    head = f"{rule.head.name}{_show_fs(rule.head.fs, names) if rule.head.fs else ''}"
    body = " ".join(_show_element(e, names) for e in rule.body)
    return f"{head} {rule.kind.value} {body}"


def serialize_grammar(grammar: Grammar) -> str:
    lines = [f"start: {grammar.start}", ""]
    lines += [serialize_rule(r) for r in grammar.rules]
    if grammar.lexicon:
        lines.append("")
        lines += [serialize_rule(r) for r in grammar.lexicon]
    return "\n".join(lines) + "\n"
