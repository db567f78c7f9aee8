"""Grammar testing by exhaustive generation.

Three checks over all sentences up to a token bound:

* ambiguity: any sentence with more than one derivation is reported;
* dual-engine equivalence: the chart parser must accept exactly the
  generated language, probed on every generated sentence and on near-miss
  mutants of each (every single-token substitution from the lexicon and
  every single-token deletion);
* lookahead audit: over every proper prefix of the language, the offered
  next tokens must include every actual continuation (completeness) and
  must all be scannable without killing the prefix (correctness).

The walk over candidate sequences shares work through a prefix trie: one
parse session is advanced and rolled back via chart checkpoints, so a
prefix common to many sentences and mutants is parsed once. Whether a
token can extend the current chart alive is decided from the frontier
edges alone (a scanned token contributes progress exactly when an active
edge expects its terminal, or expects a pre-terminal with a unifiable
lexical entry for it); mutants that fail this test are settled by a set
lookup instead of a parse.
"""
from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, field

from . import reference
from .chart import ParseSession, derivation_count
from .model import CatKind, Grammar, unifiable


@dataclass(frozen=True)
class Disagreement:
    """One sequence the two engines judge differently (acceptance or
    derivation count)."""
    tokens: tuple[str, ...]
    chart_accepts: bool
    chart_count: int
    reference_accepts: bool
    reference_count: int

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens),
                "chart": {"accepts": self.chart_accepts,
                          "derivations": self.chart_count},
                "reference": {"accepts": self.reference_accepts,
                              "derivations": self.reference_count}}


@dataclass
class TestReport:
    sentence_count: int
    duplicate_sentences: list[tuple[str, ...]] = field(default_factory=list)
    engine_disagreements: list[Disagreement] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.duplicate_sentences and not self.engine_disagreements

    def render_text(self) -> str:
        """Line-oriented report; deterministic for fixed inputs (elapsed
        time is deliberately not serialized)."""
        out = io.StringIO()
        out.write(f"sentences: {self.sentence_count}\n")
        out.write(f"duplicates: {len(self.duplicate_sentences)}\n")
        for s in self.duplicate_sentences:
            out.write(f"duplicate: {' '.join(s)}\n")
        out.write(f"disagreements: {len(self.engine_disagreements)}\n")
        for d in self.engine_disagreements:
            out.write(
                f"disagree: {' '.join(d.tokens)} | chart "
                f"{'accepts' if d.chart_accepts else 'rejects'}"
                f" ({d.chart_count}) | reference "
                f"{'accepts' if d.reference_accepts else 'rejects'}"
                f" ({d.reference_count})\n")
        return out.getvalue()

    def render_records(self) -> str:
        """Machine-readable form: one JSON record per line, one per
        finding, then a summary record."""
        lines = []
        for s in self.duplicate_sentences:
            lines.append(json.dumps({"finding": "duplicate", "tokens": list(s)}))
        for d in self.engine_disagreements:
            lines.append(json.dumps({"finding": "disagreement", **d.to_dict()}))
        lines.append(json.dumps({"summary": {
            "sentences": self.sentence_count,
            "duplicates": len(self.duplicate_sentences),
            "disagreements": len(self.engine_disagreements)}}))
        return "\n".join(lines) + "\n"


# Generation is by far the most expensive step and all three checks need
# the same corpus, so it is memoized per grammar object. Keys are id()s;
# each entry pins the grammar itself so the id cannot be recycled. A corpus
# for a larger bound answers any smaller bound by filtering: generation is
# bound-monotone (raising the bound only adds longer sentences and never
# changes the derivations of shorter ones).
_corpus_cache: dict[int, tuple[Grammar, dict[int, dict[tuple[str, ...], int]]]] = {}
_CORPUS_CACHE_LIMIT = 8


def _language(grammar: Grammar, max_tokens: int) -> dict[tuple[str, ...], int]:
    pinned = _corpus_cache.get(id(grammar))
    if pinned is None:
        while len(_corpus_cache) >= _CORPUS_CACHE_LIMIT:
            del _corpus_cache[next(iter(_corpus_cache))]
        pinned = (grammar, {})
        _corpus_cache[id(grammar)] = pinned
    per_bound = pinned[1]
    if max_tokens not in per_bound:
        for bound in sorted(per_bound):
            if bound > max_tokens:
                per_bound[max_tokens] = {
                    toks: n for toks, n in per_bound[bound].items()
                    if len(toks) <= max_tokens}
                break
        else:
            per_bound[max_tokens] = {
                g.tokens: g.derivations
                for g in reference.generate(grammar, max_tokens)}
    return per_bound[max_tokens]


def _duplicates(language: dict[tuple[str, ...], int]) -> list[tuple[str, ...]]:
    """Token sequences whose rendered sentence has more than one derivation.

    Grouping is by rendered text, not by token tuple: a multi-word token
    makes the same sentence reachable as different token sequences, and
    that too is an ambiguity of the language."""
    by_text: dict[str, list[tuple[str, ...]]] = {}
    for toks in language:
        by_text.setdefault(" ".join(toks), []).append(toks)
    out: list[tuple[str, ...]] = []
    for group in by_text.values():
        if sum(language[t] for t in group) > 1:
            out.extend(group)
    return sorted(out)


def ambiguity_check(grammar: Grammar, max_tokens: int) -> TestReport:
    """Generate the language and report every sentence with more than one
    derivation."""
    started = time.monotonic()
    language = _language(grammar, max_tokens)
    return TestReport(sentence_count=len(language),
                      duplicate_sentences=_duplicates(language),
                      elapsed=time.monotonic() - started)


def alive_next_tokens(session: ParseSession) -> set[str]:
    """Tokens whose scan would keep the session alive: exactly those that
    let some frontier edge advance over its expected terminal or
    pre-terminal."""
    out: set[str] = set()
    lexicon = session.grammar.lexicon_by_name
    for e in session.chart.frontier_expectations():
        cat = e.remaining[0]
        if cat.kind is CatKind.TERMINAL:
            out.add(cat.name)
        else:
            for lex in lexicon.get(cat.name, ()):
                surface = lex.body[0].name
                if surface not in out and unifiable(cat.fs, lex.head.fs):
                    out.add(surface)
    return out


class _Pending:
    """A test sequence passing through the current trie node: the part
    still to be consumed plus how to judge the full sequence."""

    __slots__ = ("suffix", "is_corpus")

    def __init__(self, suffix: tuple[str, ...], is_corpus: bool):
        self.suffix = suffix
        self.is_corpus = is_corpus


class _EquivalenceRun:
    def __init__(self, grammar: Grammar, max_tokens: int):
        self.grammar = grammar
        self.language = _language(grammar, max_tokens)
        self.alphabet = sorted(grammar.all_surfaces())
        self.session = ParseSession(grammar)
        self.path: list[str] = []
        self.disagreements: list[Disagreement] = []

    def _chart_verdict_here(self) -> tuple[bool, int]:
        if self.session.complete:
            return True, derivation_count(self.session)
        return False, 0

    def _judge(self, tokens: tuple[str, ...], chart_accepts: bool,
               chart_count: int) -> None:
        ref_count = self.language.get(tokens, 0)
        ref_accepts = ref_count > 0
        if chart_accepts != ref_accepts or chart_count != ref_count:
            self.disagreements.append(Disagreement(
                tokens, chart_accepts, chart_count, ref_accepts, ref_count))

    def _mutations(self, suffix: tuple[str, ...]) -> list[_Pending]:
        """Single-token mutants of the corpus suffix that diverge at its
        first token: substitutions of that token and its deletion. Deeper
        mutation points are produced further down the walk."""
        out = [_Pending(suffix[1:], False)]
        rest = suffix[1:]
        for w in self.alphabet:
            if w != suffix[0]:
                out.append(_Pending((w,) + rest, False))
        return out

    def _deep_mutations(self, suffix: tuple[str, ...]) -> list[_Pending]:
        """All not-yet-spawned mutants of a corpus suffix, for judging a
        dead branch without walking it token by token."""
        out: list[_Pending] = []
        for i in range(len(suffix)):
            head = suffix[:i]
            out.append(_Pending(head + suffix[i + 1:], False))
            for w in self.alphabet:
                if w != suffix[i]:
                    out.append(_Pending(head + (w,) + suffix[i + 1:], False))
        return out

    def run(self) -> None:
        roots = [_Pending(toks, True) for toks in sorted(self.language)]
        self._walk(roots)

    def _walk(self, pending: list[_Pending]) -> None:
        groups: dict[str, list[_Pending]] = {}
        spawned: set[tuple[str, ...]] = set()
        for p in pending:
            if not p.suffix:
                accepts, count = self._chart_verdict_here()
                self._judge(tuple(self.path), accepts, count)
                continue
            groups.setdefault(p.suffix[0], []).append(
                _Pending(p.suffix[1:], p.is_corpus))
            if p.is_corpus:
                for m in self._mutations(p.suffix):
                    if m.suffix and m.suffix not in spawned:
                        spawned.add(m.suffix)
                        groups.setdefault(m.suffix[0], []).append(
                            _Pending(m.suffix[1:], False))
                    elif not m.suffix:
                        accepts, count = self._chart_verdict_here()
                        self._judge(tuple(self.path), accepts, count)
        if not groups:
            return
        alive = alive_next_tokens(self.session)
        for token in sorted(groups):
            below = groups[token]
            if token not in alive:
                self.path.append(token)
                self._judge_dead_branch(below)
                self.path.pop()
                continue
            cp = self.session.checkpoint()
            self.session.scan(token)
            self.path.append(token)
            self._walk(below)
            self.path.pop()
            self.session.rollback(cp)

    def _judge_dead_branch(self, pending: list[_Pending]) -> None:
        base = tuple(self.path)
        for p in pending:
            self._judge(base + p.suffix, False, 0)
            if p.is_corpus:
                for m in self._deep_mutations(p.suffix):
                    self._judge(base + m.suffix, False, 0)


def equivalence_check(grammar: Grammar, max_tokens: int) -> TestReport:
    """Compare chart acceptance (and derivation counts) against the
    reference language over every generated sentence and every single-token
    near-miss mutant of each."""
    started = time.monotonic()
    run = _EquivalenceRun(grammar, max_tokens)
    run.run()
    dedup: dict[tuple[str, ...], Disagreement] = {}
    for d in run.disagreements:
        dedup.setdefault(d.tokens, d)
    return TestReport(sentence_count=len(run.language),
                      duplicate_sentences=_duplicates(run.language),
                      engine_disagreements=[dedup[k] for k in sorted(dedup)],
                      elapsed=time.monotonic() - started)


@dataclass
class LookaheadAudit:
    prefix_count: int
    missed: list[tuple[tuple[str, ...], str]]
    false_offers: list[tuple[tuple[str, ...], str]]
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.missed and not self.false_offers

    def render_text(self) -> str:
        """Line-oriented report; deterministic for fixed inputs (elapsed
        time is deliberately not serialized)."""
        out = io.StringIO()
        out.write(f"prefixes: {self.prefix_count}\n")
        out.write(f"missed: {len(self.missed)}\n")
        for prefix, t in self.missed:
            out.write(f"miss: {' '.join(prefix)} | {t}\n")
        out.write(f"false offers: {len(self.false_offers)}\n")
        for prefix, w in self.false_offers:
            out.write(f"false offer: {' '.join(prefix)} | {w}\n")
        return out.getvalue()


def lookahead_audit(grammar: Grammar, max_tokens: int) -> LookaheadAudit:
    """Walk every proper prefix of the language and check the lookahead both
    ways: each real continuation must be offered, and each offer must keep
    the prefix alive when scanned."""
    from .lookahead import concrete_options
    started = time.monotonic()
    language = _language(grammar, max_tokens)
    trie: dict = {}
    for toks in language:
        node = trie
        for t in toks:
            node = node.setdefault(t, {})
    session = ParseSession(grammar)
    missed: list[tuple[tuple[str, ...], str]] = []
    false_offers: list[tuple[tuple[str, ...], str]] = []
    prefixes = 0
    path: list[str] = []

    def walk(node: dict) -> None:
        nonlocal prefixes
        prefixes += 1
        offered = {c.surface for c in concrete_options(session)}
        alive = alive_next_tokens(session)
        here = tuple(path)
        for t in sorted(node):
            if t not in offered:
                missed.append((here, t))
        for w in sorted(offered):
            if w not in alive:
                false_offers.append((here, w))
        for t in sorted(node):
            child = node[t]
            if not child:
                continue
            cp = session.checkpoint()
            session.scan(t)
            path.append(t)
            walk(child)
            path.pop()
            session.rollback(cp)

    walk(trie)
    return LookaheadAudit(prefix_count=prefixes, missed=missed,
                          false_offers=false_offers,
                          elapsed=time.monotonic() - started)


def render_suite(ambiguity: TestReport, equivalence: TestReport,
                 audit: LookaheadAudit) -> str:
    parts = [
        "== ambiguity ==\n" + ambiguity.render_text(),
        "== equivalence ==\n" + equivalence.render_text(),
        "== lookahead ==\n" + audit.render_text(),
    ]
    return "\n".join(parts)


def suite_report(grammar: Grammar, max_tokens: int) -> str:
    """All three checks rendered as one text block. Rerunning on the same
    grammar and bound must reproduce the block byte for byte."""
    return render_suite(ambiguity_check(grammar, max_tokens),
                        equivalence_check(grammar, max_tokens),
                        lookahead_audit(grammar, max_tokens))
