"""Reference interpreter: a direct top-down backtracking reading of a
grammar, used as an oracle for the chart engine and as an exhaustive
sentence generator.

The machine keeps one mutable state (input position or emitted tokens,
variable bindings, antecedent list) and explores alternatives with
generators; every choice point records a trail mark and undoes its effects
when exhausted. Callers must drain the generators completely, which every
loop here does.

The antecedent list is a single sequence in discourse order, so the
rightmost viable antecedent in it coincides with the chart engine's rule
of searching the internal list before the external one. A scope-closing
rule, once its body is matched, rewrites the part of the list that the
rule contributed: everything from the first scope opener on is dropped,
except strong antecedents, which survive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .chart import TreeNode, position_id
from .model import (Antecedent, BackwardRef, Binding, CatKind, Category,
                    FeatureStructure, ForwardRef, Grammar, NegativeRef,
                    PositionOp, ResolvedPosition, RuleKind, ScopeOpener,
                    Value, Variable, instantiate_rule, merge, substitute,
                    unifiable)


class DepthLimitExceeded(Exception):
    """The descent got deeper than any sensible derivation of the requested
    size; the grammar most likely recurses without consuming tokens."""


@dataclass(frozen=True)
class GeneratedSentence:
    tokens: tuple[str, ...]
    derivations: int


class _Machine:
    def __init__(self, grammar: Grammar, tokens: Optional[list[str]],
                 max_tokens: int):
        self.grammar = grammar
        self.tokens = tokens          # None means generation mode
        self.pos = 0
        self.out: list[str] = []
        self.max_tokens = max_tokens
        self.theta: dict[int, Value] = {}
        self.binding = Binding(self.theta)  # live view of theta
        self.ants: list = []
        self.trail: list = []
        self.depth = 0
        self.depth_limit = 10 * (max_tokens + 5)

    # -- state with undo -----------------------------------------------------

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            entry = self.trail.pop()
            op = entry[0]
            if op == "b":
                del self.theta[entry[1]]
            elif op == "a":
                self.ants.pop()
            elif op == "r":
                self.ants[entry[1]] = entry[2]
            else:  # "s": restore a rewritten suffix
                self.ants[entry[1]:] = entry[2]

    def _bind(self, uid: int, value: Value) -> None:
        self.theta[uid] = value
        self.trail.append(("b", uid))

    def _unify_values(self, x: Value, y: Value) -> bool:
        x = self.binding.walk(x)
        y = self.binding.walk(y)
        if isinstance(x, Variable):
            if isinstance(y, Variable) and y.uid == x.uid:
                return True
            self._bind(x.uid, y)
            return True
        if isinstance(y, Variable):
            self._bind(y.uid, x)
            return True
        return x.name == y.name

    def unify_fs(self, a: FeatureStructure, b: FeatureStructure) -> bool:
        """Extend theta; on failure partial bindings remain for the caller's
        undo mark to clean up."""
        bmap = b._map
        for name, va in a._map.items():
            vb = bmap.get(name)
            if vb is not None and not self._unify_values(va, vb):
                return False
        return True

    def subst(self, fs: FeatureStructure) -> FeatureStructure:
        return substitute(fs, self.binding)

    def append_ant(self, item: Antecedent | ScopeOpener) -> None:
        self.ants.append(item)
        self.trail.append(("a",))

    def replace_ant(self, idx: int, item: Antecedent) -> None:
        self.trail.append(("r", idx, self.ants[idx]))
        self.ants[idx] = item

    def close_scope(self, entry_len: int) -> None:
        suffix = self.ants[entry_len:]
        first = next((k for k, it in enumerate(suffix)
                      if isinstance(it, ScopeOpener)), None)
        if first is None:
            return
        kept = suffix[:first] + [it for it in suffix[first + 1:]
                                 if isinstance(it, Antecedent) and it.strong]
        self.trail.append(("s", entry_len, suffix))
        self.ants[entry_len:] = kept

    # -- token stream ---------------------------------------------------------

    def current_position(self) -> int:
        return self.pos if self.tokens is not None else len(self.out)

    def emit(self, token: str) -> Iterator[None]:
        if self.tokens is not None:
            if self.pos < len(self.tokens) and self.tokens[self.pos] == token:
                self.pos += 1
                yield None
                self.pos -= 1
        else:
            if len(self.out) < self.max_tokens:
                self.out.append(token)
                yield None
                self.out.pop()

    # -- matching -------------------------------------------------------------

    def match_body(self, body: tuple, i: int) -> Iterator[list]:
        if i == len(body):
            yield []
            return
        for child in self.match_element(body[i]):
            for rest in self.match_body(body, i + 1):
                yield rest if child is None else [child] + rest

    def match_element(self, el) -> Iterator:
        if isinstance(el, Category):
            if el.kind is CatKind.TERMINAL:
                for _ in self.emit(el.name):
                    yield el.name
            elif el.kind is CatKind.PRETERMINAL:
                yield from self.match_preterminal(el)
            else:
                yield from self.match_nonterminal(el)
        elif isinstance(el, ForwardRef):
            mark = len(self.trail)
            self.append_ant(Antecedent(el.fs, el.strong))
            yield None
            self.undo_to(mark)
        elif isinstance(el, ScopeOpener):
            mark = len(self.trail)
            self.append_ant(el)
            yield None
            self.undo_to(mark)
        elif isinstance(el, PositionOp):
            mark = len(self.trail)
            if self._unify_values(el.var, position_id(self.current_position())):
                yield None
            self.undo_to(mark)
        elif isinstance(el, ResolvedPosition):
            if self.binding.walk(el.value) == position_id(self.current_position()):
                yield None
        elif isinstance(el, NegativeRef):
            fs = self.subst(el.fs)
            for item in self.ants:
                if isinstance(item, Antecedent) and unifiable(self.subst(item.fs), fs):
                    return
            yield None
        elif isinstance(el, BackwardRef):
            yield from self.match_backward(el)
        else:
            raise TypeError(f"unexpected body element {el!r}")

    def match_backward(self, ref: BackwardRef) -> Iterator[None]:
        positives = [self.subst(p) for p in ref.positives]
        negatives = [self.subst(n) for n in ref.negatives]
        for idx in range(len(self.ants) - 1, -1, -1):
            item = self.ants[idx]
            if not isinstance(item, Antecedent):
                continue
            fs = self.subst(item.fs)
            if not any(unifiable(fs, p) for p in positives):
                continue
            if any(unifiable(fs, n) for n in negatives):
                continue
            # rightmost viable antecedent found: branch over the positive
            # structures it accepts, never over other antecedents
            for pos_fs in ref.positives:
                mark = len(self.trail)
                if self.unify_fs(item.fs, pos_fs):
                    merged = merge(item.fs, pos_fs, self.binding)
                    self.replace_ant(idx, Antecedent(merged, item.strong))
                    yield None
                self.undo_to(mark)
            return

    def match_preterminal(self, cat: Category) -> Iterator[TreeNode]:
        for lex in self.grammar.lexicon_by_name.get(cat.name, ()):
            surface = lex.body[0].name
            inst = instantiate_rule(lex)
            mark = len(self.trail)
            if self.unify_fs(cat.fs, inst.head.fs):
                for _ in self.emit(surface):
                    yield TreeNode(cat.name, (surface,))
            self.undo_to(mark)

    def match_nonterminal(self, cat: Category) -> Iterator[TreeNode]:
        self.depth += 1
        if self.depth > self.depth_limit:
            raise DepthLimitExceeded(
                f"descent deeper than {self.depth_limit} while expanding "
                f"{cat.name!r}; the grammar probably recurses without "
                f"consuming a token")
        try:
            for rule in self.grammar.rules_by_head.get(cat.name, ()):
                inst = instantiate_rule(rule)
                mark = len(self.trail)
                if self.unify_fs(cat.fs, inst.head.fs):
                    entry_len = len(self.ants)
                    for children in self.match_body(inst.body, 0):
                        cmark = len(self.trail)
                        if inst.kind is RuleKind.SCOPE_CLOSING:
                            self.close_scope(entry_len)
                        yield TreeNode(cat.name, tuple(children))
                        self.undo_to(cmark)
                self.undo_to(mark)
        finally:
            self.depth -= 1


def _start_category(grammar: Grammar) -> Category:
    return Category(CatKind.NONTERMINAL, grammar.start)


def derivations(grammar: Grammar, tokens: list[str]) -> list[TreeNode]:
    """All distinct derivation trees of the token sequence."""
    m = _Machine(grammar, list(tokens), len(tokens))
    seen: set = set()
    trees: list[TreeNode] = []
    for tree in m.match_nonterminal(_start_category(grammar)):
        if m.pos == len(tokens) and tree not in seen:
            seen.add(tree)
            trees.append(tree)
    return trees


def accepts(grammar: Grammar, tokens: list[str]) -> tuple[bool, int]:
    """Membership plus the number of distinct derivations."""
    trees = derivations(grammar, tokens)
    return bool(trees), len(trees)


def generate(grammar: Grammar, max_tokens: int) -> list[GeneratedSentence]:
    """Every sentence of the language up to max_tokens tokens, sorted, with
    its derivation count."""
    m = _Machine(grammar, None, max_tokens)
    found: dict[tuple[str, ...], set] = {}
    for tree in m.match_nonterminal(_start_category(grammar)):
        found.setdefault(tuple(m.out), set()).add(tree)
    return [GeneratedSentence(toks, len(shapes))
            for toks, shapes in sorted(found.items())]
