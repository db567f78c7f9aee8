"""Extended Earley chart parser with antecedent tracking.

Edges carry two antecedent lists next to the usual dotted rule: the external
list (ρ1) holds antecedents inherited from the predicting context, the
internal list (ρ2) holds antecedents contributed by recognized material.
Parsing rotates three steps to a fixpoint after each scanned token:
prediction, completion, and resolution (the extra step that advances over
position operators, scope openers, and references).

Edges are immutable. Every step that combines or advances edges applies the
resulting variable bindings eagerly, so edges never carry an environment;
equivalence of candidate edges is decided by structural equality after
canonical variable renaming.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .model import (Antecedent, AntecedentItem, BackwardRef, Binding,
                    BodyElement, CatKind, Category, Constant, FeatureStructure,
                    ForwardRef, Grammar, NegativeRef, PositionOp,
                    ResolvedPosition, Rule, RuleKind, SCOPE_MARK, ScopeOpener,
                    Value, Variable, instantiate_rule, iter_variables_of_fs,
                    merge, rename_fs, substitute, substitute_antecedent,
                    substitute_element, unifiable, unify, variable)


def position_id(index: int) -> Constant:
    """Identifier constant for the gap before token index+1."""
    return Constant(str(index))


# ---------------------------------------------------------------------------
# Canonical forms (edge equivalence and rule comparison)

def _canon_value(v: Value, vmap: dict[int, int]) -> tuple:
    if isinstance(v, Variable):
        idx = vmap.get(v.uid)
        if idx is None:
            idx = vmap[v.uid] = len(vmap)
        return ("v", idx)
    return ("c", v.name)


def _canon_fs(fs: FeatureStructure, vmap: dict[int, int]) -> tuple:
    return tuple((n, _canon_value(v, vmap)) for n, v in fs.items())


def _canon_element(e: BodyElement, vmap: dict[int, int]) -> tuple:
    if isinstance(e, Category):
        return ("C", e.kind.value, e.name, _canon_fs(e.fs, vmap))
    if isinstance(e, ForwardRef):
        return (">>" if e.strong else ">", _canon_fs(e.fs, vmap))
    if isinstance(e, ScopeOpener):
        return ("//",)
    if isinstance(e, PositionOp):
        return ("#", _canon_value(e.var, vmap))
    if isinstance(e, ResolvedPosition):
        return ("#=", _canon_value(e.value, vmap))
    if isinstance(e, NegativeRef):
        return ("/<", _canon_fs(e.fs, vmap))
    if isinstance(e, BackwardRef):
        return ("<", tuple(_canon_fs(p, vmap) for p in e.positives),
                tuple(_canon_fs(n, vmap) for n in e.negatives))
    raise TypeError(f"unexpected body element {e!r}")


def _canon_item(item: AntecedentItem, vmap: dict[int, int]) -> tuple:
    if isinstance(item, ScopeOpener):
        return ("//",)
    return ("a", item.strong, _canon_fs(item.fs, vmap))


def _edge_key(head: Category, kind: RuleKind, recognized: tuple,
              remaining: tuple, start: int, end: int,
              external: tuple, internal: tuple) -> tuple:
    vmap: dict[int, int] = {}
    return (start, end, kind.value,
            _canon_element(head, vmap),
            tuple(_canon_element(e, vmap) for e in recognized),
            tuple(_canon_element(e, vmap) for e in remaining),
            tuple(_canon_item(i, vmap) for i in external),
            tuple(_canon_item(i, vmap) for i in internal))


def _canon_rule(rule: Rule) -> tuple:
    vmap: dict[int, int] = {}
    return (rule.kind.value, _canon_element(rule.head, vmap),
            tuple(_canon_element(e, vmap) for e in rule.body))


def alpha_equivalent_rules(a: Rule, b: Rule) -> bool:
    """True if the rules are identical up to consistent variable renaming."""
    return _canon_rule(a) == _canon_rule(b)


# ---------------------------------------------------------------------------
# Substitution and renaming helpers over tuples

def _sub_elements(elements: tuple, binding: Binding) -> tuple:
    if not binding or not elements:
        return elements
    return tuple(substitute_element(e, binding) for e in elements)


def _sub_items(items: tuple, binding: Binding) -> tuple:
    if not binding or not items:
        return items
    return tuple(substitute_antecedent(i, binding) for i in items)


def _rename_item(item: AntecedentItem, mapping: dict[int, Variable]) -> AntecedentItem:
    if isinstance(item, ScopeOpener):
        return item
    return Antecedent(rename_fs(item.fs, mapping), item.strong)


def _fresh_mapping_for(fss: Iterable[FeatureStructure]) -> dict[int, Variable]:
    mapping: dict[int, Variable] = {}
    for fs in fss:
        for v in iter_variables_of_fs(fs):
            if v.uid not in mapping:
                mapping[v.uid] = variable(v.name)
    return mapping


# ---------------------------------------------------------------------------
# Edges

Origin = tuple  # ("complete", active, passive) or ("resolve", source, None)


class Edge:
    """One chart entry: a dotted rule instance over a span, with external
    (inherited) and internal (own) antecedent lists."""

    __slots__ = ("ord", "head", "kind", "recognized", "remaining", "start",
                 "end", "external", "internal", "rule", "origins", "key")

    def __init__(self, ord_: int, head: Category, kind: RuleKind,
                 recognized: tuple, remaining: tuple, start: int, end: int,
                 external: tuple, internal: tuple,
                 rule: Optional[Rule], key: tuple):
        self.ord = ord_
        self.head = head
        self.kind = kind
        self.recognized = recognized
        self.remaining = remaining
        self.start = start
        self.end = end
        self.external = external
        self.internal = internal
        self.rule = rule
        self.origins: list[Origin] = []
        self.key = key

    @property
    def is_passive(self) -> bool:
        return not self.remaining

    @property
    def active_element(self) -> Optional[BodyElement]:
        return self.remaining[0] if self.remaining else None

    def __repr__(self) -> str:
        rec = " ".join(repr(e) for e in self.recognized)
        rem = " ".join(repr(e) for e in self.remaining)
        ext = " ".join(repr(i) for i in self.external)
        intl = " ".join(repr(i) for i in self.internal)
        mark = "~" if self.kind is RuleKind.SCOPE_CLOSING else ""
        return (f"<{self.start}-{self.end} {self.head!r}{mark}"
                f" [{ext} |- {intl}] {rec} . {rem}>")


class Checkpoint:
    __slots__ = ("n_edges", "n_log", "n_tokens", "cursors", "n_statuses")

    def __init__(self, n_edges: int, n_log: int, n_tokens: int,
                 cursors: tuple[int, int, int], n_statuses: int):
        self.n_edges = n_edges
        self.n_log = n_log
        self.n_tokens = n_tokens
        self.cursors = cursors
        self.n_statuses = n_statuses


class Chart:
    """Append-only edge store with the three parsing steps.

    Supports checkpoint/rollback between tokens (used for bulk testing and
    lookahead verification); rollback truncates the edge list and undoes
    origin merges, restoring the exact pre-checkpoint state.
    """

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.edges: list[Edge] = []
        self._by_key: dict[tuple, Edge] = {}
        # active edges keyed by (end, active category kind, name)
        self._actives: dict[tuple, list[Edge]] = {}
        # passive edges keyed by (start, head kind, name)
        self._passives: dict[tuple, list[Edge]] = {}
        # active edges whose active element is terminal/pre-terminal, by end
        self._tp_by_end: dict[int, list[Edge]] = {}
        self._progress: list[bool] = [False]
        self.n_tokens = 0
        self._pc = 0  # prediction cursor
        self._cc = 0  # completion cursor
        self._rc = 0  # resolution cursor
        self._origin_log: list[Edge] = []

    # -- storage ------------------------------------------------------------

    def add(self, head: Category, kind: RuleKind, recognized: tuple,
            remaining: tuple, start: int, end: int, external: tuple,
            internal: tuple, rule: Optional[Rule],
            origin: Optional[Origin]) -> Optional[Edge]:
        key = _edge_key(head, kind, recognized, remaining, start, end,
                        external, internal)
        existing = self._by_key.get(key)
        if existing is not None:
            if origin is not None:
                existing.origins.append(origin)
                self._origin_log.append(existing)
            return None
        e = Edge(len(self.edges), head, kind, recognized, remaining, start,
                 end, external, internal, rule, key)
        if origin is not None:
            e.origins.append(origin)
            self._origin_log.append(e)
        self.edges.append(e)
        self._by_key[key] = e
        self._index(e, add=True)
        if e.head.kind is CatKind.NONTERMINAL:
            self._progress[e.end] = True
        return e

    def _index(self, e: Edge, add: bool) -> None:
        slots = []
        first = e.remaining[0] if e.remaining else None
        if first is None:
            slots.append((self._passives, (e.start, e.head.kind, e.head.name)))
        elif isinstance(first, Category):
            slots.append((self._actives, (e.end, first.kind, first.name)))
            if first.kind is not CatKind.NONTERMINAL:
                slots.append((self._tp_by_end, e.end))
        for table, key in slots:
            if add:
                table.setdefault(key, []).append(e)
            else:
                lst = table[key]
                assert lst[-1] is e
                lst.pop()

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(len(self.edges), len(self._origin_log),
                          self.n_tokens, (self._pc, self._cc, self._rc), 0)

    def rollback(self, cp: Checkpoint) -> None:
        for e in reversed(self._origin_log[cp.n_log:]):
            e.origins.pop()
        del self._origin_log[cp.n_log:]
        for e in reversed(self.edges[cp.n_edges:]):
            del self._by_key[e.key]
            self._index(e, add=False)
        del self.edges[cp.n_edges:]
        self.n_tokens = cp.n_tokens
        del self._progress[cp.n_tokens + 1:]
        self._pc, self._cc, self._rc = cp.cursors

    # -- scanning -----------------------------------------------------------

    def scan(self, token: str) -> None:
        pos = self.n_tokens
        self.n_tokens += 1
        self._progress.append(False)
        self.add(Category(CatKind.TERMINAL, token), RuleKind.NORMAL,
                 (), (), pos, pos + 1, (), (), None, None)
        for lex in self.grammar.lexicon_by_surface.get(token, ()):
            inst = instantiate_rule(lex)
            self.add(inst.head, RuleKind.NORMAL, inst.body, (), pos, pos + 1,
                     (), (), lex, None)

    def initialize(self) -> None:
        for rule in self.grammar.start_rules():
            inst = instantiate_rule(rule)
            self.add(inst.head, inst.kind, (), inst.body, 0, 0, (), (),
                     rule, None)

    # -- the three steps ----------------------------------------------------

    def predict(self) -> int:
        added = 0
        while self._pc < len(self.edges):
            e = self.edges[self._pc]
            self._pc += 1
            added += self._predict_edge(e)
        return added

    def _predict_edge(self, e: Edge) -> int:
        cat = e.active_element
        if not isinstance(cat, Category) or cat.kind is not CatKind.NONTERMINAL:
            return 0
        added = 0
        context = e.external + e.internal
        for rule in self.grammar.rules_by_head.get(cat.name, ()):
            inst = instantiate_rule(rule)
            binding = unify(cat.fs, inst.head.fs)
            if binding is None:
                continue
            head = Category(CatKind.NONTERMINAL, cat.name,
                            merge(cat.fs, inst.head.fs, binding))
            if self.add(head, inst.kind, (), _sub_elements(inst.body, binding),
                        e.end, e.end, _sub_items(context, binding), (),
                        rule, None) is not None:
                added += 1
        return added

    def complete(self) -> int:
        added = 0
        while self._cc < len(self.edges):
            e = self.edges[self._cc]
            self._cc += 1
            added += self._complete_edge(e)
        return added

    def _complete_edge(self, e: Edge) -> int:
        # Pair e with every older edge; each unordered pair is attempted
        # exactly once, when its younger member passes the cursor.
        added = 0
        if e.is_passive:
            partners = self._actives.get((e.start, e.head.kind, e.head.name), ())
            for a in partners:
                if a.ord > e.ord:
                    break
                added += self._complete_pair(a, e)
        else:
            cat = e.remaining[0]
            if isinstance(cat, Category):
                partners = self._passives.get((e.end, cat.kind, cat.name), ())
                for p in partners:
                    if p.ord > e.ord:
                        break
                    added += self._complete_pair(e, p)
        return added

    def _complete_pair(self, a: Edge, p: Edge) -> int:
        cat = a.remaining[0]
        if p.head.kind is CatKind.NONTERMINAL:
            # Rename the passive edge apart; genuine variable sharing is
            # re-established by unifying head and antecedent lists.
            mapping = _fresh_mapping_for(
                [p.head.fs]
                + [i.fs for i in p.external if isinstance(i, Antecedent)]
                + [i.fs for i in p.internal if isinstance(i, Antecedent)])
            p_head_fs = rename_fs(p.head.fs, mapping)
            binding = unify(cat.fs, p_head_fs)
            if binding is None:
                return 0
            context = a.external + a.internal
            p_external = tuple(_rename_item(i, mapping) for i in p.external)
            if len(context) != len(p_external):
                return 0
            for own, inner in zip(context, p_external):
                own_mark = isinstance(own, ScopeOpener)
                if own_mark != isinstance(inner, ScopeOpener):
                    return 0
                if own_mark:
                    continue
                if own.strong != inner.strong:
                    return 0
                binding = unify(own.fs, inner.fs, binding)
                if binding is None:
                    return 0
            contributed = tuple(_rename_item(i, mapping) for i in p.internal)
        else:
            # Scanned terminal and pre-terminal edges carry no antecedent
            # information; only the category itself must unify.
            binding = unify(cat.fs, p.head.fs)
            if binding is None:
                return 0
            p_head_fs = p.head.fs
            contributed = ()
        merged_cat = Category(cat.kind, cat.name,
                              merge(cat.fs, p_head_fs, binding))
        contributed = _sub_items(contributed, binding)
        if p.kind is RuleKind.SCOPE_CLOSING and any(
                isinstance(i, ScopeOpener) for i in contributed):
            idx = next(k for k, i in enumerate(contributed)
                       if isinstance(i, ScopeOpener))
            contributed = contributed[:idx] + tuple(
                i for i in contributed[idx + 1:]
                if isinstance(i, Antecedent) and i.strong)
        new = self.add(
            Category(a.head.kind, a.head.name, substitute(a.head.fs, binding)),
            a.kind,
            _sub_elements(a.recognized, binding) + (merged_cat,),
            _sub_elements(a.remaining[1:], binding),
            a.start, p.end,
            _sub_items(a.external, binding),
            _sub_items(a.internal, binding) + contributed,
            a.rule, ("complete", a, p))
        return 0 if new is None else 1

    def resolve(self) -> int:
        added = 0
        while self._rc < len(self.edges):
            e = self.edges[self._rc]
            self._rc += 1
            added += self._resolve_edge(e)
        return added

    def _advance(self, e: Edge, element: BodyElement, binding: Optional[Binding],
                 external: Optional[tuple] = None,
                 internal: Optional[tuple] = None) -> int:
        b = binding if binding is not None else Binding()
        new = self.add(
            Category(e.head.kind, e.head.name, substitute(e.head.fs, b)),
            e.kind,
            _sub_elements(e.recognized, b) + (element,),
            _sub_elements(e.remaining[1:], b),
            e.start, e.end,
            _sub_items(external if external is not None else e.external, b),
            _sub_items(internal if internal is not None else e.internal, b),
            e.rule, ("resolve", e, None))
        return 0 if new is None else 1

    def _resolve_edge(self, e: Edge) -> int:
        el = e.active_element
        if el is None or isinstance(el, Category):
            return 0
        if isinstance(el, PositionOp):
            binding = unify(FeatureStructure({"p": el.var}),
                            FeatureStructure({"p": position_id(e.end)}))
            if binding is None:
                return 0
            return self._advance(e, ResolvedPosition(position_id(e.end)), binding)
        if isinstance(el, ResolvedPosition):
            # A position operator whose variable was bound from elsewhere:
            # it must agree with the current position.
            if el.value == position_id(e.end):
                return self._advance(e, el, None)
            return 0
        if isinstance(el, ScopeOpener):
            return self._advance(e, el, None,
                                 internal=e.internal + (SCOPE_MARK,))
        if isinstance(el, ForwardRef):
            ant = Antecedent(el.fs, el.strong)
            return self._advance(e, el, None, internal=e.internal + (ant,))
        if isinstance(el, NegativeRef):
            for item in e.external + e.internal:
                if isinstance(item, Antecedent) and unifiable(item.fs, el.fs):
                    return 0
            return self._advance(e, el, None)
        if isinstance(el, BackwardRef):
            return self._resolve_backward(e, el)
        return 0

    def _resolve_backward(self, e: Edge, ref: BackwardRef) -> int:
        """Resolve to the rightmost viable internal antecedent, or — only if
        the internal list has none — the rightmost viable external one."""

        def viable(fs: FeatureStructure) -> bool:
            return (any(unifiable(fs, p) for p in ref.positives)
                    and not any(unifiable(fs, n) for n in ref.negatives))

        for in_internal, items in ((True, e.internal), (False, e.external)):
            for i in range(len(items) - 1, -1, -1):
                item = items[i]
                if not isinstance(item, Antecedent) or not viable(item.fs):
                    continue
                added = 0
                for x, pos_fs in enumerate(ref.positives):
                    binding = unify(item.fs, pos_fs)
                    if binding is None:
                        continue
                    merged = merge(item.fs, pos_fs, binding)
                    replaced = items[:i] + (Antecedent(merged, item.strong),) + items[i + 1:]
                    positives = tuple(
                        merged if j == x else substitute(pfs, binding)
                        for j, pfs in enumerate(ref.positives))
                    negatives = tuple(substitute(n, binding)
                                      for n in ref.negatives)
                    advanced = BackwardRef(positives, negatives)
                    if in_internal:
                        added += self._advance(e, advanced, binding,
                                               internal=replaced)
                    else:
                        added += self._advance(e, advanced, binding,
                                               external=replaced)
                return added
        return 0

    # -- driver -------------------------------------------------------------

    def pcr(self, order: tuple[str, str, str] = ("predict", "complete", "resolve")) -> None:
        steps = [getattr(self, name) for name in order]
        idle = 0
        i = 0
        while idle < len(steps):
            if steps[i % len(steps)]() > 0:
                idle = 0
            else:
                idle += 1
            i += 1

    # -- queries ------------------------------------------------------------

    @property
    def alive(self) -> bool:
        return self._progress[self.n_tokens]

    def complete_edges(self) -> list[Edge]:
        out = []
        for e in self._passives.get(
                (0, CatKind.NONTERMINAL, self.grammar.start), ()):
            if e.end == self.n_tokens:
                out.append(e)
        return out

    @property
    def is_complete(self) -> bool:
        return bool(self.complete_edges())

    def frontier_expectations(self) -> list[Edge]:
        """Active edges at the newest position whose active element is a
        terminal or pre-terminal category (lookahead raw material)."""
        return list(self._tp_by_end.get(self.n_tokens, ()))


# Module-level step wrappers matching the operation vocabulary.

def predict(chart: Chart) -> int:
    return chart.predict()


def complete(chart: Chart) -> int:
    return chart.complete()


def resolve(chart: Chart) -> int:
    return chart.resolve()


def pcr(chart: Chart, order: tuple[str, str, str] = ("predict", "complete", "resolve")) -> None:
    chart.pcr(order)


class SessionDead(Exception):
    """A token was offered to a session whose prefix can no longer be
    continued."""


STATUS_PREFIX_VALID = "prefix-valid"
STATUS_COMPLETE = "complete"
STATUS_DEAD = "dead"


class ParseSession:
    """Incremental parse of one token sequence; wraps a chart and records the
    status after every prefix."""

    def __init__(self, grammar: Grammar):
        self.chart = Chart(grammar)
        self.tokens: list[str] = []
        self.chart.initialize()
        self.chart.pcr()
        self.statuses: list[str] = [self._current_status()]

    @property
    def grammar(self) -> Grammar:
        return self.chart.grammar

    @grammar.setter
    def grammar(self, grammar: Grammar) -> None:
        self.chart.grammar = grammar

    def _current_status(self) -> str:
        if self.chart.is_complete:
            return STATUS_COMPLETE
        if self.chart.alive:
            return STATUS_PREFIX_VALID
        return STATUS_DEAD

    @property
    def status(self) -> str:
        return self.statuses[-1]

    @property
    def dead(self) -> bool:
        return self.status == STATUS_DEAD

    @property
    def complete(self) -> bool:
        return self.status == STATUS_COMPLETE

    def scan(self, token: str) -> str:
        if self.dead:
            raise SessionDead(f"cannot scan {token!r}: prefix is dead")
        self.chart.scan(token)
        self.chart.pcr()
        self.tokens.append(token)
        self.statuses.append(self._current_status())
        return self.status

    def checkpoint(self) -> Checkpoint:
        cp = self.chart.checkpoint()
        cp.n_statuses = len(self.statuses)
        return cp

    def rollback(self, cp: Checkpoint) -> None:
        self.chart.rollback(cp)
        del self.tokens[cp.n_tokens:]
        del self.statuses[cp.n_statuses:]


def parse(grammar: Grammar, tokens: Iterable[str]) -> ParseSession:
    session = ParseSession(grammar)
    for t in tokens:
        if session.dead:
            session.statuses.append(STATUS_DEAD)
            session.tokens.append(t)
            continue
        session.scan(t)
    return session


# ---------------------------------------------------------------------------
# Syntax trees

class TreeNode:
    """Derivation tree node; children are TreeNodes or terminal strings."""

    __slots__ = ("label", "children")

    def __init__(self, label: str, children: tuple):
        self.label = label
        self.children = children

    def leaves(self) -> list[str]:
        out: list[str] = []
        for c in self.children:
            if isinstance(c, str):
                out.append(c)
            else:
                out.extend(c.leaves())
        return out

    def shape(self) -> tuple:
        return (self.label, tuple(c if isinstance(c, str) else c.shape()
                                  for c in self.children))

    def __eq__(self, other) -> bool:
        return isinstance(other, TreeNode) and self.shape() == other.shape()

    def __hash__(self) -> int:
        return hash(self.shape())

    def __repr__(self) -> str:
        inner = " ".join(repr(c) if isinstance(c, str) else str(c)
                         for c in self.children)
        return f"({self.label} {inner})"


def _edge_trees(e: Edge, memo: dict) -> list:
    if e.head.kind is CatKind.TERMINAL:
        return [e.head.name]
    got = memo.get(id(e))
    if got is not None:
        return got
    if e.head.kind is CatKind.PRETERMINAL:
        result = [TreeNode(e.head.name, (e.recognized[0].name,))]
    else:
        result = [TreeNode(e.head.name, tuple(children))
                  for children in _edge_children(e, memo)]
    memo[id(e)] = result
    return result


def _edge_children(e: Edge, memo: dict) -> list:
    if not e.recognized:
        return [[]]
    out = []
    for origin in e.origins:
        tag, a, p = origin
        if tag == "complete":
            for prefix in _edge_children(a, memo):
                for tree in _edge_trees(p, memo):
                    out.append(prefix + [tree])
        else:
            out.extend(_edge_children(a, memo))
    return out


def extract_trees(session: ParseSession) -> list[TreeNode]:
    """All distinct derivation trees of a complete parse."""
    if not session.complete:
        raise ValueError("parse is not complete")
    memo: dict = {}
    seen = set()
    trees = []
    for e in session.chart.complete_edges():
        for t in _edge_trees(e, memo):
            if t not in seen:
                seen.add(t)
                trees.append(t)
    return trees


def derivation_count(session: ParseSession) -> int:
    return len(extract_trees(session)) if session.complete else 0
