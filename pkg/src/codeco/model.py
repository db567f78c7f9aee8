"""Object model for grammars: values, flat feature structures, categories,
special body elements, rules, and unification with explicit bindings."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

_fresh_uid = itertools.count(1)


def fresh_uid() -> int:
    return next(_fresh_uid)


@dataclass(frozen=True, slots=True)
class Constant:
    """Atomic value; compares by name."""
    name: str

    def __repr__(self) -> str:
        return f"Constant({self.name!r})"


@dataclass(frozen=True, slots=True, eq=False)
class Variable:
    """Logic variable. Identity is the uid; the name is only for display."""
    uid: int
    name: str = "V"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Variable) and other.uid == self.uid

    def __hash__(self) -> int:
        return hash(self.uid)

    def __repr__(self) -> str:
        return f"Variable({self.name}#{self.uid})"


Value = Union[Constant, Variable]


def variable(name: str = "V") -> Variable:
    return Variable(fresh_uid(), name)


class FeatureStructure:
    """Flat feature map: name -> Value. Values are never nested structures.
    Treated as immutable after construction."""

    __slots__ = ("_map",)

    def __init__(self, features: dict[str, Value] | None = None):
        self._map: dict[str, Value] = dict(features) if features else {}

    def get(self, name: str) -> Optional[Value]:
        return self._map.get(name)

    def items(self) -> list[tuple[str, Value]]:
        return sorted(self._map.items())

    def names(self) -> list[str]:
        return sorted(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __bool__(self) -> bool:
        return bool(self._map)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FeatureStructure) and self._map == other._map

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{_show_value(v)}" for n, v in self.items())
        return f"({inner})"


EMPTY_FS = FeatureStructure()


def _show_value(v: Value) -> str:
    if isinstance(v, Variable):
        return f"{v.name}#{v.uid}"
    return v.name


class Binding:
    """Substitution from variable uids to values.

    Immutable from the outside: unify returns a new Binding. Chains are
    acyclic by construction (a variable is only ever bound to a walked
    representative, never to something that leads back to it)."""

    __slots__ = ("_map",)

    def __init__(self, mapping: dict[int, Value] | None = None):
        self._map: dict[int, Value] = mapping if mapping is not None else {}

    def walk(self, v: Value) -> Value:
        while isinstance(v, Variable):
            nxt = self._map.get(v.uid)
            if nxt is None:
                return v
            v = nxt
        return v

    def __len__(self) -> int:
        return len(self._map)

    def copy_map(self) -> dict[int, Value]:
        return dict(self._map)

    def __repr__(self) -> str:
        inner = ", ".join(f"#{k}->{_show_value(v)}" for k, v in sorted(self._map.items()))
        return f"Binding({inner})"


EMPTY_BINDING = Binding()


def _unify_values(x: Value, y: Value, m: dict[int, Value]) -> bool:
    while isinstance(x, Variable) and x.uid in m:
        x = m[x.uid]
    while isinstance(y, Variable) and y.uid in m:
        y = m[y.uid]
    if isinstance(x, Variable):
        if isinstance(y, Variable) and y.uid == x.uid:
            return True
        m[x.uid] = y
        return True
    if isinstance(y, Variable):
        m[y.uid] = x
        return True
    return x.name == y.name


def unify(a: FeatureStructure, b: FeatureStructure,
          binding: Binding | None = None) -> Optional[Binding]:
    """Unify two flat structures. A feature present in only one side imposes
    no constraint. Returns an extended Binding, or None on clash."""
    m = binding.copy_map() if binding is not None else {}
    amap = a._map
    bmap = b._map
    for name, va in amap.items():
        vb = bmap.get(name)
        if vb is None:
            continue
        if not _unify_values(va, vb, m):
            return None
    return Binding(m)


def unifiable(a: FeatureStructure, b: FeatureStructure,
              binding: Binding | None = None) -> bool:
    return unify(a, b, binding) is not None


def substitute(fs: FeatureStructure, binding: Binding) -> FeatureStructure:
    if not fs or not len(binding):
        return fs
    return FeatureStructure({n: binding.walk(v) for n, v in fs._map.items()})


def merge(a: FeatureStructure, b: FeatureStructure,
          binding: Binding) -> FeatureStructure:
    """Union of two unified structures under a binding: all features of
    both, values walked through the substitution."""
    out: dict[str, Value] = {}
    for n, v in a._map.items():
        out[n] = binding.walk(v)
    for n, v in b._map.items():
        if n not in out:
            out[n] = binding.walk(v)
    return FeatureStructure(out)


class CatKind(Enum):
    TERMINAL = "terminal"
    PRETERMINAL = "preterminal"
    NONTERMINAL = "nonterminal"


@dataclass(frozen=True, slots=True)
class Category:
    """Grammar category. Terminals carry the surface string as their name and
    always have an empty feature structure."""
    kind: CatKind
    name: str
    fs: FeatureStructure = EMPTY_FS

    def __repr__(self) -> str:
        if self.kind is CatKind.TERMINAL:
            return f"['{self.name}']"
        marker = "$" if self.kind is CatKind.PRETERMINAL else ""
        return f"{marker}{self.name}{self.fs if self.fs else ''}"


def terminal(surface: str) -> Category:
    return Category(CatKind.TERMINAL, surface)


@dataclass(frozen=True, slots=True)
class ForwardRef:
    """Forward reference: announces an antecedent. Strong ones survive the
    closing of the scope they sit in."""
    fs: FeatureStructure
    strong: bool = False

    def __repr__(self) -> str:
        return f"{'>>' if self.strong else '>'}{self.fs}"


@dataclass(frozen=True, slots=True)
class ScopeOpener:
    def __repr__(self) -> str:
        return "//"


@dataclass(frozen=True, slots=True)
class PositionOp:
    """Binds its variable to the identifier of the position at which it is
    resolved."""
    var: Variable

    def __repr__(self) -> str:
        return f"#{self.var.name}#{self.var.uid}"


@dataclass(frozen=True, slots=True)
class BackwardRef:
    """Complex backward reference: succeeds on an accessible antecedent that
    unifies with some positive structure and with no negative one. A plain
    backward reference is the one-positive/no-negative case."""
    positives: tuple[FeatureStructure, ...]
    negatives: tuple[FeatureStructure, ...] = ()

    def __repr__(self) -> str:
        pos = " ".join(f"+{p}" for p in self.positives)
        neg = " ".join(f"-{n}" for n in self.negatives)
        return f"<({pos}{' ' + neg if neg else ''})"


@dataclass(frozen=True, slots=True)
class NegativeRef:
    """Succeeds only if no accessible antecedent unifies with its structure."""
    fs: FeatureStructure

    def __repr__(self) -> str:
        return f"/<{self.fs}"


SpecialElement = Union[ForwardRef, ScopeOpener, PositionOp, BackwardRef, NegativeRef]
BodyElement = Union[Category, ForwardRef, ScopeOpener, PositionOp, BackwardRef, NegativeRef]

SCOPE_MARK = ScopeOpener()


@dataclass(frozen=True, slots=True)
class Antecedent:
    """Entry of an antecedent list: a registered forward reference."""
    fs: FeatureStructure
    strong: bool = False

    def __repr__(self) -> str:
        return f"{'>>' if self.strong else '>'}{self.fs}"


AntecedentItem = Union[Antecedent, ScopeOpener]


class RuleKind(Enum):
    NORMAL = "=>"
    SCOPE_CLOSING = "~>"
    LEXICAL = "->"


@dataclass(frozen=True, slots=True)
class Rule:
    head: Category
    kind: RuleKind
    body: tuple[BodyElement, ...]

    def __repr__(self) -> str:
        parts = " ".join(repr(e) for e in self.body)
        return f"{self.head!r} {self.kind.value} {parts}"

    def variables(self) -> list[Variable]:
        seen: dict[int, Variable] = {}
        for v in iter_variables_of_rule(self):
            seen.setdefault(v.uid, v)
        return list(seen.values())


def iter_variables_of_fs(fs: FeatureStructure) -> Iterator[Variable]:
    for _, v in fs.items():
        if isinstance(v, Variable):
            yield v


def iter_variables_of_element(e: BodyElement) -> Iterator[Variable]:
    if isinstance(e, Category):
        yield from iter_variables_of_fs(e.fs)
    elif isinstance(e, ForwardRef):
        yield from iter_variables_of_fs(e.fs)
    elif isinstance(e, PositionOp):
        yield e.var
    elif isinstance(e, BackwardRef):
        for p in e.positives:
            yield from iter_variables_of_fs(p)
        for n in e.negatives:
            yield from iter_variables_of_fs(n)
    elif isinstance(e, NegativeRef):
        yield from iter_variables_of_fs(e.fs)


def iter_variables_of_rule(rule: Rule) -> Iterator[Variable]:
    yield from iter_variables_of_fs(rule.head.fs)
    for e in rule.body:
        yield from iter_variables_of_element(e)


def rename_fs(fs: FeatureStructure, mapping: dict[int, Variable]) -> FeatureStructure:
    if not fs:
        return fs
    out: dict[str, Value] = {}
    changed = False
    for n, v in fs._map.items():
        if isinstance(v, Variable):
            nv = mapping.get(v.uid)
            if nv is not None:
                out[n] = nv
                changed = True
                continue
        out[n] = v
    return FeatureStructure(out) if changed else fs


def rename_element(e: BodyElement, mapping: dict[int, Variable]) -> BodyElement:
    if isinstance(e, Category):
        fs = rename_fs(e.fs, mapping)
        return e if fs is e.fs else Category(e.kind, e.name, fs)
    if isinstance(e, ForwardRef):
        fs = rename_fs(e.fs, mapping)
        return e if fs is e.fs else ForwardRef(fs, e.strong)
    if isinstance(e, PositionOp):
        nv = mapping.get(e.var.uid)
        return e if nv is None else PositionOp(nv)
    if isinstance(e, BackwardRef):
        return BackwardRef(tuple(rename_fs(p, mapping) for p in e.positives),
                           tuple(rename_fs(n, mapping) for n in e.negatives))
    if isinstance(e, NegativeRef):
        fs = rename_fs(e.fs, mapping)
        return e if fs is e.fs else NegativeRef(fs)
    return e  # ScopeOpener


def instantiate_rule(rule: Rule) -> Rule:
    """Copy a rule with fresh variables, keeping display names."""
    mapping = {v.uid: Variable(fresh_uid(), v.name) for v in rule.variables()}
    if not mapping:
        return rule
    head = Category(rule.head.kind, rule.head.name, rename_fs(rule.head.fs, mapping))
    return Rule(head, rule.kind, tuple(rename_element(e, mapping) for e in rule.body))


def substitute_element(e: BodyElement, binding: Binding) -> BodyElement:
    if not len(binding):
        return e
    if isinstance(e, Category):
        return Category(e.kind, e.name, substitute(e.fs, binding))
    if isinstance(e, ForwardRef):
        return ForwardRef(substitute(e.fs, binding), e.strong)
    if isinstance(e, PositionOp):
        v = binding.walk(e.var)
        # a bound position operator only occurs on the recognized side
        return PositionOp(v) if isinstance(v, Variable) else ResolvedPosition(v)
    if isinstance(e, BackwardRef):
        return BackwardRef(tuple(substitute(p, binding) for p in e.positives),
                           tuple(substitute(n, binding) for n in e.negatives))
    if isinstance(e, NegativeRef):
        return NegativeRef(substitute(e.fs, binding))
    return e


@dataclass(frozen=True, slots=True)
class ResolvedPosition:
    """A position operator whose variable ended up bound to a position id."""
    value: Value

    def __repr__(self) -> str:
        return f"#{_show_value(self.value)}"


def substitute_antecedent(item: AntecedentItem, binding: Binding) -> AntecedentItem:
    if isinstance(item, Antecedent):
        return Antecedent(substitute(item.fs, binding), item.strong)
    return item


class Grammar:
    """A parsed grammar: start category name, phrase rules, lexicon.

    Immutable; lexicon extension returns a new Grammar sharing phrase rules."""

    __slots__ = ("start", "rules", "lexicon", "rules_by_head", "lexicon_by_surface",
                 "lexicon_by_name", "_surface_token_lengths")

    def __init__(self, start: str, rules: tuple[Rule, ...], lexicon: tuple[Rule, ...]):
        self.start = start
        self.rules = rules
        self.lexicon = lexicon
        by_head: dict[str, list[Rule]] = {}
        for r in rules:
            by_head.setdefault(r.head.name, []).append(r)
        self.rules_by_head = by_head
        by_surface: dict[str, list[Rule]] = {}
        by_name: dict[str, list[Rule]] = {}
        for r in lexicon:
            by_surface.setdefault(r.body[0].name, []).append(r)
            by_name.setdefault(r.head.name, []).append(r)
        self.lexicon_by_surface = by_surface
        self.lexicon_by_name = by_name
        lengths = {len(s.split(" ")) for s in self.all_surfaces()}
        self._surface_token_lengths = sorted(lengths, reverse=True)

    def all_surfaces(self) -> set[str]:
        """Every surface the grammar can consume: terminal names in rule
        bodies plus lexicon surfaces."""
        out = set(self.lexicon_by_surface)
        for r in self.rules:
            for e in r.body:
                if isinstance(e, Category) and e.kind is CatKind.TERMINAL:
                    out.add(e.name)
        return out

    def has_lexical_rule(self, rule: Rule) -> bool:
        from .chart import alpha_equivalent_rules  # local import to avoid cycle
        return any(alpha_equivalent_rules(rule, r)
                   for r in self.lexicon_by_surface.get(rule.body[0].name, ()))

    def with_lexical_rule(self, rule: Rule) -> "Grammar":
        """Copy-on-write lexicon extension. Adding a duplicate returns self."""
        if rule.kind is not RuleKind.LEXICAL:
            raise ValueError("not a lexical rule: head must be a pre-terminal "
                             "with a single terminal body")
        if (rule.head.kind is not CatKind.PRETERMINAL or len(rule.body) != 1
                or not isinstance(rule.body[0], Category)
                or rule.body[0].kind is not CatKind.TERMINAL):
            raise ValueError("not a lexical rule: head must be a pre-terminal "
                             "with a single terminal body")
        if self.has_lexical_rule(rule):
            return self
        return Grammar(self.start, self.rules, self.lexicon + (rule,))

    def start_rules(self) -> list[Rule]:
        return self.rules_by_head.get(self.start, [])

    def tokenize(self, text: str) -> list[str]:
        """Greedy longest-match split of a sentence string into grammar
        tokens, honoring multi-word surfaces like 'does not'."""
        words = text.split()
        surfaces = self.all_surfaces()
        out: list[str] = []
        i = 0
        while i < len(words):
            for n in self._surface_token_lengths:
                if n > 1 and i + n <= len(words):
                    cand = " ".join(words[i:i + n])
                    if cand in surfaces:
                        out.append(cand)
                        i += n
                        break
            else:
                out.append(words[i])
                i += 1
        return out
