"""Lookahead: which tokens can extend the current prefix.

Options are read off the chart without modifying it. Every active edge at
the newest position whose next expected element is a terminal or
pre-terminal category contributes options, refined by the reference taking
scope over that category:

* category immediately followed by a backward reference: one option per
  accessible antecedent per positive structure it unifies with, with an
  exception for every negative structure unifiable with that same
  antecedent;
* category immediately followed by a negative reference: one option whose
  exceptions come from the antecedents unifiable with the reference;
* category, then one or more terminal/pre-terminal categories, then a
  backward reference: like the first case but exception-free, since the
  reference does not restrict this token directly;
* anything else: the category itself, no exceptions.

A pattern that matches but yields no option offers nothing; there is no
falling back to the unrestricted case, which is what makes, say, a
reflexive pronoun disappear when no suitable antecedent is in scope.

Abstract options are category/exception pairs; concrete options are words.
A terminal is offered only by an exception-free option. A word from the
lexicon is offered if its entry's head unifies with an option's category
and with none of that option's exceptions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .chart import Edge, ParseSession
from .model import (Antecedent, BackwardRef, Binding, CatKind, Category,
                    FeatureStructure, NegativeRef, iter_variables_of_fs,
                    substitute, unify, unifiable)
from .notation import _show_fs


@dataclass(frozen=True)
class AbstractOption:
    """A category that may come next, minus exceptional instances of it."""
    category: Category
    exceptions: tuple[Category, ...] = ()

    def render(self) -> tuple[str, list[str]]:
        names = _display_names([self.category.fs]
                               + [x.fs for x in self.exceptions])
        return (_show_cat(self.category, names),
                [_show_cat(x, names) for x in self.exceptions])

    def __repr__(self) -> str:
        cat, exc = self.render()
        return f"{cat} \\ {{{', '.join(exc)}}}" if exc else cat


@dataclass(frozen=True)
class ConcreteOption:
    """A word that may come next; source is the pre-terminal it belongs to,
    or None for a word fixed by the rule itself."""
    surface: str
    source: Optional[str] = None

    def __repr__(self) -> str:
        return self.surface if self.source is None else f"{self.surface}:{self.source}"


def _display_names(fss: Iterable[FeatureStructure]) -> dict[int, str]:
    names: dict[int, str] = {}
    used: set[str] = set()
    for fs in fss:
        for v in iter_variables_of_fs(fs):
            if v.uid in names:
                continue
            base = v.name if v.name and v.name[0].isupper() else "V"
            cand = base
            n = 2
            while cand in used:
                cand = f"{base}{n}"
                n += 1
            names[v.uid] = cand
            used.add(cand)
    return names


def _show_cat(cat: Category, names: dict[int, str]) -> str:
    if cat.kind is CatKind.TERMINAL:
        return f"['{cat.name}']"
    mark = "$" if cat.kind is CatKind.PRETERMINAL else ""
    fs = _show_fs(cat.fs, names) if cat.fs else ""
    return f"{mark}{cat.name}{fs}"


def _refine(cat: Category, fs_a: FeatureStructure,
            fs_b: FeatureStructure) -> Optional[Category]:
    """cat with the bindings from unifying fs_a with fs_b, or None."""
    binding = unify(fs_a, fs_b)
    if binding is None:
        return None
    return Category(cat.kind, cat.name, substitute(cat.fs, binding))


def _edge_options(e: Edge) -> Iterable[AbstractOption]:
    cat = e.remaining[0]
    rest = e.remaining[1:]
    antecedents = [i for i in e.external + e.internal
                   if isinstance(i, Antecedent)]
    nxt = rest[0] if rest else None
    if isinstance(nxt, BackwardRef):
        for ant in antecedents:
            exceptions = None
            for pos_fs in nxt.positives:
                refined = _refine(cat, ant.fs, pos_fs)
                if refined is None:
                    continue
                if exceptions is None:
                    exceptions = tuple(
                        x for x in (_refine(cat, ant.fs, neg_fs)
                                    for neg_fs in nxt.negatives)
                        if x is not None)
                yield AbstractOption(refined, exceptions)
        return
    if isinstance(nxt, NegativeRef):
        exceptions = tuple(
            x for x in (_refine(cat, nxt.fs, ant.fs) for ant in antecedents)
            if x is not None)
        yield AbstractOption(cat, exceptions)
        return
    # a backward reference separated from cat only by terminal or
    # pre-terminal categories restricts cat without exceptions
    i = 0
    while i < len(rest) and isinstance(rest[i], Category) \
            and rest[i].kind is not CatKind.NONTERMINAL:
        i += 1
    if i > 0 and i < len(rest) and isinstance(rest[i], BackwardRef):
        ref = rest[i]
        for ant in antecedents:
            for pos_fs in ref.positives:
                refined = _refine(cat, ant.fs, pos_fs)
                if refined is not None:
                    yield AbstractOption(refined)
        return
    yield AbstractOption(cat)


def _option_key(opt: AbstractOption) -> tuple:
    from .chart import _canon_element
    vmap: dict[int, int] = {}
    return (_canon_element(opt.category, vmap),
            tuple(sorted(_canon_element(x, {}) for x in opt.exceptions)))


def abstract_options(session: ParseSession) -> list[AbstractOption]:
    """All abstract options at the end of the current prefix, deduplicated
    up to variable renaming and sorted by display form."""
    if session.dead:
        return []
    seen: set[tuple] = set()
    out: list[AbstractOption] = []
    for e in session.chart.frontier_expectations():
        for opt in _edge_options(e):
            key = _option_key(opt)
            if key not in seen:
                seen.add(key)
                out.append(opt)
    out.sort(key=lambda o: o.render())
    return out


def concrete_options(session: ParseSession,
                     options: Optional[list[AbstractOption]] = None
                     ) -> list[ConcreteOption]:
    """Words that can be scanned next, derived from the abstract options and
    the current lexicon."""
    if options is None:
        options = abstract_options(session)
    lexicon = session.grammar.lexicon_by_name
    seen: set[tuple] = set()
    out: list[ConcreteOption] = []

    def offer(surface: str, source: Optional[str]) -> None:
        if (surface, source) not in seen:
            seen.add((surface, source))
            out.append(ConcreteOption(surface, source))

    for opt in options:
        cat = opt.category
        if cat.kind is CatKind.TERMINAL:
            if not opt.exceptions:
                offer(cat.name, None)
            continue
        for lex in lexicon.get(cat.name, ()):
            if not unifiable(lex.head.fs, cat.fs):
                continue
            if any(unifiable(lex.head.fs, x.fs) for x in opt.exceptions):
                continue
            offer(lex.body[0].name, cat.name)
    out.sort(key=lambda c: (c.source or "", c.surface))
    return out


def next_tokens(session: ParseSession) -> tuple[list[AbstractOption], list[ConcreteOption]]:
    options = abstract_options(session)
    return options, concrete_options(session, options)


def lookahead_sequences(session: ParseSession, depth: int) -> list[tuple[str, ...]]:
    """Token sequences of up to `depth` tokens that can extend the prefix,
    found by applying the one-step lookahead repeatedly. Each candidate
    extension is tried on the live session and rolled back, so the chart is
    left as found. Intended for small depths; the candidate space grows
    fast."""
    out: list[tuple[str, ...]] = []

    def walk(prefix: tuple[str, ...]) -> None:
        for c in concrete_options(session):
            ext = prefix + (c.surface,)
            out.append(ext)
            if len(ext) < depth:
                cp = session.checkpoint()
                session.scan(c.surface)
                walk(ext)
                session.rollback(cp)

    walk(())
    seen: set[tuple[str, ...]] = set()
    unique = [s for s in out if not (s in seen or seen.add(s))]
    unique.sort()
    return unique
