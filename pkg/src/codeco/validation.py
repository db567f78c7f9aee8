"""Static grammar checks.

Hard errors make a grammar unusable (the parser refuses it); warnings flag
constructions that are legal but almost certainly unintended, such as
categories that can never produce anything.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import (BackwardRef, CatKind, Category, Grammar, NegativeRef,
                    Rule, RuleKind)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _rule_label(rule: Rule) -> str:
    return f"rule for {rule.head.name!r}"


def validate_grammar(grammar: Grammar) -> ValidationReport:
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    phrase_heads = {r.head.name for r in grammar.rules}
    lexical_heads = {r.head.name for r in grammar.lexicon}

    if grammar.start not in phrase_heads:
        err(f"start category {grammar.start!r} has no rule")
    for name in sorted(phrase_heads & lexical_heads):
        err(f"{name!r} is used both as a phrase category and as a "
            f"pre-terminal; categories must be one or the other")

    for rule in grammar.lexicon:
        if rule.kind is not RuleKind.LEXICAL:
            err(f"{_rule_label(rule)}: non-lexical rule stored in the lexicon")
        if rule.head.kind is not CatKind.PRETERMINAL:
            err(f"{_rule_label(rule)}: lexical rule head must be a pre-terminal")
        if len(rule.body) != 1 or not isinstance(rule.body[0], Category) \
                or rule.body[0].kind is not CatKind.TERMINAL:
            err(f"{_rule_label(rule)}: lexical rules expand to exactly one terminal")

    used_preterminals: set[str] = set()
    used_nonterminals: set[str] = set()
    for rule in grammar.rules:
        if rule.kind is RuleKind.LEXICAL:
            err(f"{_rule_label(rule)}: lexical rule stored with the phrase rules")
        if rule.head.kind is not CatKind.NONTERMINAL:
            err(f"{_rule_label(rule)}: phrase rule head must be a non-terminal")
        # Backward and negative references restrict the antecedents of the
        # token just recognized, so each must directly follow a terminal or
        # a pre-terminal.
        prev = None
        for e in rule.body:
            if isinstance(e, (BackwardRef, NegativeRef)):
                if not (isinstance(prev, Category)
                        and prev.kind in (CatKind.TERMINAL, CatKind.PRETERMINAL)):
                    err(f"{_rule_label(rule)}: backward references must "
                        f"immediately follow a terminal or pre-terminal")
            if isinstance(e, Category):
                if e.kind is CatKind.TERMINAL and e.fs:
                    err(f"{_rule_label(rule)}: terminals cannot carry features")
                elif e.kind is CatKind.PRETERMINAL:
                    used_preterminals.add(e.name)
                elif e.kind is CatKind.NONTERMINAL:
                    used_nonterminals.add(e.name)
            prev = e

    for name in sorted(used_nonterminals - phrase_heads):
        warn(f"category {name!r} is used but has no rule, so it can never "
             f"be completed")
    for name in sorted(used_preterminals - lexical_heads):
        warn(f"pre-terminal {name!r} has no lexicon entries")
    for name in sorted(lexical_heads - used_preterminals):
        warn(f"pre-terminal {name!r} never occurs in a rule body")

    reachable: set[str] = set()
    frontier = [grammar.start]
    while frontier:
        name = frontier.pop()
        if name in reachable:
            continue
        reachable.add(name)
        for rule in grammar.rules_by_head.get(name, ()):
            for e in rule.body:
                if isinstance(e, Category) and e.kind is CatKind.NONTERMINAL \
                        and e.name not in reachable:
                    frontier.append(e.name)
    for name in sorted(phrase_heads - reachable):
        warn(f"category {name!r} is unreachable from the start category")

    return report
