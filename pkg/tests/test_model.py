"""Flat feature structures, unification, and the grammar object model."""
import pytest
from hypothesis import given, strategies as st

from codeco.chart import _canon_fs
from codeco.model import (Binding, CatKind, Category, Constant, EMPTY_FS,
                          FeatureStructure, Grammar, Rule, RuleKind, Variable,
                          instantiate_rule, iter_variables_of_rule, merge,
                          substitute, terminal, unifiable, unify, variable)


def fs(**features) -> FeatureStructure:
    """Constants as strings, variables passed through."""
    return FeatureStructure({
        name: Constant(v) if isinstance(v, str) else v
        for name, v in features.items()})


class TestUnify:
    def test_empty_with_empty(self):
        b = unify(EMPTY_FS, EMPTY_FS)
        assert b is not None
        assert len(b) == 0

    def test_variable_bound_to_constant(self):
        n = variable("N")
        b = unify(fs(type="noun", noun=n), fs(type="noun", noun="country"))
        assert b is not None
        assert b.walk(n) == Constant("country")

    def test_constant_clash(self):
        assert unify(fs(type="noun"), fs(type="prop")) is None

    def test_clash_on_one_of_several_features(self):
        assert unify(fs(human="+", gender="masc"), fs(human="-")) is None

    def test_disjoint_features_impose_no_constraint(self):
        b = unify(fs(a="1"), fs(b="2"))
        assert b is not None and len(b) == 0

    def test_extends_given_binding(self):
        x, y = variable("X"), variable("Y")
        b1 = unify(fs(a=x), fs(a="1"))
        b2 = unify(fs(b=x), fs(b=y), b1)
        assert b2 is not None
        assert b2.walk(y) == Constant("1")

    def test_respects_given_binding(self):
        x = variable("X")
        b1 = unify(fs(a=x), fs(a="1"))
        assert unify(fs(b=x), fs(b="2"), b1) is None

    def test_variable_aliasing(self):
        x, y = variable("X"), variable("Y")
        b = unify(fs(a=x, b=x), fs(a=y, b="k"))
        assert b is not None
        assert b.walk(x) == Constant("k")
        assert b.walk(y) == Constant("k")

    def test_same_variable_both_sides(self):
        x = variable("X")
        b = unify(fs(a=x), fs(a=x))
        assert b is not None and len(b) == 0

    def test_unify_with_empty_changes_nothing(self):
        x = variable("X")
        b = unify(fs(a=x, b="2"), EMPTY_FS)
        assert b is not None and len(b) == 0


class TestMergeSubstitute:
    def test_merge_unions_features(self):
        n = variable("N")
        b = unify(fs(type="noun", noun=n), fs(noun="country", human="-"))
        m = merge(fs(type="noun", noun=n), fs(noun="country", human="-"), b)
        assert m == fs(type="noun", noun="country", human="-")

    def test_substitute_walks_chains(self):
        x, y = variable("X"), variable("Y")
        b = unify(fs(a=x), fs(a=y))
        b = unify(fs(b=y), fs(b="1"), b)
        assert substitute(fs(a=x), b) == fs(a="1")

    def test_substitute_idempotent(self):
        x, y = variable("X"), variable("Y")
        b = unify(fs(a=x, b=y), fs(a="1", b=x))
        once = substitute(fs(a=x, b=y), b)
        assert substitute(once, b) == once

    def test_substitute_leaves_unbound_variables(self):
        x = variable("X")
        out = substitute(fs(a=x), Binding())
        assert out.get("a") is x


# -- property tests ----------------------------------------------------------

_NAMES = ("a", "b", "c", "d")
_CONSTS = ("x", "y", "+", "-")


@st.composite
def fs_pairs(draw, n_structs: int = 2):
    """Structures sharing a small variable pool, so unification has both
    variable-variable and variable-constant cases."""
    pool = [variable(f"P{i}") for i in range(3)]
    value = st.one_of(st.sampled_from([Constant(c) for c in _CONSTS]),
                      st.sampled_from(pool))
    structs = []
    for _ in range(n_structs):
        names = draw(st.lists(st.sampled_from(_NAMES), unique=True, max_size=4))
        structs.append(FeatureStructure(
            {n: draw(value) for n in names}))
    return structs


@given(fs_pairs())
def test_unify_commutative(pair):
    a, b = pair
    ab, ba = unify(a, b), unify(b, a)
    assert (ab is None) == (ba is None)
    if ab is not None:
        assert _canon_fs(merge(a, b, ab), {}) == _canon_fs(merge(a, b, ba), {})


@given(fs_pairs(3))
def test_unify_order_independent(triple):
    a, b, c = triple

    def chain(p, q, r):
        m = unify(p, q)
        return None if m is None else unify(merge(p, q, m), r, m)

    assert (chain(a, b, c) is None) == (chain(b, c, a) is None)


@given(fs_pairs())
def test_merge_unifies_with_both_inputs(pair):
    a, b = pair
    binding = unify(a, b)
    if binding is not None:
        m = substitute(merge(a, b, binding), binding)
        assert unifiable(m, a, binding) and unifiable(m, b, binding)


@given(fs_pairs())
def test_unify_with_empty_always_succeeds(pair):
    a, _ = pair
    b = unify(a, EMPTY_FS)
    assert b is not None and len(b) == 0


# -- rules and grammar --------------------------------------------------------

def _lex(name: str, surface: str, **features) -> Rule:
    return Rule(Category(CatKind.PRETERMINAL, name, fs(**features)),
                RuleKind.LEXICAL, (terminal(surface),))


class TestRuleInstantiation:
    def test_fresh_variables_per_instantiation(self):
        x = variable("X")
        rule = Rule(Category(CatKind.NONTERMINAL, "s", fs(a=x)),
                    RuleKind.NORMAL,
                    (Category(CatKind.NONTERMINAL, "t", fs(b=x)),))
        one, two = instantiate_rule(rule), instantiate_rule(rule)
        v1 = list(iter_variables_of_rule(one))
        v2 = list(iter_variables_of_rule(two))
        assert {v.uid for v in v1}.isdisjoint({v.uid for v in v2})
        assert x.uid not in {v.uid for v in v1}

    def test_shared_variable_stays_shared(self):
        x = variable("X")
        rule = Rule(Category(CatKind.NONTERMINAL, "s", fs(a=x)),
                    RuleKind.NORMAL,
                    (Category(CatKind.NONTERMINAL, "t", fs(b=x)),))
        inst = instantiate_rule(rule)
        assert inst.head.fs.get("a") is inst.body[0].fs.get("b")


class TestGrammar:
    def test_tokenize_prefers_longest_surface(self, demo):
        toks = demo.tokenize("every man does not destroy himself .")
        assert toks == ["every", "man", "does not", "destroy", "himself", "."]

    def test_tokenize_unknown_words_fall_back_to_single(self, demo):
        assert demo.tokenize("zzz does yyy") == ["zzz", "does", "yyy"]

    def test_all_surfaces_covers_terminals_and_lexicon(self, demo):
        surfaces = demo.all_surfaces()
        assert {"does not", "himself", ".", "woman", "helps", "X"} <= surfaces

    def test_with_lexical_rule_copy_on_write(self, demo):
        rule = _lex("noun", "country", text="country", human="-")
        bigger = demo.with_lexical_rule(rule)
        assert bigger is not demo
        assert "country" in bigger.lexicon_by_surface
        assert "country" not in demo.lexicon_by_surface

    def test_with_lexical_rule_duplicate_is_noop(self, demo):
        rule = _lex("noun", "country", text="country", human="-")
        bigger = demo.with_lexical_rule(rule)
        assert bigger.with_lexical_rule(rule) is bigger

    def test_alpha_equivalent_duplicate_is_noop(self, demo):
        a = _lex("noun", "country", text="country", gender=variable("G"))
        b = _lex("noun", "country", text="country", gender=variable("H"))
        bigger = demo.with_lexical_rule(a)
        assert bigger.with_lexical_rule(b) is bigger

    def test_with_non_lexical_rule_rejected(self, demo):
        bad = Rule(Category(CatKind.NONTERMINAL, "s"), RuleKind.NORMAL,
                   (terminal("x"),))
        with pytest.raises(ValueError):
            demo.with_lexical_rule(bad)

    def test_start_rules(self, demo):
        assert [r.head.name for r in demo.start_rules()] == ["text", "text"]
