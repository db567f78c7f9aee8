"""Grammar notation: parsing, error reporting, serialization round-trips."""
import pytest
from hypothesis import given, strategies as st

from codeco.chart import alpha_equivalent_rules
from codeco.model import (BackwardRef, CatKind, Category, Constant,
                          FeatureStructure, ForwardRef, NegativeRef,
                          PositionOp, Rule, RuleKind, ScopeOpener, Variable,
                          fresh_uid, terminal)
from codeco.notation import (GrammarError, parse_grammar, serialize_grammar,
                             serialize_rule)


def parse_one(rule_text: str, start: str = "s") -> Rule:
    g = parse_grammar(f"start: {start}\n{rule_text}\n")
    rules = g.rules + g.lexicon
    assert len(rules) == 1
    return rules[0]


class TestRuleForms:
    def test_scope_closing_rule(self):
        r = parse_one("vp(num:Num) ~> v(neg:+, num:Num, type:tr) np(case:acc)",
                      start="vp")
        assert r.kind is RuleKind.SCOPE_CLOSING
        assert r.head.name == "vp"
        assert len(r.body) == 2
        assert all(isinstance(e, Category) and e.kind is CatKind.NONTERMINAL
                   for e in r.body)
        assert r.body[0].fs.get("neg") == Constant("+")
        assert r.body[0].fs.get("type") == Constant("tr")
        assert r.head.fs.get("num") is r.body[0].fs.get("num")

    def test_terminal_followed_by_complex_backward_ref(self):
        r = parse_one(
            "ref(subj:Subj) => ['he'] <(+(human:+, gender:masc) -(id:Subj))",
            start="ref")
        assert r.kind is RuleKind.NORMAL
        assert r.body[0] == terminal("he")
        ref = r.body[1]
        assert isinstance(ref, BackwardRef)
        assert len(ref.positives) == 1 and len(ref.negatives) == 1
        assert ref.positives[0].get("gender") == Constant("masc")
        assert ref.negatives[0].get("id") is r.head.fs.get("subj")

    def test_simple_backward_ref_is_one_positive(self):
        r = parse_one("s => ['x'] <(id:1)")
        ref = r.body[1]
        assert isinstance(ref, BackwardRef)
        assert ref.positives == (FeatureStructure({"id": Constant("1")}),)
        assert ref.negatives == ()

    def test_multiple_positives_and_negatives(self):
        r = parse_one("s => ['x'] <(+(a:1) +(b:2) -(c:3) -(d:4))")
        ref = r.body[1]
        assert len(ref.positives) == 2 and len(ref.negatives) == 2

    def test_negative_backward_ref(self):
        r = parse_one("s => ['x'] /<(type:var, var:Vr)")
        ref = r.body[1]
        assert isinstance(ref, NegativeRef)
        assert ref.fs.get("type") == Constant("var")
        assert isinstance(ref.fs.get("var"), Variable)

    def test_forward_refs_and_opener_and_position(self):
        r = parse_one("s => // #Id ['x'] >(id:Id) >>(t:prop)")
        assert isinstance(r.body[0], ScopeOpener)
        assert isinstance(r.body[1], PositionOp)
        fwd, strong = r.body[3], r.body[4]
        assert isinstance(fwd, ForwardRef) and not fwd.strong
        assert isinstance(strong, ForwardRef) and strong.strong
        assert fwd.fs.get("id") is r.body[1].var

    def test_lexical_rule(self):
        g = parse_grammar("start: s\ns => $noun\n"
                          "noun(text:woman, human:+) -> ['woman']\n")
        r = g.lexicon[0]
        assert r.kind is RuleKind.LEXICAL
        assert r.head.kind is CatKind.PRETERMINAL
        assert r.body == (terminal("woman"),)

    def test_multi_word_terminal(self):
        r = parse_one("s => ['does not'] $verb")
        assert r.body[0] == terminal("does not")

    def test_quoted_value_is_constant(self):
        g = parse_grammar("start: s\ns => $var\nvar(text:'X') -> ['X']\n")
        assert g.lexicon[0].head.fs.get("text") == Constant("X")

    def test_capitalized_value_is_variable(self):
        r = parse_one("s => t(a:Foo, b:Foo, c:Other)")
        a, b, c = (r.body[0].fs.get(n) for n in "abc")
        assert isinstance(a, Variable) and a is b
        assert isinstance(c, Variable) and c is not a

    def test_variables_not_shared_across_rules(self):
        g = parse_grammar("start: s\ns => t(a:X)\nt(a:X) => ['x']\n")
        assert g.rules[0].body[0].fs.get("a") is not g.rules[1].head.fs.get("a")

    def test_comments_blanks_and_continuation(self):
        g = parse_grammar(
            "# leading comment\n"
            "start: s\n"
            "\n"
            "s => ['a'] \\\n"
            "    ['b']\n"
            "# trailing comment\n")
        assert g.rules[0].body == (terminal("a"), terminal("b"))


class TestErrors:
    def assert_error(self, text: str, fragment: str):
        with pytest.raises(GrammarError) as exc:
            parse_grammar(text)
        assert fragment in str(exc.value)

    def test_backward_ref_at_body_start(self):
        self.assert_error("start: np\nnp => <(type:noun) $noun(text:N)\n",
                          "immediately follow")

    def test_backward_ref_after_nonterminal(self):
        self.assert_error("start: s\ns => t <(a:1)\nt => ['x']\n",
                          "immediately follow")

    def test_negative_ref_after_forward_ref(self):
        self.assert_error("start: s\ns => ['x'] >(a:1) /<(a:1)\n",
                          "immediately follow")

    def test_missing_start_declaration(self):
        self.assert_error("s => ['a']\n", "start")

    def test_empty_text(self):
        self.assert_error("", "start")

    def test_start_without_rule(self):
        self.assert_error("start: s\nt => ['a']\n", "no rule")

    def test_unexpected_character_position(self):
        with pytest.raises(GrammarError) as exc:
            parse_grammar("start: s\ns => ['a'] ^\n")
        issue = exc.value.issues[0]
        assert issue.line == 2 and issue.column == 12

    def test_duplicate_feature_name(self):
        self.assert_error("start: s\ns => t(a:1, a:2)\nt => ['x']\n",
                          "duplicate feature")

    def test_complex_ref_without_positive(self):
        self.assert_error("start: s\ns => ['x'] <(-(a:1))\n", "positive")

    def test_badly_spaced_terminal(self):
        self.assert_error("start: s\ns => ['a  b']\n", "single-spaced")

    def test_lowercase_position_operator(self):
        self.assert_error("start: s\ns => #id ['x']\n", "variable")

    def test_error_collects_multiple_issues(self):
        with pytest.raises(GrammarError) as exc:
            parse_grammar("start: s\ns => (\ns => )\ns => ['a']\n")
        assert len(exc.value.issues) >= 2


class TestRoundTrip:
    def assert_round_trip(self, grammar):
        text = serialize_grammar(grammar)
        again = parse_grammar(text)
        assert again.start == grammar.start
        assert len(again.rules) == len(grammar.rules)
        assert len(again.lexicon) == len(grammar.lexicon)
        for a, b in zip(grammar.rules + grammar.lexicon,
                        again.rules + again.lexicon):
            assert alpha_equivalent_rules(a, b), serialize_rule(a)
        assert serialize_grammar(again) == text

    def test_demo_round_trip(self, demo):
        self.assert_round_trip(demo)

    def test_intro_round_trip(self, intro):
        self.assert_round_trip(intro)


# -- generated-grammar round-trip property -------------------------------------

_FEATURES = ("a", "b", "num")
_CONSTS = ("x", "tr", "+", "-", "Cap ital")


@st.composite
def _fs(draw, pool):
    value = st.one_of(st.sampled_from([Constant(c) for c in _CONSTS]),
                      st.sampled_from(pool))
    names = draw(st.lists(st.sampled_from(_FEATURES), unique=True, max_size=3))
    return FeatureStructure({n: draw(value) for n in names})


@st.composite
def _body(draw, pool):
    elements: list = []
    refs = st.sampled_from(("simple", "complex", "negative", "none"))
    for _ in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(
            ("nonterminal", "preterminal", "terminal", "fwd", "opener", "pos")))
        if kind == "nonterminal":
            elements.append(Category(CatKind.NONTERMINAL, draw(
                st.sampled_from(("s", "t", "u"))), draw(_fs(pool))))
        elif kind == "preterminal":
            elements.append(Category(CatKind.PRETERMINAL, draw(
                st.sampled_from(("p", "q"))), draw(_fs(pool))))
        elif kind == "terminal":
            elements.append(terminal(draw(st.sampled_from(
                ("w1", "w2", "do it")))))
            ref = draw(refs)
            if ref == "simple":
                elements.append(BackwardRef((draw(_fs(pool)),), ()))
            elif ref == "complex":
                elements.append(BackwardRef(
                    tuple(draw(st.lists(_fs(pool), min_size=1, max_size=2))),
                    tuple(draw(st.lists(_fs(pool), max_size=2)))))
            elif ref == "negative":
                elements.append(NegativeRef(draw(_fs(pool))))
        elif kind == "fwd":
            elements.append(ForwardRef(draw(_fs(pool)),
                                       strong=draw(st.booleans())))
        elif kind == "opener":
            elements.append(ScopeOpener())
        else:
            elements.append(PositionOp(draw(st.sampled_from(pool))))
    return tuple(elements)


def _pool():
    return [Variable(fresh_uid(), n) for n in ("X", "Y", "Num")]


@st.composite
def grammars(draw):
    rules = []
    for i in range(draw(st.integers(1, 4))):
        pool = _pool()
        head_name = "s" if i == 0 else draw(st.sampled_from(("s", "t", "u")))
        rules.append(Rule(
            Category(CatKind.NONTERMINAL, head_name, draw(_fs(pool))),
            draw(st.sampled_from((RuleKind.NORMAL, RuleKind.SCOPE_CLOSING))),
            draw(_body(pool))))
    lexicon = []
    for name, surface in (("p", "w1"), ("q", "do it")):
        pool = _pool()
        lexicon.append(Rule(Category(CatKind.PRETERMINAL, name, draw(_fs(pool))),
                            RuleKind.LEXICAL, (terminal(surface),)))
    return Grammar("s", tuple(rules), tuple(lexicon))


from codeco.model import Grammar  # noqa: E402  (used by the strategy above)


@given(grammars())
def test_round_trip_alpha_equivalent(grammar):
    text = serialize_grammar(grammar)
    again = parse_grammar(text)
    assert again.start == grammar.start
    for a, b in zip(grammar.rules + grammar.lexicon,
                    again.rules + again.lexicon):
        assert alpha_equivalent_rules(a, b), text
    assert serialize_grammar(again) == text
