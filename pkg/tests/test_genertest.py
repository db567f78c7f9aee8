"""Grammar testing harness: ambiguity, dual-engine equivalence, lookahead
audit, and the determinism of their reports."""
import json

import pytest

from codeco.chart import Chart, ParseSession, parse
from codeco.genertest import (alive_next_tokens, ambiguity_check,
                              equivalence_check, lookahead_audit,
                              render_suite, suite_report)
from codeco.model import Grammar
from codeco.notation import parse_grammar
from codeco.reference import generate

TOKEN_SPLIT_G = """start: s
s => ['a'] ['b']
s => ['a b']
"""

SHARED_SENTENCE_G = """start: s
s => x
s => y
x => ['a']
y => ['a']
"""


class TestAmbiguityCheck:
    def test_distinct_token_splits_of_one_text_are_duplicates(self):
        g = parse_grammar(TOKEN_SPLIT_G)
        report = ambiguity_check(g, 2)
        assert report.sentence_count == 2
        assert report.duplicate_sentences == [("a", "b"), ("a b",)]
        assert not report.ok

    def test_two_derivations_of_one_sentence_are_flagged(self):
        g = parse_grammar(SHARED_SENTENCE_G)
        report = ambiguity_check(g, 1)
        assert report.sentence_count == 1
        assert report.duplicate_sentences == [("a",)]

    def test_empty_grammar_is_trivially_clean(self):
        report = ambiguity_check(Grammar("s", (), ()), 4)
        assert report.sentence_count == 0
        assert report.ok

    def test_demo_is_unambiguous_at_small_bound(self, demo):
        report = ambiguity_check(demo, 5)
        assert report.ok
        assert report.sentence_count == len(generate(demo, 5))


class TestEquivalenceCheck:
    def test_intro_engines_agree(self, intro):
        report = equivalence_check(intro, 5)
        assert report.engine_disagreements == []
        assert report.sentence_count == len(generate(intro, 5))

    def test_injected_chart_bug_is_caught(self, intro, monkeypatch):
        monkeypatch.setattr(Chart, "resolve", lambda self: 0)
        report = equivalence_check(intro, 4)
        bad = [d for d in report.engine_disagreements
               if d.reference_accepts and not d.chart_accepts]
        assert bad, "disabling reference resolution must surface disagreements"
        assert not report.ok

    def test_disagreement_records_are_json(self, intro, monkeypatch):
        monkeypatch.setattr(Chart, "resolve", lambda self: 0)
        report = equivalence_check(intro, 4)
        lines = report.render_records().splitlines()
        assert json.loads(lines[-1])["summary"]["disagreements"] == len(
            report.engine_disagreements)
        first = json.loads(lines[0])
        assert first["finding"] in ("duplicate", "disagreement")


class TestLookaheadAudit:
    def test_intro_audit_is_clean(self, intro):
        audit = lookahead_audit(intro, 5)
        assert audit.ok
        assert audit.prefix_count > 0

    def test_injected_lookahead_bug_is_caught(self, intro, monkeypatch):
        import codeco.lookahead as la
        real = la.concrete_options

        def lossy(session, options=None):
            return [c for c in real(session, options) if c.surface != "likes"]

        monkeypatch.setattr(la, "concrete_options", lossy)
        audit = lookahead_audit(intro, 4)
        assert any(t == "likes" for _, t in audit.missed)

    def test_alive_next_tokens_matches_actual_scanning(self, intro):
        alphabet = sorted(intro.all_surfaces())
        for sentence in generate(intro, 4):
            session = ParseSession(intro)
            for t in sentence.tokens[:-1]:
                session.scan(t)
                claimed = alive_next_tokens(session)
                for cand in alphabet:
                    cp = session.checkpoint()
                    try:
                        session.scan(cand)
                        alive = not session.dead
                    finally:
                        session.rollback(cp)
                    assert (cand in claimed) == alive, (
                        sentence.tokens, session.tokens, cand)


class TestDeterminism:
    def test_suite_report_is_reproducible(self, intro):
        assert suite_report(intro, 4) == suite_report(intro, 4)

    def test_render_suite_sections(self, intro):
        text = render_suite(ambiguity_check(intro, 4),
                            equivalence_check(intro, 4),
                            lookahead_audit(intro, 4))
        assert text.startswith("== ambiguity ==\nsentences: ")
        assert "== equivalence ==" in text and "== lookahead ==" in text
        assert "elapsed" not in text

    def test_sentence_count_monotone_in_bound(self, intro):
        counts = [ambiguity_check(intro, n).sentence_count for n in (3, 4, 5)]
        assert counts == sorted(counts)
        assert counts[0] < counts[-1]
