"""Grammar notation and engines for controlled natural languages.

The package provides: the grammar notation with forward/backward references
and scoping (`notation`, `validation`), an extended chart parser over it
(`chart`), exact next-token lookahead for predictive editors (`lookahead`),
a backtracking reference interpreter and exhaustive generator (`reference`),
generation-based grammar testing (`genertest`), and a CLI plus HTTP service
(`cli`, `server`).
"""
from importlib import resources

from .chart import (Chart, Edge, ParseSession, SessionDead, TreeNode,
                    derivation_count, extract_trees, parse,
                    STATUS_COMPLETE, STATUS_DEAD, STATUS_PREFIX_VALID)
from .genertest import (LookaheadAudit, TestReport, ambiguity_check,
                        equivalence_check, lookahead_audit, render_suite,
                        suite_report)
from .lookahead import (AbstractOption, ConcreteOption, abstract_options,
                        concrete_options, next_tokens)
from .model import (Category, CatKind, Constant, FeatureStructure, Grammar,
                    Rule, RuleKind, Variable, unify)
from .notation import (GrammarError, GrammarIssue, parse_grammar,
                       parse_grammar_file, serialize_grammar)
from .reference import GeneratedSentence, accepts, generate
from .validation import ValidationReport, validate_grammar

__version__ = "0.1.0"


def builtin_grammar_path(name: str) -> str:
    """Filesystem path of a grammar bundled with the package ("demo" or
    "intro")."""
    return str(resources.files(__package__) / "grammars" / f"{name}.codeco")


def load_builtin_grammar(name: str) -> Grammar:
    return parse_grammar_file(builtin_grammar_path(name))
