"""Shared fixtures: the bundled grammars, loaded once per test run."""
import pytest

import codeco


@pytest.fixture(scope="session")
def demo() -> codeco.Grammar:
    return codeco.load_builtin_grammar("demo")


@pytest.fixture(scope="session")
def intro() -> codeco.Grammar:
    return codeco.load_builtin_grammar("intro")
