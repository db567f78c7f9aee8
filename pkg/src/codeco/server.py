"""HTTP service for predictive editors.

Sessions hold one incremental parse each. Tokens arrive as grammar surface
strings; because surfaces may span several words ("does not"), a posted
word that is a proper prefix of such a surface is buffered rather than
scanned, and the scan happens once the buffered words complete a known
surface. Posting something that neither completes nor extends any surface
scans it as-is, which kills the prefix in the usual way.

The lexicon can grow while sessions are open: grammars are swapped
copy-on-write and every request re-reads the store, so existing sessions
see new words in their options immediately.
"""
from __future__ import annotations

import re
import threading
import time
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .chart import ParseSession, extract_trees, TreeNode
from .lookahead import AbstractOption, _display_names, next_tokens
from .model import (Category, CatKind, Constant, FeatureStructure, Grammar,
                    Rule, RuleKind, Value, Variable, terminal, variable)

_NAME_RE = re.compile(r"[a-z_][A-Za-z0-9_]*\Z")
_VARIABLE_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


class SessionCreate(BaseModel):
    grammarId: str


class TokenIn(BaseModel):
    token: str


class LexiconIn(BaseModel):
    preterminal: str
    features: dict[str, str] = {}
    surface: str


class _Session:
    def __init__(self, grammar_id: str, grammar: Grammar):
        self.id = uuid.uuid4().hex[:12]
        self.grammar_id = grammar_id
        self.parse = ParseSession(grammar)
        self.pending: list[str] = []
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


def _value_json(value: Value, names: dict[int, str]) -> str:
    """Feature values in grammar-file notation: variables bare, constants
    quoted whenever the bare spelling would read as a variable."""
    if isinstance(value, Variable):
        return names[value.uid]
    if _VARIABLE_RE.match(value.name):
        return f"'{value.name}'"
    return value.name


def _fs_json(fs: FeatureStructure, names: dict[int, str]) -> dict[str, str]:
    return {n: _value_json(v, names) for n, v in fs.items()}


def _abstract_json(opt: AbstractOption) -> dict:
    names = _display_names([opt.category.fs] + [x.fs for x in opt.exceptions])
    return {"category": opt.category.name,
            "kind": opt.category.kind.value,
            "features": _fs_json(opt.category.fs, names),
            "exceptions": [_fs_json(x.fs, names) for x in opt.exceptions]}


def _tree_json(tree: TreeNode) -> dict:
    return {"label": tree.label,
            "children": [c if isinstance(c, str) else _tree_json(c)
                         for c in tree.children]}


def _word_prefixes(grammar: Grammar) -> set[tuple[str, ...]]:
    """All proper prefixes, as word tuples, of multi-word surfaces."""
    out: set[tuple[str, ...]] = set()
    for surface in grammar.all_surfaces():
        words = surface.split(" ")
        for i in range(1, len(words)):
            out.add(tuple(words[:i]))
    return out


def create_app(grammars: dict[str, Grammar],
               idle_seconds: float = 3600.0) -> FastAPI:
    app = FastAPI(title="codeco")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store: dict[str, Grammar] = dict(grammars)
    sessions: dict[str, _Session] = {}
    store_lock = threading.Lock()

    def purge() -> None:
        now = time.monotonic()
        with store_lock:
            for sid in [sid for sid, s in sessions.items()
                        if now - s.last_access > idle_seconds]:
                del sessions[sid]

    def get_session(sid: str) -> _Session:
        purge()
        with store_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        session.last_access = time.monotonic()
        # pick up copy-on-write lexicon updates
        session.parse.grammar = store[session.grammar_id]
        return session

    def status_json(session: _Session) -> dict:
        return {"status": session.parse.status,
                "tokens": list(session.parse.tokens),
                "pending": list(session.pending)}

    @app.get("/grammars")
    def list_grammars() -> dict:
        return {"grammars": [{"id": gid, "start": g.start}
                             for gid, g in sorted(store.items())]}

    @app.post("/sessions")
    def create_session(body: SessionCreate) -> dict:
        purge()
        grammar = store.get(body.grammarId)
        if grammar is None:
            raise HTTPException(404, f"unknown grammar {body.grammarId!r}")
        session = _Session(body.grammarId, grammar)
        with store_lock:
            sessions[session.id] = session
        return {"sessionId": session.id, **status_json(session)}

    @app.post("/sessions/{sid}/tokens")
    def add_token(sid: str, body: TokenIn) -> dict:
        session = get_session(sid)
        with session.lock:
            if session.parse.dead:
                raise HTTPException(409, "session prefix is dead")
            grammar = session.parse.grammar
            words = session.pending + [body.token]
            joined = " ".join(words)
            if joined in grammar.all_surfaces():
                session.pending = []
                session.parse.scan(joined)
            elif tuple(joined.split(" ")) in _word_prefixes(grammar):
                session.pending = joined.split(" ")
            else:
                session.pending = []
                session.parse.scan(joined)
            return status_json(session)

    @app.delete("/sessions/{sid}/tokens/last")
    def delete_last(sid: str) -> dict:
        session = get_session(sid)
        with session.lock:
            if session.pending:
                session.pending.pop()
            elif session.parse.tokens:
                kept = session.parse.tokens[:-1]
                session.parse = ParseSession(session.parse.grammar)
                for t in kept:
                    session.parse.scan(t)
            else:
                raise HTTPException(409, "no token to delete")
            return status_json(session)

    @app.get("/sessions/{sid}/options")
    def options(sid: str) -> dict:
        session = get_session(sid)
        with session.lock:
            abstract, concrete = next_tokens(session.parse)
            if session.pending:
                pending = tuple(session.pending)
                concrete = [
                    c for c in concrete
                    if tuple(c.surface.split(" "))[:len(pending)] == pending
                    and len(c.surface.split(" ")) > len(pending)]
            return {**status_json(session),
                    "abstract": [_abstract_json(a) for a in abstract],
                    "concrete": [{"surface": c.surface, "source": c.source}
                                 for c in concrete]}

    @app.get("/sessions/{sid}/tree")
    def tree(sid: str) -> dict:
        session = get_session(sid)
        with session.lock:
            if not session.parse.complete:
                raise HTTPException(409, "parse is not complete")
            trees = extract_trees(session.parse)
            return {"derivations": len(trees), "tree": _tree_json(trees[0])}

    @app.post("/grammar/{gid}/lexicon")
    def add_lexicon(gid: str, body: LexiconIn) -> dict:
        with store_lock:
            grammar = store.get(gid)
            if grammar is None:
                raise HTTPException(404, f"unknown grammar {gid!r}")
            if not _NAME_RE.match(body.preterminal):
                raise HTTPException(422, "preterminal must be a lowercase identifier")
            if body.preterminal in grammar.rules_by_head:
                raise HTTPException(422, "name already used by a phrase rule")
            surface = body.surface
            if not surface or "" in surface.split(" ") or "'" in surface:
                raise HTTPException(422, "malformed surface string")
            variables: dict[str, Variable] = {}
            features: dict[str, Value] = {}
            for name, raw in body.features.items():
                if not _NAME_RE.match(name):
                    raise HTTPException(422, f"bad feature name {name!r}")
                if not raw:
                    raise HTTPException(422, f"empty value for feature {name!r}")
                if raw.startswith("'") or raw.endswith("'"):
                    # notation-style quoted constant, e.g. "'X'"
                    if (len(raw) < 3 or raw[0] != "'" or raw[-1] != "'"
                            or "'" in raw[1:-1]):
                        raise HTTPException(
                            422, f"malformed value for feature {name!r}")
                    features[name] = Constant(raw[1:-1])
                elif _VARIABLE_RE.match(raw):
                    features[name] = variables.setdefault(raw, variable(raw))
                else:
                    features[name] = Constant(raw)
            rule = Rule(Category(CatKind.PRETERMINAL, body.preterminal,
                                 FeatureStructure(features)),
                        RuleKind.LEXICAL, (terminal(surface),))
            extended = grammar.with_lexical_rule(rule)
            added = extended is not grammar
            store[gid] = extended
            return {"ok": True, "added": added}

    return app
