"""Line-based text exchange format for automata.

Sections (one directive per line, ``#`` starts a comment)::

    states: s0 s1
    initial: s0
    marked: s0
    controllable: e1 e2
    uncontrollable: d11
    owners: e1=1 stop2=1,2
    trans: s0 e1 s1

Tokens are whitespace separated and must match ``[A-Za-z0-9_+\\-]+``.
:func:`dumps` emits a canonical ordering (states sorted, transitions sorted
by source/event/target) so that writing a canonically ordered file back out
is byte-identical.  State names produced by composition or projection may
contain characters outside the token set; the writer deterministically
renames those (``q000``, ``q001``, ... in sorted order), which preserves all
languages and bisimilarity.
"""

from __future__ import annotations

import re

from .automata import Automaton, Event
from .errors import InvalidToken, ParseError

TOKEN_RE = re.compile(r"^[A-Za-z0-9_+\-]+$")

_SECTIONS = ("states", "initial", "marked", "controllable", "uncontrollable", "owners", "trans")


def _safe_names(states) -> dict:
    """Map state names onto the token charset, renaming only when needed."""
    bad = sorted(q for q in states if not TOKEN_RE.match(q))
    if not bad:
        return {}
    taken = set(states) - set(bad)
    mapping = {}
    counter = 0
    for q in bad:
        while True:
            candidate = f"q{counter:03d}"
            counter += 1
            if candidate not in taken:
                break
        taken.add(candidate)
        mapping[q] = candidate
    return mapping


def dumps(a: Automaton) -> str:
    mapping = _safe_names(a.states)
    if mapping:
        a = a.renamed(mapping)
    for ev in a.alphabet:
        if not TOKEN_RE.match(ev.id):
            raise InvalidToken(f"event id {ev.id!r} is not a valid token")
    lines = []
    lines.append("states: " + " ".join(sorted(a.states)))
    lines.append("initial: " + a.initial)
    lines.append("marked: " + " ".join(sorted(a.marked)))
    ctrl = sorted(e.id for e in a.alphabet if e.controllable)
    unctrl = sorted(e.id for e in a.alphabet if not e.controllable)
    lines.append("controllable: " + " ".join(ctrl))
    lines.append("uncontrollable: " + " ".join(unctrl))
    owned = [e for e in a.alphabet if e.owners]
    if owned:
        parts = [
            f"{e.id}=" + ",".join(str(t) for t in sorted(e.owners))
            for e in sorted(owned, key=lambda e: e.id)
        ]
        lines.append("owners: " + " ".join(parts))
    for (src, ev, dst) in sorted(a.transitions):
        lines.append(f"trans: {src} {ev} {dst}")
    return "\n".join(lines) + "\n"


def loads(text: str, path=None) -> Automaton:
    states: list = []
    initial = None
    marked: list = []
    controllable: list = []
    uncontrollable: list = []
    owners: dict = {}
    transitions: list = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(f"missing ':' in {raw!r}", path, lineno)
        key, _, rest = line.partition(":")
        key = key.strip()
        tokens = rest.split()
        if key not in _SECTIONS:
            raise ParseError(f"unknown section {key!r}", path, lineno)
        if key == "owners":
            for tok in tokens:
                if "=" not in tok:
                    raise ParseError(f"bad owners entry {tok!r}", path, lineno)
                ev, _, tags = tok.partition("=")
                _check_token(ev, path, lineno)
                try:
                    owners[ev] = frozenset(int(t) for t in tags.split(","))
                except ValueError:
                    raise ParseError(f"bad owner tags {tok!r}", path, lineno) from None
            continue
        if key == "states":
            _check_tokens(tokens, path, lineno)
            states.extend(tokens)
        elif key == "initial":
            _check_tokens(tokens, path, lineno)
            if len(tokens) != 1:
                raise ParseError("initial takes exactly one state", path, lineno)
            initial = tokens[0]
        elif key == "marked":
            _check_tokens(tokens, path, lineno)
            marked.extend(tokens)
        elif key == "controllable":
            _check_tokens(tokens, path, lineno)
            controllable.extend(tokens)
        elif key == "uncontrollable":
            _check_tokens(tokens, path, lineno)
            uncontrollable.extend(tokens)
        elif key == "trans":
            _check_tokens(tokens, path, lineno)
            if len(tokens) != 3:
                raise ParseError("trans takes 'src event dst'", path, lineno)
            transitions.append((tokens[0], tokens[1], tokens[2]))

    if initial is None:
        raise ParseError("missing 'initial:' section", path)
    if not states:
        raise ParseError("missing 'states:' section", path)
    overlap = set(controllable) & set(uncontrollable)
    if overlap:
        raise ParseError(f"events both controllable and uncontrollable: {sorted(overlap)}", path)
    alphabet = [
        Event(ev, True, owners.get(ev, frozenset())) for ev in dict.fromkeys(controllable)
    ] + [
        Event(ev, False, owners.get(ev, frozenset())) for ev in dict.fromkeys(uncontrollable)
    ]
    try:
        return Automaton.build(states, initial, alphabet, transitions, marked)
    except ValueError as exc:
        raise ParseError(str(exc), path) from exc


def _check_token(tok: str, path, lineno):
    if not TOKEN_RE.match(tok):
        raise ParseError(f"invalid token {tok!r}", path, lineno)


def _check_tokens(tokens, path, lineno):
    for tok in tokens:
        _check_token(tok, path, lineno)


def write(a: Automaton, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(a))


def read(path) -> Automaton:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    return loads(text, path=path)
