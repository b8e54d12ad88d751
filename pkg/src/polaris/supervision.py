"""Controllability, closed-loop construction and supervisor decomposition.

A specification automaton plays the role of a prefix-closed supervisor
candidate: its generated language is the prefix closure of the target
behavior, and composing it with the plant realizes the closed loop.  The
decomposition checks decide whether a global two-agent supervisor can be
replaced by the parallel composition of its natural projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .automata import (
    Automaton,
    BisimResult,
    accessible,
    is_bisimilar,
    natural_project,
    parallel_compose,
)
from .errors import (
    AlphabetMismatch,
    CoverageError,
    NondeterministicInput,
    NotControllable,
    NotDecomposable,
)

__all__ = [
    "ControllabilityReport",
    "DecomposabilityReport",
    "check_controllability",
    "closed_loop",
    "modular_supervisor",
    "decompose",
    "check_decomposability",
    "verify_decentralized",
    "DecentralizedVerdict",
    "is_nonblocking",
]


def is_nonblocking(a: Automaton) -> bool:
    """From every reachable state some marked state must stay reachable."""
    a = accessible(a)
    predecessors: dict = {q: set() for q in a.states}
    for (src, _, dst) in a.transitions:
        predecessors[dst].add(src)
    can_mark = set(a.marked)
    frontier = list(a.marked)
    while frontier:
        q = frontier.pop()
        for p in predecessors[q]:
            if p not in can_mark:
                can_mark.add(p)
                frontier.append(p)
    return can_mark == a.states


@dataclass(frozen=True)
class ControllabilityReport:
    controllable: bool
    witness_string: Optional[tuple] = None
    witness_event: Optional[str] = None

    def __bool__(self):
        return self.controllable


def check_controllability(
    spec: Automaton, plant: Automaton, e_uc: Iterable[str]
) -> ControllabilityReport:
    """Check that the spec never disables an uncontrollable plant event.

    Traverses the synchronous product of the spec (prefix-closed view: its
    generated language) and the plant; fails iff some reachable pair enables
    an event of ``e_uc`` in the plant but not in the spec.  On failure the
    witness string s and event are returned, with s generated by the spec,
    s+event generated by the plant but not by the spec.
    """
    if spec.event_ids != plant.event_ids:
        raise AlphabetMismatch(
            "spec and plant must share an alphabet; "
            f"difference: {sorted(spec.event_ids ^ plant.event_ids)}"
        )
    e_uc = frozenset(e_uc)
    extra = e_uc - plant.event_ids
    if extra:
        raise AlphabetMismatch(f"uncontrollable events not in alphabet: {sorted(extra)}")

    start = (spec.initial, plant.initial)
    parents: dict = {start: None}
    frontier = [start]
    while frontier:
        pair = frontier.pop(0)
        (qs, qp) = pair
        spec_enabled = set(spec.enabled(qs))
        for ev in plant.enabled(qp):
            if ev in e_uc and ev not in spec_enabled:
                string = []
                node = pair
                while parents[node] is not None:
                    node, via = parents[node]
                    string.append(via)
                string.reverse()
                return ControllabilityReport(False, tuple(string), ev)
            if ev not in spec_enabled:
                continue
            for ds in sorted(spec.step(qs, ev)):
                for dp in sorted(plant.step(qp, ev)):
                    nxt = (ds, dp)
                    if nxt not in parents:
                        parents[nxt] = (pair, ev)
                        frontier.append(nxt)
    return ControllabilityReport(True)


def closed_loop(s: Automaton, a: Automaton) -> Automaton:
    """Compose a supervisor realization with the plant.

    Requires all supervisor states marked (prefix-closed language) and the
    supervised language controllable; the marked language of the result is
    the supervisor language intersected with the plant's marked language.
    """
    if s.marked != s.states:
        raise ValueError("supervisor realization must have every state marked")
    e_uc = {e.id for e in a.alphabet if not e.controllable}
    report = check_controllability(s, a, e_uc)
    if not report:
        raise NotControllable(
            f"spec disables uncontrollable {report.witness_event!r} after "
            f"{'.'.join(report.witness_string) or 'the empty string'}"
        )
    return parallel_compose(s, a)


def modular_supervisor(s1: Automaton, s2: Automaton, a: Automaton) -> Automaton:
    """Closed loop of two modular supervisors running in conjunction."""
    return parallel_compose(parallel_compose(s1, s2), a)


def _coverage(a: Automaton, e1, e2):
    e1, e2 = frozenset(e1), frozenset(e2)
    if e1 | e2 != a.event_ids:
        missing = a.event_ids - (e1 | e2)
        raise CoverageError(f"event sets do not cover the alphabet: {sorted(missing)}")
    return e1, e2


def decompose(a: Automaton, e1: Iterable[str], e2: Iterable[str]):
    """Project the automaton onto the two local event sets."""
    e1, e2 = _coverage(a, e1, e2)
    return natural_project(a, e1), natural_project(a, e2)


@dataclass(frozen=True)
class DecomposabilityReport:
    decomposable: bool
    bisim: BisimResult
    dc1: bool
    dc1_witness: Optional[tuple] = None
    dc2: bool = True
    dc2_witness: Optional[tuple] = None
    dc3: bool = True
    dc3_witness: Optional[tuple] = None
    dc3_bound: int = 0
    dc3_exhaustive: bool = False
    dc4: bool = True
    dc4_witness: Optional[tuple] = None

    def __bool__(self):
        return self.decomposable

    def summary(self) -> str:
        lines = [
            f"decomposable: {self.decomposable}",
            f"dc1: {'pass' if self.dc1 else f'fail {self.dc1_witness}'}",
            f"dc2: {'pass' if self.dc2 else f'fail {self.dc2_witness}'}",
            f"dc3: {'pass' if self.dc3 else f'fail {self.dc3_witness}'}"
            + f" (bound {self.dc3_bound}{'' if self.dc3_exhaustive else ', truncated'})",
            f"dc4: {'pass' if self.dc4 else f'fail {self.dc4_witness}'}",
        ]
        return "\n".join(lines)


def _eps_nfa(a: Automaton, keep: frozenset):
    """Projection before determinization: hidden events become silent.

    Returns the NFA transition map q -> event -> frozenset of states, where
    each step already includes closure under hidden moves on both sides.
    """
    hidden = a.event_ids - keep

    def closure(states):
        out = set(states)
        work = list(states)
        while work:
            q = work.pop()
            for ev in a.enabled(q):
                if ev in hidden:
                    for d in a.step(q, ev):
                        if d not in out:
                            out.add(d)
                            work.append(d)
        return frozenset(out)

    init = closure([a.initial])
    trans: dict = {q: {} for q in a.states}
    for q in a.states:
        base = closure([q])
        for ev in sorted(keep):
            targets = {d for p in base for d in a.step(p, ev)}
            if targets:
                trans[q][ev] = closure(targets)
    return trans, init


def _gen_language_equal(trans: dict, keep: frozenset, set1: frozenset, set2: frozenset) -> bool:
    """Equality of prefix-closed definedness languages of two NFA state sets."""
    seen = {(set1, set2)}
    work = [(set1, set2)]
    while work:
        (x, y) = work.pop()
        for ev in sorted(keep):
            tx = frozenset().union(*[trans[q].get(ev, frozenset()) for q in x]) if x else frozenset()
            ty = frozenset().union(*[trans[q].get(ev, frozenset()) for q in y]) if y else frozenset()
            if bool(tx) != bool(ty):
                return False
            if tx and (tx, ty) not in seen:
                seen.add((tx, ty))
                work.append((tx, ty))
    return True


def check_decomposability(
    a: Automaton,
    e1: Iterable[str],
    e2: Iterable[str],
    n: int = 8,
    dc3_budget: int = 20_000,
) -> DecomposabilityReport:
    """Decide decomposability and run the four diagnostic conditions.

    The authoritative verdict is the direct oracle: project onto both event
    sets, compose the projections and test bisimilarity with the original.
    The diagnostics locate the cause of a failure: the first two conditions
    and the fourth are checked exactly, the third only on a bounded,
    deterministic sample of string pairs (length <= n, at most
    ``dc3_budget`` pair checks) because its universal quantification over
    all strings is not enumerable in general.
    """
    if not a.deterministic:
        raise NondeterministicInput("decomposability conditions require a deterministic automaton")
    e1, e2 = _coverage(a, e1, e2)
    # the conditions quantify over reachable behavior only
    a = accessible(a)
    p1, p2 = natural_project(a, e1), natural_project(a, e2)
    bisim = is_bisimilar(a, parallel_compose(p1, p2))

    priv1 = tuple(sorted(e1 - e2))
    priv2 = tuple(sorted(e2 - e1))
    shared = e1 & e2

    dc1 = True
    dc1_wit = None
    dc2 = True
    dc2_wit = None
    for q in sorted(a.states):
        enabled = set(a.enabled(q))
        for x in priv1:
            if x not in enabled:
                continue
            for y in priv2:
                if y not in enabled:
                    continue
                qx = a.step1(q, x)
                qy = a.step1(q, y)
                qxy = a.step1(qx, y)
                qyx = a.step1(qy, x)
                if qxy is None or qyx is None:
                    if dc1:
                        dc1, dc1_wit = False, (q, x, y)
                    continue
                if qxy != qyx:
                    same = is_bisimilar(a.rerooted(qxy), a.rerooted(qyx))
                    if not same and dc2:
                        dc2, dc2_wit = False, (q, x, y)

    trans1, _ = _eps_nfa(a, e1)
    trans2, _ = _eps_nfa(a, e2)
    dc4 = True
    dc4_wit = None
    for keep, trans in ((e1, trans1), (e2, trans2)):
        if not dc4:
            break
        for q in sorted(a.states):
            for ev, targets in sorted(trans[q].items()):
                if len(targets) < 2:
                    continue
                ts = sorted(targets)
                for t1 in ts:
                    for t2 in ts:
                        if t1 < t2 and not _gen_language_equal(
                            trans, keep, frozenset([t1]), frozenset([t2])
                        ):
                            dc4, dc4_wit = False, (q, ev, t1, t2)
                            break
                    if not dc4:
                        break
                if not dc4:
                    break
            if not dc4:
                break

    dc3, dc3_wit, exhaustive = _check_dc3(a, e1, e2, shared, n, dc3_budget)

    return DecomposabilityReport(
        decomposable=bool(bisim),
        bisim=bisim,
        dc1=dc1,
        dc1_witness=dc1_wit,
        dc2=dc2,
        dc2_witness=dc2_wit,
        dc3=dc3,
        dc3_witness=dc3_wit,
        dc3_bound=n,
        dc3_exhaustive=exhaustive,
        dc4=dc4,
        dc4_witness=dc4_wit,
    )


def _strings_from(a: Automaton, q: str, n: int, budget: int):
    """Defined strings of length <= n from q, lexicographic, budget-capped."""
    out = []
    exhaustive = True
    stack = [(q, ())]
    while stack:
        state, prefix = stack.pop()
        out.append((prefix, state))
        if len(out) >= budget:
            exhaustive = False
            break
        if len(prefix) == n:
            continue
        for ev in reversed(a.enabled(state)):
            nxt = a.step1(state, ev)
            if nxt is not None:
                stack.append((nxt, prefix + (ev,)))
    return out, exhaustive


def _proj_string(s: tuple, keep: frozenset) -> tuple:
    return tuple(e for e in s if e in keep)


def _dc3_pair_ok(a: Automaton, q: str, p1: tuple, p2: tuple, shared: frozenset) -> bool:
    """All synchronized interleavings of prefixes of p1 and p2 defined at q.

    Walks the product of prefix positions with the automaton state; shared
    events advance both strings, private events one.  Fails as soon as one
    interleaved prefix is undefined.
    """
    seen = {(q, 0, 0)}
    stack = [(q, 0, 0)]
    while stack:
        state, i, j = stack.pop()
        moves = []
        if i < len(p1):
            if p1[i] in shared:
                if j < len(p2) and p2[j] == p1[i]:
                    moves.append((p1[i], i + 1, j + 1))
            else:
                moves.append((p1[i], i + 1, j))
        if j < len(p2) and p2[j] not in shared:
            moves.append((p2[j], i, j + 1))
        for (ev, ni, nj) in moves:
            nxt = a.step1(state, ev)
            if nxt is None:
                return False
            if (nxt, ni, nj) not in seen:
                seen.add((nxt, ni, nj))
                stack.append((nxt, ni, nj))
    return True


def _check_dc3(a, e1, e2, shared, n, budget):
    """Bounded diagnostic for the interleaving condition on shared prefixes."""
    checks = 0
    exhaustive = True
    per_state_strings = max(64, budget // (10 * max(1, len(a.states))))
    for q in sorted(a.states):
        strings, exhaustive_q = _strings_from(a, q, n, per_state_strings)
        exhaustive = exhaustive and exhaustive_q
        by_first_shared: dict = {}
        for (s, _) in strings:
            ps = _proj_string(s, shared)
            if ps:
                by_first_shared.setdefault(ps[0], []).append(s)
        for ev, group in sorted(by_first_shared.items()):
            for s in group:
                for t in group:
                    if s == t:
                        continue
                    checks += 1
                    if checks > budget:
                        return True, None, False
                    if not _dc3_pair_ok(
                        a, q, _proj_string(s, e1), _proj_string(t, e2), shared
                    ):
                        return False, (q, s, t), exhaustive
    return True, None, exhaustive


@dataclass(frozen=True)
class DecentralizedVerdict:
    satisfied: bool
    centralized_matches: bool
    decomposability: DecomposabilityReport
    local_closed_loop: Automaton = field(repr=False, default=None)

    def __bool__(self):
        return self.satisfied


def verify_decentralized(
    ap1: Automaton, ap2: Automaton, ac: Automaton, a_spec: Automaton
) -> DecentralizedVerdict:
    """Check that the locally supervised team meets the global spec.

    The controller is projected onto each plant's local event set; the
    composition of the local closed loops is compared with the global spec
    automaton by bisimulation.  The intermediate check (global controller
    composed with the joint plant against the spec) is reported alongside.
    """
    e1 = ac.event_ids & ap1.event_ids
    e2 = ac.event_ids & ap2.event_ids
    if e1 | e2 != ac.event_ids:
        raise CoverageError(
            "controller alphabet not covered by the plants' local event sets"
        )
    report = check_decomposability(ac, e1, e2, n=4)
    if not report:
        raise NotDecomposable("controller is not decomposable; see report diagnostics")
    ac1, ac2 = natural_project(ac, e1), natural_project(ac, e2)
    local = parallel_compose(parallel_compose(ap1, ac1), parallel_compose(ap2, ac2))
    satisfied = bool(is_bisimilar(local, a_spec))
    central = bool(is_bisimilar(parallel_compose(ac, parallel_compose(ap1, ap2)), a_spec))
    return DecentralizedVerdict(satisfied, central, report, accessible(local))
