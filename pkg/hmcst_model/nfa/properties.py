"""Structural liveness and progress checks over a shared-field automaton.

All checks are reachability or cycle questions on a filtered view of the
automaton graph (begin edges removed, timeout edges removed, or only the
owning thread's own edges kept), answered with networkx.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ..errors import MalformedNfa, NoOwnerStates
from ..logging_utils import get_logger
from ..values import Actor, EdgeKind
from .automaton import FieldKind, Nfa, NfaEdge

logger = get_logger(__file__)

PARTICIPANTS = frozenset({Actor.SELF, Actor.PREDECESSOR, Actor.SUCCESSOR})
MAX_ROUNDS = 2


@dataclass
class PropertyResult:
    name: str
    # None means "not applicable" to this automaton.
    verdict: Optional[bool]
    witness: List[str] = field(default_factory=list)
    detail: str = ""

    @property
    def status(self) -> str:
        if self.verdict is None:
            return "N/A"
        return "PASS" if self.verdict else "FAIL"


def _well_formed(nfa: Nfa) -> Nfa:
    try:
        return nfa.validate()
    except MalformedNfa:
        raise
    except Exception as e:
        raise MalformedNfa(f"unable to validate automaton: {e}") from e


def _closure(graph: nx.MultiDiGraph, state: str) -> Set[str]:
    """States reachable from `state`, including itself (the empty path)."""
    return nx.descendants(graph, state) | {state}


def _is_self(edge: NfaEdge) -> bool:
    return edge.actor is Actor.SELF


def _require_owners(nfa: Nfa) -> FrozenSet[str]:
    owners = frozenset(s.name for s in nfa.owner_states)
    if not owners:
        raise NoOwnerStates(f"{nfa.which.value} automaton has no lock-ownership state")
    return owners


def check_livelock_freedom(nfa: Nfa) -> PropertyResult:
    """Every directed cycle contains a begin-acquisition edge."""
    _well_formed(nfa)
    g = nfa.subgraph(lambda e: e.kind is not EdgeKind.BEGIN)
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        return PropertyResult("livelock-freedom", True)
    witness = [edge[0] for edge in cycle] + [cycle[-1][1]]
    return PropertyResult("livelock-freedom", False, witness,
                          "cycle without a begin-acquisition edge")


def check_starvation_freedom(nfa: Nfa) -> PropertyResult:
    """From every wait state entered by a begin edge, an owner state is
    reachable without taking any timeout edge."""
    _well_formed(nfa)
    owners = _require_owners(nfa)
    g = nfa.subgraph(lambda e: e.kind is not EdgeKind.TIMEOUT)
    sinks = sorted({e.target for e in nfa.edges if e.kind is EdgeKind.BEGIN})
    starving = [s for s in sinks if not (_closure(g, s) & owners)]
    if starving:
        return PropertyResult("starvation-freedom", False, starving,
                              "no timeout-free path to an owner state")
    return PropertyResult("starvation-freedom", True)


def check_bounded_release(nfa: Nfa) -> PropertyResult:
    """From every owner state the owner alone reaches a state where a new
    acquisition may begin."""
    _well_formed(nfa)
    owners = _require_owners(nfa)
    g = nfa.subgraph(_is_self)
    begin_sources = nfa.begin_sources()
    stuck = sorted(o for o in owners if not (_closure(g, o) & begin_sources))
    if stuck:
        return PropertyResult("bounded-release", False, stuck,
                              "owner cannot reach a begin-acquisition source on its own")
    return PropertyResult("bounded-release", True)


def check_bounded_timeout(nfa: Nfa) -> PropertyResult:
    """Every state that is not a begin source reaches, on the owner's own
    edges, the source of a timeout edge."""
    _well_formed(nfa)
    g = nfa.subgraph(_is_self)
    begin_sources = nfa.begin_sources()
    timeout_sources = nfa.timeout_sources()
    stuck = sorted(
        s for s in nfa.states
        if s not in begin_sources and not (_closure(g, s) & timeout_sources)
    )
    if stuck:
        return PropertyResult("bounded-timeout", False, stuck,
                              "no own path to a timeout edge")
    return PropertyResult("bounded-timeout", True)


def check_deadlock_freedom(nfa: Nfa) -> PropertyResult:
    """Every state reaches, on the owner's own edges (the empty path
    included), a state from which a new acquisition can begin."""
    _well_formed(nfa)
    g = nfa.subgraph(_is_self)
    begin_sources = nfa.begin_sources()
    stuck = sorted(s for s in nfa.states if not (_closure(g, s) & begin_sources))
    if stuck:
        return PropertyResult("deadlock-freedom", False, stuck,
                              "no own path to a begin-acquisition source")
    return PropertyResult("deadlock-freedom", True)


def check_three_participants(nfa: Nfa) -> PropertyResult:
    """No edge needs a role beyond predecessor, self and successor, and every
    edge is reachable from the start state."""
    _well_formed(nfa)
    extra = sorted({e.actor.value for e in nfa.edges} - {a.value for a in PARTICIPANTS})
    if extra:
        return PropertyResult("three-participants", False, extra, "edges need a fourth role")
    reachable = _closure(nfa.graph(), nfa.start.name) if nfa.states else set()
    orphaned = sorted(str(e) for e in nfa.edges if e.source not in reachable)
    if orphaned:
        return PropertyResult("three-participants", False, orphaned, "edges unreachable from start")
    return PropertyResult("three-participants", True)


def rounds_needed(nfa: Nfa, max_rounds: int = MAX_ROUNDS) -> List[NfaEdge]:
    """Breadth-first search over (state, begin edges taken <= max_rounds).

    Returns the edges that cannot be traversed within that many
    acquisition rounds.
    """
    start = nfa.start.name
    seen = {(start, 0)}
    frontier = deque([(start, 0)])
    traversed: Set[NfaEdge] = set()
    while frontier:
        state, taken = frontier.popleft()
        for e in nfa.out_edges(state):
            cost = taken + (1 if e.kind is EdgeKind.BEGIN else 0)
            if cost > max_rounds:
                continue
            traversed.add(e)
            nxt = (e.target, cost)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return [e for e in nfa.edges if e not in traversed]


def check_two_rounds(nfa: Nfa) -> PropertyResult:
    _well_formed(nfa)
    missing = rounds_needed(nfa, MAX_ROUNDS)
    if missing:
        return PropertyResult("two-rounds", False, [str(e) for e in missing],
                              f"edges need more than {MAX_ROUNDS} acquisition rounds")
    return PropertyResult("two-rounds", True)


PROPERTY_CHECKS: List[Tuple[str, Callable[[Nfa], PropertyResult]]] = [
    ("livelock-freedom", check_livelock_freedom),
    ("starvation-freedom", check_starvation_freedom),
    ("bounded-release", check_bounded_release),
    ("bounded-timeout", check_bounded_timeout),
    ("deadlock-freedom", check_deadlock_freedom),
    ("three-participants", check_three_participants),
    ("two-rounds", check_two_rounds),
]


def check_all(nfa: Nfa, checks: Iterable[Tuple[str, Callable[[Nfa], PropertyResult]]] = None) -> List[PropertyResult]:
    """Runs every applicable check. Ownership checks on the next-field
    automaton are reported as not applicable."""
    results = []
    for name, check in (checks or PROPERTY_CHECKS):
        try:
            result = check(nfa)
        except NoOwnerStates as e:
            result = PropertyResult(name, None, detail=str(e))
        logger.debug(f"{nfa.which.value}: {name} -> {result.status}")
        results.append(result)
    return results
