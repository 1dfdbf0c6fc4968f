"""Data types of the shared-field automata."""
import enum
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import networkx as nx

from ..errors import MalformedNfa
from ..logging_utils import get_logger
from ..values import Actor, EdgeKind

logger = get_logger(__file__)


class FieldKind(enum.Enum):
    """Which cell an automaton describes."""
    STATUS_ROOT = "status-root"
    STATUS_NONROOT = "status-nonroot"
    NEXT = "next"


@dataclass(frozen=True)
class NfaState:
    name: str
    # Value variants the cell may hold in this state. Usually one; "V/P1"
    # overlays a full pass and a prefix pass.
    values: FrozenSet[enum.Enum]
    is_start: bool = False
    is_owner: bool = False
    is_accept: bool = False

    def holds(self, value_kind: enum.Enum) -> bool:
        return value_kind in self.values


@dataclass(frozen=True)
class NfaEdge:
    source: str
    target: str
    actor: Actor
    kind: EdgeKind = EdgeKind.NORMAL

    @property
    def key(self) -> Tuple[str, str, str, str]:
        return (self.source, self.target, self.actor.value, self.kind.value)

    def __str__(self) -> str:
        return f"{self.source}->{self.target} [{self.actor.value}, {self.kind.value}]"


@dataclass
class Nfa:
    """A labeled directed multigraph of NFA states and edges."""
    which: FieldKind
    states: Dict[str, NfaState] = field(default_factory=dict)
    edges: List[NfaEdge] = field(default_factory=list)

    def __post_init__(self):
        self._graph: Optional[nx.MultiDiGraph] = None

    @property
    def start(self) -> NfaState:
        starts = [s for s in self.states.values() if s.is_start]
        if len(starts) != 1:
            raise MalformedNfa(f"{self.which.value}: expected exactly one start state, found {len(starts)}")
        return starts[0]

    @property
    def owner_states(self) -> List[NfaState]:
        return [s for s in self.states.values() if s.is_owner]

    @property
    def accept_states(self) -> List[NfaState]:
        return [s for s in self.states.values() if s.is_accept]

    def out_edges(self, state: str) -> Iterator[NfaEdge]:
        return (e for e in self.edges if e.source == state)

    def begin_sources(self) -> FrozenSet[str]:
        return frozenset(e.source for e in self.edges if e.kind is EdgeKind.BEGIN)

    def timeout_sources(self) -> FrozenSet[str]:
        return frozenset(e.source for e in self.edges if e.kind is EdgeKind.TIMEOUT)

    def graph(self) -> nx.MultiDiGraph:
        """The automaton as a networkx multigraph; edge data holds the NfaEdge."""
        if self._graph is None:
            g = nx.MultiDiGraph(name=self.which.value)
            for name in self.states:
                g.add_node(name)
            for e in self.edges:
                g.add_edge(e.source, e.target, key=e.key, edge=e)
            self._graph = g
        return self._graph

    def subgraph(self, keep) -> nx.MultiDiGraph:
        """Graph restricted to the edges satisfying `keep(edge)`; all states kept."""
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.states)
        for e in self.edges:
            if keep(e):
                g.add_edge(e.source, e.target, key=e.key, edge=e)
        return g

    def validate(self) -> "Nfa":
        """Raises MalformedNfa unless every endpoint exists and all states are
        reachable from the start state."""
        for e in self.edges:
            for end in (e.source, e.target):
                if end not in self.states:
                    raise MalformedNfa(f"{self.which.value}: edge {e} references unknown state {end!r}")
        if not self.states:
            return self
        start = self.start.name
        reachable = nx.descendants(self.graph(), start) | {start}
        unreachable = sorted(set(self.states) - reachable)
        if unreachable:
            raise MalformedNfa(f"{self.which.value}: states unreachable from {start}: {unreachable}")
        return self

    def without(self, *edges: Tuple[str, str]) -> "Nfa":
        """Copy of this automaton with every edge between the given
        (source, target) pairs removed. Used to build falsifying fixtures."""
        drop = set(edges)
        kept = [e for e in self.edges if (e.source, e.target) not in drop]
        return Nfa(self.which, dict(self.states), kept)


def make_state(name: str, *values: enum.Enum, start: bool = False,
               owner: bool = False, accept: bool = False) -> NfaState:
    return NfaState(name, frozenset(values), is_start=start, is_owner=owner, is_accept=accept)


def make_edges(rows: Iterable[Tuple[str, str, Actor, EdgeKind]]) -> List[NfaEdge]:
    return [NfaEdge(source, target, actor, kind) for source, target, actor, kind in rows]
