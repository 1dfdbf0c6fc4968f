"""Online monitors matching every status/next access against the automata.

A monitor follows one cell of one queue node. Because several edges of an
automaton can carry the same values (R1->W1 and R1->W2, for instance), a
monitor keeps a set of candidate runs: each candidate is the automaton state
it would be in, plus the edges taken since the last point where all
candidates agreed. An edge is counted in the coverage only once every
candidate has taken it.
"""
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import ConformanceViolation
from .logging_utils import get_logger
from .nfa import FieldKind, Nfa, NfaEdge, build_nfa
from .protocol import ActionLabel
from .topology import Topology
from .values import Actor, Field

logger = get_logger(__file__)

Candidate = Tuple[str, Tuple[NfaEdge, ...]]
Candidates = FrozenSet[Candidate]


class ActorResolution:
    """Role of an acting thread relative to the owner(s) of a node.

    A thread whose path contains the node acts on it as "self"; any other
    thread is its predecessor or its successor, as claimed by the step.
    """

    def __init__(self, topology: Topology):
        self.topology = topology

    def role(self, thread: int, node: int, claimed: Actor) -> Actor:
        owner = self.topology.owns(thread, node)
        if owner != (claimed is Actor.SELF):
            raise ConformanceViolation(
                f"thread {thread} claims role {claimed.value} on node {node}, "
                f"but {'owns' if owner else 'does not own'} it",
                kind=ConformanceViolation.WRONG_ACTOR,
            )
        return claimed


def start_candidates(nfa: Nfa) -> Candidates:
    return frozenset({(nfa.start.name, ())})


def _values_match(nfa: Nfa, edge: NfaEdge, label: ActionLabel) -> bool:
    return (nfa.states[edge.source].holds(label.old.kind)
            and nfa.states[edge.target].holds(label.new.kind))


def match(nfa: Nfa, candidates: Candidates, label: ActionLabel, role: Actor) -> Candidates:
    """Advances every candidate along the edges matching `label`."""
    advanced = set()
    value_matches: List[NfaEdge] = []
    for state, pending in candidates:
        for edge in nfa.out_edges(state):
            if not _values_match(nfa, edge, label):
                continue
            value_matches.append(edge)
            if edge.actor is role and edge.kind is label.kind:
                advanced.add((edge.target, pending + (edge,)))
    if advanced:
        return frozenset(advanced)
    states = sorted(state for state, _ in candidates)
    if not value_matches:
        kind = ConformanceViolation.NO_SUCH_EDGE
    elif not any(e.actor is role for e in value_matches):
        kind = ConformanceViolation.WRONG_ACTOR
    else:
        kind = ConformanceViolation.WRONG_KIND
    raise ConformanceViolation(f"{nfa.which.value}: no edge from {states} for {label}", kind=kind, label=label)


def commit(candidates: Candidates) -> Tuple[Candidates, Tuple[NfaEdge, ...]]:
    """Splits off the pending edges that every candidate agrees on."""
    paths = [pending for _, pending in candidates]
    shortest = min(len(p) for p in paths)
    agreed = 0
    while agreed < shortest and all(p[agreed] == paths[0][agreed] for p in paths):
        agreed += 1
    if agreed == 0:
        return candidates, ()
    prefix = paths[0][:agreed]
    return frozenset((state, pending[agreed:]) for state, pending in candidates), prefix


class Monitor:
    """Follows one cell against one automaton and counts edge hits."""

    def __init__(self, nfa: Nfa, name: str = ""):
        self.nfa = nfa
        self.name = name or nfa.which.value
        self.candidates = start_candidates(nfa)
        self.hits: Dict[NfaEdge, int] = {e: 0 for e in nfa.edges}

    @property
    def current_states(self) -> FrozenSet[str]:
        return frozenset(state for state, _ in self.candidates)

    def observe(self, action: ActionLabel, role: Optional[Actor] = None) -> Tuple[NfaEdge, ...]:
        """Matches one access. Returns the edges now known to have been taken."""
        self.candidates = match(self.nfa, self.candidates, action, role or action.actor)
        self.candidates, taken = commit(self.candidates)
        self.record(taken)
        return taken

    def record(self, edges: Iterable[NfaEdge]) -> None:
        for e in edges:
            self.hits[e] += 1

    def settle(self) -> bool:
        """Keeps the candidates sitting in an accept state. False if none does."""
        accepting = settle(self.nfa, self.candidates)
        if accepting is None:
            return False
        self.candidates, taken = commit(accepting)
        self.record(taken)
        return True

    def coverage(self) -> Dict[NfaEdge, int]:
        return dict(self.hits)


def settle(nfa: Nfa, candidates: Candidates) -> Optional[Candidates]:
    accept = {s.name for s in nfa.accept_states}
    kept = frozenset(c for c in candidates if c[0] in accept)
    return kept or None


class MonitorSet:
    """Monitors for every status and next cell of a configuration.

    The per-cell candidate sets form an immutable `context` that travels with
    each explored state; the hit counters are shared by the whole exploration.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self.resolution = ActorResolution(topology)
        self.nfas: Dict[FieldKind, Nfa] = {kind: build_nfa(kind) for kind in FieldKind}
        self.cells: List[Tuple[int, Field, FieldKind]] = []
        for info in topology.nodes:
            status_kind = (FieldKind.STATUS_ROOT if topology.is_root_level(info.level)
                           else FieldKind.STATUS_NONROOT)
            self.cells.append((info.id, Field.STATUS, status_kind))
            self.cells.append((info.id, Field.NEXT, FieldKind.NEXT))
        self.hits: Dict[FieldKind, Dict[NfaEdge, int]] = {
            kind: {e: 0 for e in nfa.edges} for kind, nfa in self.nfas.items()
        }

    @property
    def kinds_in_use(self) -> List[FieldKind]:
        used = {kind for _, _, kind in self.cells}
        return [kind for kind in FieldKind if kind in used]

    def _index(self, node: int, field: Field) -> int:
        return 2 * node + (0 if field is Field.STATUS else 1)

    def initial(self) -> Tuple[Candidates, ...]:
        return tuple(start_candidates(self.nfas[kind]) for _, _, kind in self.cells)

    def advance(self, context: Tuple[Candidates, ...], labels: Sequence[ActionLabel],
                record: bool = True) -> Tuple[Candidates, ...]:
        """Matches the labels of one step. Raises ConformanceViolation."""
        if not labels:
            return context
        cells = list(context)
        for label in labels:
            index = self._index(label.node, label.field)
            kind = self.cells[index][2]
            role = self.resolution.role(label.thread, label.node, label.actor)
            try:
                candidates = match(self.nfas[kind], cells[index], label, role)
            except ConformanceViolation as e:
                e.label = label
                raise
            candidates, taken = commit(candidates)
            if record:
                for edge in taken:
                    self.hits[kind][edge] += 1
            cells[index] = candidates
        return tuple(cells)

    def unsettled(self, context: Tuple[Candidates, ...]) -> List[str]:
        """Cells whose monitor cannot be in an accept state."""
        bad = []
        for (node, field, kind), candidates in zip(self.cells, context):
            if settle(self.nfas[kind], candidates) is None:
                states = ",".join(sorted(s for s, _ in candidates))
                bad.append(f"{self.topology.nodes[node].name}.{field.value} in {{{states}}}")
        return bad

    def finish(self, context: Tuple[Candidates, ...]) -> None:
        """Counts the edges a terminal state resolves by sitting in accept states."""
        for (node, field, kind), candidates in zip(self.cells, context):
            accepting = settle(self.nfas[kind], candidates)
            if accepting is not None:
                _, taken = commit(accepting)
                for edge in taken:
                    self.hits[kind][edge] += 1

    def coverage(self, kind: FieldKind) -> Dict[NfaEdge, int]:
        return dict(self.hits[kind])


def coverage(monitor) -> Dict[NfaEdge, int]:
    """Edge -> hit count, zero-hit edges included."""
    return monitor.coverage()


def uncovered(hits: Dict[NfaEdge, int]) -> List[NfaEdge]:
    return [e for e, count in hits.items() if count == 0]


def coverage_table(kind: FieldKind, hits: Dict[NfaEdge, int]) -> str:
    covered = sum(1 for count in hits.values() if count)
    total = len(hits)
    percent = 100.0 * covered / total if total else 100.0
    lines = [f"coverage {kind.value}: {covered}/{total} edges ({percent:.1f}%)"]
    for e, count in hits.items():
        mark = " " if count else "!"
        lines.append(f" {mark} {e.source:>5} -> {e.target:<5} {e.actor.value:<12} {e.kind.value:<18} {count}")
    return "\n".join(lines)


def coverage_lines(kind: FieldKind, hits: Dict[NfaEdge, int]) -> List[str]:
    """Machine-readable key=value lines, one per edge plus a summary."""
    covered = sum(1 for count in hits.values() if count)
    lines = [f"coverage.{kind.value}.covered={covered}", f"coverage.{kind.value}.total={len(hits)}"]
    for e, count in hits.items():
        lines.append(f"coverage.{kind.value}.{e.source}->{e.target}.{e.actor.value}.{e.kind.value}={count}")
    return lines
