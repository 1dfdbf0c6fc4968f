"""Exhaustive interleaving exploration and the run assertions.

States are expanded in a fixed order (ascending thread id, then the enabled
choices in protocol order) so that state counts, coverage and traces are
reproducible. Each explored state carries, next to the protocol state, the
candidate sets of the conformance monitors; both make up the visited-set key.
"""
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from simple_parsing.helpers import Serializable, dict_field, list_field

from .conformance import MonitorSet, coverage_lines, coverage_table
from .errors import (AssertionViolated, ConformanceViolation, HmcstError, IllegalStep, MalformedTrace,
                     ResourceBudgetExceeded, UnknownThread)
from .logging_utils import get_logger
from .nfa import FieldKind, build_nfa
from .protocol import ActionLabel, Protocol, ProtocolEvent, ProtocolVariant
from .state import GlobalState, initial_state
from .topology import Config, Topology, nonroot_config, root_config
from .trace import Step, Trace

logger = get_logger(__file__)

DFS = "dfs"
BFS = "bfs"
STRATEGIES = (DFS, BFS)

# edge coverage each preset is expected to reach
REQUIRED_COVERAGE: Dict[str, List[FieldKind]] = {
    "root": [FieldKind.STATUS_ROOT, FieldKind.NEXT],
    "nonroot": [FieldKind.STATUS_NONROOT],
}

__all__ = [
    "DFS", "BFS", "Violation", "ExplorationReport", "Explorer", "ReplayResult",
    "assert_mutual_exclusion", "assert_no_deadlock", "assert_quiescent",
    "assert_run_order", "assert_no_starvation", "explore", "replay",
    "root_config", "nonroot_config",
]


class Violation(NamedTuple):
    assertion: str
    message: str
    threads: Tuple[int, ...] = ()
    levels: Tuple[int, ...] = ()


def assert_mutual_exclusion(state: GlobalState, topology: Optional[Topology] = None) -> Optional[Violation]:
    """At most one thread in the critical section and, given a topology, at
    most one holder of each lock of the tree."""
    in_cs = [f.tid for f in state.frames if f.in_cs]
    if len(in_cs) > 1:
        return Violation("mutual-exclusion",
                         f"threads {in_cs[0]} and {in_cs[1]} are both in the critical section",
                         tuple(in_cs[:2]))
    if topology is None:
        return None
    holders: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for f in state.frames:
        for level in f.held_levels():
            if topology.is_abstract(level):
                lock = -1
            else:
                node = topology.node_at(f.tid, level)
                lock = topology.lock_of(node)
            other = holders.setdefault((level, lock), (f.tid, level))
            if other[0] != f.tid:
                return Violation(
                    "mutual-exclusion",
                    f"threads {other[0]} and {f.tid} both hold the level {level} lock",
                    (other[0], f.tid), (level, level),
                )
    return None


def assert_no_deadlock(state: GlobalState, protocol: Protocol) -> Optional[Violation]:
    """Ok iff every thread is done or some thread can make progress."""
    if state.all_done:
        return None
    for f in state.frames:
        for choice in protocol.enabled_choices(state, f.tid):
            try:
                if protocol.is_productive(state, f.tid, choice):
                    return None
            except IllegalStep:
                return None
    stuck = tuple(f.tid for f in state.frames if not f.done)
    where = ", ".join(f"t{f.tid}@{f.pc.value}/{f.level}" for f in state.frames if not f.done)
    return Violation("deadlock", f"no thread can make progress: {where}", stuck)


def assert_quiescent(state: GlobalState, monitors: Optional[MonitorSet] = None,
                     context=None) -> Optional[Violation]:
    """Every status recycled, every tail empty and, with monitors, every next
    cell in an accepting context."""
    if not state.is_quiescent():
        statuses = ",".join(str(s) for s in state.status)
        tails = ",".join(str(t) for t in state.tails)
        return Violation("quiescence", f"terminal state not quiescent: status [{statuses}] tails [{tails}]")
    if monitors is not None and context is not None:
        unsettled = monitors.unsettled(context)
        if unsettled:
            return Violation("quiescence", f"cells not in an accepting context: {', '.join(unsettled)}")
    return None


def assert_run_order(state: GlobalState) -> Optional[Violation]:
    """Acquisitions climb strictly within a round; releases and abandonments
    rise then fall."""
    broken = [f.tid for f in state.frames if f.order_broken]
    if broken:
        return Violation("run-order", f"thread {broken[0]} broke the acquisition or release order",
                         tuple(broken))
    return None


def assert_no_starvation(state: GlobalState) -> Optional[Violation]:
    """A finished thread that never took a timeout step entered the critical
    section in every one of its rounds."""
    for f in state.frames:
        if f.done and not f.timed_out and f.outcomes != "C" * f.round:
            return Violation("starvation", f"thread {f.tid} never timed out but finished with {f.outcomes!r}",
                             (f.tid,))
    return None


@dataclass
class ExplorationReport(Serializable):
    """What an exploration found."""
    config: str = ""
    digest: str = ""
    strategy: str = DFS
    variant: str = ProtocolVariant.CORRECT.value
    states_visited: int = 0
    transitions: int = 0
    max_depth: int = 0
    terminal_states: int = 0
    deadlocks: int = 0
    # messages of the violations found; exploration stops at the first one
    violations: List[str] = list_field()
    # the offending schedules, in trace file format
    traces: List[str] = list_field()
    # automaton -> "source->target [actor, kind]" -> hits
    coverage: Dict[str, Dict[str, int]] = dict_field()
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def uncovered(self, kind: FieldKind) -> List[str]:
        return [edge for edge, hits in self.coverage.get(kind.value, {}).items() if hits == 0]

    def coverage_complete(self, kinds: Sequence[FieldKind]) -> bool:
        return all(kind.value in self.coverage and not self.uncovered(kind) for kind in kinds)

    def summary_lines(self, timing: bool = True) -> List[str]:
        lines = [
            f"config={self.config}",
            f"digest={self.digest}",
            f"strategy={self.strategy}",
            f"variant={self.variant}",
            f"states={self.states_visited}",
            f"transitions={self.transitions}",
            f"max_depth={self.max_depth}",
            f"terminal_states={self.terminal_states}",
            f"deadlocks={self.deadlocks}",
            f"violations={len(self.violations)}",
        ]
        if timing:
            lines.append(f"elapsed={self.elapsed:.3f}")
        return lines


class ReplayResult(NamedTuple):
    state: GlobalState
    labels: List[Tuple[ActionLabel, ...]]
    events: List[ProtocolEvent]


class _Child(NamedTuple):
    step: Step
    state: GlobalState
    context: tuple


class Explorer:
    """Explores every interleaving of one configuration."""

    def __init__(self, config: Config, variant: ProtocolVariant = ProtocolVariant.CORRECT,
                 state_cap: Optional[int] = None):
        self.config = config.validate()
        self.variant = variant
        self.topology = Topology(config)
        self.protocol = Protocol(self.topology, variant)
        self.monitors = MonitorSet(self.topology)
        self.state_cap = state_cap if state_cap is not None else config.state_cap
        self.report = ExplorationReport(config=config.name, digest=config.digest(), variant=variant.value)

    # ------------------------------------------------------------ checking

    def _trace(self, path: Sequence[Step]) -> Trace:
        return Trace.of(self.config, path, self.variant)

    def _fail(self, violation: Violation, path: Sequence[Step]) -> AssertionViolated:
        return AssertionViolated(violation.message, violation.assertion, trace=self._trace(path),
                                 threads=violation.threads, levels=violation.levels)

    def _expand(self, state: GlobalState, context: tuple, path_of: Callable[[], List[Step]]) -> List[_Child]:
        """All productive successors, conformance-checked."""
        children = []
        for thread in range(len(state.frames)):
            for choice in self.protocol.enabled_choices(state, thread):
                step = (thread, choice)
                try:
                    result = self.protocol.step(state, thread, choice)
                except IllegalStep as e:
                    raise AssertionViolated(str(e), "illegal-step", trace=self._trace(path_of() + [step])) from e
                if result.state == state:
                    continue
                try:
                    child_context = self.monitors.advance(context, result.labels)
                except ConformanceViolation as e:
                    e.trace = self._trace(path_of() + [step])
                    raise
                children.append(_Child(step, result.state, child_context))
        return children

    def _check(self, state: GlobalState, context: tuple, path_of: Callable[[], List[Step]]) -> List[_Child]:
        """Runs the state assertions and returns the state's successors."""
        for violation in (assert_mutual_exclusion(state, self.topology), assert_run_order(state)):
            if violation is not None:
                raise self._fail(violation, path_of())
        children = self._expand(state, context, path_of)
        if children:
            return children
        if not state.all_done:
            self.report.deadlocks += 1
            raise self._fail(assert_no_deadlock(state, self.protocol)
                             or Violation("deadlock", "no productive step"), path_of())
        self.report.terminal_states += 1
        for violation in (assert_quiescent(state, self.monitors, context), assert_no_starvation(state)):
            if violation is not None:
                raise self._fail(violation, path_of())
        self.monitors.finish(context)
        return children

    def _count_state(self, depth: int) -> None:
        self.report.states_visited += 1
        self.report.max_depth = max(self.report.max_depth, depth)
        if self.report.states_visited > self.state_cap:
            raise ResourceBudgetExceeded(
                f"state cap of {self.state_cap} reached exploring {self.config.name}",
                states_visited=self.report.states_visited,
            )
        if self.report.states_visited % 100_000 == 0:
            logger.debug(f"{self.report.states_visited} states, depth {depth}")

    @staticmethod
    def _key(state: GlobalState, context: tuple):
        return state.encode(), context

    # ----------------------------------------------------------- traversals

    def _dfs(self) -> None:
        root = initial_state(self.topology)
        context = self.monitors.initial()
        visited = {self._key(root, context)}
        path: List[Step] = []
        self._count_state(0)
        stack = [[self._check(root, context, lambda: list(path)), 0]]
        while stack:
            top = stack[-1]
            children, index = top
            if index == len(children):
                stack.pop()
                if path:
                    path.pop()
                continue
            top[1] += 1
            child = children[index]
            self.report.transitions += 1
            key = self._key(child.state, child.context)
            if key in visited:
                continue
            visited.add(key)
            path.append(child.step)
            self._count_state(len(path))
            stack.append([self._check(child.state, child.context, lambda: list(path)), 0])

    def _bfs(self) -> None:
        root = initial_state(self.topology)
        context = self.monitors.initial()
        root_key = self._key(root, context)
        parents: Dict[object, Tuple[object, Optional[Step]]] = {root_key: (None, None)}
        frontier = deque([(root, context, root_key, 0)])
        self._count_state(0)

        def path_to(key) -> List[Step]:
            steps = []
            while True:
                parent, step = parents[key]
                if parent is None:
                    return steps[::-1]
                steps.append(step)
                key = parent

        while frontier:
            state, ctx, key, depth = frontier.popleft()
            for child in self._check(state, ctx, lambda: path_to(key)):
                self.report.transitions += 1
                child_key = self._key(child.state, child.context)
                if child_key in parents:
                    continue
                parents[child_key] = (key, child.step)
                self._count_state(depth + 1)
                frontier.append((child.state, child.context, child_key, depth + 1))

    def run(self, strategy: str = DFS) -> ExplorationReport:
        """Explores everything. Raises AssertionViolated, ConformanceViolation
        or ResourceBudgetExceeded; the partial report is in `e.payload["report"]`."""
        if strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
        self.report.strategy = strategy
        logger.info(f"exploring {self.config.name} ({strategy}, {self.variant.value})")
        start = time.perf_counter()
        try:
            if strategy == DFS:
                self._dfs()
            else:
                self._bfs()
        except HmcstError as e:
            if isinstance(e, (AssertionViolated, ConformanceViolation)):
                self.report.violations.append(str(e))
                if e.trace is not None:
                    self.report.traces.append(e.trace.dumps())
            e.payload["report"] = self.report
            raise
        finally:
            self.report.elapsed = time.perf_counter() - start
            self.report.coverage = {
                kind.value: {str(edge): hits for edge, hits in self.monitors.coverage(kind).items()}
                for kind in self.monitors.kinds_in_use
            }
        logger.info(f"explored {self.report.states_visited} states of {self.config.name}")
        return self.report

    # --------------------------------------------------------------- replay

    def replay(self, trace: Trace) -> ReplayResult:
        """Re-executes `trace`, re-checking every assertion along the way."""
        trace.bind(self.config)
        state = initial_state(self.topology)
        context = self.monitors.initial()
        labels: List[Tuple[ActionLabel, ...]] = []
        events: List[ProtocolEvent] = []
        path: List[Step] = []
        for index, (thread, choice) in enumerate(trace.steps):
            last = index == len(trace.steps) - 1
            step = (thread, choice)
            try:
                result = self.protocol.step(state, thread, choice)
            except UnknownThread as e:
                raise MalformedTrace(f"step {index}: {e}", step=index) from e
            except IllegalStep as e:
                if last:
                    raise AssertionViolated(str(e), "illegal-step", trace=self._trace(path + [step])) from e
                raise MalformedTrace(f"step {index} cannot be taken: {e}", step=index) from e
            path.append(step)
            try:
                context = self.monitors.advance(context, result.labels, record=False)
            except ConformanceViolation as e:
                e.trace = self._trace(path)
                raise
            state = result.state
            labels.append(result.labels)
            events.extend(result.events)
            for violation in (assert_mutual_exclusion(state, self.topology), assert_run_order(state)):
                if violation is not None:
                    raise self._fail(violation, path)
        if state.all_done:
            for violation in (assert_quiescent(state, self.monitors, context), assert_no_starvation(state)):
                if violation is not None:
                    raise self._fail(violation, path)
        else:
            violation = assert_no_deadlock(state, self.protocol)
            if violation is not None:
                raise self._fail(violation, path)
        return ReplayResult(state, labels, events)


def explore(config: Config, strategy: str = DFS, variant: ProtocolVariant = ProtocolVariant.CORRECT,
            state_cap: Optional[int] = None) -> ExplorationReport:
    return Explorer(config, variant, state_cap).run(strategy)


def replay(config: Config, trace: Trace, variant: Optional[ProtocolVariant] = None) -> ReplayResult:
    """Replays `trace` against `config` (and the trace's protocol variant
    unless another one is given)."""
    return Explorer(config, variant or trace.variant).replay(trace)


def coverage_report(report: ExplorationReport, kinds: Sequence[FieldKind]) -> str:
    """Tabular coverage text of the given automata, from a finished report."""
    blocks = []
    for kind in kinds:
        counts = report.coverage.get(kind.value, {})
        hits = {edge: counts.get(str(edge), 0) for edge in build_nfa(kind).edges}
        blocks.append(coverage_table(kind, hits))
    return "\n".join(blocks)


def coverage_key_values(report: ExplorationReport, kinds: Sequence[FieldKind]) -> List[str]:
    lines: List[str] = []
    for kind in kinds:
        counts = report.coverage.get(kind.value, {})
        lines.extend(coverage_lines(kind, {edge: counts.get(str(edge), 0) for edge in build_nfa(kind).edges}))
    return lines
