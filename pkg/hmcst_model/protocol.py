"""Small-step semantics of the hierarchical abortable queue lock.

Every call to `Protocol.step` performs one access to a shared cell (a read,
a write, a swap or a compare-and-swap on a status, next or tail cell) on
behalf of one thread. Two kinds of step also look at a second cell: finding
its own node recycled, the owner reads the next cell it is about to reuse,
which no other thread writes any more; and a root owner that returned to a
node it had abandoned only reverts its wait if the next cell shows no
successor committed to recycling the node. The only nondeterminism is which
thread is scheduled and, at waiting points, whether the thread's patience runs
out.

Each step returns the new state, the `ActionLabel`s describing what it did to
status and next cells, and the `ProtocolEvent`s (acquire, release, delegate,
abandon ...) that the ordering witnesses are built from.

Some labels are "context labels": the cell value does not change (old == new)
but the step moves the node to another context of the same value. Those are
the value-preserving edges of the automata (0_1->0_2, U1->U3, S1->S1, ...).
"""
import enum
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .errors import IllegalStep, MalformedTrace, UnknownThread
from .logging_utils import get_logger
from .state import NO_NODE, WAIT_PCS, GlobalState, Held, Pc, PlanStep, ThreadFrame, initial_state
from .topology import Topology
from .values import (ABANDONED, IMPATIENT, LEFT_PREFIX, NULL, PARENT_PREFIX, RECYCLED, UNLOCKED, WAIT, Actor,
                     EdgeKind, Field, NextKind, NextValue, StatusKind, StatusValue, cohort, pass_all,
                     predecessor_mark, successor)

logger = get_logger(__file__)


class Choice(enum.Enum):
    PROCEED = "proceed"
    OBSERVE = "observe-status"
    TIMEOUT = "timeout"
    EXIT_CS = "exit-critical-section"


class ProtocolVariant(enum.Enum):
    """The correct protocol, or one seeded bug.

    SKIP_CAS: the release stores an empty tail instead of compare-and-swapping it.
    DROP_STATUS_WRITE: a releasing thread never recycles its own node.
    REORDER_RELEASE: locks are released from the lowest level upwards.
    NO_IMPATIENCE_MARK: an impatient releaser leaves without marking its node.
    WRONG_DEPTH: a delegating pass names one level too few.
    NO_TIMEOUT_NO_PASS: no timeouts, and the lock is never written into a
        waiting successor's status.
    """
    CORRECT = "correct"
    SKIP_CAS = "skip-cas"
    DROP_STATUS_WRITE = "drop-status-write"
    REORDER_RELEASE = "reorder-release"
    NO_IMPATIENCE_MARK = "no-impatience-mark"
    WRONG_DEPTH = "wrong-depth"
    NO_TIMEOUT_NO_PASS = "no-timeout-no-pass"


MUTATIONS = [v for v in ProtocolVariant if v is not ProtocolVariant.CORRECT]

# event kinds
ACQUIRE = "acquire"
RELEASE = "release"
DELEGATE = "delegate"
ABANDON = "abandon"
ENTER_CS = "enter-cs"
ROUND_END = "round-end"

# release plan modes
FREE = "free"
DELEGATE_PLAN = "delegate"
RESUME = "resume"


class ActionLabel(NamedTuple):
    """One status or next cell access, as seen by the conformance monitors."""
    node: int
    field: Field
    old: object
    new: object
    # role claimed by the protocol for the acting thread
    actor: Actor
    kind: EdgeKind
    thread: int

    def __str__(self) -> str:
        return (f"t{self.thread} {self.field.value}[{self.node}] {self.old}->{self.new} "
                f"({self.actor.value}, {self.kind.value})")


class ProtocolEvent(NamedTuple):
    thread: int
    kind: str
    level: int
    # acquisition round (0-based) the event belongs to
    round: int


class StepResult(NamedTuple):
    state: GlobalState
    labels: Tuple[ActionLabel, ...] = ()
    events: Tuple[ProtocolEvent, ...] = ()


class _Step:
    """Scratch space of one step: the evolving state, the acting frame and
    what has been emitted so far."""

    def __init__(self, state: GlobalState, frame: ThreadFrame, choice: Choice):
        self.state = state
        self.frame = frame
        self.choice = choice
        self.labels: List[ActionLabel] = []
        self.events: List[ProtocolEvent] = []

    def go(self, **changes) -> None:
        self.frame = self.frame._replace(**changes)


class Protocol:
    """The step function for one configuration and protocol variant."""

    def __init__(self, topology: Topology, variant: ProtocolVariant = ProtocolVariant.CORRECT):
        self.topology = topology
        self.variant = variant
        self.threshold = topology.config.passing_threshold
        self.top = topology.levels
        self._handlers: Dict[Pc, Callable[[_Step], None]] = {
            Pc.AQ_SWAP: self._aq_swap,
            Pc.AQ_RESET: self._aq_reset,
            Pc.AQ_ENQ: self._aq_enqueue,
            Pc.AQ_OWN: self._aq_own,
            Pc.AQ_LINK: self._aq_link,
            Pc.AQ_AWAIT_P: self._aq_await_pred_leave,
            Pc.AQ_RECYCLE_PRED: self._aq_recycle_pred,
            Pc.AQ_WAIT: self._aq_wait,
            Pc.AQ_NEWCOHORT: self._aq_new_cohort,
            Pc.AQ_INHERIT: self._aq_inherit,
            Pc.AQ_RWAIT: self._aq_wait_recycle,
            Pc.AQ_RLEAVE: self._aq_leave_node,
            Pc.AQ_ABSTRACT: self._aq_abstract,
            Pc.CS: self._critical_section,
            Pc.REL_SCAN: self._rel_scan,
            Pc.RL_ABSTRACT: self._rl_abstract,
            Pc.RL_READ: self._rl_read,
            Pc.RL_TAILCAS: self._rl_tail_cas,
            Pc.RL_WAITLINK: self._rl_wait_link,
            Pc.RL_PMARK: self._rl_mark_pred,
            Pc.RL_PASS: self._rl_pass,
            Pc.RL_RECYCLE: self._rl_recycle,
            Pc.RL_MARKP: self._rl_leave_parent,
        }

    # ------------------------------------------------------------------ API

    def frame(self, state: GlobalState, thread: int) -> ThreadFrame:
        if not isinstance(thread, int) or not 0 <= thread < len(state.frames):
            raise UnknownThread(f"no thread with id {thread!r} (configuration has {len(state.frames)})",
                                thread=thread)
        return state.frames[thread]

    def enabled_choices(self, state: GlobalState, thread: int) -> Tuple[Choice, ...]:
        """Choices the scheduler may make for `thread`, in the fixed exploration order."""
        pc = self.frame(state, thread).pc
        no_timeouts = self.variant is ProtocolVariant.NO_TIMEOUT_NO_PASS
        if pc is Pc.DONE:
            return ()
        if pc is Pc.CS:
            return (Choice.EXIT_CS,)
        if pc in WAIT_PCS:
            return (Choice.OBSERVE,) if no_timeouts else (Choice.OBSERVE, Choice.TIMEOUT)
        if pc is Pc.AQ_AWAIT_P:
            return (Choice.OBSERVE,)
        if pc is Pc.AQ_ABSTRACT:
            return (Choice.PROCEED,) if no_timeouts else (Choice.PROCEED, Choice.TIMEOUT)
        return (Choice.PROCEED,)

    def step(self, state: GlobalState, thread: int, choice: Optional[Choice] = None) -> StepResult:
        """Performs one atomic step of `thread`. Without a choice, the first
        enabled one (never a timeout) is taken."""
        frame = self.frame(state, thread)
        choices = self.enabled_choices(state, thread)
        if not choices:
            raise IllegalStep(f"thread {thread} has completed all of its rounds", thread=thread)
        if choice is None:
            choice = choices[0]
        if choice not in choices:
            raise IllegalStep(
                f"thread {thread} at {frame.pc.value} cannot take {choice.value}; "
                f"enabled: {[c.value for c in choices]}",
                thread=thread, pc=frame.pc.value,
            )
        s = _Step(state, frame, choice)
        self._handlers[frame.pc](s)
        if choice is Choice.TIMEOUT and (s.state != state or s.frame != frame):
            s.go(timed_out=True)
        return StepResult(s.state.with_frame(s.frame), tuple(s.labels), tuple(s.events))

    def is_productive(self, state: GlobalState, thread: int, choice: Choice) -> bool:
        """Whether the step changes anything. Spinning on an unchanged cell does not."""
        return self.step(state, thread, choice).state != state

    # -------------------------------------------------------------- helpers

    def _own(self, frame: ThreadFrame, level: Optional[int] = None) -> int:
        return self.topology.node_at(frame.tid, frame.level if level is None else level)

    def _is_root(self, level: int) -> bool:
        return self.topology.is_root_level(level)

    def _label(self, s: _Step, node: int, field: Field, old, new, actor: Actor, kind: EdgeKind) -> None:
        s.labels.append(ActionLabel(node, field, old, new, actor, kind, s.frame.tid))

    def _write_status(self, s: _Step, node: int, new: StatusValue, actor: Actor,
                      kind: EdgeKind = EdgeKind.NORMAL) -> StatusValue:
        old = s.state.status[node]
        s.state = s.state.with_status(node, new)
        self._label(s, node, Field.STATUS, old, new, actor, kind)
        return old

    def _write_next(self, s: _Step, node: int, new: NextValue, actor: Actor,
                    kind: EdgeKind = EdgeKind.NORMAL) -> NextValue:
        old = s.state.next[node]
        s.state = s.state.with_next(node, new)
        self._label(s, node, Field.NEXT, old, new, actor, kind)
        return old

    def _context_status(self, s: _Step, node: int, actor: Actor, kind: EdgeKind) -> None:
        value = s.state.status[node]
        self._label(s, node, Field.STATUS, value, value, actor, kind)

    def _context_next(self, s: _Step, node: int, actor: Actor, kind: EdgeKind) -> None:
        value = s.state.next[node]
        self._label(s, node, Field.NEXT, value, value, actor, kind)

    def _event(self, s: _Step, kind: str, level: int) -> None:
        f = s.frame
        s.events.append(ProtocolEvent(f.tid, kind, level, f.round))
        if kind == ACQUIRE:
            if level <= f.last_acquired:
                s.go(order_broken=True)
            s.go(last_acquired=level)
        elif kind in (RELEASE, DELEGATE, ABANDON):
            if f.last_released:
                if level == f.last_released or (f.release_falling and level > f.last_released):
                    s.go(order_broken=True)
                elif level < f.last_released:
                    s.go(release_falling=True)
            s.go(last_released=level)

    def _illegal(self, s: _Step, what: str) -> IllegalStep:
        f = s.frame
        message = f"thread {f.tid} at {f.pc.value} (level {f.level}): {what}"
        logger.debug(message)
        return IllegalStep(message, thread=f.tid, pc=f.pc.value, level=f.level)

    def _release_actor(self, frame: ThreadFrame) -> Actor:
        return Actor.PREDECESSOR if frame.walking else Actor.SELF

    # ---------------------------------------------------------- acquisition

    def _begin_context(self, s: _Step, node: int) -> None:
        """Re-acquiring a node that is still linked keeps its next value."""
        if s.state.next[node].kind is not NextKind.NULL:
            self._context_next(s, node, Actor.SELF, EdgeKind.BEGIN)

    def _aq_swap(self, s: _Step) -> None:
        f = s.frame
        level = f.level
        q = self._own(f)
        root = self._is_root(level)
        self._event(s, ACQUIRE, level)
        s.go(marked=f.with_marked(level, False).marked)
        old = self._write_status(s, q, WAIT, Actor.SELF, EdgeKind.BEGIN)
        if f.climb_to >= level:
            # climbing a delegated pass: the node must still carry the cohort value
            if old.kind is not StatusKind.COHORT:
                raise self._illegal(s, f"climbing a delegated pass found {old}")
            self._begin_context(s, q)
            s.go(pc=Pc.AQ_INHERIT, seen=old)
        elif old == RECYCLED:
            if s.state.next[q] == NULL:
                self._context_next(s, q, Actor.SELF, EdgeKind.BEGIN)
                s.go(pc=Pc.AQ_ENQ, seen=WAIT, reenq=False, walked=False)
            else:
                s.go(pc=Pc.AQ_RESET, seen=WAIT, walked=False)
        elif old == ABANDONED:
            self._begin_context(s, q)
            s.go(pc=Pc.AQ_WAIT, seen=WAIT)
        elif root and old == UNLOCKED:
            self._begin_context(s, q)
            # an unlocked value this thread did not leave behind itself was
            # passed in while the node stood abandoned
            s.go(pc=Pc.AQ_RWAIT, seen=WAIT, walked=not f.marked[level])
        elif not root and old.kind in (StatusKind.PASS_ALL, StatusKind.PARENT_PREFIX):
            self._begin_context(s, q)
            s.go(pc=Pc.AQ_RWAIT, seen=WAIT, walked=old != LEFT_PREFIX)
        else:
            raise self._illegal(s, f"swap found unexpected status {old}")

    def _aq_reset(self, s: _Step) -> None:
        q = self._own(s.frame)
        old = self._write_next(s, q, NULL, Actor.SELF, EdgeKind.BEGIN)
        if old.kind is NextKind.NULL:
            raise self._illegal(s, "reset of an already empty next cell")
        s.go(pc=Pc.AQ_ENQ, reenq=False)

    def _aq_enqueue(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        lock = self.topology.lock_of(q)
        pred = s.state.tails[lock]
        s.state = s.state.with_tail(lock, q)
        if f.reenq:
            self._context_next(s, q, Actor.SELF, EdgeKind.BEGIN)
        if pred == q:
            raise self._illegal(s, "node enqueued twice")
        if pred == NO_NODE:
            s.go(pc=Pc.AQ_OWN, prev=NO_NODE, reenq=False)
        else:
            s.go(pc=Pc.AQ_LINK, prev=pred, reenq=False)

    def _aq_own(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        if self._is_root(f.level):
            self._write_status(s, q, UNLOCKED, Actor.SELF)
            s.go(held=f.with_held(f.level, Held.ROOT).held)
        else:
            self._write_status(s, q, cohort(1), Actor.SELF)
            f = f.with_held(f.level, Held.COHORT).with_count(f.level, 1)
            s.go(held=f.held, counts=f.counts)
        self._acquired(s)

    def _aq_link(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        old = self._write_next(s, f.prev, successor(q), Actor.SUCCESSOR)
        if old == NULL:
            s.go(pc=Pc.AQ_WAIT)
        elif old == IMPATIENT:
            # the predecessor left without waiting for us; we recycle its node
            s.go(pc=Pc.AQ_RECYCLE_PRED if self._is_root(f.level) else Pc.AQ_AWAIT_P)
        else:
            raise self._illegal(s, f"predecessor next cell holds {old}")

    def _aq_await_pred_leave(self, s: _Step) -> None:
        if s.state.status[s.frame.prev] == LEFT_PREFIX:
            s.go(pc=Pc.AQ_RECYCLE_PRED)

    def _aq_recycle_pred(self, s: _Step) -> None:
        self._write_status(s, s.frame.prev, RECYCLED, Actor.SUCCESSOR)
        s.go(pc=Pc.AQ_OWN, prev=NO_NODE)

    def _aq_wait(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        value = s.state.status[q]
        if s.choice is Choice.TIMEOUT and value == f.seen:
            self._write_status(s, q, ABANDONED, Actor.SELF, EdgeKind.TIMEOUT)
            self._abandon(s)
        elif value.kind in (StatusKind.UNLOCKED_ROOT, StatusKind.PASS_ALL, StatusKind.PARENT_PREFIX):
            # a failed timeout CAS reveals the grant just like an observation
            self._granted(s, value)
        elif value != f.seen:
            raise self._illegal(s, f"waiting node holds {value}")

    def _granted(self, s: _Step, value: StatusValue) -> None:
        f = s.frame
        level = f.level
        root = self._is_root(level)
        if value == UNLOCKED and root:
            s.go(held=f.with_held(level, Held.ROOT).held)
            self._acquired(s)
        elif value.kind is StatusKind.PASS_ALL and not root:
            if value.depth < level:
                raise self._illegal(s, f"received {value} below its own level")
            f = f.with_held(level, Held.PASSED).with_count(level, value.count)
            s.go(held=f.held, counts=f.counts, climb_to=value.depth)
            self._acquired(s)
        elif value == PARENT_PREFIX and not root:
            s.go(pc=Pc.AQ_NEWCOHORT)
        else:
            raise self._illegal(s, f"granted with {value}")

    def _aq_new_cohort(self, s: _Step) -> None:
        f = s.frame
        self._write_status(s, self._own(f), cohort(1), Actor.SELF)
        f = f.with_held(f.level, Held.COHORT).with_count(f.level, 1)
        s.go(held=f.held, counts=f.counts)
        self._acquired(s)

    def _aq_inherit(self, s: _Step) -> None:
        f = s.frame
        self._write_status(s, self._own(f), f.seen, Actor.SELF)
        f = f.with_held(f.level, Held.INHERITED).with_count(f.level, f.seen.count)
        s.go(held=f.held, counts=f.counts, seen=None)
        self._acquired(s)

    def _aq_wait_recycle(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        root = self._is_root(f.level)
        if s.choice is Choice.TIMEOUT and not root and f.walked and f.seen == WAIT:
            # the walking predecessor still needs the status unless it already
            # marked the node impatient; only then may we leave
            if s.state.next[q] == IMPATIENT:
                s.go(pc=Pc.AQ_RLEAVE)
            return
        value = s.state.status[q]
        if value == RECYCLED:
            if s.state.next[q] == NULL:
                s.go(pc=Pc.AQ_ENQ, seen=RECYCLED, reenq=True, walked=False)
            else:
                s.go(pc=Pc.AQ_RESET, seen=RECYCLED, walked=False)
            return
        if s.choice is Choice.OBSERVE or value != f.seen:
            if value != f.seen:
                s.go(seen=value)
            return
        if root:
            if f.walked and s.state.next[q].kind in (NextKind.IMPATIENCE_MARK, NextKind.SUCCESSOR):
                # the predecessor may be gone: a successor recycles the node
                return
            self._write_status(s, q, UNLOCKED, Actor.SELF, EdgeKind.TIMEOUT)
            s.go(marked=s.frame.with_marked(f.level, not f.walked).marked)
            self._abandon(s)
        else:
            self._leave_node(s, q)

    def _aq_leave_node(self, s: _Step) -> None:
        f = s.frame
        q = self._own(f)
        value = s.state.status[q]
        if value == f.seen:
            self._leave_node(s, q)
        else:
            s.go(pc=Pc.AQ_RWAIT, seen=value)

    def _leave_node(self, s: _Step, q: int) -> None:
        self._write_status(s, q, LEFT_PREFIX, Actor.SELF, EdgeKind.TIMEOUT)
        self._abandon(s)

    def _aq_abstract(self, s: _Step) -> None:
        self._event(s, ACQUIRE, s.frame.level)
        if s.choice is Choice.TIMEOUT:
            self._abandon(s)
        else:
            s.go(held=s.frame.with_held(s.frame.level, Held.ABSTRACT).held)
            self._enter_cs(s)

    def _acquired(self, s: _Step) -> None:
        """Moves on after the lock at the current level is held."""
        f = s.frame
        if f.level >= self.top:
            self._enter_cs(s)
            return
        nxt = f.level + 1
        if nxt <= f.climb_to and nxt == self.top:
            # the root (or abstract root) came with a delegated pass
            s.go(held=f.with_held(nxt, Held.CONVEYED).held, level=nxt)
            self._enter_cs(s)
        elif self.topology.is_abstract(nxt):
            s.go(pc=Pc.AQ_ABSTRACT, level=nxt)
        else:
            s.go(pc=Pc.AQ_SWAP, level=nxt, seen=None)

    def _enter_cs(self, s: _Step) -> None:
        self._event(s, ENTER_CS, s.frame.level)
        s.go(pc=Pc.CS, cs_this_round=True)

    def _abandon(self, s: _Step) -> None:
        """Gives up at the current level and releases everything below it."""
        f = s.frame
        self._event(s, ABANDON, f.level)
        s.go(timed_out_this_round=True)
        held = s.frame.held_levels()
        if not held:
            self._round_end(s)
        else:
            self._start_release(s, max(held))

    def _critical_section(self, s: _Step) -> None:
        self._start_release(s, self.top)

    # -------------------------------------------------------------- release

    def _conveyable(self, frame: ThreadFrame, level: int) -> bool:
        """Whether the lock at `level` may ride along a delegating pass."""
        how = frame.held[level]
        if level == self.top:
            return how in (Held.ROOT, Held.ABSTRACT, Held.CONVEYED)
        return how in (Held.COHORT, Held.INHERITED)

    @staticmethod
    def _frees(high: int, low: int) -> Tuple[PlanStep, ...]:
        return tuple(PlanStep(FREE, level) for level in range(high, low - 1, -1))

    def _start_release(self, s: _Step, high: int) -> None:
        f = s.frame
        low = min(f.held_levels())
        if self.variant is ProtocolVariant.REORDER_RELEASE:
            plan = tuple(PlanStep(FREE, level) for level in range(low, high + 1))
            s.go(plan=plan, release_top=high)
            self._next_plan(s)
        elif low == high:
            s.go(plan=self._frees(high, low), release_top=high)
            self._next_plan(s)
        else:
            s.go(pc=Pc.REL_SCAN, level=low, release_top=high)

    def _rel_scan(self, s: _Step) -> None:
        """Looks for a successor at the current level to delegate to."""
        f = s.frame
        level, high = f.level, f.release_top
        low = min(f.held_levels())
        nxt = s.state.next[self._own(f)]
        if (nxt.kind is NextKind.SUCCESSOR and not self._is_root(level)
                and f.counts[level] < self.threshold):
            depth = level
            for m in range(level + 1, high + 1):
                if not self._conveyable(f, m):
                    break
                depth = m
            if depth > level:
                plan = (self._frees(high, depth + 1)
                        + (PlanStep(DELEGATE_PLAN, level, depth),)
                        + self._frees(level - 1, low))
                s.go(plan=plan)
                self._next_plan(s)
                return
        if level + 1 < high and not self._is_root(level + 1):
            s.go(level=level + 1)
        else:
            s.go(plan=self._frees(high, low))
            self._next_plan(s)

    def _next_plan(self, s: _Step) -> None:
        f = s.frame
        if not f.plan:
            self._round_end(s)
            return
        head, rest = f.plan[0], f.plan[1:]
        s.go(plan=rest, level=head.level, walking=False, prev=NO_NODE, succ=NO_NODE,
             succ_abandoned=False)
        if head.mode == FREE:
            if self.topology.is_abstract(head.level):
                s.go(pc=Pc.RL_ABSTRACT)
            else:
                val = UNLOCKED if self._is_root(head.level) else PARENT_PREFIX
                s.go(pc=Pc.RL_READ, cursor=self._own(f, head.level), val=val)
        elif head.mode == DELEGATE_PLAN:
            depth = head.depth
            if self.variant is ProtocolVariant.WRONG_DEPTH:
                depth = max(head.level, depth - 1)
            val = pass_all(depth, f.counts[head.level] + 1)
            s.go(pc=Pc.RL_READ, cursor=self._own(f, head.level), val=val)
        elif head.mode == RESUME:
            s.go(pc=Pc.RL_READ, cursor=head.cursor, prev=head.prev, walking=True,
                 val=PARENT_PREFIX)
        else:
            raise self._illegal(s, f"unknown release step {head}")

    def _let_go(self, s: _Step, low: int, high: int, kind: str) -> None:
        """Stops holding levels `high` down to `low`."""
        f = s.frame
        for level in range(high, low - 1, -1):
            f = f.with_held(level, Held.NONE).with_count(level, 0)
            self._event(s, kind, level)
        s.go(held=f.held, counts=f.counts)

    def _rl_abstract(self, s: _Step) -> None:
        self._let_go(s, s.frame.level, s.frame.level, RELEASE)
        self._next_plan(s)

    def _rl_read(self, s: _Step) -> None:
        f = s.frame
        nxt = s.state.next[f.cursor]
        if nxt == NULL:
            if f.val.kind is StatusKind.PASS_ALL and f.val.depth > f.level:
                # nobody left to take the delegated levels: free them first,
                # then come back here with a plain prefix pass
                plan = (self._frees(f.val.depth, f.level + 1)
                        + (PlanStep(RESUME, f.level, cursor=f.cursor, prev=f.prev),)
                        + f.plan)
                s.go(plan=plan)
                self._next_plan(s)
            else:
                s.go(pc=Pc.RL_TAILCAS)
        elif nxt.kind is NextKind.SUCCESSOR:
            s.go(pc=Pc.RL_PMARK if f.walking else Pc.RL_PASS, succ=nxt.node)
        else:
            raise self._illegal(s, f"release found next cell {nxt}")

    def _rl_tail_cas(self, s: _Step) -> None:
        f = s.frame
        c = f.cursor
        lock = self.topology.lock_of(c)
        skip_cas = self.variant is ProtocolVariant.SKIP_CAS
        if s.state.tails[lock] == c or skip_cas:
            s.state = s.state.with_tail(lock, NO_NODE)
            self._context_next(s, c, self._release_actor(f), EdgeKind.NORMAL)
            self._let_go(s, f.level, f.level, RELEASE)
            s.go(pc=Pc.RL_RECYCLE, succ_abandoned=False)
        else:
            s.go(pc=Pc.RL_WAITLINK)

    def _rl_wait_link(self, s: _Step) -> None:
        f = s.frame
        c = f.cursor
        nxt = s.state.next[c]
        if nxt.kind is NextKind.SUCCESSOR:
            s.go(pc=Pc.RL_PMARK if f.walking else Pc.RL_PASS, succ=nxt.node)
            return
        if s.choice is Choice.OBSERVE:
            return
        # impatient: leave before the successor links itself
        actor = self._release_actor(f)
        root = self._is_root(f.level)
        s.go(timed_out_this_round=True)
        if self.variant is ProtocolVariant.NO_IMPATIENCE_MARK:
            self._let_go(s, f.level, f.level, RELEASE)
            self._next_plan(s)
            return
        self._write_next(s, c, IMPATIENT, actor, EdgeKind.TIMEOUT)
        if root:
            # context label only, the status cell is not accessed: an
            # unlocked node now waits for its successor to recycle it
            if s.state.status[c] == UNLOCKED:
                self._context_status(s, c, actor, EdgeKind.TIMEOUT)
            if not f.walking:
                s.go(marked=s.frame.with_marked(f.level, True).marked)
            self._let_go(s, f.level, f.level, RELEASE)
            self._next_plan(s)
        else:
            s.go(pc=Pc.RL_MARKP)

    def _rl_leave_parent(self, s: _Step) -> None:
        """Leaves a non-root node after marking it impatient. The successor
        recycles it once it sees a leaving P."""
        f = s.frame
        c = f.cursor
        if not f.walking:
            self._write_status(s, c, LEFT_PREFIX, Actor.SELF, EdgeKind.TIMEOUT)
        else:
            value = s.state.status[c]
            # a compare-and-swap against the passed value, or against the wait
            # of an owner that came back; an owner that already left wins
            if value == WAIT or value == PARENT_PREFIX or value.kind is StatusKind.PASS_ALL:
                self._write_status(s, c, LEFT_PREFIX, Actor.PREDECESSOR, EdgeKind.TIMEOUT)
        self._let_go(s, f.level, f.level, RELEASE)
        self._next_plan(s)

    def _rl_mark_pred(self, s: _Step) -> None:
        f = s.frame
        prev = f.prev if f.prev != NO_NODE else self._own(f)
        self._write_next(s, f.cursor, predecessor_mark(prev), Actor.PREDECESSOR)
        s.go(pc=Pc.RL_PASS)

    def _rl_pass(self, s: _Step) -> None:
        f = s.frame
        if self.variant is ProtocolVariant.NO_TIMEOUT_NO_PASS:
            old = s.state.status[f.succ]
        else:
            old = self._write_status(s, f.succ, f.val, Actor.PREDECESSOR)
        if old == ABANDONED:
            s.go(pc=Pc.RL_RECYCLE, succ_abandoned=True)
        elif old in (WAIT, RECYCLED):
            if f.val.kind is StatusKind.PASS_ALL:
                self._let_go(s, f.level, f.val.depth, DELEGATE)
            else:
                self._let_go(s, f.level, f.level, RELEASE)
            s.go(pc=Pc.RL_RECYCLE, succ_abandoned=False)
        else:
            raise self._illegal(s, f"successor status {old} cannot take a pass")

    def _rl_recycle(self, s: _Step) -> None:
        f = s.frame
        c = f.cursor
        drop = self.variant is ProtocolVariant.DROP_STATUS_WRITE and not f.walking
        if not drop:
            self._write_status(s, c, RECYCLED, self._release_actor(f))
        if f.succ_abandoned:
            s.go(pc=Pc.RL_READ, prev=c, cursor=f.succ, succ=NO_NODE, walking=True,
                 succ_abandoned=False)
        else:
            self._next_plan(s)

    def _round_end(self, s: _Step) -> None:
        f = s.frame
        if f.held_levels():
            raise self._illegal(s, f"round ends with levels {f.held_levels()} still held")
        if f.cs_this_round:
            outcome = "I" if f.timed_out_this_round else "C"
        else:
            outcome = "T"
        self._event(s, ROUND_END, f.level)
        finished = f.round + 1
        done = finished >= self.topology.rounds(f.tid)
        s.go(
            pc=Pc.DONE if done else Pc.AQ_SWAP,
            level=f.level if done else self.topology.start_level(f.tid),
            round=finished,
            climb_to=0, seen=None, reenq=False, walked=False,
            cursor=NO_NODE, prev=NO_NODE, succ=NO_NODE, val=None, plan=(),
            release_top=0, walking=False, succ_abandoned=False,
            outcomes=f.outcomes + outcome,
            cs_this_round=False, timed_out_this_round=False,
            last_acquired=0, last_released=0, release_falling=False,
        )


def trace_events(trace) -> List[ProtocolEvent]:
    """Replays `trace` from the initial state and returns every event.

    `trace` is any object with `config`, `steps` (a sequence of
    (thread, Choice)) and `variant` attributes, usually a `hmcst_model.trace.Trace`.
    """
    if getattr(trace, "config", None) is None:
        raise MalformedTrace("trace carries no configuration to replay against")
    topology = Topology(trace.config)
    protocol = Protocol(topology, getattr(trace, "variant", ProtocolVariant.CORRECT))
    state = initial_state(topology)
    events: List[ProtocolEvent] = []
    for index, (thread, choice) in enumerate(trace.steps):
        try:
            result = protocol.step(state, thread, choice)
        except (IllegalStep, UnknownThread) as e:
            raise MalformedTrace(f"step {index} ({thread}, {choice}) cannot be replayed: {e}",
                                 step=index) from e
        state = result.state
        events.extend(result.events)
    return events


def _per_round(events: Sequence[ProtocolEvent], thread: int, kinds) -> List[list]:
    rounds: List[list] = []
    for e in events:
        if e.thread != thread:
            continue
        while len(rounds) <= e.round:
            rounds.append([])
        if e.kind in kinds:
            rounds[e.round].append(e)
    return rounds


def acquisition_order_witness(trace, thread: int) -> List[List[int]]:
    """Per round, the levels at which `thread` began an acquisition effort."""
    _check_thread(trace, thread)
    return [[e.level for e in r] for r in _per_round(trace_events(trace), thread, (ACQUIRE,))]


def release_order_witness(trace, thread: int) -> List[List[Tuple[int, str]]]:
    """Per round, the (level, kind) sequence of releases, delegations and
    abandonments of `thread`."""
    _check_thread(trace, thread)
    kinds = (RELEASE, DELEGATE, ABANDON)
    return [[(e.level, e.kind) for e in r] for r in _per_round(trace_events(trace), thread, kinds)]


def _check_thread(trace, thread: int) -> None:
    config = getattr(trace, "config", None)
    if config is not None and not 0 <= thread < len(config.threads):
        raise UnknownThread(f"no thread with id {thread} in configuration {config.name}", thread=thread)


def is_strictly_increasing(levels: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(levels, levels[1:]))


def is_bitonic(levels: Sequence[int]) -> bool:
    """Strictly increasing, then strictly decreasing (either part may be empty)."""
    i = 0
    while i + 1 < len(levels) and levels[i] < levels[i + 1]:
        i += 1
    while i + 1 < len(levels) and levels[i] > levels[i + 1]:
        i += 1
    return i + 1 >= len(levels)
