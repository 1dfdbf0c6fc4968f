"""Global state of a configuration: shared cells plus every thread frame."""
import enum
from typing import NamedTuple, Optional, Tuple

from .topology import Topology
from .values import NULL, RECYCLED, NextValue, StatusValue

NO_NODE = -1


class Pc(enum.Enum):
    """Program counters of the protocol step graph."""
    # acquisition
    AQ_SWAP = "aq-swap-status"
    AQ_RESET = "aq-reset-next"
    AQ_ENQ = "aq-swap-tail"
    AQ_OWN = "aq-own"
    AQ_LINK = "aq-link-pred"
    AQ_AWAIT_P = "aq-await-pred-leave"
    AQ_RECYCLE_PRED = "aq-recycle-pred"
    AQ_WAIT = "aq-wait-lock"
    AQ_NEWCOHORT = "aq-new-cohort"
    AQ_INHERIT = "aq-inherit"
    AQ_RWAIT = "aq-wait-recycle"
    AQ_RLEAVE = "aq-leave-node"
    AQ_ABSTRACT = "aq-abstract-root"
    CS = "critical-section"
    # release
    REL_SCAN = "rel-scan"
    RL_ABSTRACT = "rl-abstract-root"
    RL_READ = "rl-read-next"
    RL_TAILCAS = "rl-cas-tail"
    RL_WAITLINK = "rl-wait-link"
    RL_PMARK = "rl-mark-pred"
    RL_PASS = "rl-pass"
    RL_RECYCLE = "rl-recycle"
    RL_MARKP = "rl-leave-parent"
    DONE = "done"


WAIT_PCS = frozenset({Pc.AQ_WAIT, Pc.AQ_RWAIT, Pc.RL_WAITLINK})


class Held(enum.IntEnum):
    """How a thread came to hold the lock at one level."""
    NONE = 0
    # node status is a cohort value written by this thread
    COHORT = 1
    # node status is a full pass received from a predecessor
    PASSED = 2
    # climbed after a delegation: node status is a cohort value
    INHERITED = 3
    # conveyed by a full pass at a lower level without climbing
    CONVEYED = 4
    ROOT = 5
    ABSTRACT = 6


class PlanStep(NamedTuple):
    """One pending release action. `mode` is "free", "delegate" or "resume"."""
    mode: str
    level: int
    depth: int = 0
    cursor: int = NO_NODE
    prev: int = NO_NODE


class ThreadFrame(NamedTuple):
    tid: int
    pc: Pc
    level: int
    # rounds completed
    round: int = 0
    # indexed by level; index 0 unused
    held: Tuple[Held, ...] = ()
    counts: Tuple[int, ...] = ()
    # levels up to which a delegated pass must be climbed without queueing
    climb_to: int = 0
    # last observed (or expected) value of the awaited status cell
    seen: Optional[StatusValue] = None
    # re-enqueueing a node after waiting for it to be recycled
    reenq: bool = False
    # the initial swap found a value passed in by a predecessor that may still
    # be walking through the node
    walked: bool = False
    # indexed by level: this thread last left its node there by an impatient
    # release, so an unlocked status it finds on return is its own
    marked: Tuple[bool, ...] = ()
    # node being released (own node, or an abandoned successor walked through)
    cursor: int = NO_NODE
    prev: int = NO_NODE
    succ: int = NO_NODE
    # value handed on by the current release
    val: Optional[StatusValue] = None
    plan: Tuple[PlanStep, ...] = ()
    # highest level held when the current release began
    release_top: int = 0
    walking: bool = False
    succ_abandoned: bool = False
    # per finished round: "C" entered the critical section, "T" timed out
    outcomes: str = ""
    cs_this_round: bool = False
    timed_out_this_round: bool = False
    # took at least one effective timeout step in any round
    timed_out: bool = False
    # run monitors for the current round: last level acquired, last level
    # released, whether releases have started to descend, and whether either
    # ordering has been broken
    last_acquired: int = 0
    last_released: int = 0
    release_falling: bool = False
    order_broken: bool = False

    @property
    def done(self) -> bool:
        return self.pc is Pc.DONE

    @property
    def in_cs(self) -> bool:
        return self.pc is Pc.CS

    def holds(self, level: int) -> bool:
        return self.held[level] is not Held.NONE

    def held_levels(self) -> Tuple[int, ...]:
        return tuple(level for level in range(1, len(self.held)) if self.held[level] is not Held.NONE)

    def with_held(self, level: int, how: Held) -> "ThreadFrame":
        held = list(self.held)
        held[level] = how
        return self._replace(held=tuple(held))

    def with_count(self, level: int, count: int) -> "ThreadFrame":
        counts = list(self.counts)
        counts[level] = count
        return self._replace(counts=tuple(counts))

    def with_marked(self, level: int, value: bool) -> "ThreadFrame":
        marked = list(self.marked)
        marked[level] = value
        return self._replace(marked=tuple(marked))


class QNode(NamedTuple):
    id: int
    status: StatusValue
    next: NextValue
    level: int
    domain: str


class LockLevel(NamedTuple):
    level: int
    tail: int
    kind: str
    parent: str


class GlobalState(NamedTuple):
    """Canonical, hashable snapshot. Equal states have equal encodings."""
    status: Tuple[StatusValue, ...]
    next: Tuple[NextValue, ...]
    tails: Tuple[int, ...]
    frames: Tuple[ThreadFrame, ...]

    def encode(self) -> bytes:
        parts = [
            "S" + ",".join(str(s) for s in self.status),
            "N" + ",".join(str(n) for n in self.next),
            "T" + ",".join(str(t) for t in self.tails),
        ]
        for f in self.frames:
            parts.append("F" + repr(tuple(
                (v.value if isinstance(v, enum.Enum) else
                 str(v) if isinstance(v, tuple) and hasattr(v, "kind") else v)
                for v in f
            )))
        return "|".join(parts).encode("utf-8")

    def with_status(self, node: int, value: StatusValue) -> "GlobalState":
        status = list(self.status)
        status[node] = value
        return self._replace(status=tuple(status))

    def with_next(self, node: int, value: NextValue) -> "GlobalState":
        nxt = list(self.next)
        nxt[node] = value
        return self._replace(next=tuple(nxt))

    def with_tail(self, lock: int, node: int) -> "GlobalState":
        tails = list(self.tails)
        tails[lock] = node
        return self._replace(tails=tuple(tails))

    def with_frame(self, frame: ThreadFrame) -> "GlobalState":
        frames = list(self.frames)
        frames[frame.tid] = frame
        return self._replace(frames=tuple(frames))

    def qnode(self, topology: Topology, node: int) -> QNode:
        info = topology.nodes[node]
        return QNode(node, self.status[node], self.next[node], info.level, info.name)

    def lock_level(self, topology: Topology, lock: int) -> LockLevel:
        info = topology.locks[lock]
        return LockLevel(info.level, self.tails[lock], "root" if info.is_root else "non-root", info.parent)

    @property
    def all_done(self) -> bool:
        return all(f.done for f in self.frames)

    def is_quiescent(self) -> bool:
        """All statuses recycled and all tails empty. Next cells are checked
        against the next-field automaton by the conformance monitors."""
        return (all(s == RECYCLED for s in self.status)
                and all(t == NO_NODE for t in self.tails))


def initial_state(topology: Topology) -> GlobalState:
    frames = []
    for tid in range(topology.thread_count):
        start = topology.start_level(tid)
        frames.append(ThreadFrame(
            tid=tid,
            pc=Pc.AQ_SWAP,
            level=start,
            held=tuple(Held.NONE for _ in range(topology.levels + 1)),
            counts=tuple(0 for _ in range(topology.levels + 1)),
            marked=tuple(False for _ in range(topology.levels + 1)),
        ))
    return GlobalState(
        status=tuple(RECYCLED for _ in topology.nodes),
        next=tuple(NULL for _ in topology.nodes),
        tails=tuple(NO_NODE for _ in topology.locks),
        frames=tuple(frames),
    )
