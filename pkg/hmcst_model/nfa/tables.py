"""Edge tables of the three shared-field automata.

The tables are literal data. Each row is (source, target, actor, kind) and
carries the sentence of the transition description it encodes.
"""
from ..values import Actor, EdgeKind, NextKind, StatusKind
from .automaton import FieldKind, Nfa, make_edges, make_state

SELF = Actor.SELF
PRED = Actor.PREDECESSOR
SUCC = Actor.SUCCESSOR

BEGIN = EdgeKind.BEGIN
NORMAL = EdgeKind.NORMAL
TIMEOUT = EdgeKind.TIMEOUT

W = StatusKind.WAIT
A = StatusKind.ABANDONED
R = StatusKind.RECYCLED
U = StatusKind.UNLOCKED_ROOT
C = StatusKind.COHORT
P = StatusKind.PARENT_PREFIX
V = StatusKind.PASS_ALL


ROOT_STATUS_EDGES = [
    # the initial SWAP on q.status moves it to W1 (predecessor) or W2 (none)
    ("R1", "W1", SELF, BEGIN),
    ("R1", "W2", SELF, BEGIN),
    # no predecessor: t updates q.status to U1
    ("W2", "U1", SELF, NORMAL),
    # successor already advertised, or no successor: release and recycle
    ("U1", "R1", SELF, NORMAL),
    # t leaves on timeout because the successor has not updated q.next
    ("U1", "U3", SELF, TIMEOUT),
    # the successor advertises itself and recycles q.status
    ("U3", "R1", SUCC, NORMAL),
    # t re-acquires: SWAP to W4
    ("U3", "W4", SELF, BEGIN),
    # t times out waiting to be recycled and reverts
    ("W4", "U3", SELF, TIMEOUT),
    # the successor recycles while t waits
    ("W4", "R2", SUCC, NORMAL),
    # a predecessor passes the lock to the waiting thread
    ("W1", "U1", PRED, NORMAL),
    # t times out waiting: abandoned
    ("W1", "A1", SELF, TIMEOUT),
    # a predecessor passes the lock into the abandoned node
    ("A1", "U2", PRED, NORMAL),
    # t re-acquires while still enqueued
    ("A1", "W1", SELF, BEGIN),
    # the predecessor finishes releasing on t's behalf
    ("U2", "R1", PRED, NORMAL),
    # the predecessor is impatient waiting for a tardy successor
    ("U2", "U3", PRED, TIMEOUT),
    # t re-acquires while the predecessor still releases for it
    ("U2", "W3", SELF, BEGIN),
    # t times out waiting to be recycled and reverts
    ("W3", "U2", SELF, TIMEOUT),
    # recycled by the predecessor, or by a successor after an impatient predecessor
    ("W3", "R2", PRED, NORMAL),
    ("W3", "R2", SUCC, NORMAL),
    # re-enqueued: acquire with no predecessor, or a predecessor passes the lock
    ("R2", "U1", SELF, NORMAL),
    ("R2", "U1", PRED, NORMAL),
    # re-enqueued, then timed out waiting for the lock
    ("R2", "A1", SELF, TIMEOUT),
]


NONROOT_STATUS_EDGES = [
    ("R1", "W1", SELF, BEGIN),
    ("R1", "W2", SELF, BEGIN),
    # no predecessor: t starts a cohort
    ("W2", "C1", SELF, NORMAL),
    ("C1", "R1", SELF, NORMAL),
    # impatient release: t leaves q marked P2
    ("C1", "P2", SELF, TIMEOUT),
    ("P2", "R1", SUCC, NORMAL),
    ("P2", "W5", SELF, BEGIN),
    ("W5", "P2", SELF, TIMEOUT),
    # recycled by the successor; R3 if t then finds no predecessor, else R2
    ("W5", "R3", SUCC, NORMAL),
    ("W5", "R2", SUCC, NORMAL),
    # no predecessor after re-enqueueing: acquire immediately
    ("R3", "C1", SELF, NORMAL),
    # a peer that inherited this level swaps, notices, and reverts
    ("C1", "W4", SELF, BEGIN),
    ("W4", "C1", SELF, NORMAL),
    ("W1", "A1", SELF, TIMEOUT),
    # a predecessor passes all held locks (V) or a prefix (P) into the abandoned node
    ("A1", "V/P1", PRED, NORMAL),
    ("A1", "W1", SELF, BEGIN),
    ("V/P1", "R1", PRED, NORMAL),
    ("V/P1", "P2", PRED, TIMEOUT),
    # a predecessor passes the global lock
    ("W1", "V1", PRED, NORMAL),
    ("V1", "R1", SELF, NORMAL),
    ("V1", "P2", SELF, TIMEOUT),
    # a predecessor passes only the local lock
    ("W1", "P1", PRED, NORMAL),
    # t notices it owns the level and begins a new cohort
    ("P1", "C1", SELF, NORMAL),
    # re-acquire while the predecessor still passes through q; the sink is W3
    ("V/P1", "W3", SELF, BEGIN),
    ("W3", "P2", SELF, TIMEOUT),
    # the predecessor becomes impatient and leaves q marked P3
    ("W3", "P3", PRED, TIMEOUT),
    ("P3", "P2", SELF, TIMEOUT),
    ("P3", "R3", SUCC, NORMAL),
    ("P3", "R2", SUCC, NORMAL),
    # the predecessor completes the release through q
    ("W3", "R3", PRED, NORMAL),
    ("W3", "R2", PRED, NORMAL),
    # re-enqueued: inherit the global lock or a prefix, or time out
    ("R2", "V1", PRED, NORMAL),
    ("R2", "P1", PRED, NORMAL),
    ("R2", "A1", SELF, TIMEOUT),
]


NEXT_EDGES = [
    # beginning of an acquisition, value unchanged
    ("0_1", "0_2", SELF, BEGIN),
    # relinquished, by t itself or by a predecessor acting for the abandoned t
    ("0_2", "0_1", SELF, NORMAL),
    ("0_2", "0_1", PRED, NORMAL),
    # a successor advertises itself
    ("0_2", "S1", SUCC, NORMAL),
    # t resets the next pointer just before enqueueing
    ("S1", "0_2", SELF, BEGIN),
    # a predecessor remembers itself in q.next on its forward journey
    ("S1", "P1", PRED, NORMAL),
    # re-acquire attempts wait and possibly time out
    ("S1", "S1", SELF, BEGIN),
    ("P1", "0_2", SELF, BEGIN),
    ("P1", "P1", SELF, BEGIN),
    # impatience mark written by t while releasing, or by a predecessor for it
    ("0_2", "M1", SELF, TIMEOUT),
    ("0_2", "M1", PRED, TIMEOUT),
    ("M1", "M1", SELF, BEGIN),
    # the successor advertises itself over the mark
    ("M1", "S1", SUCC, NORMAL),
]


def build_root_status_nfa() -> Nfa:
    states = [
        make_state("R1", R, start=True, accept=True),
        make_state("W1", W),
        make_state("W2", W),
        make_state("W3", W),
        make_state("W4", W),
        make_state("A1", A),
        make_state("U1", U, owner=True),
        make_state("U2", U),
        make_state("U3", U),
        make_state("R2", R),
    ]
    nfa = Nfa(FieldKind.STATUS_ROOT, {s.name: s for s in states}, make_edges(ROOT_STATUS_EDGES))
    return nfa.validate()


def build_nonroot_status_nfa() -> Nfa:
    states = [
        make_state("R1", R, start=True, accept=True),
        make_state("W1", W),
        make_state("W2", W),
        make_state("W3", W),
        make_state("W4", W),
        make_state("W5", W),
        make_state("A1", A),
        make_state("C1", C, owner=True),
        make_state("P1", P),
        make_state("P2", P),
        make_state("P3", P),
        make_state("V1", V, owner=True),
        make_state("V/P1", V, P),
        make_state("R2", R),
        make_state("R3", R),
    ]
    nfa = Nfa(FieldKind.STATUS_NONROOT, {s.name: s for s in states}, make_edges(NONROOT_STATUS_EDGES))
    return nfa.validate()


def build_next_nfa() -> Nfa:
    states = [
        make_state("0_1", NextKind.NULL, start=True, accept=True),
        make_state("0_2", NextKind.NULL),
        # stale values left behind by a completed release are quiescent
        make_state("S1", NextKind.SUCCESSOR, accept=True),
        make_state("P1", NextKind.PREDECESSOR_MARK, accept=True),
        make_state("M1", NextKind.IMPATIENCE_MARK),
    ]
    nfa = Nfa(FieldKind.NEXT, {s.name: s for s in states}, make_edges(NEXT_EDGES))
    return nfa.validate()


def build_nfa(which: FieldKind) -> Nfa:
    return {
        FieldKind.STATUS_ROOT: build_root_status_nfa,
        FieldKind.STATUS_NONROOT: build_nonroot_status_nfa,
        FieldKind.NEXT: build_next_nfa,
    }[which]()
