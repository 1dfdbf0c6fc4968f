from hmcst_model.errors import IllegalStep, UnknownThread
from hmcst_model.nfa import FieldKind, NfaEdge
from hmcst_model.protocol import Choice, ProtocolVariant
from hmcst_model.state import Held, Pc, initial_state
from hmcst_model.topology import Topology
from hmcst_model.values import (ABANDONED, IMPATIENT, LEFT_PREFIX, NULL, PARENT_PREFIX,
                                RECYCLED, UNLOCKED, WAIT, Actor, EdgeKind, Field,
                                StatusKind, cohort, pass_all, successor)

from .testutils import Run, monitor_run, raises, run_schedule, run_until_done


def test_initial_state(solo):
    state = initial_state(Topology(solo))
    assert state.status == (RECYCLED,)
    assert state.next == (NULL,)
    assert state.is_quiescent()
    assert state.frames[0].pc is Pc.AQ_SWAP


def test_enabled_choices(pair, protocol_for):
    protocol = protocol_for(pair)
    state = initial_state(protocol.topology)
    assert protocol.enabled_choices(state, 0) == (Choice.PROCEED,)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3)
    assert run.state.frames[0].pc is Pc.CS
    assert protocol.enabled_choices(run.state, 0) == (Choice.EXIT_CS,)
    assert run.state.frames[1].pc is Pc.AQ_WAIT
    assert protocol.enabled_choices(run.state, 1) == (Choice.OBSERVE, Choice.TIMEOUT)


def test_no_timeouts_in_the_no_timeout_variant(pair, protocol_for):
    protocol = protocol_for(pair, ProtocolVariant.NO_TIMEOUT_NO_PASS)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3)
    assert protocol.enabled_choices(run.state, 1) == (Choice.OBSERVE,)


def test_solo_acquire_emits_begin_then_own(solo, protocol_for):
    protocol = protocol_for(solo)
    run = run_schedule(protocol, [(0, None)] * 3)
    status = [label for label in run.labels if label.field is Field.STATUS]
    assert [(l.old, l.new, l.actor, l.kind) for l in status] == [
        (RECYCLED, WAIT, Actor.SELF, EdgeKind.BEGIN),
        (WAIT, UNLOCKED, Actor.SELF, EdgeKind.NORMAL),
    ]
    frame = run.state.frames[0]
    assert frame.in_cs
    assert frame.held[1] is Held.ROOT
    assert run.state.tails == (0,)


def test_solo_release_is_quiescent(solo, protocol_for):
    protocol = protocol_for(solo)
    run = run_until_done(protocol, 0)
    assert len(run.steps) == 7
    assert run.state.is_quiescent()
    assert run.state.next == (NULL,)
    frame = run.state.frames[0]
    assert frame.done
    assert frame.outcomes == "C"
    assert frame.held_levels() == ()


def test_solo_two_levels(solo2, protocol_for):
    protocol = protocol_for(solo2)
    run = run_until_done(protocol, 0)
    assert run.state.is_quiescent()
    kinds = [(e.kind, e.level) for e in run.events]
    assert kinds == [
        ("acquire", 1), ("acquire", 2), ("enter-cs", 2),
        ("release", 2), ("release", 1), ("round-end", 1),
    ]
    cohort_writes = [l for l in run.labels if l.new == cohort(1)]
    assert len(cohort_writes) == 1
    assert cohort_writes[0].node == 0


def test_wait_timeout_abandons(pair, protocol_for):
    protocol = protocol_for(pair)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3 + [(1, Choice.TIMEOUT)])
    assert run.state.status[1] == ABANDONED
    assert run.state.next[0] == successor(1)
    timeout = run.results[-1].labels
    assert [(l.node, l.old, l.new, l.kind) for l in timeout] == [(1, WAIT, ABANDONED, EdgeKind.TIMEOUT)]
    assert run.state.frames[1].done
    assert run.state.frames[1].outcomes == "T"

    # the lock is passed into the abandoned node, which the releaser then walks through
    run = run_until_done(protocol, 0, run.state)
    assert run.state.is_quiescent()
    assert run.state.frames[0].outcomes == "C"
    walked = [l for l in run.labels if l.node == 1 and l.field is Field.STATUS]
    assert [(l.old, l.new, l.actor) for l in walked] == [
        (ABANDONED, UNLOCKED, Actor.PREDECESSOR),
        (UNLOCKED, RECYCLED, Actor.PREDECESSOR),
    ]


def test_spinning_is_not_productive(pair, protocol_for):
    protocol = protocol_for(pair)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3)
    assert not protocol.is_productive(run.state, 1, Choice.OBSERVE)
    assert protocol.is_productive(run.state, 1, Choice.TIMEOUT)
    assert protocol.is_productive(run.state, 0, Choice.EXIT_CS)


def test_pass_to_a_waiting_successor(pair, protocol_for):
    protocol = protocol_for(pair)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3)
    run = run_until_done(protocol, 0, run.state)
    assert run.state.status[1] == UNLOCKED
    run = run_schedule(protocol, [(1, Choice.OBSERVE)], run.state)
    assert run.state.frames[1].in_cs
    run = run_until_done(protocol, 1, run.state)
    assert run.state.all_done
    assert run.state.is_quiescent()


def test_delegation_conveys_every_level(nonroot, protocol_for):
    protocol = protocol_for(nonroot)
    t1, t2 = 0, 1
    run = run_schedule(protocol, [(t1, None)] * 7 + [(t2, None)] * 3)
    assert run.state.frames[t1].in_cs
    assert run.state.frames[t2].pc is Pc.AQ_WAIT

    run = run_until_done(protocol, t1, run.state)
    assert run.state.status[2] == pass_all(3, 2)
    delegated = [(e.kind, e.level) for e in run.events if e.kind == "delegate"]
    assert delegated == [("delegate", 3), ("delegate", 2), ("delegate", 1)]
    # X keeps the cohort value for the receiver to climb with
    assert run.state.status[1] == cohort(1)

    run = run_schedule(protocol, [(t2, None)] * 3, run.state)
    frame = run.state.frames[t2]
    assert frame.in_cs
    assert frame.held[1] is Held.PASSED
    assert frame.held[2] is Held.INHERITED
    assert frame.held[3] is Held.CONVEYED
    climb = [l for l in run.labels if l.node == 1]
    assert [(l.old.kind, l.new.kind, l.kind) for l in climb] == [
        (StatusKind.COHORT, StatusKind.WAIT, EdgeKind.BEGIN),
        (StatusKind.WAIT, StatusKind.COHORT, EdgeKind.NORMAL),
    ]

    run = run_until_done(protocol, t2, run.state)
    assert run.state.status[:3] == (RECYCLED, RECYCLED, RECYCLED)
    assert run.state.tails == (-1, -1)


def test_step_errors(solo, protocol_for):
    protocol = protocol_for(solo)
    state = initial_state(protocol.topology)
    with raises(IllegalStep, match="cannot take timeout"):
        protocol.step(state, 0, Choice.TIMEOUT)
    with raises(UnknownThread):
        protocol.step(state, 3)
    with raises(UnknownThread):
        protocol.enabled_choices(state, -1)
    done = run_until_done(protocol, 0).state
    assert protocol.enabled_choices(done, 0) == ()
    with raises(IllegalStep, match="completed"):
        protocol.step(done, 0)


def test_step_is_pure(solo, protocol_for):
    protocol = protocol_for(solo)
    state = initial_state(protocol.topology)
    first = protocol.step(state, 0)
    second = protocol.step(state, 0)
    assert first == second
    assert state == initial_state(protocol.topology)
    assert first.state.encode() == second.state.encode()


def _root_walk_into_abandoned_owner(protocol):
    """t (0) abandons behind p (1); s (2) queues behind t's node without
    linking; p passes into t's node, walks on and waits for s; t comes back."""
    t, p, s = 0, 1, 2
    run = run_schedule(protocol, [(p, None)] * 3 + [(t, None)] * 3 + [(t, Choice.TIMEOUT)]
                       + [(s, None)] * 2 + [(p, None)] * 6)
    assert run.state.status[t] == UNLOCKED
    assert run.state.frames[p].pc is Pc.RL_WAITLINK
    assert run.state.frames[s].pc is Pc.AQ_LINK
    back = run_schedule(protocol, [(t, None)], run.state)
    assert [(l.old, l.new) for l in back.labels] == [(UNLOCKED, WAIT)]
    assert back.state.frames[t].walked
    return run.steps + back.steps


def test_root_owner_keeps_waiting_once_its_predecessor_left(root, protocol_for):
    protocol = protocol_for(root)
    t, p, s = 0, 1, 2
    run = run_schedule(protocol, _root_walk_into_abandoned_owner(protocol) + [(p, Choice.TIMEOUT)])
    assert run.state.next[t] == IMPATIENT
    assert run.state.frames[p].done
    # the unlocked value must not come back: only the successor may recycle now
    assert not protocol.is_productive(run.state, t, Choice.TIMEOUT)
    run = run_schedule(protocol, run.steps + [(s, None)])
    assert not protocol.is_productive(run.state, t, Choice.TIMEOUT)
    run = run_schedule(protocol, run.steps + [(s, None), (t, Choice.OBSERVE)])
    assert run.results[-2].labels[0].actor is Actor.SUCCESSOR
    assert run.state.frames[t].pc is Pc.AQ_RESET

    rest = run_until_done(protocol, s, run.state)
    rest = run_until_done(protocol, t, rest.state)
    assert rest.state.all_done
    assert rest.state.is_quiescent()
    monitors, context = monitor_run(protocol, Run(run.steps + rest.steps, run.results + rest.results,
                                                  rest.state))
    assert monitors.unsettled(context) == []
    hits = monitors.coverage(FieldKind.STATUS_ROOT)
    assert hits[NfaEdge("U2", "W3", Actor.SELF, EdgeKind.BEGIN)] == 1
    assert hits[NfaEdge("W3", "R2", Actor.SUCCESSOR)] == 1
    assert hits[NfaEdge("R2", "U1", Actor.SELF)] == 1


def test_root_owner_reverts_before_its_predecessor_leaves(root, protocol_for):
    protocol = protocol_for(root)
    t, p, s = 0, 1, 2
    steps = _root_walk_into_abandoned_owner(protocol) + [(t, Choice.TIMEOUT), (p, Choice.TIMEOUT)]
    run = run_schedule(protocol, steps)
    assert run.state.status[t] == UNLOCKED
    assert run.state.frames[t].outcomes == "TT"
    # the impatient walker moves the unlocked node on to wait for its successor
    assert [(l.field, l.old, l.new, l.actor, l.kind) for l in run.results[-1].labels] == [
        (Field.NEXT, NULL, IMPATIENT, Actor.PREDECESSOR, EdgeKind.TIMEOUT),
        (Field.STATUS, UNLOCKED, UNLOCKED, Actor.PREDECESSOR, EdgeKind.TIMEOUT),
    ]
    rest = run_until_done(protocol, s, run.state)
    assert rest.state.all_done
    assert rest.state.is_quiescent()
    monitors, context = monitor_run(protocol, Run(run.steps + rest.steps, run.results + rest.results,
                                                  rest.state))
    assert monitors.unsettled(context) == []
    hits = monitors.coverage(FieldKind.STATUS_ROOT)
    assert hits[NfaEdge("W3", "U2", Actor.SELF, EdgeKind.TIMEOUT)] == 1
    assert hits[NfaEdge("U2", "U3", Actor.PREDECESSOR, EdgeKind.TIMEOUT)] == 1
    assert hits[NfaEdge("U3", "R1", Actor.SUCCESSOR)] == 1


def test_root_owner_may_revert_its_own_impatient_node(root, protocol_for):
    protocol = protocol_for(root)
    t, p, s = 0, 1, 2
    run = run_schedule(protocol, [(t, None)] * 3 + [(s, None)] * 2 + [(t, None)] * 3
                       + [(t, Choice.TIMEOUT)])
    assert run.state.next[t] == IMPATIENT
    assert run.state.frames[t].marked[1]
    run = run_schedule(protocol, run.steps + [(t, None), (t, Choice.TIMEOUT)])
    assert run.state.frames[t].marked[1]
    assert run.state.status[t] == UNLOCKED
    assert run.state.frames[t].outcomes == "IT"

    rest = run_until_done(protocol, s, run.state)
    rest = run_until_done(protocol, p, rest.state)
    assert rest.state.all_done
    assert rest.state.is_quiescent()
    monitors, context = monitor_run(protocol, Run(run.steps + rest.steps, run.results + rest.results,
                                                  rest.state))
    assert monitors.unsettled(context) == []
    hits = monitors.coverage(FieldKind.STATUS_ROOT)
    assert hits[NfaEdge("U3", "W4", Actor.SELF, EdgeKind.BEGIN)] == 1
    assert hits[NfaEdge("W4", "U3", Actor.SELF, EdgeKind.TIMEOUT)] == 1


def test_nonroot_successor_waits_for_the_walker_to_leave(nonroot, protocol_for):
    """s abandons behind X; t1 passes a plain P into s's node, walks on and
    gives up waiting for p, which links over the impatience mark."""
    protocol = protocol_for(nonroot)
    t1, t2, s, p = 0, 1, 2, 3
    s_node = 3
    run = run_schedule(protocol, [(t1, None)] * 6 + [(s, None)] * 3 + [(s, Choice.TIMEOUT)]
                       + [(p, None)] * 2 + [(t1, Choice.TIMEOUT)] + [(t1, None)] * 6
                       + [(t1, Choice.TIMEOUT), (p, None)])
    assert run.state.frames[t1].pc is Pc.RL_MARKP
    assert run.state.frames[p].pc is Pc.AQ_AWAIT_P
    # a passed P is not a leaving P
    assert run.state.status[s_node] == PARENT_PREFIX
    assert not protocol.is_productive(run.state, p, Choice.OBSERVE)

    run = run_schedule(protocol, run.steps + [(t1, None)])
    assert [(l.old, l.new, l.actor, l.kind) for l in run.results[-1].labels] == [
        (PARENT_PREFIX, LEFT_PREFIX, Actor.PREDECESSOR, EdgeKind.TIMEOUT),
    ]
    run = run_schedule(protocol, run.steps + [(p, Choice.OBSERVE), (p, None)])
    assert run.state.status[s_node] == RECYCLED

    rest = run_until_done(protocol, t1, run.state)
    rest = run_until_done(protocol, p, rest.state)
    rest = run_until_done(protocol, t2, rest.state)
    assert rest.state.all_done
    assert rest.state.is_quiescent()
    monitors, context = monitor_run(protocol, Run(run.steps + rest.steps, run.results + rest.results,
                                                  rest.state))
    assert monitors.unsettled(context) == []
    hits = monitors.coverage(FieldKind.STATUS_NONROOT)
    assert hits[NfaEdge("A1", "V/P1", Actor.PREDECESSOR)] == 1
    assert hits[NfaEdge("V/P1", "P2", Actor.PREDECESSOR, EdgeKind.TIMEOUT)] == 1
    assert hits[NfaEdge("P2", "R1", Actor.SUCCESSOR)] == 1


def test_owner_leaving_marks_its_prefix_as_left(nonroot, protocol_for):
    """t1 holds X and gives up waiting for s to link; the successor recycles
    X once it reads the leaving P."""
    protocol = protocol_for(nonroot)
    t1, s = 0, 2
    x_node = 1
    run = run_schedule(protocol, [(t1, None)] * 7 + [(s, None)] * 2 + [(t1, None)] * 6
                       + [(t1, Choice.TIMEOUT)])
    assert run.state.next[x_node] == IMPATIENT
    assert run.state.status[x_node] == cohort(1)
    assert run.state.frames[t1].pc is Pc.RL_MARKP
    run = run_schedule(protocol, run.steps + [(s, None), (s, Choice.OBSERVE)])
    assert run.state.frames[s].pc is Pc.AQ_AWAIT_P
    run = run_schedule(protocol, run.steps + [(t1, None), (s, Choice.OBSERVE), (s, None)])
    assert [(l.node, l.old, l.new, l.actor) for l in run.results[-1].labels] == [
        (x_node, LEFT_PREFIX, RECYCLED, Actor.SUCCESSOR),
    ]
    monitors, _ = monitor_run(protocol, run)
    hits = monitors.coverage(FieldKind.STATUS_NONROOT)
    assert hits[NfaEdge("C1", "P2", Actor.SELF, EdgeKind.TIMEOUT)] == 1
    assert hits[NfaEdge("P2", "R1", Actor.SUCCESSOR)] == 1
