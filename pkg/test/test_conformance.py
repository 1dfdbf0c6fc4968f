from hmcst_model.conformance import (ActorResolution, Monitor, MonitorSet,
                                     coverage, coverage_lines, coverage_table,
                                     uncovered)
from hmcst_model.errors import ConformanceViolation
from hmcst_model.nfa import FieldKind, NfaEdge
from hmcst_model.protocol import ActionLabel
from hmcst_model.state import initial_state
from hmcst_model.topology import Topology
from hmcst_model.values import (ABANDONED, RECYCLED, UNLOCKED, WAIT, Actor,
                                EdgeKind, Field)

from .testutils import raises, run_until_done


def _label(old, new, actor=Actor.SELF, kind=EdgeKind.NORMAL, node=0, thread=0):
    return ActionLabel(node, Field.STATUS, old, new, actor, kind, thread)


def test_ambiguous_begin_is_resolved_later(root_nfa):
    monitor = Monitor(root_nfa)
    taken = monitor.observe(_label(RECYCLED, WAIT, kind=EdgeKind.BEGIN))
    assert taken == ()
    assert monitor.current_states == {"W1", "W2"}
    taken = monitor.observe(_label(WAIT, UNLOCKED))
    assert [str(e) for e in taken] == [
        "R1->W2 [self, begin-acquisition]",
        "W2->U1 [self, normal]",
    ]
    assert monitor.current_states == {"U1"}


def test_abandon_then_walked_through(root_nfa):
    monitor = Monitor(root_nfa)
    monitor.observe(_label(RECYCLED, WAIT, kind=EdgeKind.BEGIN))
    monitor.observe(_label(WAIT, ABANDONED, kind=EdgeKind.TIMEOUT))
    monitor.observe(_label(ABANDONED, UNLOCKED, actor=Actor.PREDECESSOR))
    monitor.observe(_label(UNLOCKED, RECYCLED, actor=Actor.PREDECESSOR))
    assert monitor.current_states == {"R1"}
    assert monitor.settle()
    hits = coverage(monitor)
    assert hits[NfaEdge("A1", "U2", Actor.PREDECESSOR)] == 1
    assert hits[NfaEdge("R1", "W2", Actor.SELF, EdgeKind.BEGIN)] == 0


def test_violation_kinds(root_nfa):
    monitor = Monitor(root_nfa)
    with raises(ConformanceViolation, match="no edge"):
        monitor.observe(_label(RECYCLED, UNLOCKED))
    monitor = Monitor(root_nfa)
    try:
        monitor.observe(_label(RECYCLED, WAIT, actor=Actor.SUCCESSOR, kind=EdgeKind.BEGIN))
    except ConformanceViolation as e:
        assert e.kind == ConformanceViolation.WRONG_ACTOR
    else:
        raise AssertionError("a successor cannot begin an acquisition on q")
    monitor = Monitor(root_nfa)
    try:
        monitor.observe(_label(RECYCLED, WAIT, kind=EdgeKind.NORMAL))
    except ConformanceViolation as e:
        assert e.kind == ConformanceViolation.WRONG_KIND
    else:
        raise AssertionError("the swap must be a begin-acquisition edge")


def test_settle_needs_an_accept_state(root_nfa):
    monitor = Monitor(root_nfa)
    monitor.observe(_label(RECYCLED, WAIT, kind=EdgeKind.BEGIN))
    assert not monitor.settle()


def test_actor_resolution(nonroot):
    resolution = ActorResolution(Topology(nonroot))
    # t2 acts on the shared X as its owner
    assert resolution.role(1, 1, Actor.SELF) is Actor.SELF
    assert resolution.role(2, 1, Actor.SUCCESSOR) is Actor.SUCCESSOR
    with raises(ConformanceViolation, match="does not own"):
        resolution.role(2, 1, Actor.SELF)
    with raises(ConformanceViolation, match="owns"):
        resolution.role(0, 0, Actor.PREDECESSOR)


def test_monitor_set_follows_a_solo_round(solo, protocol_for):
    protocol = protocol_for(solo)
    monitors = MonitorSet(protocol.topology)
    assert monitors.kinds_in_use == [FieldKind.STATUS_ROOT, FieldKind.NEXT]
    run = run_until_done(protocol, 0)
    context = monitors.initial()
    for result in run.results:
        context = monitors.advance(context, result.labels)
    assert monitors.unsettled(context) == []
    monitors.finish(context)
    status = monitors.coverage(FieldKind.STATUS_ROOT)
    assert {str(e) for e, n in status.items() if n} == {
        "R1->W2 [self, begin-acquisition]",
        "W2->U1 [self, normal]",
        "U1->R1 [self, normal]",
    }
    nxt = monitors.coverage(FieldKind.NEXT)
    assert {str(e) for e, n in nxt.items() if n} == {
        "0_1->0_2 [self, begin-acquisition]",
        "0_2->0_1 [self, normal]",
    }


def test_unsettled_context_is_reported(solo, protocol_for):
    protocol = protocol_for(solo)
    monitors = MonitorSet(protocol.topology)
    first = protocol.step(initial_state(protocol.topology), 0)
    context = monitors.advance(monitors.initial(), first.labels)
    assert monitors.unsettled(context) == ["n1.status in {W1,W2}", "n1.next in {0_2}"]


def test_coverage_reports(root_nfa):
    monitor = Monitor(root_nfa)
    monitor.observe(_label(RECYCLED, WAIT, kind=EdgeKind.BEGIN))
    monitor.observe(_label(WAIT, UNLOCKED))
    hits = coverage(monitor)
    assert len(uncovered(hits)) == len(root_nfa.edges) - 2
    table = coverage_table(FieldKind.STATUS_ROOT, hits)
    total = len(root_nfa.edges)
    assert table.splitlines()[0] == f"coverage status-root: 2/{total} edges ({200 / total:.1f}%)"
    assert "!    W1 -> A1" in table
    lines = coverage_lines(FieldKind.STATUS_ROOT, hits)
    assert "coverage.status-root.covered=2" in lines
    assert "coverage.status-root.R1->W2.self.begin-acquisition=1" in lines
