from hmcst_model.errors import MalformedTrace, UnknownThread
from hmcst_model.protocol import (Choice, acquisition_order_witness,
                                  is_bitonic, is_strictly_increasing,
                                  release_order_witness, trace_events)
from hmcst_model.topology import solo_config
from hmcst_model.trace import Trace

from .testutils import parametrize, raises, run_schedule, run_until_done, solo_run


def test_solo_two_levels(solo2):
    trace, _ = solo_run(solo2)
    assert acquisition_order_witness(trace, 0) == [[1, 2]]
    assert release_order_witness(trace, 0) == [[(2, "release"), (1, "release")]]


def test_rounds_are_separated():
    trace, _ = solo_run(solo_config(levels=2, rounds=2))
    assert acquisition_order_witness(trace, 0) == [[1, 2], [1, 2]]
    assert len(release_order_witness(trace, 0)) == 2


def test_abandonment_is_recorded(pair, protocol_for):
    protocol = protocol_for(pair)
    run = run_schedule(protocol, [(0, None)] * 3 + [(1, None)] * 3 + [(1, Choice.TIMEOUT)])
    trace = Trace.of(pair, run.steps)
    assert acquisition_order_witness(trace, 1) == [[1]]
    assert release_order_witness(trace, 1) == [[(1, "abandon")]]
    assert release_order_witness(trace, 0) == [[]]


def test_delegation(nonroot, protocol_for):
    protocol = protocol_for(nonroot)
    first = run_schedule(protocol, [(0, None)] * 7 + [(1, None)] * 3)
    rest = run_until_done(protocol, 0, first.state)
    trace = Trace.of(nonroot, first.steps + rest.steps)
    assert acquisition_order_witness(trace, 0) == [[1, 2, 3]]
    assert release_order_witness(trace, 0) == [[(3, "delegate"), (2, "delegate"), (1, "delegate")]]


def test_events_need_a_configuration(solo):
    trace, _ = solo_run(solo)
    unbound = Trace.loads(trace.dumps())
    with raises(MalformedTrace, match="no configuration"):
        trace_events(unbound)


def test_illegal_trace(solo):
    trace = Trace.of(solo, [(0, Choice.EXIT_CS)])
    with raises(MalformedTrace, match="step 0"):
        acquisition_order_witness(trace, 0)


def test_unknown_thread(solo):
    trace, _ = solo_run(solo)
    with raises(UnknownThread):
        release_order_witness(trace, 2)


@parametrize("levels, increasing, bitonic", [
    ([], True, True),
    ([1], True, True),
    ([1, 2, 3], True, True),
    ([3, 2, 1], False, True),
    ([1, 3, 2], False, True),
    ([1, 1], False, False),
    ([2, 1, 2], False, False),
])
def test_order_predicates(levels, increasing, bitonic):
    assert is_strictly_increasing(levels) is increasing
    assert is_bitonic(levels) is bitonic
