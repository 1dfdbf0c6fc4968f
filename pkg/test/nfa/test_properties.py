import enum

from hmcst_model.errors import MalformedNfa, NoOwnerStates
from hmcst_model.nfa import (FieldKind, Nfa, NfaEdge, build_nfa, check_all,
                             check_bounded_release, check_bounded_timeout,
                             check_deadlock_freedom, check_livelock_freedom,
                             check_starvation_freedom,
                             check_three_participants, check_two_rounds)
from hmcst_model.nfa.automaton import make_state
from hmcst_model.values import Actor, EdgeKind, StatusKind

from ..testutils import parametrize, raises


def _with(nfa: Nfa, *edges: NfaEdge, states=()) -> Nfa:
    all_states = dict(nfa.states)
    all_states.update({s.name: s for s in states})
    return Nfa(nfa.which, all_states, list(nfa.edges) + list(edges))


@parametrize("kind", list(FieldKind))
def test_built_automata_pass(kind):
    results = check_all(build_nfa(kind))
    assert [r.name for r in results] == [
        "livelock-freedom", "starvation-freedom", "bounded-release",
        "bounded-timeout", "deadlock-freedom", "three-participants", "two-rounds",
    ]
    for r in results:
        assert r.verdict is not False, (r.name, r.witness, r.detail)


def test_next_ownership_checks_not_applicable(next_nfa):
    by_name = {r.name: r for r in check_all(next_nfa)}
    assert by_name["starvation-freedom"].status == "N/A"
    assert by_name["bounded-release"].status == "N/A"
    assert by_name["livelock-freedom"].status == "PASS"
    assert by_name["deadlock-freedom"].status == "PASS"
    with raises(NoOwnerStates):
        check_starvation_freedom(next_nfa)


def test_livelock_falsified(root_nfa):
    # a plain edge back into the wait state closes a cycle without a begin edge
    mutated = _with(root_nfa, NfaEdge("R1", "W2", Actor.SELF, EdgeKind.NORMAL))
    result = check_livelock_freedom(mutated)
    assert result.verdict is False
    assert result.witness[0] == result.witness[-1]


def test_starvation_falsified(root_nfa):
    result = check_starvation_freedom(root_nfa.without(("W2", "U1")))
    assert result.verdict is False
    assert "W2" in result.witness


def test_bounded_release_falsified(root_nfa):
    result = check_bounded_release(root_nfa.without(("U1", "R1"), ("U1", "U3")))
    assert result.verdict is False
    assert result.witness == ["U1"]


def test_bounded_timeout_falsified(root_nfa):
    result = check_bounded_timeout(root_nfa.without(("W1", "A1")))
    assert result.verdict is False
    assert "W1" in result.witness


def test_deadlock_falsified(nonroot_nfa):
    result = check_deadlock_freedom(nonroot_nfa.without(("P1", "C1")))
    assert result.verdict is False
    assert "P1" in result.witness


class _Role(enum.Enum):
    BYSTANDER = "bystander"


def test_three_participants_falsified(root_nfa):
    mutated = _with(root_nfa, NfaEdge("U1", "R1", _Role.BYSTANDER, EdgeKind.NORMAL))
    result = check_three_participants(mutated)
    assert result.verdict is False
    assert result.witness == ["bystander"]


def test_two_rounds_falsified(root_nfa):
    mutated = _with(root_nfa, NfaEdge("W4", "Z", Actor.SELF, EdgeKind.BEGIN),
                    states=[make_state("Z", StatusKind.WAIT)])
    result = check_two_rounds(mutated)
    assert result.verdict is False
    assert result.witness == ["W4->Z [self, begin-acquisition]"]


def test_malformed_automaton_rejected(root_nfa):
    dangling = _with(root_nfa, NfaEdge("U1", "nowhere", Actor.SELF, EdgeKind.NORMAL))
    with raises(MalformedNfa, match="nowhere"):
        check_livelock_freedom(dangling)
    orphan = _with(root_nfa, states=[make_state("Q", StatusKind.WAIT)])
    with raises(MalformedNfa, match="unreachable"):
        check_deadlock_freedom(orphan)
