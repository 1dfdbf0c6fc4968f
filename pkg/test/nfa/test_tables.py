from hmcst_model.nfa import FieldKind, NfaEdge, build_nfa
from hmcst_model.nfa.tables import NEXT_EDGES, NONROOT_STATUS_EDGES, ROOT_STATUS_EDGES
from hmcst_model.values import Actor, EdgeKind, NextKind, StatusKind

from ..testutils import parametrize


@parametrize("kind, states, rows", [
    (FieldKind.STATUS_ROOT, 10, ROOT_STATUS_EDGES),
    (FieldKind.STATUS_NONROOT, 15, NONROOT_STATUS_EDGES),
    (FieldKind.NEXT, 5, NEXT_EDGES),
])
def test_sizes(kind, states, rows):
    nfa = build_nfa(kind)
    assert nfa.which is kind
    assert len(nfa.states) == states
    assert len(nfa.edges) == len(rows)
    assert nfa.start.name in ("R1", "0_1")


def test_root_owner_and_accept(root_nfa):
    assert [s.name for s in root_nfa.owner_states] == ["U1"]
    assert [s.name for s in root_nfa.accept_states] == ["R1"]


def test_nonroot_owners(nonroot_nfa):
    assert sorted(s.name for s in nonroot_nfa.owner_states) == ["C1", "V1"]
    # the overlay state holds either a full pass or a prefix pass
    overlay = nonroot_nfa.states["V/P1"]
    assert overlay.holds(StatusKind.PASS_ALL)
    assert overlay.holds(StatusKind.PARENT_PREFIX)
    assert not overlay.holds(StatusKind.WAIT)


def test_next_has_no_owner(next_nfa):
    assert next_nfa.owner_states == []
    assert sorted(s.name for s in next_nfa.accept_states) == ["0_1", "P1", "S1"]
    assert next_nfa.states["M1"].holds(NextKind.IMPATIENCE_MARK)


def test_inheritance_edges(nonroot_nfa):
    edges = set(nonroot_nfa.edges)
    assert NfaEdge("C1", "W4", Actor.SELF, EdgeKind.BEGIN) in edges
    assert NfaEdge("W4", "C1", Actor.SELF, EdgeKind.NORMAL) in edges


def test_begin_edges_sink_at_wait_states(root_nfa, nonroot_nfa):
    for nfa in (root_nfa, nonroot_nfa):
        for e in nfa.edges:
            if e.kind is EdgeKind.BEGIN:
                assert nfa.states[e.target].holds(StatusKind.WAIT), e


def test_graph_is_a_multigraph(root_nfa):
    g = root_nfa.graph()
    assert g.number_of_nodes() == 10
    assert g.number_of_edges() == len(root_nfa.edges)
    # W3 -> R2 is taken by the predecessor or by the successor
    assert g.number_of_edges("W3", "R2") == 2


def test_without(root_nfa):
    smaller = root_nfa.without(("W2", "U1"))
    assert len(smaller.edges) == len(root_nfa.edges) - 1
    assert len(root_nfa.edges) == len(ROOT_STATUS_EDGES)
