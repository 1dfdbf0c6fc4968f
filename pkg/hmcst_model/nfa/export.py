"""Deterministic graph-description (DOT) rendering of an automaton."""
from typing import Dict

from ..values import Actor, EdgeKind
from .automaton import Nfa, NfaState

FORMAT_VERSION = "hmcst-nfa-v1"

# Legend: own edges solid black, predecessor dotted blue, successor dotted
# red, begin-acquisition edges thick.
_ACTOR_STYLE: Dict[Actor, str] = {
    Actor.SELF: 'color="black", style="solid"',
    Actor.PREDECESSOR: 'color="blue", style="dotted"',
    Actor.SUCCESSOR: 'color="red", style="dotted"',
}


def _node_line(state: NfaState) -> str:
    attrs = [f'label="{state.name}"']
    if state.is_accept:
        attrs.append('shape="doublecircle"')
    else:
        attrs.append('shape="circle"')
    if state.is_owner:
        attrs.append('style="filled", fillcolor="green"')
    if state.is_start:
        attrs.append('start="true"')
    return f'  "{state.name}" [{", ".join(attrs)}];'


def export_graph(nfa: Nfa) -> str:
    """Renders `nfa` as DOT text; byte-identical for identical automata."""
    lines = [f"// {FORMAT_VERSION}", f'digraph "{nfa.which.value}" {{']
    for state in nfa.states.values():
        lines.append(_node_line(state))
    for e in nfa.edges:
        attrs = [
            f'actor="{e.actor.value}"',
            f'kind="{e.kind.value}"',
            _ACTOR_STYLE[e.actor],
        ]
        if e.kind is EdgeKind.BEGIN:
            attrs.append('penwidth="3"')
        lines.append(f'  "{e.source}" -> "{e.target}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
