"""The three shared-field automata and their structural checks."""
from .automaton import FieldKind, Nfa, NfaEdge, NfaState
from .export import FORMAT_VERSION, export_graph
from .properties import (PropertyResult, check_all, check_bounded_release,
                         check_bounded_timeout, check_deadlock_freedom,
                         check_livelock_freedom, check_starvation_freedom,
                         check_three_participants, check_two_rounds)
from .tables import (build_next_nfa, build_nfa, build_nonroot_status_nfa,
                     build_root_status_nfa)

__all__ = [
    "FieldKind", "Nfa", "NfaEdge", "NfaState",
    "FORMAT_VERSION", "export_graph",
    "PropertyResult", "check_all", "check_bounded_release",
    "check_bounded_timeout", "check_deadlock_freedom",
    "check_livelock_freedom", "check_starvation_freedom",
    "check_three_participants", "check_two_rounds",
    "build_next_nfa", "build_nfa", "build_nonroot_status_nfa",
    "build_root_status_nfa",
]
