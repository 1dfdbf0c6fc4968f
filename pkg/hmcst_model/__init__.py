"""Executable, checkable model of the HMCS-T hierarchical abortable queue lock.
"""
from .errors import (AssertionViolated, ConformanceViolation, DigestMismatch,
                     HmcstError, IllegalStep, MalformedNfa, MalformedTrace,
                     NoOwnerStates, ResourceBudgetExceeded, UnknownThread)
from .explorer import ExplorationReport, explore, replay
from .nfa import FieldKind, Nfa, build_nfa, check_all, export_graph
from .protocol import (Choice, Protocol, ProtocolVariant,
                       acquisition_order_witness, release_order_witness)
from .state import GlobalState, initial_state
from .topology import Config, ThreadSpec, Topology, nonroot_config, root_config
from .trace import Trace

__version__ = "0.1.0"

__all__ = [
    "AssertionViolated", "ConformanceViolation", "DigestMismatch",
    "HmcstError", "IllegalStep", "MalformedNfa", "MalformedTrace",
    "NoOwnerStates", "ResourceBudgetExceeded", "UnknownThread",
    "ExplorationReport", "explore", "replay",
    "FieldKind", "Nfa", "build_nfa", "check_all", "export_graph",
    "Choice", "Protocol", "ProtocolVariant",
    "acquisition_order_witness", "release_order_witness",
    "GlobalState", "initial_state",
    "Config", "ThreadSpec", "Topology", "nonroot_config", "root_config",
    "Trace",
]
