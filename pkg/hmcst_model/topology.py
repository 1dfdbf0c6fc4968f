"""Lock-tree configurations and the two minimal verification presets."""
import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

from simple_parsing.helpers import Serializable, list_field

from .errors import HmcstError
from .logging_utils import get_logger

logger = get_logger(__file__)

DETERMINISTIC = "deterministic"
NONDETERMINISTIC_ABANDON = "nondeterministic-abandon"
ROOT_MODES = (DETERMINISTIC, NONDETERMINISTIC_ABANDON)

DEFAULT_STATE_CAP = 50_000_000
DEFAULT_PASSING_THRESHOLD = 2


class ConfigError(HmcstError):
    pass


@dataclass
class ThreadSpec(Serializable):
    """One participant of a configuration."""
    name: str
    # Names of the queue nodes the thread uses, one per concrete level,
    # starting at `start_level`. Threads sharing a name share the node.
    path: List[str] = list_field()
    start_level: int = 1
    rounds: int = 1


@dataclass
class Config(Serializable):
    """A lock tree, its participants and the exploration bounds."""
    name: str = "custom"
    levels: int = 1
    # "deterministic": the top level is a real root queue lock.
    # "nondeterministic-abandon": the top level is a choice point that either
    # grants the lock or makes the thread abandon.
    root_mode: str = DETERMINISTIC
    passing_threshold: int = DEFAULT_PASSING_THRESHOLD
    threads: List[ThreadSpec] = list_field()
    state_cap: int = DEFAULT_STATE_CAP

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, ignoring the state cap."""
        d = self.to_dict()
        d.pop("state_cap", None)
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @property
    def concrete_levels(self) -> int:
        """Number of levels backed by queue nodes."""
        return self.levels if self.root_mode == DETERMINISTIC else self.levels - 1

    def with_overrides(self, passing_threshold: Optional[int] = None,
                       rounds: Optional[int] = None,
                       state_cap: Optional[int] = None,
                       thread_count: Optional[int] = None) -> "Config":
        threads = [ThreadSpec(t.name, list(t.path), t.start_level, t.rounds) for t in self.threads]
        if thread_count is not None:
            threads = threads[:thread_count]
        if rounds is not None:
            for t in threads:
                t.rounds = rounds
        return Config(
            name=self.name,
            levels=self.levels,
            root_mode=self.root_mode,
            passing_threshold=self.passing_threshold if passing_threshold is None else passing_threshold,
            threads=threads,
            state_cap=self.state_cap if state_cap is None else state_cap,
        )

    def validate(self) -> "Config":
        if self.root_mode not in ROOT_MODES:
            raise ConfigError(f"root_mode must be one of {ROOT_MODES}, got {self.root_mode!r}")
        if self.levels < 1 or self.concrete_levels < 0:
            raise ConfigError(f"invalid number of levels: {self.levels}")
        if self.root_mode == NONDETERMINISTIC_ABANDON and self.levels < 2:
            raise ConfigError("an abstract root needs at least one concrete level below it")
        if self.passing_threshold < 1:
            raise ConfigError("passing threshold must be >= 1")
        if not self.threads:
            raise ConfigError("a configuration needs at least one thread")
        start_nodes: Dict[Tuple[int, str], str] = {}
        for t in self.threads:
            if t.rounds < 1:
                raise ConfigError(f"thread {t.name}: rounds must be >= 1")
            if not 1 <= t.start_level <= self.concrete_levels:
                raise ConfigError(f"thread {t.name}: start level {t.start_level} has no queue nodes")
            expected = self.concrete_levels - t.start_level + 1
            if len(t.path) != expected:
                raise ConfigError(f"thread {t.name}: path needs {expected} node names, got {t.path}")
            key = (t.start_level, t.path[0])
            if key in start_nodes:
                raise ConfigError(
                    f"threads {start_nodes[key]} and {t.name} share their entry node {t.path[0]}; "
                    f"a leaf node is owned by a unique thread"
                )
            start_nodes[key] = t.name
        Topology(self)
        return self


class NodeInfo(NamedTuple):
    id: int
    name: str
    level: int
    lock: int
    # Threads whose path includes this node; they act on it as "self".
    owners: Tuple[int, ...]


class LockInfo(NamedTuple):
    id: int
    level: int
    # Name of the enclosing node one level up, or "" at the top.
    parent: str
    is_root: bool


class Topology:
    """Static node and lock allocation derived from a Config.

    Nodes are numbered in order of first appearance along the thread paths,
    locks in order of first appearance of their nodes.
    """

    def __init__(self, config: Config):
        self.config = config
        self.levels = config.levels
        self.concrete_levels = config.concrete_levels
        self.abstract_root = config.root_mode == NONDETERMINISTIC_ABANDON
        names: Dict[Tuple[int, str], int] = {}
        parents: Dict[Tuple[int, str], str] = {}
        owners: Dict[int, List[int]] = {}
        self.paths: List[Tuple[int, ...]] = []
        for tid, t in enumerate(config.threads):
            # index 0 unused so that path[level] is the node at that level
            path = [-1] * (self.levels + 1)
            for offset, name in enumerate(t.path):
                level = t.start_level + offset
                key = (level, name)
                if key not in names:
                    names[key] = len(names)
                node = names[key]
                path[level] = node
                owners.setdefault(node, [])
                if tid not in owners[node]:
                    owners[node].append(tid)
                parent = t.path[offset + 1] if offset + 1 < len(t.path) else ""
                if parents.setdefault(key, parent) != parent:
                    raise ConfigError(f"node {name} at level {level} has two parents: "
                                      f"{parents[key]} and {parent}")
            self.paths.append(tuple(path))

        locks: Dict[Tuple[int, str], int] = {}
        self.locks: List[LockInfo] = []
        self.nodes: List[NodeInfo] = []
        for (level, name), node in sorted(names.items(), key=lambda kv: kv[1]):
            lock_key = (level, parents[(level, name)])
            if lock_key not in locks:
                locks[lock_key] = len(locks)
                self.locks.append(LockInfo(locks[lock_key], level, lock_key[1],
                                           is_root=(level == self.levels)))
            self.nodes.append(NodeInfo(node, name, level, locks[lock_key], tuple(owners[node])))

    @property
    def thread_count(self) -> int:
        return len(self.paths)

    def node_at(self, tid: int, level: int) -> int:
        return self.paths[tid][level]

    def start_level(self, tid: int) -> int:
        return self.config.threads[tid].start_level

    def rounds(self, tid: int) -> int:
        return self.config.threads[tid].rounds

    def is_root_level(self, level: int) -> bool:
        return level == self.levels

    def is_abstract(self, level: int) -> bool:
        return self.abstract_root and level == self.levels

    def lock_of(self, node: int) -> int:
        return self.nodes[node].lock

    def owns(self, tid: int, node: int) -> bool:
        return tid in self.nodes[node].owners

    def thread_name(self, tid: int) -> str:
        return self.config.threads[tid].name


def root_config() -> Config:
    """Root-level preset: one level, the thread under scrutiny does two
    rounds, its predecessor and successor one each."""
    return Config(
        name="root",
        levels=1,
        root_mode=DETERMINISTIC,
        threads=[
            ThreadSpec("t", ["t"], start_level=1, rounds=2),
            ThreadSpec("p", ["p"], start_level=1, rounds=1),
            ThreadSpec("s", ["s"], start_level=1, rounds=1),
        ],
    )


def nonroot_config() -> Config:
    """Non-root preset: t1 and t2 share parent X at level 2; s and p enter
    at level 2 without children; level 3 either grants the lock or makes
    the thread abandon."""
    return Config(
        name="nonroot",
        levels=3,
        root_mode=NONDETERMINISTIC_ABANDON,
        threads=[
            ThreadSpec("t1", ["t1", "X"], start_level=1, rounds=1),
            ThreadSpec("t2", ["t2", "X"], start_level=1, rounds=1),
            ThreadSpec("s", ["s"], start_level=2, rounds=1),
            ThreadSpec("p", ["p"], start_level=2, rounds=1),
        ],
    )


def solo_config(levels: int = 1, rounds: int = 1) -> Config:
    """One thread alone on a lock tree of `levels` concrete levels."""
    return Config(
        name=f"solo-{levels}",
        levels=levels,
        root_mode=DETERMINISTIC,
        threads=[ThreadSpec("t", [f"n{level}" for level in range(1, levels + 1)], rounds=rounds)],
    )


PRESETS = {
    "root": root_config,
    "nonroot": nonroot_config,
}
