"""Abstract value domains of the shared cells of a queue node.

Every shared access in the model reads or writes one of these values. They
are immutable and hashable so that a whole `GlobalState` can be used as a
visited-set key.
"""
import enum
from typing import NamedTuple


class StatusKind(enum.Enum):
    WAIT = "W"
    ABANDONED = "A"
    RECYCLED = "R"
    UNLOCKED_ROOT = "U"
    COHORT = "C"
    PARENT_PREFIX = "P"
    PASS_ALL = "V"


class NextKind(enum.Enum):
    NULL = "0"
    SUCCESSOR = "S"
    PREDECESSOR_MARK = "P"
    IMPATIENCE_MARK = "M"


class Field(enum.Enum):
    STATUS = "status"
    NEXT = "next"


class Actor(enum.Enum):
    """Role of the acting thread relative to the thread owning the node."""
    SELF = "self"
    PREDECESSOR = "predecessor"
    SUCCESSOR = "successor"


class EdgeKind(enum.Enum):
    BEGIN = "begin-acquisition"
    NORMAL = "normal"
    TIMEOUT = "timeout"


class StatusValue(NamedTuple):
    """Value of a status cell.

    `count` is only meaningful for COHORT and PASS_ALL (number of consecutive
    local owners in the cohort), `depth` only for PASS_ALL (highest level
    whose lock is conveyed by the pass). `left` only for PARENT_PREFIX: the P
    was written by a thread leaving the node, not passed into it by a
    predecessor.
    """
    kind: StatusKind
    count: int = 0
    depth: int = 0
    left: bool = False

    def __str__(self) -> str:
        if self.left:
            return "P(left)"
        if self.kind is StatusKind.COHORT:
            return f"C({self.count})"
        if self.kind is StatusKind.PASS_ALL:
            return f"V({self.depth},{self.count})"
        return self.kind.value


class NextValue(NamedTuple):
    """Value of a next cell. `node` is set for SUCCESSOR and PREDECESSOR_MARK."""
    kind: NextKind
    node: int = -1

    def __str__(self) -> str:
        if self.node >= 0:
            return f"{self.kind.value}({self.node})"
        return self.kind.value


WAIT = StatusValue(StatusKind.WAIT)
ABANDONED = StatusValue(StatusKind.ABANDONED)
RECYCLED = StatusValue(StatusKind.RECYCLED)
UNLOCKED = StatusValue(StatusKind.UNLOCKED_ROOT)
PARENT_PREFIX = StatusValue(StatusKind.PARENT_PREFIX)
LEFT_PREFIX = StatusValue(StatusKind.PARENT_PREFIX, left=True)

NULL = NextValue(NextKind.NULL)
IMPATIENT = NextValue(NextKind.IMPATIENCE_MARK)


def cohort(count: int = 1) -> StatusValue:
    if count < 1:
        raise ValueError(f"cohort count must be >= 1, got {count}")
    return StatusValue(StatusKind.COHORT, count=count)


def pass_all(depth: int, count: int) -> StatusValue:
    if depth < 1:
        raise ValueError(f"passing depth must be a level index >= 1, got {depth}")
    return StatusValue(StatusKind.PASS_ALL, count=count, depth=depth)


def successor(node: int) -> NextValue:
    return NextValue(NextKind.SUCCESSOR, node)


def predecessor_mark(node: int) -> NextValue:
    return NextValue(NextKind.PREDECESSOR_MARK, node)


def parse_status(text: str) -> StatusValue:
    """Inverse of `str(StatusValue)`."""
    text = text.strip()
    if text == str(LEFT_PREFIX):
        return LEFT_PREFIX
    if text.startswith("C(") and text.endswith(")"):
        return cohort(int(text[2:-1]))
    if text.startswith("V(") and text.endswith(")"):
        depth, count = text[2:-1].split(",")
        return pass_all(int(depth), int(count))
    return StatusValue(StatusKind(text))


def parse_next(text: str) -> NextValue:
    """Inverse of `str(NextValue)`."""
    text = text.strip()
    if "(" in text and text.endswith(")"):
        kind, node = text[:-1].split("(")
        return NextValue(NextKind(kind), int(node))
    return NextValue(NextKind(text))
