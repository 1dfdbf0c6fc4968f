"""Schedules of atomic steps, and their plain-text file format.

A trace file looks like::

    hmcst-trace-v1
    digest 3f1c...e9
    variant skip-cas
    (0,proceed)
    (1,observe-status)
    (0,timeout)

The `variant` line is only present for traces recorded against a seeded bug.
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

from .errors import DigestMismatch, MalformedTrace
from .logging_utils import get_logger
from .protocol import Choice, ProtocolVariant
from .topology import Config

logger = get_logger(__file__)

TRACE_HEADER = "hmcst-trace-v1"

_RECORD = re.compile(r"^\((\d+),([a-z-]+)\)$")

Step = Tuple[int, Choice]


@dataclass
class Trace:
    """An initial configuration digest and the ordered scheduling decisions."""
    digest: str
    steps: List[Step] = field(default_factory=list)
    variant: ProtocolVariant = ProtocolVariant.CORRECT
    # the configuration the digest was taken from, when known
    config: Optional[Config] = field(default=None, repr=False, compare=False)

    @classmethod
    def of(cls, config: Config, steps, variant: ProtocolVariant = ProtocolVariant.CORRECT) -> "Trace":
        return cls(config.digest(), list(steps), variant, config)

    def __len__(self) -> int:
        return len(self.steps)

    def prefix(self, length: int) -> "Trace":
        return Trace(self.digest, self.steps[:length], self.variant, self.config)

    def bind(self, config: Config) -> "Trace":
        """Attaches the configuration to replay against. Raises DigestMismatch."""
        actual = config.digest()
        if actual != self.digest:
            raise DigestMismatch(
                f"trace was recorded against configuration {self.digest[:12]}..., "
                f"not {config.name} ({actual[:12]}...)",
                expected=self.digest, actual=actual,
            )
        self.config = config
        return self

    def dumps(self) -> str:
        lines = [TRACE_HEADER, f"digest {self.digest}"]
        if self.variant is not ProtocolVariant.CORRECT:
            lines.append(f"variant {self.variant.value}")
        lines.extend(f"({thread},{choice.value})" for thread, choice in self.steps)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Trace":
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines or lines[0] != TRACE_HEADER:
            raise MalformedTrace(f"missing trace header {TRACE_HEADER!r}")
        if len(lines) < 2 or not lines[1].startswith("digest "):
            raise MalformedTrace("missing digest line")
        digest = lines[1][len("digest "):].strip()
        if not re.fullmatch(r"[0-9a-f]{64}", digest):
            raise MalformedTrace(f"invalid digest {digest!r}")
        body = lines[2:]
        variant = ProtocolVariant.CORRECT
        if body and body[0].startswith("variant "):
            name = body[0][len("variant "):].strip()
            try:
                variant = ProtocolVariant(name)
            except ValueError:
                raise MalformedTrace(f"unknown protocol variant {name!r}")
            body = body[1:]
        steps: List[Step] = []
        for number, line in enumerate(body, start=1):
            m = _RECORD.match(line)
            if not m:
                raise MalformedTrace(f"record {number}: cannot parse {line!r}", record=number)
            try:
                choice = Choice(m.group(2))
            except ValueError:
                raise MalformedTrace(f"record {number}: unknown choice {m.group(2)!r}", record=number)
            steps.append((int(m.group(1)), choice))
        return cls(digest, steps, variant)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        logger.info(f"trace of {len(self.steps)} steps written to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Trace":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise MalformedTrace(f"cannot read trace {path}: {e}") from e
        return cls.loads(text)
