"""Command-line front end.

    hmcst check-nfa --which all
    hmcst explore --preset root --rounds 1 --no-timing
    hmcst export --which next --out next.dot
    hmcst replay --trace violation.trace

Every invocation prints its report on stdout and exactly one run manifest, as
`manifest.<key>=<value>` lines, on stderr. The exit status is 0 on a pass, 1
on a property violation, 2 on a usage or internal error and 3 when the state
cap is hit.
"""
import hashlib
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Union

from simple_parsing import ArgumentParser, choice, field, subparsers
from simple_parsing.helpers import Serializable, list_field

from . import __version__
from .errors import (AssertionViolated, ConformanceViolation, DigestMismatch, HmcstError,
                     MalformedNfa, MalformedTrace, ResourceBudgetExceeded)
from .explorer import (BFS, DFS, REQUIRED_COVERAGE, ExplorationReport, Explorer,
                       coverage_key_values, coverage_report)
from .logging_utils import get_logger, setup_logging
from .nfa import FieldKind, Nfa, build_nfa, check_all, export_graph
from .protocol import ProtocolVariant
from .topology import PRESETS, Config, ConfigError
from .trace import Trace

logger = get_logger(__file__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_STATE_CAP = 3

WHICH: Dict[str, FieldKind] = {
    "root-status": FieldKind.STATUS_ROOT,
    "nonroot-status": FieldKind.STATUS_NONROOT,
    "next": FieldKind.NEXT,
}
ALL = "all"

DEFAULT_TRACE_PATH = Path("hmcst-violation.trace")


@dataclass
class RunManifest(Serializable):
    """One record per invocation: what ran, on what, and how it ended."""
    command: str = ""
    # configuration digest, or digest of the automata for check-nfa / export
    digest: str = ""
    version: str = __version__
    status: int = EXIT_PASS
    # key=value result lines
    summary: List[str] = list_field()
    # seconds; None when timing is disabled
    elapsed: Optional[float] = None

    def lines(self) -> List[str]:
        lines = [
            f"manifest.command={self.command}",
            f"manifest.digest={self.digest}",
            f"manifest.version={self.version}",
            f"manifest.status={self.status}",
        ]
        lines.extend(f"manifest.{line}" for line in self.summary)
        if self.elapsed is not None:
            lines.append(f"manifest.elapsed={self.elapsed:.3f}")
        return lines


def _selected(which: str) -> List[FieldKind]:
    if which == ALL:
        return list(WHICH.values())
    return [WHICH[which]]


def _nfa_digest(nfas: Sequence[Nfa]) -> str:
    text = "".join(export_graph(nfa) for nfa in nfas)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def cmd_check_nfa(which: str = ALL, out: TextIO = None,
                  nfas: Optional[Dict[FieldKind, Nfa]] = None) -> RunManifest:
    """Runs every structural check on the selected automata.

    `nfas` replaces the built automata of the given kinds, which is how
    mutated fixtures are checked.
    """
    out = out or sys.stdout
    manifest = RunManifest(command="check-nfa")
    checked: List[Nfa] = []
    failed = 0
    for kind in _selected(which):
        nfa = (nfas or {}).get(kind) or build_nfa(kind)
        checked.append(nfa)
        try:
            results = check_all(nfa)
        except MalformedNfa as e:
            print(f"{kind.value}: malformed: {e}", file=out)
            manifest.summary.append(f"{kind.value}.malformed=1")
            failed += 1
            continue
        print(f"{kind.value}: {len(nfa.states)} states, {len(nfa.edges)} edges", file=out)
        for result in results:
            print(f"  {result.name:<20} {result.status}", file=out)
            if result.verdict is False:
                failed += 1
                print(f"    {result.detail}: {', '.join(result.witness)}", file=out)
            manifest.summary.append(f"{kind.value}.{result.name}={result.status}")
    manifest.digest = _nfa_digest(checked)
    manifest.summary.append(f"failed={failed}")
    manifest.status = EXIT_VIOLATION if failed else EXIT_PASS
    return manifest


def cmd_export(which: str = ALL, out_path: Optional[Path] = None, out: TextIO = None) -> RunManifest:
    """Writes the graph text of the selected automata.

    With several automata `out_path` is a directory receiving one
    `<kind>.dot` file each; with one it is the file to write. Without it the
    text goes to `out`.
    """
    out = out or sys.stdout
    kinds = _selected(which)
    nfas = [build_nfa(kind) for kind in kinds]
    manifest = RunManifest(command="export", digest=_nfa_digest(nfas))
    for kind, nfa in zip(kinds, nfas):
        text = export_graph(nfa)
        if out_path is None:
            out.write(text)
            continue
        target = Path(out_path) / f"{kind.value}.dot" if len(kinds) > 1 else Path(out_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        logger.info(f"wrote {target}")
        manifest.summary.append(f"written={target}")
    manifest.summary.append(f"graphs={len(nfas)}")
    return manifest


def _run(config: Config, variant: ProtocolVariant, strategy: str):
    """Runs one exploration; returns the report and the violation, if any."""
    try:
        return Explorer(config, variant).run(strategy), None
    except (AssertionViolated, ConformanceViolation) as e:
        return e.payload["report"], e


def cmd_explore(config: Config, strategy: str = DFS,
                variant: ProtocolVariant = ProtocolVariant.CORRECT,
                overridden: bool = False, cross_check: bool = False,
                trace_path: Path = DEFAULT_TRACE_PATH, timing: bool = True,
                out: TextIO = None) -> RunManifest:
    """Explores a configuration and reports states, violations and coverage.

    A coverage gap on a preset run as-is fails the run. With overrides
    (`overridden`) the configuration may be deliberately too small to reach
    every edge, so a gap is only a warning.
    """
    out = out or sys.stdout
    manifest = RunManifest(command="explore", digest=config.digest())
    try:
        report, violation = _run(config, variant, strategy)
    except ResourceBudgetExceeded as e:
        report = e.payload["report"]
        for line in report.summary_lines(timing):
            print(line, file=out)
        print(f"state cap hit: {e}", file=out)
        manifest.summary.extend(report.summary_lines(False))
        manifest.summary.append("result=state-cap")
        manifest.status = EXIT_STATE_CAP
        return manifest

    for line in report.summary_lines(timing):
        print(line, file=out)
    kinds = [FieldKind(kind) for kind in report.coverage]
    print(coverage_report(report, kinds), file=out)
    manifest.summary.extend(report.summary_lines(False))
    manifest.summary.extend(coverage_key_values(report, kinds))

    if violation is not None:
        print(f"VIOLATION: {violation}", file=out)
        if violation.trace is not None:
            violation.trace.save(trace_path)
            print(f"trace written to {trace_path} ({len(violation.trace)} steps)", file=out)
            manifest.summary.append(f"trace={trace_path}")
        manifest.summary.append("result=violation")
        manifest.status = EXIT_VIOLATION
    else:
        manifest.status = EXIT_PASS
        required = REQUIRED_COVERAGE.get(config.name, [])
        gaps = [kind for kind in required if not report.coverage_complete([kind])]
        for kind in gaps:
            missing = report.uncovered(kind)
            message = f"coverage gap on {kind.value}: {len(missing)} edges never taken"
            if overridden:
                logger.warning(message)
                print(f"warning: {message}", file=out)
            else:
                print(f"FAIL: {message}", file=out)
                manifest.status = EXIT_VIOLATION
        manifest.summary.append(f"coverage_gaps={len(gaps)}")
        manifest.summary.append("result=pass" if manifest.status == EXIT_PASS else "result=coverage-gap")

    if cross_check:
        other = BFS if strategy == DFS else DFS
        other_report, other_violation = _run(config, variant, other)
        agree = (violation is None) == (other_violation is None)
        if violation is None and agree:
            agree = other_report.states_visited == report.states_visited
        print(f"cross-check {other}: states={other_report.states_visited} "
              f"violations={len(other_report.violations)} {'agree' if agree else 'DISAGREE'}", file=out)
        manifest.summary.append(f"cross_check={'agree' if agree else 'disagree'}")
        if not agree:
            manifest.status = EXIT_VIOLATION
    return manifest


def _resolve_config(trace: Trace, config: Optional[Config]) -> Config:
    if config is not None:
        trace.bind(config)
        return config
    for make in PRESETS.values():
        candidate = make()
        if candidate.digest() == trace.digest:
            trace.bind(candidate)
            return candidate
    raise DigestMismatch(f"trace digest {trace.digest[:12]}... matches no preset; pass --config",
                         expected=trace.digest, actual=None)


def cmd_replay(trace_path: Path, config: Optional[Config] = None, timing: bool = True,
               out: TextIO = None) -> RunManifest:
    """Replays a recorded schedule and re-checks every assertion along it.

    Raises MalformedTrace or DigestMismatch when the trace cannot be replayed
    against the configuration.
    """
    out = out or sys.stdout
    trace = Trace.load(trace_path)
    config = _resolve_config(trace, config)
    manifest = RunManifest(command="replay", digest=config.digest())
    explorer = Explorer(config, trace.variant)
    print(f"config={config.name}", file=out)
    print(f"variant={trace.variant.value}", file=out)
    print(f"steps={len(trace)}", file=out)
    manifest.summary.append(f"steps={len(trace)}")
    try:
        result = explorer.replay(trace)
    except (AssertionViolated, ConformanceViolation) as e:
        at = len(e.trace) if e.trace is not None else len(trace)
        print(f"VIOLATION at step {at}: {e}", file=out)
        manifest.summary.append(f"violation_step={at}")
        manifest.summary.append("result=violation")
        manifest.status = EXIT_VIOLATION
        return manifest
    for index, ((thread, choice_), labels) in enumerate(zip(trace.steps, result.labels)):
        accesses = "; ".join(str(label) for label in labels) or "-"
        print(f"{index:>5} t{thread} {choice_.value}: {accesses}", file=out)
    for event in result.events:
        print(f"event t{event.thread} round {event.round} {event.kind} level {event.level}", file=out)
    terminal = hashlib.sha256(result.state.encode()).hexdigest()
    for frame in result.state.frames:
        print(f"t{frame.tid} pc={frame.pc.value} round={frame.round} outcomes={frame.outcomes or '-'}", file=out)
    topology = explorer.topology
    for node in range(len(topology.nodes)):
        q = result.state.qnode(topology, node)
        print(f"node {q.domain} level {q.level} status={q.status} next={q.next}", file=out)
    for lock in range(len(topology.locks)):
        tail = result.state.lock_level(topology, lock)
        print(f"lock level {tail.level} ({tail.kind}) tail={tail.tail}", file=out)
    print(f"terminal={terminal}", file=out)
    manifest.summary.append(f"terminal={terminal}")
    manifest.summary.append("result=pass")
    manifest.status = EXIT_PASS
    return manifest


@dataclass
class CommonOptions:
    # log every explored state and matched edge
    verbose: bool = field(default=False, alias="-v")
    # leave timing out of reports and the manifest
    no_timing: bool = field(default=False, alias="--no-timing")
    # also save the run manifest to this file (.json or .yaml)
    manifest: Optional[Path] = None


@dataclass
class ConfigOptions(CommonOptions):
    # verification preset to start from
    preset: str = choice(*PRESETS.keys(), default="root")
    # configuration file (.json or .yaml) replacing the preset
    config: Optional[Path] = None
    # maximal number of cohort passes at a non-root level
    passing_threshold: Optional[int] = field(default=None, alias="--passing-threshold")
    # acquisition rounds of every thread
    rounds: Optional[int] = None
    # keep only the first N threads of the configuration
    threads: Optional[int] = None
    # abort after this many distinct states
    state_cap: Optional[int] = field(default=None, alias="--state-cap")

    @property
    def overridden(self) -> bool:
        """True when the configuration differs from an unmodified preset."""
        return (self.config is not None or self.passing_threshold is not None
                or self.rounds is not None or self.threads is not None)

    def load_config(self) -> Config:
        if self.config is not None:
            try:
                base = Config.load(self.config)
            except (OSError, RuntimeError, ValueError, TypeError, KeyError) as e:
                raise ConfigError(f"cannot load configuration {self.config}: {e}") from e
        else:
            base = PRESETS[self.preset]()
        config = base.with_overrides(
            passing_threshold=self.passing_threshold,
            rounds=self.rounds,
            state_cap=self.state_cap,
            thread_count=self.threads,
        )
        return config.validate()


@dataclass
class CheckNfa(CommonOptions):
    """Runs the structural property checks on the shared-field automata."""
    # automaton to check
    which: str = choice(*WHICH.keys(), ALL, default=ALL, alias="-w")

    def execute(self, out: TextIO = None) -> RunManifest:
        return cmd_check_nfa(self.which, out)


@dataclass
class Explore(ConfigOptions):
    """Explores every interleaving of a configuration."""
    # search order
    strategy: str = choice(DFS, BFS, default=DFS)
    # run against a seeded protocol bug instead of the correct protocol
    mutation: str = choice(*(v.value for v in ProtocolVariant), default=ProtocolVariant.CORRECT.value)
    # also run the other search order and compare the verdicts
    cross_check: bool = field(default=False, alias="--cross-check")
    # where the schedule of a violation is written
    out: Path = DEFAULT_TRACE_PATH

    def execute(self, out: TextIO = None) -> RunManifest:
        return cmd_explore(
            self.load_config(),
            strategy=self.strategy,
            variant=ProtocolVariant(self.mutation),
            overridden=self.overridden,
            cross_check=self.cross_check,
            trace_path=self.out,
            timing=not self.no_timing,
            out=out,
        )


@dataclass
class Export(CommonOptions):
    """Writes the graph text of the shared-field automata."""
    # automaton to export
    which: str = choice(*WHICH.keys(), ALL, default=ALL, alias="-w")
    # output file, or directory when exporting all automata; stdout if unset
    out: Optional[Path] = None

    def execute(self, out: TextIO = None) -> RunManifest:
        return cmd_export(self.which, self.out, out)


@dataclass
class Replay(ConfigOptions):
    """Replays a recorded schedule, re-checking every assertion."""
    # the preset is found from the trace digest unless given
    preset: Optional[str] = choice(*PRESETS.keys(), default=None)
    # trace file to replay
    trace: Path = DEFAULT_TRACE_PATH

    def execute(self, out: TextIO = None) -> RunManifest:
        config = self.load_config() if (self.preset or self.overridden) else None
        return cmd_replay(self.trace, config, timing=not self.no_timing, out=out)

    def load_config(self) -> Config:
        if self.preset is None and self.config is None:
            self.preset = "root"
        return super().load_config()


COMMANDS = {
    "check-nfa": CheckNfa,
    "explore": Explore,
    "export": Export,
    "replay": Replay,
}


@dataclass
class Program:
    """Executable model of the HMCS-T hierarchical abortable queue lock."""
    command: Union[CheckNfa, Explore, Export, Replay] = subparsers(COMMANDS)


def _emit(manifest: RunManifest, err: TextIO, path: Optional[Path] = None) -> None:
    for line in manifest.lines():
        print(line, file=err)
    if path is not None:
        manifest.save(path)


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = ArgumentParser(prog="hmcst", description=Program.__doc__)
    parser.add_arguments(Program, dest="program")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        status = e.code if isinstance(e.code, int) else EXIT_USAGE
        _emit(RunManifest(command="usage", status=status), err)
        return status

    command = args.program.command
    setup_logging(command.verbose)
    name = next(key for key, cls in COMMANDS.items() if isinstance(command, cls))
    start = time.perf_counter()
    try:
        manifest = command.execute(out)
    except ResourceBudgetExceeded as e:
        print(f"state cap hit: {e}", file=err)
        manifest = RunManifest(command=name, status=EXIT_STATE_CAP)
    except (AssertionViolated, ConformanceViolation) as e:
        print(f"violation: {e}", file=err)
        manifest = RunManifest(command=name, status=EXIT_VIOLATION)
    except (DigestMismatch, MalformedTrace, ConfigError) as e:
        print(f"error: {e}", file=err)
        manifest = RunManifest(command=name, status=EXIT_USAGE)
    except HmcstError as e:
        logger.error(f"internal error: {e}")
        print(f"error: {e}", file=err)
        manifest = RunManifest(command=name, status=EXIT_USAGE)
    except Exception as e:
        logger.exception(e)
        print(f"internal error: {e!r}", file=err)
        manifest = RunManifest(command=name, status=EXIT_USAGE)
    if not command.no_timing:
        manifest.elapsed = time.perf_counter() - start
    _emit(manifest, err, command.manifest)
    return manifest.status
