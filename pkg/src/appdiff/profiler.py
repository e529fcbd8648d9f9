"""Interactive profile-collection session.

A session takes a baseline snapshot, builds the known-file blacklist from
it, then loops over life-cycle phases. For each phase the user performs the
action (install, run, remove the application...) and presses ENTER; the
tool captures a new snapshot, hashes files absent from the blacklist,
diffs it against the previous snapshot and appends the classified objects
to the APXML document. The new snapshot then becomes the "before" side of
the next phase, so ``n`` phases cost ``n + 1`` captures.

All prompts go through a :class:`Console`, which lets tests script entire
sessions.
"""

from __future__ import annotations

import logging
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence

from . import __version__
from .apxml import (STANDARD_PHASES, APXMLDocument, CreatorRecord, Phase,
                    ProfileMetadata, emit, objects_from_diff, validate)
from .capture import CapturePolicy, capture_fs_snapshot
from .differ import DiffResult, diff_snapshots
from .errors import (AppdiffError, CaptureFailure, InvariantViolation,
                     OutputWriteFailure)
from .hashtrie import PathTrie, build_blacklist, selective_hash
from .hive import load_hive_file
from .model import Snapshot, format_timestamp, merge_snapshot_parts
from .store import persist_snapshot

log = logging.getLogger(__name__)


class Console(Protocol):
    def ask(self, prompt: str) -> str: ...

    def say(self, text: str) -> None: ...


class TerminalConsole:
    def ask(self, prompt: str) -> str:
        return input(prompt)

    def say(self, text: str) -> None:
        print(text, flush=True)


class ScriptedConsole:
    """Console fed from a list of responses.

    A response may be a callable; it is invoked when its prompt is reached
    (typically to mutate a fixture) and its return value, or ``""`` for
    ``None``, is used as the answer. Running out of responses acts like EOF.
    """

    def __init__(self, responses: Sequence):
        self._responses = list(responses)
        self.transcript: list[str] = []

    def ask(self, prompt: str) -> str:
        self.transcript.append(prompt)
        if not self._responses:
            raise EOFError
        r = self._responses.pop(0)
        if callable(r):
            r = r()
        answer = "" if r is None else str(r)
        self.transcript.append(answer)
        return answer

    def say(self, text: str) -> None:
        self.transcript.append(text)


@dataclass(frozen=True)
class SessionConfig:
    target_root: str
    output_path: str
    app_name: str = ""
    app_version: str = ""
    hive_source: str | None = None
    case_sensitive: bool = False
    phase_names: tuple[str, ...] = STANDARD_PHASES
    utf16: bool = False
    snapshot_dir: str | None = None
    recovery_path: str | None = None
    creator: CreatorRecord | None = None
    hash_workers: int | None = None


@dataclass(frozen=True)
class SessionState:
    baseline_blacklist: PathTrie
    current_snapshot1: Snapshot
    completed_phases: tuple[tuple[str, DiffResult], ...] = field(default=())


def default_creator() -> CreatorRecord:
    uname = platform.uname()
    env = (("os_sysname", uname.system), ("os_release", uname.release),
           ("os_version", uname.version), ("host", uname.node),
           ("arch", uname.machine), ("start_time", format_timestamp(time.time_ns())))
    return CreatorRecord("appdiff", __version__, env)


def capture_system(config: SessionConfig, snapshot_id: str) -> Snapshot:
    """Capture the file tree and, if configured, the serialized hive."""
    policy = CapturePolicy(case_sensitive=config.case_sensitive)
    try:
        snap = capture_fs_snapshot(config.target_root, policy, snapshot_id=snapshot_id)
        if config.hive_source:
            hive = load_hive_file(config.hive_source, case_sensitive=config.case_sensitive)
            snap = merge_snapshot_parts(snap, hive)
    except (AppdiffError, OSError) as exc:
        raise CaptureFailure(f"{snapshot_id}: {exc}") from exc
    return snap


def rotate_snapshots(state: SessionState, snapshot2: Snapshot,
                     phase: tuple[str, DiffResult] | None = None) -> SessionState:
    """Make ``snapshot2`` the next phase's before-snapshot."""
    completed = state.completed_phases + ((phase,) if phase else ())
    return replace(state, current_snapshot1=snapshot2, completed_phases=completed)


def assemble_profile(metadata: ProfileMetadata, creator: CreatorRecord,
                     phases: Sequence[tuple[str, Snapshot, Snapshot]]) -> APXMLDocument:
    """Build a profile offline from (phase name, before, after) snapshot pairs."""
    doc = APXMLDocument(metadata, creator)
    for name, before, after in phases:
        doc = doc.with_phase(Phase(name, tuple(objects_from_diff(diff_snapshots(before, after), name))))
    return doc


class ProfileSession:
    def __init__(self, config: SessionConfig, console: Console,
                 capture: Callable[[SessionConfig, str], Snapshot] = capture_system):
        self.config = config
        self.console = console
        self._capture = capture
        self.captures = 0
        self.state: SessionState | None = None
        self.document: APXMLDocument | None = None

    # -- helpers ---------------------------------------------------------

    def _ask(self, prompt: str) -> str | None:
        try:
            return self.console.ask(prompt)
        except EOFError:
            return None

    def capture(self, label: str) -> Snapshot:
        snap = self._capture(self.config, f"{self.captures:02d}-{label}")
        self.captures += 1
        for w in snap.warnings:
            self.console.say(f"warning: {w}")
        return snap

    def _keep(self, snap: Snapshot) -> None:
        if self.config.snapshot_dir:
            os.makedirs(self.config.snapshot_dir, exist_ok=True)
            persist_snapshot(snap, os.path.join(self.config.snapshot_dir, f"{snap.id}.snapshot"))

    def write(self, doc: APXMLDocument) -> None:
        text = emit(doc, utf16=self.config.utf16)
        report = validate(text)
        if not report.ok:
            raise InvariantViolation(f"emitted document fails validation: {report.violations[0]}")
        encoding = "utf-16" if self.config.utf16 else "utf-8"
        out = self.config.output_path
        tmp = f"{out}.tmp"
        try:
            with open(tmp, "w", encoding=encoding, newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, out)
        except OSError as exc:
            recovery = self.config.recovery_path or os.path.join(
                tempfile.gettempdir(), f"appdiff-recovery-{os.getpid()}.apxml")
            with open(recovery, "w", encoding=encoding, newline="\n") as fh:
                fh.write(text)
            raise OutputWriteFailure(f"cannot write {out}: {exc}; partial profile saved to {recovery}",
                                     recovery) from exc

    # -- procedure -------------------------------------------------------

    def run(self) -> APXMLDocument:
        cfg, say = self.config, self.console.say
        app_name = cfg.app_name or (self._ask("Application name: ") or "").strip()
        app_version = cfg.app_version or (self._ask("Application version: ") or "").strip()
        if not app_name or not app_version:
            raise InvariantViolation("application name and version are required")
        doc = APXMLDocument(ProfileMetadata(app_name, app_version),
                            cfg.creator or default_creator())

        self._ask("Press ENTER to collect the baseline snapshot")
        baseline = self.capture("baseline")
        self._keep(baseline)
        self.state = SessionState(build_blacklist(baseline), baseline)
        say(f"baseline: {len(baseline.files)} file entries, {len(baseline.keys)} keys, "
            f"{len(baseline.values)} values")
        self.document = doc
        self.write(doc)

        choices = "/".join(cfg.phase_names)
        while True:
            answer = self._ask(f"Life cycle phase ({choices}), or ENTER to finish: ")
            name = (answer or "").strip()
            if not name:
                break
            if name not in cfg.phase_names:
                say(f"unknown phase {name!r}; choose one of {choices}")
                continue
            if doc.phase(name) is not None:
                say(f"phase {name!r} already recorded")
                continue
            if self._ask(f"Perform the {name} phase, then press ENTER to collect the snapshot") is None:
                break
            try:
                after = self.capture(name)
            except CaptureFailure as exc:
                say(f"capture failed, phase {name!r} discarded: {exc}")
                continue
            after = selective_hash(after, self.state.baseline_blacklist, cfg.target_root,
                                   max_workers=cfg.hash_workers)
            self._keep(after)
            delta = diff_snapshots(self.state.current_snapshot1, after)
            doc = doc.with_phase(Phase(name, tuple(objects_from_diff(delta, name))))
            self.state = rotate_snapshots(self.state, after, (name, delta))
            self.document = doc
            self.write(doc)
            say(f"{name}: {len(delta.file_deltas)} file, {len(delta.key_deltas)} key, "
                f"{len(delta.value_deltas)} value deltas")
        say(f"profile written to {cfg.output_path}")
        return doc


def run_session(config: SessionConfig, console: Console, capture=capture_system) -> APXMLDocument:
    return ProfileSession(config, console, capture).run()
