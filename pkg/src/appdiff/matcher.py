"""Correlate an application profile with a target system.

The target is captured once, every file hashed, and indexed by path, by
digest and by registry cellpath. Each profile object is then looked up:

* files with a digest match on path *and* digest; the policy may fall back
  to digest anywhere on the target (``hash-only``) or to path alone
  (``path-only``);
* files without a digest (directories, unhashed files) match on path;
* keys match on cellpath; values on cellpath, data type and rendered data
  unless data checking is switched off;
* deleted objects are skipped unless absence matching is enabled, in which
  case the artifact being absent from the target counts as a match.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .apxml.document import (META_DIRECTORY, APXMLDocument, CellObject,
                             FileObject, render_value_data)
from .capture import CapturePolicy, capture_fs_snapshot
from .differ import DeltaState
from .hashtrie import PathTrie, selective_hash, sha1_file
from .hive import load_hive_file
from .model import EntryKind, Snapshot, merge_snapshot_parts


class MatchKind(str, Enum):
    PATH_HASH = "path+hash"
    HASH_ONLY = "hash-only"
    PATH_ONLY = "path-only"
    CELLPATH = "cellpath"
    CELLPATH_DATA = "cellpath+data"
    ABSENT = "absent"


FALLBACKS = (None, "hash-only", "path-only")


@dataclass(frozen=True)
class MatchPolicy:
    file_fallback: str | None = None
    value_data: bool = True
    absence: bool = False

    def __post_init__(self):
        if self.file_fallback not in FALLBACKS:
            raise ValueError(f"unknown file fallback {self.file_fallback!r}")


@dataclass(frozen=True)
class TargetIndex:
    case_sensitive: bool
    # comparison-form path -> (kind, sha1 or None)
    files: dict[str, tuple[EntryKind, str | None]]
    # sha1 -> rendered paths carrying it
    hashes: dict[str, frozenset[str]]
    # comparison-form cellpath -> (name_type, data_type, data, encoding)
    cells: dict[str, tuple[str, str | None, str | None, str | None]]
    warnings: tuple[str, ...] = ()

    def __len__(self):
        return len(self.files) + len(self.cells)


def index_snapshot(s: Snapshot) -> TargetIndex:
    files, hashes = {}, {}
    for k, f in s.files.items():
        files[k] = (f.kind, f.sha1)
        if f.sha1 is not None:
            hashes.setdefault(f.sha1, set()).add(f.path.render())
    cells = {k: ("k", None, None, None) for k in s.keys}
    for k, v in s.values.items():
        data, encoding = render_value_data(v.data_type, v.data)
        cells[k] = ("v", v.data_type.value, data, encoding)
    return TargetIndex(s.case_sensitive, files,
                       {h: frozenset(p) for h, p in hashes.items()}, cells, s.warnings)


def build_target_index(root, hive_source=None, case_sensitive: bool = False,
                       hasher=sha1_file) -> TargetIndex:
    """Capture and fully hash ``root`` (plus an optional serialized hive)."""
    policy = CapturePolicy(case_sensitive=case_sensitive)
    snap = capture_fs_snapshot(root, policy, snapshot_id="target")
    snap = selective_hash(snap, PathTrie(case_sensitive=case_sensitive), root, hasher)
    if hive_source is not None:
        hive = load_hive_file(hive_source, case_sensitive=case_sensitive)
        snap = merge_snapshot_parts(snap, hive)
    return index_snapshot(snap)


@dataclass(frozen=True)
class PhaseMatch:
    phase: str
    total: int
    matched: int
    skipped: int
    by_kind: dict[str, int]
    matches: tuple[tuple[FileObject | CellObject, MatchKind], ...]

    @property
    def unmatched(self) -> int:
        return self.total - self.matched - self.skipped


@dataclass(frozen=True)
class MatchReport:
    app_name: str
    app_version: str
    phases: tuple[PhaseMatch, ...] = field(default=())

    def phase(self, name: str) -> PhaseMatch | None:
        return next((p for p in self.phases if p.phase == name), None)

    @property
    def total(self) -> int:
        return sum(p.total for p in self.phases)

    @property
    def matched(self) -> int:
        return sum(p.matched for p in self.phases)

    @property
    def skipped(self) -> int:
        return sum(p.skipped for p in self.phases)

    def to_dict(self) -> dict:
        phases = []
        for p in self.phases:
            phases.append({
                "phase": p.phase,
                "total": p.total,
                "matched": p.matched,
                "skipped": p.skipped,
                "unmatched": p.unmatched,
                "matched_by": {k.value: p.by_kind.get(k.value, 0) for k in MatchKind},
                "matches": [{"artifact": _artifact_kind(o), "path": _object_path(o),
                             "delta": o.delta.value, "match": kind.value}
                            for o, kind in p.matches],
            })
        return {
            "profile": {"app_name": self.app_name, "app_version": self.app_version},
            "phases": phases,
            "summary": {"total": self.total, "matched": self.matched,
                        "skipped": self.skipped},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        out = [f"Profile: {self.app_name} {self.app_version}"]
        for p in self.phases:
            out.append(f"\n[{p.phase}] matched {p.matched}/{p.total}"
                       f" (skipped {p.skipped}, unmatched {p.unmatched})")
            for kind in MatchKind:
                n = p.by_kind.get(kind.value, 0)
                if n:
                    out.append(f"  {kind.value:<14}{n:>8}")
            for obj, kind in p.matches:
                out.append(f"  {kind.value:<14}{_artifact_kind(obj):<10}{_object_path(obj)}")
        out.append(f"\nTotal: matched {self.matched}/{self.total}, skipped {self.skipped}")
        return "\n".join(out) + "\n"


def _object_path(obj) -> str:
    return (obj.filename if isinstance(obj, FileObject) else obj.cellpath).render()


def _artifact_kind(obj) -> str:
    if isinstance(obj, FileObject):
        return "directory" if obj.meta_type == META_DIRECTORY else "file"
    return "key" if obj.name_type == "k" else "value"


def _match_file(obj: FileObject, target: TargetIndex, policy: MatchPolicy):
    want = EntryKind.DIRECTORY if obj.meta_type == META_DIRECTORY else EntryKind.FILE
    entry = target.files.get(obj.filename.key(target.case_sensitive))
    if entry is not None and entry[0] is not want:
        entry = None
    if obj.delta is DeltaState.DELETED:
        return MatchKind.ABSENT if entry is None else None
    if obj.sha1 is None:
        return MatchKind.PATH_ONLY if entry is not None else None
    if entry is not None and entry[1] == obj.sha1:
        return MatchKind.PATH_HASH
    if policy.file_fallback == "hash-only" and obj.sha1 in target.hashes:
        return MatchKind.HASH_ONLY
    if policy.file_fallback == "path-only" and entry is not None:
        return MatchKind.PATH_ONLY
    return None


def _match_cell(obj: CellObject, target: TargetIndex, policy: MatchPolicy):
    cell = target.cells.get(obj.cellpath.key(target.case_sensitive))
    if cell is not None and cell[0] != obj.name_type:
        cell = None
    if obj.delta is DeltaState.DELETED:
        return MatchKind.ABSENT if cell is None else None
    if cell is None:
        return None
    if obj.name_type == "k" or not policy.value_data:
        return MatchKind.CELLPATH
    data_type = obj.data_type.value if obj.data_type is not None else None
    if cell[1:] == (data_type, obj.data, obj.data_encoding):
        return MatchKind.CELLPATH_DATA
    return None


def match_profile(profile: APXMLDocument, target: TargetIndex,
                  policy: MatchPolicy = MatchPolicy()) -> MatchReport:
    phases = []
    for phase in profile.phases:
        matches, skipped = [], 0
        for obj in phase.objects:
            if obj.delta is DeltaState.DELETED and not policy.absence:
                skipped += 1
                continue
            if isinstance(obj, FileObject):
                kind = _match_file(obj, target, policy)
            else:
                kind = _match_cell(obj, target, policy)
            if kind is not None:
                matches.append((obj, kind))
        counts = Counter(k.value for _, k in matches)
        phases.append(PhaseMatch(phase.name, len(phase.objects), len(matches), skipped,
                                 dict(counts), tuple(matches)))
    return MatchReport(profile.metadata.app_name, profile.metadata.app_version, tuple(phases))
