"""Differential analysis of two snapshots.

Every artifact is paired with its counterpart by comparison-form path and
kind. Unpaired artifacts in the later snapshot are *new*, unpaired ones in
the earlier snapshot are *deleted*. Paired artifacts are compared by
property:

files
    size differs, or both sides carry a digest and the digests differ
    -> *modified*; otherwise write time or attributes differ -> *changed*.
directories
    write time or attributes differ -> *changed* (size is not compared).
keys
    modified time differs -> *changed*.
values
    data type or data differs -> *modified*.

Access time is never compared. A modified file is reported once, as
modified, even when its write time also moved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import EntryKind, FileEntry, HiveKey, HiveValue, Snapshot


class DeltaState(str, Enum):
    NEW = "new"
    CHANGED = "changed"
    MODIFIED = "modified"
    DELETED = "deleted"


@dataclass(frozen=True)
class DiffResult:
    file_deltas: tuple[tuple[FileEntry, DeltaState], ...] = ()
    key_deltas: tuple[tuple[HiveKey, DeltaState], ...] = ()
    value_deltas: tuple[tuple[HiveValue, DeltaState], ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def is_empty(self) -> bool:
        return not (self.file_deltas or self.key_deltas or self.value_deltas)

    def __iter__(self):
        yield from self.file_deltas
        yield from self.key_deltas
        yield from self.value_deltas

    def count(self) -> int:
        return len(self.file_deltas) + len(self.key_deltas) + len(self.value_deltas)


_KIND_ORDER = {EntryKind.DIRECTORY: 0, EntryKind.FILE: 1}


def _check_policy(s1: Snapshot, s2: Snapshot) -> bool:
    if s1.case_sensitive != s2.case_sensitive:
        raise ValueError("snapshots use different case policies")
    return s1.case_sensitive


def _classify_file(a: FileEntry, b: FileEntry) -> DeltaState | None:
    if a.kind is EntryKind.FILE:
        if a.size != b.size:
            return DeltaState.MODIFIED
        if a.sha1 is not None and b.sha1 is not None and a.sha1 != b.sha1:
            return DeltaState.MODIFIED
    if a.write_time != b.write_time or a.attributes != b.attributes:
        return DeltaState.CHANGED
    return None


def diff_files(s1: Snapshot, s2: Snapshot) -> tuple[tuple[FileEntry, DeltaState], ...]:
    cs = _check_policy(s1, s2)
    out = []
    for k, b in s2.files.items():
        a = s1.files.get(k)
        if a is None or a.kind is not b.kind:
            out.append((b, DeltaState.NEW))
        else:
            state = _classify_file(a, b)
            if state is not None:
                out.append((b, state))
    for k, a in s1.files.items():
        b = s2.files.get(k)
        if b is None or a.kind is not b.kind:
            out.append((a, DeltaState.DELETED))
    out.sort(key=lambda d: (d[0].path.key(cs), _KIND_ORDER[d[0].kind]))
    return tuple(out)


def _group_values(s: Snapshot) -> dict[str, list[HiveValue]]:
    groups: dict[str, list[HiveValue]] = {}
    for v in s.values.values():
        groups.setdefault(s.key_of(v.parent_key), []).append(v)
    return groups


def diff_registry(s1: Snapshot, s2: Snapshot):
    """Return ``(key_deltas, value_deltas)``.

    Values are compared inside the loop over matched keys; values of keys
    present on one side only inherit that key's state.
    """
    cs = _check_policy(s1, s2)
    vals1, vals2 = _group_values(s1), _group_values(s2)
    keys_out, vals_out = [], []

    for k, kb in s2.keys.items():
        ka = s1.keys.get(k)
        if ka is None:
            keys_out.append((kb, DeltaState.NEW))
            vals_out.extend((v, DeltaState.NEW) for v in vals2.get(k, ()))
            continue
        if ka.modified_time != kb.modified_time:
            keys_out.append((kb, DeltaState.CHANGED))
        before = {s1.key_of(v.cellpath): v for v in vals1.get(k, ())}
        for vb in vals2.get(k, ()):
            va = before.pop(s2.key_of(vb.cellpath), None)
            if va is None:
                vals_out.append((vb, DeltaState.NEW))
            elif va.data_type != vb.data_type or va.data != vb.data:
                vals_out.append((vb, DeltaState.MODIFIED))
        vals_out.extend((va, DeltaState.DELETED) for va in before.values())

    for k, ka in s1.keys.items():
        if k not in s2.keys:
            keys_out.append((ka, DeltaState.DELETED))
            vals_out.extend((v, DeltaState.DELETED) for v in vals1.get(k, ()))

    keys_out.sort(key=lambda d: d[0].cellpath.key(cs))
    vals_out.sort(key=lambda d: d[0].cellpath.key(cs))
    return tuple(keys_out), tuple(vals_out)


def diff_snapshots(s1: Snapshot, s2: Snapshot) -> DiffResult:
    """Compare ``s1`` (before) with ``s2`` (after)."""
    files = diff_files(s1, s2)
    keys, values = diff_registry(s1, s2)
    return DiffResult(files, keys, values, s2.warnings)
