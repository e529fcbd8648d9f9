"""Walk a directory tree into a file-only :class:`~appdiff.model.Snapshot`."""

from __future__ import annotations

import logging
import os
import stat
import time
import uuid
from dataclasses import dataclass

from .errors import DuplicateCell, RootUnreadable
from .model import (ATTR_READONLY, ATTR_REPARSE_POINT, EntryKind, FileEntry,
                    Snapshot)
from .paths import CanonicalPath, PathKind

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapturePolicy:
    case_sensitive: bool = False
    # Open every regular file once so unreadable (locked) files are skipped
    # at capture time rather than failing later during hashing.
    probe_readable: bool = True


def _attributes(st: os.stat_result, is_link: bool) -> int:
    native = getattr(st, "st_file_attributes", None)
    if native is not None:
        attrs = native
    else:
        attrs = 0 if st.st_mode & stat.S_IWUSR else ATTR_READONLY
    if is_link:
        attrs |= ATTR_REPARSE_POINT
    return attrs & 0xFFFFFFFF


def _probe(path: str) -> None:
    with open(path, "rb"):
        pass


def capture_fs_snapshot(root, policy: CapturePolicy = CapturePolicy(),
                        snapshot_id: str | None = None) -> Snapshot:
    """Capture every file and directory below ``root`` (the root itself excluded).

    Symbolic links are recorded, never followed, as files of size 0 with the
    reparse-point attribute bit set. Entries that cannot be read are skipped
    and reported in ``Snapshot.warnings``.
    """
    root = os.fspath(root)
    try:
        top = os.scandir(root)
    except OSError as exc:
        raise RootUnreadable(f"cannot read {root}: {exc}") from exc
    top.close()

    taken_at = time.time_ns()
    entries: dict[str, FileEntry] = {}
    warnings: list[str] = []

    def warn(msg):
        log.warning(msg)
        warnings.append(msg)

    def add(entry: FileEntry):
        k = entry.path.key(policy.case_sensitive)
        if k in entries:
            warn(f"skipped {entry.path}: collides with {entries[k].path} under case-insensitive comparison")
            return False
        entries[k] = entry
        return True

    stack: list[tuple[str, tuple[str, ...]]] = [(root, ())]
    while stack:
        dirpath, segs = stack.pop()
        try:
            with os.scandir(dirpath) as it:
                children = sorted(it, key=lambda e: e.name)
        except OSError as exc:
            warn(f"cannot list {'/'.join(segs) or dirpath}: {exc.strerror or exc}")
            continue
        subdirs = []
        for de in children:
            path = CanonicalPath(segs + (de.name,), PathKind.FILESYSTEM)
            try:
                st = de.stat(follow_symlinks=False)
                is_link = stat.S_ISLNK(st.st_mode)
                if stat.S_ISDIR(st.st_mode):
                    kind, size = EntryKind.DIRECTORY, 0
                else:
                    kind = EntryKind.FILE
                    size = 0 if is_link else st.st_size
                    if policy.probe_readable and stat.S_ISREG(st.st_mode):
                        _probe(de.path)
            except OSError as exc:
                warn(f"skipped {path}: {exc.strerror or exc}")
                continue
            entry = FileEntry(path, kind, size, st.st_mtime_ns, st.st_atime_ns,
                              _attributes(st, is_link))
            if add(entry) and kind is EntryKind.DIRECTORY:
                subdirs.append((de.path, path.segments))
        stack.extend(reversed(subdirs))

    try:
        return Snapshot.build(snapshot_id or uuid.uuid4().hex, taken_at,
                              files=entries.values(),
                              case_sensitive=policy.case_sensitive,
                              warnings=warnings)
    except DuplicateCell as exc:  # pragma: no cover - guarded by add()
        raise RootUnreadable(str(exc)) from exc
