"""In-memory system state: file entries, hive keys and values, snapshots.

All records are immutable. Timestamps are integer nanoseconds since the Unix
epoch (UTC). A :class:`Snapshot` keys its collections by the comparison form
of each path, which is case-folded unless the snapshot is case sensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (DuplicateCell, OrphanFile, OrphanValue, PartNotDisjoint)
from .paths import CanonicalPath, PathKind

SHA1_RE = re.compile(r"[0-9a-f]{40}")

# Windows FILE_ATTRIBUTE_* bits; only the ones we populate off-Windows.
ATTR_READONLY = 0x1
ATTR_REPARSE_POINT = 0x400

DEFAULT_HIVE_ROOTS = frozenset({"HKLM", "HKU"})


class EntryKind(str, Enum):
    FILE = "file"
    DIRECTORY = "directory"


class RegType(str, Enum):
    REG_NONE = "REG_NONE"
    REG_SZ = "REG_SZ"
    REG_EXPAND_SZ = "REG_EXPAND_SZ"
    REG_BINARY = "REG_BINARY"
    REG_DWORD = "REG_DWORD"
    REG_DWORD_BIG_ENDIAN = "REG_DWORD_BIG_ENDIAN"
    REG_LINK = "REG_LINK"
    REG_MULTI_SZ = "REG_MULTI_SZ"
    REG_QWORD = "REG_QWORD"


def format_timestamp(ns: int) -> str:
    """Render nanoseconds since the epoch as ISO-8601 UTC with 9 fraction digits."""
    secs, frac = divmod(ns, 1_000_000_000)
    dt = datetime.fromtimestamp(secs, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{frac:09d}Z"


_ISO_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,9}))?(Z|[+-]\d{2}:\d{2})$")


def parse_timestamp(text: str) -> int:
    """Parse ISO-8601 (with up to nanosecond fraction) into epoch nanoseconds."""
    m = _ISO_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad timestamp: {text!r}")
    y, mo, d, h, mi, s, frac, tz = m.groups()
    tzinfo = timezone.utc
    if tz != "Z":
        sign = 1 if tz[0] == "+" else -1
        hh, mm = int(tz[1:3]), int(tz[4:6])
        tzinfo = timezone(sign * timedelta(hours=hh, minutes=mm))
    dt = datetime(int(y), int(mo), int(d), int(h), int(mi), int(s), tzinfo=tzinfo)
    seconds = int(dt.timestamp())
    return seconds * 1_000_000_000 + int((frac or "0").ljust(9, "0"))


@dataclass(frozen=True)
class FileEntry:
    path: CanonicalPath
    kind: EntryKind
    size: int = 0
    write_time: int = 0
    access_time: int = 0
    attributes: int = 0
    sha1: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", EntryKind(self.kind))
        if self.path.kind is not PathKind.FILESYSTEM:
            raise ValueError(f"not a filesystem path: {self.path}")
        if self.size < 0:
            raise ValueError("size must be non-negative")
        if not 0 <= self.attributes < 2**32:
            raise ValueError("attributes must fit in 32 bits")
        if self.sha1 is not None:
            if self.kind is EntryKind.DIRECTORY:
                raise ValueError(f"directory cannot carry a digest: {self.path}")
            if not SHA1_RE.fullmatch(self.sha1):
                raise ValueError(f"malformed sha1: {self.sha1!r}")

    @property
    def is_file(self) -> bool:
        return self.kind is EntryKind.FILE


@dataclass(frozen=True)
class HiveKey:
    cellpath: CanonicalPath
    modified_time: int = 0

    def __post_init__(self):
        if self.cellpath.kind is not PathKind.REGISTRY:
            raise ValueError(f"not a registry path: {self.cellpath}")


@dataclass(frozen=True)
class HiveValue:
    cellpath: CanonicalPath
    data_type: RegType
    data: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "data_type", RegType(self.data_type))
        if self.cellpath.kind is not PathKind.REGISTRY:
            raise ValueError(f"not a registry path: {self.cellpath}")
        if len(self.cellpath.segments) < 2:
            raise ValueError(f"value needs a parent key: {self.cellpath}")

    @property
    def data_size(self) -> int:
        return len(self.data)

    @property
    def parent_key(self) -> CanonicalPath:
        return self.cellpath.parent


def _index(records, attr, case_sensitive):
    out = {}
    for rec in records:
        k = getattr(rec, attr).key(case_sensitive)
        if k in out:
            raise DuplicateCell(getattr(rec, attr).render())
        out[k] = rec
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class Snapshot:
    """Point-in-time capture of file-system entries and hive cells.

    Build instances with :meth:`build`, which checks uniqueness and the
    parent invariants. ``warnings`` is informational and excluded from
    equality.
    """

    id: str
    taken_at: int
    files: Mapping[str, FileEntry] = field(default_factory=dict)
    keys: Mapping[str, HiveKey] = field(default_factory=dict)
    values: Mapping[str, HiveValue] = field(default_factory=dict)
    case_sensitive: bool = False
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("files", "keys", "values"):
            m = getattr(self, name)
            if not isinstance(m, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(m)))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def build(cls, id: str = "snapshot", taken_at: int = 0, *,
              files: Iterable[FileEntry] = (), keys: Iterable[HiveKey] = (),
              values: Iterable[HiveValue] = (), case_sensitive: bool = False,
              warnings: Iterable[str] = (), check: bool = True) -> "Snapshot":
        snap = cls(id, taken_at,
                   _index(files, "path", case_sensitive),
                   _index(keys, "cellpath", case_sensitive),
                   _index(values, "cellpath", case_sensitive),
                   case_sensitive, tuple(warnings))
        if check:
            snap.check()
        return snap

    def check(self) -> None:
        """Raise if a value lacks its key or a file lacks its parent directory."""
        cs = self.case_sensitive
        for v in self.values.values():
            if v.parent_key.key(cs) not in self.keys:
                raise OrphanValue(v.cellpath.render())
        for f in self.files.values():
            parent = f.path.parent
            if parent is None:
                continue
            p = self.files.get(parent.key(cs))
            if p is None or p.kind is not EntryKind.DIRECTORY:
                raise OrphanFile(f.path.render())

    def key_of(self, path: CanonicalPath) -> str:
        return path.key(self.case_sensitive)

    def values_under(self, key: HiveKey) -> list[HiveValue]:
        """Values whose parent is ``key``, sorted by comparison form."""
        k = self.key_of(key.cellpath)
        return [v for v in self.values.values() if self.key_of(v.parent_key) == k]

    def with_files(self, files: Iterable[FileEntry], warnings: Iterable[str] = ()) -> "Snapshot":
        return replace(self, files=_index(files, "path", self.case_sensitive),
                       warnings=self.warnings + tuple(warnings))

    def is_empty(self) -> bool:
        return not (self.files or self.keys or self.values)

    @property
    def artifact_count(self) -> int:
        return len(self.files) + len(self.keys) + len(self.values)


def merge_snapshot_parts(fs: Snapshot, reg: Snapshot) -> Snapshot:
    """Combine a file-only snapshot and a registry-only snapshot.

    The result takes ``id`` and ``taken_at`` from ``fs``.
    """
    if fs.keys or fs.values:
        raise PartNotDisjoint("file-system part contains registry entries")
    if reg.files:
        raise PartNotDisjoint("registry part contains file entries")
    if fs.case_sensitive != reg.case_sensitive:
        raise PartNotDisjoint("parts use different case policies")
    return Snapshot.build(fs.id, fs.taken_at, files=fs.files.values(),
                          keys=reg.keys.values(), values=reg.values.values(),
                          case_sensitive=fs.case_sensitive,
                          warnings=fs.warnings + reg.warnings)
