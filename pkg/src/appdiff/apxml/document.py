"""APXML document model and conversion from diff results."""

from __future__ import annotations

import base64
import re
from dataclasses import dataclass
from typing import Union

from ..differ import DeltaState, DiffResult
from ..model import EntryKind, FileEntry, HiveKey, HiveValue, RegType
from ..paths import CanonicalPath

APXML_VERSION = "1.0.0"
STANDARD_PHASES = ("install", "execute", "uninstall", "reboot")
RESERVED_NAMES = frozenset({"metadata", "creator", "fileobject", "cellobject", "apxml"})

META_FILE = 1
META_DIRECTORY = 2

_DELTA_ORDER = {DeltaState.NEW: 0, DeltaState.CHANGED: 1,
                DeltaState.MODIFIED: 2, DeltaState.DELETED: 3}
_STRING_TYPES = {RegType.REG_SZ, RegType.REG_EXPAND_SZ, RegType.REG_LINK}
_NCNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
# XML 1.0 Char production minus CR, which parsers normalize away.
_XML_UNSAFE = re.compile("[^\t\n\x20-\ud7ff\ue000-\ufffd\U00010000-\U0010ffff]")


def xml_safe(text: str) -> bool:
    return not _XML_UNSAFE.search(text)


def render_value_data(data_type: RegType, data: bytes) -> tuple[str, str | None]:
    """Render registry value bytes for XML as ``(text, encoding)``.

    String types are decoded from UTF-16LE with trailing NULs removed
    (``REG_MULTI_SZ`` members are joined with newlines), DWORD/QWORD values
    become decimal text, and everything else, or anything that cannot be
    represented as XML text, is base64 with encoding ``"base64"``.
    """
    data_type = RegType(data_type)
    text = None
    if data_type in _STRING_TYPES or data_type is RegType.REG_MULTI_SZ:
        if len(data) % 2 == 0:
            try:
                text = data.decode("utf-16-le").rstrip("\x00")
            except UnicodeDecodeError:
                text = None
            if text is not None and data_type is RegType.REG_MULTI_SZ:
                text = text.replace("\x00", "\n")
    elif data_type is RegType.REG_DWORD and len(data) == 4:
        text = str(int.from_bytes(data, "little"))
    elif data_type is RegType.REG_DWORD_BIG_ENDIAN and len(data) == 4:
        text = str(int.from_bytes(data, "big"))
    elif data_type is RegType.REG_QWORD and len(data) == 8:
        text = str(int.from_bytes(data, "little"))
    if text is not None and xml_safe(text):
        return text, None
    return base64.b64encode(data).decode("ascii"), "base64"


@dataclass(frozen=True)
class ProfileMetadata:
    app_name: str
    app_version: str


@dataclass(frozen=True)
class CreatorRecord:
    program_name: str
    program_version: str = ""
    # Ordered (element name, text) pairs, e.g. ("os_sysname", "Linux").
    execution_environment: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "execution_environment",
                           tuple((str(k), str(v)) for k, v in self.execution_environment))


@dataclass(frozen=True)
class FileObject:
    filename: CanonicalPath
    meta_type: int
    delta: DeltaState
    sha1: str | None = None
    alloc_name: int = 1
    alloc_inode: int = 1

    def __post_init__(self):
        object.__setattr__(self, "delta", DeltaState(self.delta))

    def sort_key(self):
        r = self.filename.render()
        return (0, r.casefold(), r, self.meta_type, _DELTA_ORDER[self.delta])

    def problems(self):
        where = f"fileobject {self.filename}"
        if self.meta_type not in (META_FILE, META_DIRECTORY):
            yield f"{where}: meta_type must be 1 or 2"
        if self.meta_type == META_DIRECTORY and self.sha1 is not None:
            yield f"{where}: directory carries a digest"
        if self.sha1 is not None and not re.fullmatch(r"[0-9a-f]{40}", self.sha1):
            yield f"{where}: malformed sha1"
        alloc = 0 if self.delta is DeltaState.DELETED else 1
        if (self.alloc_name, self.alloc_inode) != (alloc, alloc):
            yield f"{where}: allocation flags must be {alloc} for delta {self.delta.value}"
        if not xml_safe(self.filename.render()):
            yield f"{where}: filename has characters XML cannot carry"


@dataclass(frozen=True)
class CellObject:
    cellpath: CanonicalPath
    name_type: str
    delta: DeltaState
    data_type: RegType | None = None
    data: str | None = None
    data_encoding: str | None = None
    alloc: int = 1

    def __post_init__(self):
        object.__setattr__(self, "delta", DeltaState(self.delta))
        if self.data_type is not None:
            object.__setattr__(self, "data_type", RegType(self.data_type))

    def sort_key(self):
        r = self.cellpath.render()
        return (1, r.casefold(), r, self.name_type, _DELTA_ORDER[self.delta])

    def problems(self):
        where = f"cellobject {self.cellpath}"
        if self.name_type == "k":
            if self.data_type is not None or self.data is not None:
                yield f"{where}: key carries value data"
        elif self.name_type == "v":
            if self.data_type is None or self.data is None:
                yield f"{where}: value lacks data_type or data"
        else:
            yield f"{where}: name_type must be 'k' or 'v'"
        if self.data_encoding not in (None, "base64"):
            yield f"{where}: unknown data encoding {self.data_encoding!r}"
        if self.data is not None and not xml_safe(self.data):
            yield f"{where}: data has characters XML cannot carry"
        alloc = 0 if self.delta is DeltaState.DELETED else 1
        if self.alloc != alloc:
            yield f"{where}: alloc must be {alloc} for delta {self.delta.value}"
        if not xml_safe(self.cellpath.render()):
            yield f"{where}: cellpath has characters XML cannot carry"


ProfileObject = Union[FileObject, CellObject]


@dataclass(frozen=True)
class Phase:
    """Objects recorded for one life-cycle phase, kept in canonical order."""

    name: str
    objects: tuple[ProfileObject, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objects",
                           tuple(sorted(self.objects, key=lambda o: o.sort_key())))

    @property
    def file_objects(self):
        return [o for o in self.objects if isinstance(o, FileObject)]

    @property
    def cell_objects(self):
        return [o for o in self.objects if isinstance(o, CellObject)]


@dataclass(frozen=True)
class APXMLDocument:
    metadata: ProfileMetadata
    creator: CreatorRecord
    phases: tuple[Phase, ...] = ()
    version: str = APXML_VERSION

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))

    def phase(self, name: str) -> Phase | None:
        for p in self.phases:
            if p.name == name:
                return p
        return None

    def with_phase(self, phase: Phase) -> "APXMLDocument":
        return APXMLDocument(self.metadata, self.creator, self.phases + (phase,), self.version)

    def problems(self) -> list[str]:
        out = []
        if self.version != APXML_VERSION:
            out.append(f"unsupported version {self.version!r}")
        if not self.metadata.app_name or not self.metadata.app_version:
            out.append("metadata: app_name and app_version must be non-empty")
        if not self.creator.program_name:
            out.append("creator: program_name must be non-empty")
        for name, value in self.creator.execution_environment:
            if not _NCNAME.fullmatch(name):
                out.append(f"creator: environment name {name!r} is not an XML name")
            if not xml_safe(value):
                out.append(f"creator: environment value for {name!r} is not XML-safe")
        for text in (self.metadata.app_name, self.metadata.app_version,
                     self.creator.program_name, self.creator.program_version):
            if not xml_safe(text):
                out.append(f"header text {text!r} is not XML-safe")
        seen = set()
        for p in self.phases:
            if not _NCNAME.fullmatch(p.name) or p.name in RESERVED_NAMES:
                out.append(f"phase name {p.name!r} is not allowed")
            if p.name in seen:
                out.append(f"phase {p.name!r} appears twice")
            seen.add(p.name)
            for obj in p.objects:
                out.extend(obj.problems())
        return out


def file_object(entry: FileEntry, delta: DeltaState) -> FileObject:
    alloc = 0 if delta is DeltaState.DELETED else 1
    meta = META_FILE if entry.kind is EntryKind.FILE else META_DIRECTORY
    return FileObject(entry.path, meta, delta, entry.sha1, alloc, alloc)


def cell_object(cell: HiveKey | HiveValue, delta: DeltaState) -> CellObject:
    alloc = 0 if delta is DeltaState.DELETED else 1
    if isinstance(cell, HiveKey):
        return CellObject(cell.cellpath, "k", delta, alloc=alloc)
    text, encoding = render_value_data(cell.data_type, cell.data)
    return CellObject(cell.cellpath, "v", delta, cell.data_type, text, encoding, alloc)


def objects_from_diff(d: DiffResult, phase_name: str) -> list[ProfileObject]:
    """One profile object per delta; timestamps, sizes and attributes are dropped."""
    if not phase_name:
        raise ValueError("phase name must be non-empty")
    objs: list[ProfileObject] = [file_object(e, s) for e, s in d.file_deltas]
    objs += [cell_object(k, s) for k, s in d.key_deltas]
    objs += [cell_object(v, s) for v, s in d.value_deltas]
    return objs
