"""Portable text serialization of registry hives.

One record per line, UTF-8, ``#`` starts a comment::

    key|HKLM/Software/Vendor|2015-09-10T00:00:00Z
    value|HKLM/Software/Vendor/InstallDir|REG_SZ|QwA6AFwAAAA=

Value data is base64 of the raw bytes exactly as the registry stores them
(string types are UTF-16LE). Value names may contain ``|``; the type and
data fields are split off from the right.
"""

from __future__ import annotations

import base64
import binascii
import os
import time

from .errors import DuplicateCell, HiveSyntaxError, OrphanValue, PathError
from .model import (DEFAULT_HIVE_ROOTS, HiveKey, HiveValue, RegType, Snapshot,
                    format_timestamp, parse_timestamp)
from .paths import CanonicalPath, PathKind


def _cellpath(text, lineno, roots):
    try:
        path = CanonicalPath.parse(text, PathKind.REGISTRY)
    except PathError as exc:
        raise HiveSyntaxError(lineno, str(exc)) from None
    if roots is not None and path.segments[0] not in roots:
        raise HiveSyntaxError(lineno, f"unknown hive root {path.segments[0]!r}")
    return path


def load_hive(document: str, *, case_sensitive: bool = False,
              roots=DEFAULT_HIVE_ROOTS, snapshot_id: str = "hive") -> Snapshot:
    """Parse a serialized hive into a registry-only snapshot."""
    keys: dict[str, HiveKey] = {}
    values: dict[str, HiveValue] = {}
    for lineno, line in enumerate(document.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        kind, sep, rest = line.partition("|")
        if not sep:
            raise HiveSyntaxError(lineno, "missing field separator")
        if kind == "key":
            path_text, sep, stamp = rest.rpartition("|")
            if not sep:
                raise HiveSyntaxError(lineno, "key record needs 3 fields")
            try:
                mtime = parse_timestamp(stamp)
            except ValueError as exc:
                raise HiveSyntaxError(lineno, str(exc)) from None
            key = HiveKey(_cellpath(path_text, lineno, roots), mtime)
            k = key.cellpath.key(case_sensitive)
            if k in keys:
                raise DuplicateCell(key.cellpath.render())
            keys[k] = key
        elif kind == "value":
            parts = rest.rsplit("|", 2)
            if len(parts) != 3:
                raise HiveSyntaxError(lineno, "value record needs 4 fields")
            path_text, tag, b64 = parts
            try:
                data_type = RegType(tag)
            except ValueError:
                raise HiveSyntaxError(lineno, f"unknown data type {tag!r}") from None
            try:
                data = base64.b64decode(b64, validate=True)
            except binascii.Error as exc:
                raise HiveSyntaxError(lineno, f"bad base64: {exc}") from None
            path = _cellpath(path_text, lineno, roots)
            if len(path.segments) < 2:
                raise HiveSyntaxError(lineno, "value needs a parent key")
            value = HiveValue(path, data_type, data)
            k = path.key(case_sensitive)
            if k in values:
                raise DuplicateCell(path.render())
            values[k] = value
        else:
            raise HiveSyntaxError(lineno, f"unknown record type {kind!r}")

    for v in values.values():
        if v.parent_key.key(case_sensitive) not in keys:
            raise OrphanValue(v.cellpath.render())
    return Snapshot.build(snapshot_id, time.time_ns(), keys=keys.values(),
                          values=values.values(), case_sensitive=case_sensitive)


def load_hive_file(path, **kwargs) -> Snapshot:
    with open(path, encoding="utf-8", newline="\n") as fh:
        return load_hive(fh.read(), **kwargs)


def dump_hive(snapshot: Snapshot) -> str:
    """Inverse of :func:`load_hive`: each key followed by its values."""
    by_parent: dict[str, list[HiveValue]] = {}
    for v in snapshot.values.values():
        by_parent.setdefault(snapshot.key_of(v.parent_key), []).append(v)
    lines = []
    for k, key in snapshot.keys.items():
        lines.append(f"key|{key.cellpath}|{format_timestamp(key.modified_time)}")
        for v in by_parent.get(k, ()):
            data = base64.b64encode(v.data).decode("ascii")
            lines.append(f"value|{v.cellpath}|{v.data_type.value}|{data}")
    return "".join(line + "\n" for line in lines)


def write_hive_file(snapshot: Snapshot, path) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_hive(snapshot))
    os.replace(tmp, path)
