"""Snapshot persistence.

Layout (UTF-8, LF line endings)::

    APPDIFF-SNAPSHOT v1
    {"case_sensitive":false,"id":"...","taken_at":1442000000000000000}
    {"access_time":..,"attributes":..,"kind":"file","path":"a/x.txt","record":"file","sha1":null,"size":5,"write_time":..}
    {"cellpath":"HKLM/Software","modified_time":..,"record":"key"}
    {"cellpath":"HKLM/Software/v","data":"<base64>","data_type":"REG_SZ","record":"value"}
    {"message":"...","record":"warning"}

Line 2 is the header object. Each following line is one JSON object with
sorted keys. Files come first, then keys, then values, each group sorted by
comparison-form path, then warnings in capture order. Timestamps are integer
nanoseconds since the epoch; an absent digest is ``null``.
"""

from __future__ import annotations

import base64
import io
import json
import os

from .errors import FormatVersionMismatch, SnapshotIOError
from .model import FileEntry, HiveKey, HiveValue, Snapshot
from .paths import CanonicalPath, PathKind

MAGIC = "APPDIFF-SNAPSHOT v1"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def snapshot_lines(s: Snapshot):
    yield MAGIC
    yield _dumps({"id": s.id, "taken_at": s.taken_at, "case_sensitive": s.case_sensitive})
    for f in s.files.values():
        yield _dumps({"record": "file", "path": f.path.render(), "kind": f.kind.value,
                      "size": f.size, "write_time": f.write_time,
                      "access_time": f.access_time, "attributes": f.attributes,
                      "sha1": f.sha1})
    for k in s.keys.values():
        yield _dumps({"record": "key", "cellpath": k.cellpath.render(),
                      "modified_time": k.modified_time})
    for v in s.values.values():
        yield _dumps({"record": "value", "cellpath": v.cellpath.render(),
                      "data_type": v.data_type.value,
                      "data": base64.b64encode(v.data).decode("ascii")})
    for w in s.warnings:
        yield _dumps({"record": "warning", "message": w})


def dumps_snapshot(s: Snapshot) -> str:
    return "".join(line + "\n" for line in snapshot_lines(s))


def persist_snapshot(s: Snapshot, sink) -> None:
    """Write ``s`` to a path or a text stream."""
    text = dumps_snapshot(s)
    if hasattr(sink, "write"):
        sink.write(text)
        return
    try:
        tmp = f"{os.fspath(sink)}.tmp"
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, sink)
    except OSError as exc:
        raise SnapshotIOError(f"cannot write snapshot to {sink}: {exc}") from exc


def loads_snapshot(text: str) -> Snapshot:
    lines = text.split("\n")
    if not lines or lines[0] != MAGIC:
        raise FormatVersionMismatch(f"expected header {MAGIC!r}, found {lines[0][:40]!r}")
    try:
        header = json.loads(lines[1])
        files, keys, values, warnings = [], [], [], []
        for line in lines[2:]:
            if not line:
                continue
            rec = json.loads(line)
            kind = rec["record"]
            if kind == "file":
                files.append(FileEntry(
                    CanonicalPath.parse(rec["path"], PathKind.FILESYSTEM), rec["kind"],
                    rec["size"], rec["write_time"], rec["access_time"],
                    rec["attributes"], rec["sha1"]))
            elif kind == "key":
                keys.append(HiveKey(CanonicalPath.parse(rec["cellpath"], PathKind.REGISTRY),
                                    rec["modified_time"]))
            elif kind == "value":
                values.append(HiveValue(CanonicalPath.parse(rec["cellpath"], PathKind.REGISTRY),
                                        rec["data_type"], base64.b64decode(rec["data"])))
            elif kind == "warning":
                warnings.append(rec["message"])
            else:
                raise ValueError(f"unknown record {kind!r}")
    except (IndexError, KeyError, TypeError, ValueError) as exc:
        raise SnapshotIOError(f"corrupt snapshot: {exc}") from exc
    return Snapshot.build(header["id"], header["taken_at"], files=files, keys=keys,
                          values=values, case_sensitive=header["case_sensitive"],
                          warnings=warnings)


def load_snapshot(source) -> Snapshot:
    """Read a snapshot from a path or a text stream."""
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return loads_snapshot(source.read())
    try:
        with open(source, encoding="utf-8", newline="\n") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise SnapshotIOError(f"cannot read snapshot {source}: {exc}") from exc
    return loads_snapshot(text)
