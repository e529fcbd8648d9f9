"""Canonical APXML emitter and parser.

The emitter writes XML by hand rather than through ElementTree so that the
namespace declarations match the published skeleton (including the unused
Dublin Core and schema-instance prefixes) and so that output is
byte-stable: fixed attribute order, two-space indentation, objects in
canonical order, LF line endings.
"""

from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape

from ..differ import DeltaState
from ..errors import InvariantViolation, NotWellFormed, SchemaViolation, UnknownPhase
from ..paths import CanonicalPath, PathKind
from .document import (APXMLDocument, CellObject, CreatorRecord, FileObject,
                       Phase, ProfileMetadata, STANDARD_PHASES)
from .schema import parse_xml, validate_element

APXML_NS = "https://github.com/thomaslaurenson/apxml_schema"
DC_NS = "http://purl.org/dc/elements/1.1/"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"
DELTA_NS = "http://www.forensicswiki.org/wiki/Forensic_Disk_Differencing"

_A = "{%s}" % APXML_NS
_D = "{%s}" % DELTA_NS


def _el(name, text, indent):
    return f"{'  ' * indent}<{name}>{escape(text)}</{name}>"


def _file_lines(obj: FileObject):
    yield f'    <fileobject delta:{obj.delta.value}="1">'
    yield _el("filename", obj.filename.render(), 3)
    yield _el("meta_type", str(obj.meta_type), 3)
    yield _el("alloc_name", str(obj.alloc_name), 3)
    yield _el("alloc_inode", str(obj.alloc_inode), 3)
    if obj.sha1 is not None:
        yield f'      <hashdigest type="sha1">{obj.sha1}</hashdigest>'
    yield "    </fileobject>"


def _cell_lines(obj: CellObject):
    yield f'    <cellobject delta:{obj.delta.value}="1">'
    yield _el("cellpath", obj.cellpath.render(), 3)
    yield _el("name_type", obj.name_type, 3)
    if obj.data_type is not None:
        yield _el("data_type", obj.data_type.value, 3)
    if obj.data is not None:
        attr = f' encoding="{obj.data_encoding}"' if obj.data_encoding else ""
        yield f"      <data{attr}>{escape(obj.data)}</data>"
    yield _el("alloc", str(obj.alloc), 3)
    yield "    </cellobject>"


def emit(doc: APXMLDocument, sink=None, utf16: bool = False) -> str:
    """Serialize ``doc``; optionally also write it to a path or stream.

    With ``utf16`` the declaration names UTF-16 and files are written in
    UTF-16 with a byte-order mark.
    """
    problems = doc.problems()
    if problems:
        raise InvariantViolation("; ".join(problems))
    encoding = "UTF-16" if utf16 else "UTF-8"
    lines = [
        f"<?xml version='1.0' encoding='{encoding}'?>",
        f'<apxml version="{doc.version}"',
        f'  xmlns="{APXML_NS}"',
        f'  xmlns:dc="{DC_NS}"',
        f'  xmlns:xsi="{XSI_NS}"',
        f'  xmlns:delta="{DELTA_NS}">',
        "  <metadata>",
        _el("app_name", doc.metadata.app_name, 2),
        _el("app_version", doc.metadata.app_version, 2),
        "  </metadata>",
        "  <creator>",
        _el("program", doc.creator.program_name, 2),
        _el("version", doc.creator.program_version, 2),
    ]
    env = doc.creator.execution_environment
    if env:
        lines.append("    <execution_environment>")
        lines.extend(_el(k, v, 3) for k, v in env)
        lines.append("    </execution_environment>")
    lines.append("  </creator>")
    for phase in doc.phases:
        if not phase.objects:
            lines.append(f"  <{phase.name}/>")
            continue
        lines.append(f"  <{phase.name}>")
        for obj in phase.objects:
            lines.extend(_file_lines(obj) if isinstance(obj, FileObject) else _cell_lines(obj))
        lines.append(f"  </{phase.name}>")
    lines.append("</apxml>")
    text = "\n".join(lines) + "\n"
    if sink is not None:
        write_text(text, sink, utf16)
    return text


def write_text(text: str, sink, utf16: bool = False) -> None:
    if hasattr(sink, "write"):
        sink.write(text)
        return
    with open(os.fspath(sink), "w", encoding="utf-16" if utf16 else "utf-8",
              newline="\n") as fh:
        fh.write(text)


def _text(el: ET.Element | None) -> str:
    return "" if el is None or el.text is None else el.text


def _parse_file(el) -> FileObject:
    delta = _delta(el)
    digest = el.find(_A + "hashdigest")
    return FileObject(
        CanonicalPath.parse(_text(el.find(_A + "filename")), PathKind.FILESYSTEM),
        int(_text(el.find(_A + "meta_type"))), delta,
        None if digest is None else _text(digest),
        int(_text(el.find(_A + "alloc_name"))), int(_text(el.find(_A + "alloc_inode"))))


def _parse_cell(el) -> CellObject:
    delta = _delta(el)
    data_type = el.find(_A + "data_type")
    data = el.find(_A + "data")
    return CellObject(
        CanonicalPath.parse(_text(el.find(_A + "cellpath")), PathKind.REGISTRY),
        _text(el.find(_A + "name_type")), delta,
        None if data_type is None else _text(data_type),
        None if data is None else _text(data),
        None if data is None else data.get("encoding"),
        int(_text(el.find(_A + "alloc"))))


def _delta(el) -> DeltaState:
    states = [DeltaState(name[len(_D):]) for name in el.attrib if name.startswith(_D)]
    return states[0]


def parse(text: str | bytes, strict: bool = False) -> APXMLDocument:
    """Parse and schema-check APXML text.

    In strict mode only the four standard life-cycle phases are accepted;
    otherwise other phase elements are kept as extension phases.
    """
    try:
        root = parse_xml(text)
    except ET.ParseError as exc:
        raise NotWellFormed(str(exc)) from exc
    report = validate_element(root)
    if not report.ok:
        raise SchemaViolation(report.violations)

    children = list(root)
    meta, creator_el, phase_els = children[0], children[1], children[2:]
    env_el = creator_el.find(_A + "execution_environment")
    env = () if env_el is None else tuple(
        (c.tag[len(_A):], _text(c)) for c in env_el)
    creator = CreatorRecord(_text(creator_el.find(_A + "program")),
                            _text(creator_el.find(_A + "version")), env)
    metadata = ProfileMetadata(_text(meta.find(_A + "app_name")),
                               _text(meta.find(_A + "app_version")))
    phases = []
    for el in phase_els:
        name = el.tag[len(_A):]
        if strict and name not in STANDARD_PHASES:
            raise UnknownPhase(name)
        objs = [_parse_file(c) if c.tag == _A + "fileobject" else _parse_cell(c) for c in el]
        phases.append(Phase(name, tuple(objs)))
    return APXMLDocument(metadata, creator, tuple(phases), root.get("version"))


def read_document(path, strict: bool = False) -> APXMLDocument:
    with open(os.fspath(path), "rb") as fh:
        return parse(fh.read(), strict=strict)
