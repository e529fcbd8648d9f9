"""Application Profile XML: document model, emitter, parser and validator."""

from .document import (APXML_VERSION, STANDARD_PHASES, APXMLDocument, CellObject,
                       CreatorRecord, FileObject, Phase, ProfileMetadata,
                       objects_from_diff, render_value_data)
from .schema import ValidationReport, Violation, schema_path, validate
from .xmlio import APXML_NS, DELTA_NS, emit, parse, read_document

__all__ = [
    "APXML_NS", "APXML_VERSION", "APXMLDocument", "CellObject", "CreatorRecord",
    "DELTA_NS", "FileObject", "Phase", "ProfileMetadata", "STANDARD_PHASES",
    "ValidationReport", "Violation", "emit", "objects_from_diff", "parse",
    "read_document", "render_value_data", "schema_path", "validate",
]
