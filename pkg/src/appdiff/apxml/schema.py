"""Validation of APXML text against the shipped schema."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import xmlschema

SCHEMA_PACKAGE = "appdiff.apxml.xsd"
SCHEMA_FILE = "apxml.xsd"

_NS_RE = re.compile(r"\{[^}]*\}")


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str

    def __str__(self):
        return f"{self.path}: {self.rule}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def schema_path():
    return resources.files(SCHEMA_PACKAGE).joinpath(SCHEMA_FILE)


@lru_cache(maxsize=1)
def load_schema() -> xmlschema.XMLSchema11:
    with resources.as_file(schema_path()) as path:
        return xmlschema.XMLSchema11(str(path))


def _readable_path(path: str | None) -> str:
    return _NS_RE.sub("", path) if path else "/"


def _rule(err) -> str:
    validator = getattr(err, "validator", None)
    test = getattr(validator, "path", None)
    if isinstance(test, str) and test:
        rule = "assertion " + " ".join(test.split())
    else:
        rule = err.reason or err.message
    return " ".join(str(rule).split())


def validate_element(root: ET.Element) -> ValidationReport:
    errors = load_schema().iter_errors(root)
    return ValidationReport(tuple(Violation(_readable_path(e.path), _rule(e)) for e in errors))


def parse_xml(text: str | bytes) -> ET.Element:
    """Parse text or bytes; a ``str`` may still carry a UTF-16 declaration."""
    if isinstance(text, str):
        text = re.sub("^\ufeff?<\\?xml[^>]*\\?>", "", text, count=1)
    return ET.fromstring(text)


def validate(text: str | bytes) -> ValidationReport:
    """Check a document against the schema; violations are returned, not raised."""
    try:
        root = parse_xml(text)
    except ET.ParseError as exc:
        return ValidationReport((Violation("/", f"not well-formed: {exc}"),))
    return validate_element(root)
