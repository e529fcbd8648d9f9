"""Canonical, platform-independent paths for files and registry cells.

Paths are stored as a tuple of segments and rendered with ``/`` and no
leading or trailing separator, e.g. ``Program Files/TrueCrypt/TrueCrypt.exe``
or ``HKLM/Software/Classes/AppID/TrueCrypt.exe``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyAfterNormalization, IllegalSegment, PathError

SEPARATOR = "/"


class PathKind(str, Enum):
    FILESYSTEM = "filesystem"
    REGISTRY = "registry"


def _check_segment(segment: str) -> None:
    if not segment:
        raise IllegalSegment("empty path segment")
    if SEPARATOR in segment:
        raise IllegalSegment(f"segment contains separator: {segment!r}")
    if segment in (".", ".."):
        raise IllegalSegment(f"relative segment not allowed: {segment!r}")


@dataclass(frozen=True, order=True)
class CanonicalPath:
    segments: tuple[str, ...]
    kind: PathKind = PathKind.FILESYSTEM

    def __post_init__(self):
        if not isinstance(self.segments, tuple):
            object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise EmptyAfterNormalization("path has no segments")
        for seg in self.segments:
            _check_segment(seg)
        object.__setattr__(self, "kind", PathKind(self.kind))

    @classmethod
    def parse(cls, text: str, kind: PathKind = PathKind.FILESYSTEM) -> "CanonicalPath":
        """Parse an already-rendered path; stricter than :func:`normalize_path`."""
        if text != text.strip(SEPARATOR) or not text:
            raise PathError(f"not a canonical path: {text!r}")
        return cls(tuple(text.split(SEPARATOR)), kind)

    def render(self) -> str:
        return SEPARATOR.join(self.segments)

    def key(self, case_sensitive: bool = False) -> str:
        """Comparison form used for keying, sorting and trie lookups."""
        rendered = self.render()
        return rendered if case_sensitive else rendered.casefold()

    @property
    def name(self) -> str:
        return self.segments[-1]

    @property
    def parent(self) -> "CanonicalPath | None":
        if len(self.segments) == 1:
            return None
        return CanonicalPath(self.segments[:-1], self.kind)

    def ancestors(self):
        """Yield proper ancestors, nearest first."""
        for i in range(len(self.segments) - 1, 0, -1):
            yield CanonicalPath(self.segments[:i], self.kind)

    def child(self, name: str) -> "CanonicalPath":
        return CanonicalPath(self.segments + (name,), self.kind)

    def __str__(self):
        return self.render()


def normalize_path(raw: str, kind: PathKind | str = PathKind.FILESYSTEM,
                   root: str | None = None) -> CanonicalPath:
    """Convert a platform path string into a :class:`CanonicalPath`.

    Backslashes become ``/``, repeated separators collapse, and ``root`` (for
    instance a drive root like ``C:\\``) is stripped when the path starts with
    it. Drive-letter prefixes are matched case-insensitively.
    """
    if not raw:
        raise EmptyAfterNormalization("empty path")
    text = raw.replace("\\", SEPARATOR)
    if root:
        prefix = root.replace("\\", SEPARATOR).rstrip(SEPARATOR)
        if text.casefold().startswith(prefix.casefold()):
            rest = text[len(prefix):]
            if rest and not rest.startswith(SEPARATOR):
                raise PathError(f"{raw!r} is not under root {root!r}")
            text = rest
        else:
            raise PathError(f"{raw!r} is not under root {root!r}")
    segments = tuple(s for s in text.split(SEPARATOR) if s)
    if not segments:
        raise EmptyAfterNormalization(f"{raw!r} reduces to nothing")
    return CanonicalPath(segments, PathKind(kind))
