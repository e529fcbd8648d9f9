"""Known-file blacklist and selective SHA-1 hashing.

The baseline snapshot's file paths go into a segment-level prefix tree.
During collection only files *not* found in the tree are hashed, so the
cost of hashing scales with what the profiled application wrote rather
than with the size of the whole drive.
"""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Iterable

from .model import ATTR_REPARSE_POINT, EntryKind, Snapshot
from .paths import CanonicalPath

log = logging.getLogger(__name__)

CHUNK = 1 << 20


class _Node:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.terminal = False


class PathTrie:
    """Set of file paths stored as a tree keyed by path segment."""

    def __init__(self, paths: Iterable[CanonicalPath] = (), case_sensitive: bool = False):
        self.case_sensitive = case_sensitive
        self._root = _Node()
        self._count = 0
        self._frozen = False
        for p in paths:
            self.add(p)

    def _fold(self, seg: str) -> str:
        return seg if self.case_sensitive else seg.casefold()

    def add(self, path: CanonicalPath) -> bool:
        """Insert ``path``; return False if it was already present."""
        if self._frozen:
            raise TypeError("PathTrie is frozen")
        node = self._root
        for seg in path.segments:
            seg = self._fold(seg)
            nxt = node.children.get(seg)
            if nxt is None:
                nxt = node.children[seg] = _Node()
            node = nxt
        if node.terminal:
            return False
        node.terminal = True
        self._count += 1
        return True

    def freeze(self) -> "PathTrie":
        self._frozen = True
        return self

    def __contains__(self, path: CanonicalPath) -> bool:
        node = self._root
        for seg in path.segments:
            node = node.children.get(self._fold(seg))
            if node is None:
                return False
        return node.terminal

    def __len__(self) -> int:
        return self._count

    @property
    def count(self) -> int:
        return self._count

    def terminal_count(self) -> int:
        """Count terminals by walking the tree (for invariant checks)."""
        total, stack = 0, [self._root]
        while stack:
            node = stack.pop()
            total += node.terminal
            stack.extend(node.children.values())
        return total


def build_blacklist(baseline: Snapshot) -> PathTrie:
    """Trie of every regular file path in ``baseline``; directories excluded."""
    trie = PathTrie((f.path for f in baseline.files.values() if f.kind is EntryKind.FILE),
                    case_sensitive=baseline.case_sensitive)
    return trie.freeze()


def contains(trie: PathTrie, path: CanonicalPath) -> bool:
    return path in trie


def sha1_file(path) -> str:
    h = hashlib.sha1()
    with open(path, "rb") as fh:
        while chunk := fh.read(CHUNK):
            h.update(chunk)
    return h.hexdigest()


def selective_hash(s: Snapshot, blacklist: PathTrie, root,
                   hasher: Callable[[str], str] = sha1_file,
                   max_workers: int | None = None) -> Snapshot:
    """Return ``s`` with digests for every file not present in ``blacklist``.

    ``root`` is the directory ``s`` was captured from. Symbolic links are not
    hashed (hashing would follow them). A file that cannot be read keeps an
    absent digest and adds a warning.
    """
    root = os.fspath(root)
    todo = [f for f in s.files.values()
            if f.kind is EntryKind.FILE and not f.attributes & ATTR_REPARSE_POINT
            and f.path not in blacklist]
    if not todo:
        return s

    def run(entry):
        try:
            return hasher(os.path.join(root, *entry.path.segments)), None
        except OSError as exc:
            return None, f"cannot hash {entry.path}: {exc.strerror or exc}"

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(run, todo))
    else:
        results = [run(e) for e in todo]

    updated = dict(s.files)
    warnings = []
    for entry, (digest, problem) in zip(todo, results):
        if problem:
            log.warning(problem)
            warnings.append(problem)
            continue
        updated[s.key_of(entry.path)] = replace(entry, sha1=digest)
    return s.with_files(updated.values(), warnings)
