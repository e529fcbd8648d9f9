"""Random snapshot/document generators and on-disk fixture builders."""

import base64
import hashlib
import os
import random
from dataclasses import replace

from appdiff.apxml import (APXMLDocument, CellObject, CreatorRecord, FileObject,
                           Phase, ProfileMetadata)
from appdiff.differ import DeltaState
from appdiff.model import (EntryKind, FileEntry, HiveKey, HiveValue, RegType,
                           Snapshot)
from appdiff.paths import CanonicalPath, PathKind

T0 = 1_442_000_000_000_000_000
NAMES = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"]
EXTS = ["", ".txt", ".dll", ".exe", ".ini"]
DIGESTS = ["%040x" % (i * 0x9E3779B97F4A7C15 % 2**160) for i in range(1, 5)]
DATA = [b"", b"\x01\x00\x00\x00", b"C\x00:\x00\\\x00\x00\x00", b"\xff" * 3]
REG_TYPES = [RegType.REG_SZ, RegType.REG_DWORD, RegType.REG_BINARY]


def _fs(segs):
    return CanonicalPath(tuple(segs), PathKind.FILESYSTEM)


def _reg(segs):
    return CanonicalPath(tuple(segs), PathKind.REGISTRY)


def _name(rng):
    name = rng.choice(NAMES) + str(rng.randrange(4)) + rng.choice(EXTS)
    return name.upper() if rng.random() < 0.1 else name


def _random_file(rng, segs):
    return FileEntry(_fs(segs), EntryKind.FILE, rng.randrange(3), T0 + rng.randrange(2),
                     T0 + rng.randrange(100), rng.randrange(2), rng.choice([None] + DIGESTS))


def _random_dir(rng, segs):
    return FileEntry(_fs(segs), EntryKind.DIRECTORY, 0, T0 + rng.randrange(2),
                     T0 + rng.randrange(100), rng.randrange(2))


def _grow_files(rng, entries, n):
    """Add up to ``n`` entries (keyed by folded path) under existing directories."""
    dirs = [()] + [e.path.segments for e in entries.values() if e.kind is EntryKind.DIRECTORY]
    for _ in range(n * 3):
        if n <= 0:
            break
        parent = rng.choice(dirs)
        segs = parent + (_name(rng),)
        key = "/".join(segs).casefold()
        if key in entries:
            continue
        if rng.random() < 0.3 and len(segs) < 4:
            entries[key] = _random_dir(rng, segs)
            dirs.append(segs)
        else:
            entries[key] = _random_file(rng, segs)
        n -= 1


def _grow_registry(rng, keys, values, n_keys, n_values):
    for _ in range(n_keys * 3):
        if n_keys <= 0:
            break
        segs = (rng.choice(["HKLM", "HKU"]),) + tuple(_name(rng) for _ in range(rng.randrange(1, 3)))
        k = "/".join(segs).casefold()
        if k in keys:
            continue
        keys[k] = HiveKey(_reg(segs), T0 + rng.randrange(2))
        n_keys -= 1
    key_list = list(keys.values())
    for _ in range(n_values * 3):
        if n_values <= 0 or not key_list:
            break
        parent = rng.choice(key_list)
        segs = parent.cellpath.segments + (rng.choice(NAMES) + str(rng.randrange(3)),)
        k = "/".join(segs).casefold()
        if k in values or k in keys:
            continue
        values[k] = HiveValue(_reg(segs), rng.choice(REG_TYPES), rng.choice(DATA))
        n_values -= 1


def random_snapshot(rng, n_files=60, n_keys=15, n_values=20, sid="s") -> Snapshot:
    files, keys, values = {}, {}, {}
    _grow_files(rng, files, n_files)
    _grow_registry(rng, keys, values, n_keys, n_values)
    return Snapshot.build(sid, T0, files=files.values(), keys=keys.values(), values=values.values())


def _drop_subtree(entries, key):
    prefix = key + "/"
    for k in [k for k in entries if k == key or k.startswith(prefix)]:
        del entries[k]


def mutate(rng, s: Snapshot, n_new_files=10, n_new_keys=4, n_new_values=6, sid="s2") -> Snapshot:
    """Derive a later snapshot exercising every delta state."""
    files = dict(s.files)
    for k, e in list(s.files.items()):
        if k not in files:
            continue
        r = rng.random()
        if r < 0.12:
            _drop_subtree(files, k)
            continue
        if e.kind is EntryKind.FILE:
            if r < 0.2:
                e = replace(e, size=e.size + 1 + rng.randrange(2))
            elif r < 0.3:
                e = replace(e, sha1=rng.choice([None] + DIGESTS))
            elif r < 0.4:
                e = replace(e, write_time=e.write_time + 7)
            elif r < 0.45:
                e = replace(e, attributes=e.attributes ^ 1)
            elif r < 0.5:
                e = FileEntry(e.path, EntryKind.DIRECTORY, 0, e.write_time)
            elif r < 0.55:
                segs = e.path.segments[:-1] + (e.path.segments[-1].swapcase(),)
                e = replace(e, path=_fs(segs))
        else:
            if r < 0.25:
                e = replace(e, write_time=e.write_time + 3)
            elif r < 0.3:
                _drop_subtree(files, k)
                e = FileEntry(e.path, EntryKind.FILE, 1, e.write_time, sha1=rng.choice(DIGESTS))
        if rng.random() < 0.3:
            e = replace(e, access_time=e.access_time + 1000)
        files[k] = e
    _grow_files(rng, files, n_new_files)

    keys, values = dict(s.keys), dict(s.values)
    for k, key in list(s.keys.items()):
        r = rng.random()
        if r < 0.1:
            del keys[k]
            for vk in [vk for vk, v in values.items() if v.parent_key.key() == k]:
                del values[vk]
        elif r < 0.25:
            keys[k] = replace(key, modified_time=key.modified_time + 5)
    for k, v in list(values.items()):
        r = rng.random()
        if r < 0.1:
            del values[k]
        elif r < 0.2:
            values[k] = replace(v, data=v.data + b"\x00\x01")
        elif r < 0.25:
            values[k] = replace(v, data_type=RegType.REG_EXPAND_SZ)
    _grow_registry(rng, keys, values, n_new_keys, n_new_values)
    return Snapshot.build(sid, T0 + 10, files=files.values(), keys=keys.values(),
                          values=values.values())


def random_pair(rng, max_artifacts=200):
    """Two related snapshots, each holding at most ``max_artifacts`` records."""
    budget = rng.randrange(0, max_artifacts - 40)
    n_files = rng.randrange(0, budget + 1)
    rest = budget - n_files
    n_keys = rng.randrange(0, rest + 1) // 2
    s1 = random_snapshot(rng, n_files, n_keys, rest - n_keys, "s1")
    s2 = mutate(rng, s1, rng.randrange(12), rng.randrange(6), rng.randrange(12))
    return s1, s2


# -- documents -----------------------------------------------------------------

def random_document(rng) -> APXMLDocument:
    phases = []
    names = rng.sample(["install", "execute", "uninstall", "reboot", "update"], rng.randrange(0, 5))
    for name in names:
        objs = []
        for _ in range(rng.randrange(0, 12)):
            delta = rng.choice(list(DeltaState))
            alloc = 0 if delta is DeltaState.DELETED else 1
            if rng.random() < 0.5:
                meta = rng.choice([1, 2])
                segs = tuple(_name(rng) for _ in range(rng.randrange(1, 4)))
                sha1 = rng.choice(DIGESTS) if meta == 1 and rng.random() < 0.7 else None
                objs.append(FileObject(_fs(segs), meta, delta, sha1, alloc, alloc))
            else:
                segs = ("HKLM",) + tuple(_name(rng) for _ in range(rng.randrange(1, 4)))
                if rng.random() < 0.5:
                    objs.append(CellObject(_reg(segs), "k", delta, alloc=alloc))
                else:
                    text, enc = rng.choice([("C:\\Program Files\\A & B <x>", None), ("", None),
                                            ("AQID", "base64"), ("42", None), ("line1\nline2", None)])
                    objs.append(CellObject(_reg(segs), "v", delta, rng.choice(REG_TYPES),
                                           text, enc, alloc))
        # Same-path duplicates are legitimate (file deleted + directory new), but
        # exact duplicates cannot be told apart; drop them.
        phases.append(Phase(name, tuple(dict.fromkeys(objs))))
    env = tuple((k, f"v{rng.randrange(100)}") for k in rng.sample(["os_sysname", "host", "arch"], 2))
    return APXMLDocument(ProfileMetadata(rng.choice(["TrueCrypt", "App & Co"]), "7.1a"),
                         CreatorRecord("appdiff", "0.1.0", env), tuple(phases))


# -- on-disk trees -------------------------------------------------------------

def set_times(path, mtime_ns, atime_ns=None):
    # atime later than mtime so relatime mounts leave it alone on later reads
    os.utime(path, ns=(atime_ns if atime_ns is not None else mtime_ns + 10**9, mtime_ns))


def write_file(root, rel, data: bytes, mtime_ns=T0):
    path = os.path.join(root, *rel.split("/"))
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(data)
    set_times(path, mtime_ns)
    return path


def make_dir(root, rel, mtime_ns=T0):
    path = os.path.join(root, *rel.split("/"))
    os.makedirs(path, exist_ok=True)
    set_times(path, mtime_ns)
    return path


def build_tree(root, files: dict, mtime_ns=T0):
    """Create ``{relpath: bytes}`` under root with fixed timestamps everywhere."""
    for rel, data in files.items():
        write_file(root, rel, data, mtime_ns)
    for dirpath, dirnames, _ in os.walk(root):
        for d in dirnames:
            set_times(os.path.join(dirpath, d), mtime_ns)


def random_tree_files(rng, n, prefix=""):
    out = {}
    while len(out) < n:
        depth = rng.randrange(1, 4)
        rel = "/".join([f"d{rng.randrange(3)}" for _ in range(depth - 1)] + [f"f{rng.randrange(1000)}.bin"])
        rel = prefix + rel
        out[rel] = rng.randbytes(rng.randrange(0, 2000))
    return out


def new_rng(seed):
    return random.Random(seed)


# -- scripted application scenario -------------------------------------------------

def _utf16z(text):
    return text.encode("utf-16-le") + b"\x00\x00"


class FooAppScenario:
    """A small synthetic application with install, execute and uninstall steps.

    The target tree lives in ``<base>/root`` and the serialized hive in
    ``<base>/hive.txt``. Every timestamp is set explicitly so the expected
    classifications do not depend on filesystem timing.
    """

    T1, T2, T3 = T0 + 10**9, T0 + 2 * 10**9, T0 + 3 * 10**9
    APP_DIR = "Program Files/FooApp"
    FILES = {
        "foo.exe": b"MZ\x90\x00foo",
        "foo.dll": b"MZ\x90\x00dll" * 10,
        "config.ini": b"[settings]\nmode=default\n",
        "readme.txt": b"FooApp readme\n",
        "license.txt": b"free as in beer\n",
    }
    CONFIG_AFTER = b"[settings]\nmode=custom\nlast_run=1\n"
    KEYS = ["HKLM/Software/FooApp", "HKLM/Software/FooApp/Settings", "HKU/S-1-5-21/Software/FooApp"]
    INSTALL_DIR = "HKLM/Software/FooApp/InstallDir"
    RUN_COUNT = "HKLM/Software/FooApp/Settings/RunCount"

    def __init__(self, base):
        self.base = str(base)
        self.root = os.path.join(self.base, "root")
        self.hive_path = os.path.join(self.base, "hive.txt")
        self.keys = {}
        self.values = {}

    # hive text
    def _write_hive(self):
        lines = []
        for path in sorted(self.keys, key=str.casefold):
            lines.append(f"key|{path}|{self.keys[path]}")
        for path in sorted(self.values, key=str.casefold):
            rtype, data = self.values[path]
            lines.append(f"value|{path}|{rtype}|{base64.b64encode(data).decode()}")
        with open(self.hive_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    def baseline(self):
        os.makedirs(self.root, exist_ok=True)
        make_dir(self.root, "Program Files")
        make_dir(self.root, "Windows")
        write_file(self.root, "Windows/system.ini", b"[boot]\nshell=explorer.exe\n")
        set_times(os.path.join(self.root, "Windows"), T0)
        stamp = "2015-09-10T00:00:00Z"
        self.keys = {"HKLM/Software": stamp, "HKLM/Software/Microsoft": stamp,
                     "HKU/S-1-5-21": stamp, "HKU/S-1-5-21/Software": stamp}
        self.values = {"HKLM/Software/Microsoft/Version": ("REG_SZ", _utf16z("10.0"))}
        self._write_hive()
        return self

    def install(self):
        for name, data in self.FILES.items():
            write_file(self.root, f"{self.APP_DIR}/{name}", data, self.T1)
        set_times(os.path.join(self.root, *self.APP_DIR.split("/")), self.T1)
        set_times(os.path.join(self.root, "Program Files"), self.T1)
        for k in self.KEYS:
            self.keys[k] = "2015-09-10T00:00:01Z"
        self.values[self.INSTALL_DIR] = ("REG_SZ", _utf16z("C:\\Program Files\\FooApp"))
        self.values[self.RUN_COUNT] = ("REG_DWORD", (0).to_bytes(4, "little"))
        self._write_hive()

    def execute(self):
        write_file(self.root, f"{self.APP_DIR}/config.ini", self.CONFIG_AFTER, self.T2)
        set_times(os.path.join(self.root, *self.APP_DIR.split("/")), self.T1)
        self.values[self.RUN_COUNT] = ("REG_DWORD", (1).to_bytes(4, "little"))
        self._write_hive()

    def uninstall(self):
        for name in self.FILES:
            os.remove(os.path.join(self.root, *self.APP_DIR.split("/"), name))
        set_times(os.path.join(self.root, *self.APP_DIR.split("/")), self.T3)

    def responses(self):
        """Console script for a full three-phase session."""
        return ["", "install", self.install, "execute", self.execute,
                "uninstall", self.uninstall, ""]

    def expected(self):
        """Hand-specified (kind, path, delta, sha1) sets per phase."""
        def sha(b):
            return hashlib.sha1(b).hexdigest()
        final = dict(self.FILES, **{"config.ini": self.CONFIG_AFTER})
        install = {("directory", "Program Files", "changed", None),
                   ("directory", self.APP_DIR, "new", None)}
        install |= {("file", f"{self.APP_DIR}/{n}", "new", sha(d)) for n, d in self.FILES.items()}
        install |= {("key", k, "new", None) for k in self.KEYS}
        install |= {("value", self.INSTALL_DIR, "new", None), ("value", self.RUN_COUNT, "new", None)}
        execute = {("file", f"{self.APP_DIR}/config.ini", "modified", sha(self.CONFIG_AFTER)),
                   ("value", self.RUN_COUNT, "modified", None)}
        # deleted objects carry the before-side record, hashed during execute
        uninstall = {("file", f"{self.APP_DIR}/{n}", "deleted", sha(d)) for n, d in final.items()}
        uninstall |= {("directory", self.APP_DIR, "changed", None)}
        return {"install": install, "execute": execute, "uninstall": uninstall}


def phase_signature(phase):
    """Reduce a phase's objects to (kind, path, delta, sha1) tuples."""
    out = set()
    for o in phase.objects:
        if isinstance(o, FileObject):
            kind = "directory" if o.meta_type == 2 else "file"
            out.add((kind, o.filename.render(), o.delta.value, o.sha1))
        else:
            kind = "key" if o.name_type == "k" else "value"
            out.add((kind, o.cellpath.render(), o.delta.value, None))
    return out
