"""Command-line interface: ``appdiff profile|snapshot|diff|validate|match``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 capture or
I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .apxml import read_document, validate
from .capture import CapturePolicy, capture_fs_snapshot
from .differ import diff_snapshots
from .errors import (AppdiffError, CaptureFailure, NotWellFormed,
                     OutputWriteFailure, SchemaViolation, UnknownPhase)
from .hashtrie import PathTrie, selective_hash
from .hive import load_hive_file
from .matcher import MatchPolicy, build_target_index, match_profile
from .model import merge_snapshot_parts
from .profiler import SessionConfig, TerminalConsole, run_session
from .store import load_snapshot, persist_snapshot

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _err(msg):
    print(f"appdiff: {msg}", file=sys.stderr)


def cmd_profile(args) -> int:
    config = SessionConfig(target_root=args.root, output_path=args.out,
                           app_name=args.app, app_version=args.app_version,
                           hive_source=args.hive, case_sensitive=args.case_sensitive,
                           utf16=args.utf16, snapshot_dir=args.keep_snapshots)
    try:
        run_session(config, TerminalConsole())
    except (CaptureFailure, OutputWriteFailure, OSError) as exc:
        _err(str(exc))
        return EXIT_IO
    return EXIT_OK


def cmd_snapshot(args) -> int:
    policy = CapturePolicy(case_sensitive=args.case_sensitive)
    try:
        snap = capture_fs_snapshot(args.root, policy, snapshot_id=args.id)
        if args.hash:
            snap = selective_hash(snap, PathTrie(case_sensitive=args.case_sensitive), args.root)
        if args.hive:
            snap = merge_snapshot_parts(
                snap, load_hive_file(args.hive, case_sensitive=args.case_sensitive))
        persist_snapshot(snap, args.out)
    except (AppdiffError, OSError) as exc:
        _err(str(exc))
        return EXIT_IO
    for w in snap.warnings:
        _err(f"warning: {w}")
    return EXIT_OK


def cmd_diff(args) -> int:
    try:
        s1, s2 = load_snapshot(args.snap1), load_snapshot(args.snap2)
        result = diff_snapshots(s1, s2)
    except (AppdiffError, OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_IO
    out = sys.stdout
    for entry, state in result.file_deltas:
        out.write(f"{state.value}\t{entry.kind.value}\t{entry.path}\n")
    for key, state in result.key_deltas:
        out.write(f"{state.value}\tkey\t{key.cellpath}\n")
    for value, state in result.value_deltas:
        out.write(f"{state.value}\tvalue\t{value.cellpath}\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        with open(args.file, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    report = validate(data)
    if report.ok:
        print(f"{args.file}: ok")
        return EXIT_OK
    for v in report.violations:
        print(f"{args.file}: {v}")
    return EXIT_INVALID


def cmd_match(args) -> int:
    try:
        profile = read_document(args.profile, strict=args.strict)
    except (NotWellFormed, SchemaViolation, UnknownPhase) as exc:
        _err(f"invalid profile: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    if args.phase:
        profile = type(profile)(profile.metadata, profile.creator,
                                tuple(p for p in profile.phases if p.name in args.phase))
    try:
        target = build_target_index(args.root, args.hive, case_sensitive=args.case_sensitive)
    except (AppdiffError, OSError) as exc:
        _err(str(exc))
        return EXIT_IO
    policy = MatchPolicy(file_fallback=args.fallback, value_data=not args.no_value_data,
                         absence=args.absence)
    report = match_profile(profile, target, policy)
    text = report.to_json() if args.format == "json" else report.to_text()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            _err(str(exc))
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="appdiff",
                description="Profile what an application leaves on a system and match profiles against targets.")
    p.add_argument("--version", action="version", version=f"appdiff {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("profile", help="interactively collect an application profile")
    sp.add_argument("--app", required=True)
    sp.add_argument("--app-version", required=True)
    sp.add_argument("--root", required=True, help="directory tree to profile")
    sp.add_argument("--hive", help="serialized hive file, re-read at every snapshot")
    sp.add_argument("--out", required=True)
    sp.add_argument("--case-sensitive", action="store_true")
    sp.add_argument("--utf16", action="store_true", help="write the profile as UTF-16")
    sp.add_argument("--keep-snapshots", metavar="DIR", help="persist every snapshot taken")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("snapshot", help="capture and persist one snapshot")
    sp.add_argument("--root", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--hive")
    sp.add_argument("--id", default="snapshot")
    sp.add_argument("--hash", action="store_true", help="hash every file")
    sp.add_argument("--case-sensitive", action="store_true")
    sp.set_defaults(func=cmd_snapshot)

    sp = sub.add_parser("diff", help="diff two persisted snapshots (tab-separated output)")
    sp.add_argument("snap1")
    sp.add_argument("snap2")
    sp.set_defaults(func=cmd_diff)

    sp = sub.add_parser("validate", help="validate an APXML document against the schema")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("match", help="match a profile against a target tree")
    sp.add_argument("profile")
    sp.add_argument("--root", required=True)
    sp.add_argument("--hive")
    sp.add_argument("--case-sensitive", action="store_true")
    sp.add_argument("--fallback", choices=["hash-only", "path-only"])
    sp.add_argument("--no-value-data", action="store_true",
                    help="match registry values on cellpath only")
    sp.add_argument("--absence", action="store_true",
                    help="count deleted artifacts as matched when absent from the target")
    sp.add_argument("--phase", action="append", help="restrict to this phase (repeatable)")
    sp.add_argument("--strict", action="store_true", help="reject non-standard phases")
    sp.add_argument("--format", choices=["text", "json"], default="text")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_match)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
