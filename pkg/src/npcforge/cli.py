"""Command line front door: generate, validate, serve.

Exit codes: 0 success, 1 the operation ran and failed (generation gave
up, a pack failed validation), 2 the invocation itself was unusable
(bad arguments, too-short description, missing credentials, busy
port).
"""

from __future__ import annotations

import argparse
import logging
import sys
import tempfile
import zipfile
from pathlib import Path

from .emitter import DEFAULT_AUTHOR, DEFAULT_VERSION, archive_pack, read_pack, validate_pack, write_pack
from .errors import (
    ConfigurationError,
    ExhaustedRetries,
    FixtureMiss,
    ForgeError,
    IoFailure,
    StageFailure,
    TooShort,
    Unrepairable,
)
from .gateway import Gateway, live_gateway, recording_gateway, replay_gateway
from .gifts import ItemCatalog
from .grammar import LocationWhitelist
from .model import is_ascii_digits, validate_description
from .pipeline import run_pipeline

log = logging.getLogger(__name__)

USAGE_ERROR = 2
OPERATION_FAILED = 1


def _add_gateway_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--replay", metavar="DIR", type=Path,
                       help="serve recorded replies from DIR; no network access")
    group.add_argument("--record", metavar="DIR", type=Path,
                       help="call the live backend and record every reply into DIR")
    group.add_argument("--live", action="store_true",
                       help="call the live backend without recording")
    parser.add_argument("--live-embeddings", action="store_true",
                        help="with --live, use the remote embedding model instead of the "
                             "built-in letter-frequency embedding")


def _gateway_from_args(args: argparse.Namespace) -> Gateway:
    if args.replay is not None:
        return replay_gateway(args.replay)
    if args.record is not None:
        return recording_gateway(args.record)
    return live_gateway(use_live_embeddings=args.live_embeddings)


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--whitelist", metavar="FILE", type=Path,
                        help="schedule location whitelist (default: bundled)")
    parser.add_argument("--catalog", metavar="FILE", type=Path,
                        help="gift item catalog, one item name per line (default: bundled)")


def _load_whitelist(args: argparse.Namespace) -> LocationWhitelist:
    if args.whitelist is not None:
        return LocationWhitelist.load(args.whitelist)
    return LocationWhitelist.bundled()


def _load_catalog(args: argparse.Namespace) -> ItemCatalog:
    if args.catalog is not None:
        return ItemCatalog.load(args.catalog)
    return ItemCatalog.bundled()


def _read_description(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as err:
        raise IoFailure(f"cannot read description file {source}: {err}") from err


def cmd_generate(args: argparse.Namespace) -> int:
    description = validate_description(_read_description(args.description))
    gateway = _gateway_from_args(args)
    whitelist = _load_whitelist(args)
    catalog = _load_catalog(args)
    result = run_pipeline(description, gateway, whitelist, catalog,
                          select=args.select, author=args.author, version=args.pack_version)
    for notice in result.notices:
        print(f"notice: {notice}", file=sys.stderr)
    name = result.expansion.name
    out = args.out if args.out is not None else Path(f"{result.pack.manifest['UniqueID'].split('.')[-1]}")
    if args.zip:
        target = out if out.suffix == ".zip" else out.with_suffix(".zip")
        target.write_bytes(archive_pack(result.pack))
    else:
        target = write_pack(result.pack, out)
    print(f"generated {name}: {target}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    target = args.packdir
    if target.is_file() and zipfile.is_zipfile(target):
        with tempfile.TemporaryDirectory() as scratch:
            with zipfile.ZipFile(target) as archive:
                archive.extractall(scratch)
            pack = read_pack(Path(scratch))
    else:
        pack = read_pack(target)
    whitelist = _load_whitelist(args)
    problems = validate_pack(pack, whitelist)
    for problem in problems:
        print(f"violation: {problem}", file=sys.stderr)
    if problems:
        print(f"{args.packdir}: {len(problems)} violation(s)")
        return OPERATION_FAILED
    print(f"{args.packdir}: OK")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app
    from .session import SessionManager

    host, _, port_text = args.listen.rpartition(":")
    if not host or not is_ascii_digits(port_text):
        print(f"error: --listen must look like HOST:PORT, got {args.listen!r}", file=sys.stderr)
        return USAGE_ERROR
    gateway = _gateway_from_args(args)
    manager = SessionManager(gateway, _load_whitelist(args), _load_catalog(args),
                             store_path=args.snapshot, author=args.author)
    app = create_app(manager, static_dir=args.frontend)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="info")
    except OSError as err:
        print(f"error: cannot bind {args.listen}: {err}", file=sys.stderr)
        return USAGE_ERROR
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npcforge",
                                     description="Generate installable Stardew Valley "
                                                 "character mods from prose descriptions.")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="run the full wizard non-interactively")
    generate.add_argument("description", help="description text file, or - for stdin")
    generate.add_argument("--out", type=Path, help="output directory (default: derived from the character id)")
    generate.add_argument("--select", type=int, default=0, choices=(0, 1, 2),
                          help="which of the three candidate cards to expand (default 0)")
    generate.add_argument("--zip", action="store_true", help="write a zip archive instead of a directory")
    generate.add_argument("--author", default=DEFAULT_AUTHOR, help="manifest author")
    generate.add_argument("--pack-version", default=DEFAULT_VERSION, help="manifest semantic version")
    _add_gateway_options(generate)
    _add_data_options(generate)
    generate.set_defaults(handler=cmd_generate)

    validate = commands.add_parser("validate", help="re-check an emitted pack directory or zip")
    validate.add_argument("packdir", type=Path, help="pack directory or .zip archive to validate")
    _add_data_options(validate)
    validate.set_defaults(handler=cmd_validate)

    serve = commands.add_parser("serve", help="run the wizard HTTP service")
    serve.add_argument("--listen", default="127.0.0.1:8321", help="HOST:PORT to bind (default 127.0.0.1:8321)")
    serve.add_argument("--snapshot", type=Path, help="session snapshot file to load and keep updated")
    serve.add_argument("--frontend", type=Path, help="static site directory to serve at /")
    serve.add_argument("--author", default=DEFAULT_AUTHOR, help="manifest author for finished packs")
    _add_gateway_options(serve)
    _add_data_options(serve)
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except TooShort as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_ERROR
    except (StageFailure, ExhaustedRetries, Unrepairable, FixtureMiss) as err:
        print(f"error: {err}", file=sys.stderr)
        return OPERATION_FAILED
    except ForgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return OPERATION_FAILED


if __name__ == "__main__":
    sys.exit(main())
