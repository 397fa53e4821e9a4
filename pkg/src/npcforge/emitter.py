"""Content pack emission: four documents plus assets, byte-deterministic.

Document key order is fixed by construction and serialization is
canonical (two-space indent, UTF-8, trailing newline), so emitting the
same inputs twice yields identical bytes, file by file and in the
archive. Zip members get a constant timestamp for the same reason.
"""

from __future__ import annotations

import importlib.resources
import io
import json
import logging
import os
import re
import zipfile
from pathlib import Path

from .errors import BadVersion, DanglingReference, InvariantViolation, IoFailure
from .grammar import serialize_daily_schedule, serialize_dialogue_key
from .model import (
    DAY_KEYS,
    Birthday,
    CharacterExpansion,
    DailySchedule,
    DayOfMonthKey,
    DayOfWeekKey,
    DialogueSet,
    GiftDialogues,
    GiftPreferences,
    LocationKey,
    Manner,
    ModPack,
    Optimism,
    SocialAnxiety,
)

log = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
CONTENT_FILE = "content.json"
DIALOGUES_FILE = "dialogues.json"
SCHEDULES_FILE = "schedules.json"
PORTRAIT_FILE = "portrait.png"
SPRITE_FILE = "sprite.png"

PACK_FILE_ORDER = (MANIFEST_FILE, CONTENT_FILE, DIALOGUES_FILE, SCHEDULES_FILE, PORTRAIT_FILE, SPRITE_FILE)

CONTENT_PACK_TARGET = "Pathoschild.ContentPatcher"
DEFAULT_AUTHOR = "npcforge"
DEFAULT_VERSION = "1.0.0"

GIFT_DOC_KEY = "giftDialogues"

_SEMVER_RE = re.compile(r"^\d+\.\d+\.\d+$")
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def canonical_json(doc: object) -> bytes:
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def slugify(text: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9]+", "", text)
    return slug or "Unnamed"


def unique_id(author: str, name: str, taken_ids: tuple[str, ...] = ()) -> str:
    """'<Author>.<Name>' with a numeric suffix when the id is already taken."""
    base = f"{slugify(author)}.{slugify(name)}"
    if base not in taken_ids:
        return base
    suffix = 2
    while f"{base}{suffix}" in taken_ids:
        suffix += 1
    return f"{base}{suffix}"


def emit_manifest(name: str, description: str, author: str = DEFAULT_AUTHOR,
                  version: str = DEFAULT_VERSION, taken_ids: tuple[str, ...] = ()) -> dict:
    if not _SEMVER_RE.match(version):
        raise BadVersion(f"version must be MAJOR.MINOR.PATCH, got {version!r}")
    return {
        "Name": name,
        "Author": author,
        "Version": version,
        "Description": description,
        "UniqueID": unique_id(author, name, taken_ids),
        "ContentPackFor": {"UniqueID": CONTENT_PACK_TARGET},
    }


def emit_content(expansion: CharacterExpansion, preferences: GiftPreferences,
                 pack_files: tuple[str, ...] = PACK_FILE_ORDER) -> dict:
    """The character document: traits, file links, gift preference lists."""
    doc = {
        "Format": "2.0.0",
        "Character": {
            "Name": expansion.name,
            "Gender": expansion.gender,
            "Age": expansion.age,
            "Birthday": expansion.birthday.format(),
            "Manner": str(expansion.personality.manners),
            "SocialAnxiety": str(expansion.personality.social_anxiety),
            "Optimism": str(expansion.personality.optimism),
        },
        "Files": {
            "Schedules": SCHEDULES_FILE,
            "Dialogues": DIALOGUES_FILE,
            "Portrait": PORTRAIT_FILE,
            "Sprite": SPRITE_FILE,
        },
        "GiftPreferences": {
            "Love": list(preferences.loves),
            "Like": list(preferences.likes),
            "Dislike": list(preferences.dislikes),
            "Hate": list(preferences.hates),
        },
    }
    for role, filename in doc["Files"].items():
        if filename not in pack_files:
            raise DanglingReference(f"content.json {role} points at {filename!r}, not part of the pack")
    return doc


def emit_dialogues(dialogues: DialogueSet, gift_dialogues: GiftDialogues) -> dict:
    """Dialogue document in fixed order: month days, week days, locations, gifts."""
    month_keys = sorted(
        (key for key in dialogues.entries if isinstance(key, DayOfMonthKey)),
        key=lambda key: key.day)
    week_keys = sorted(
        (key for key in dialogues.entries if isinstance(key, DayOfWeekKey)),
        key=lambda key: DAY_KEYS.index(key.day))
    location_keys = sorted(
        (key for key in dialogues.entries if isinstance(key, LocationKey)),
        key=lambda key: (key.location, key.x, key.y))
    doc: dict = {}
    for key in (*month_keys, *week_keys, *location_keys):
        doc[serialize_dialogue_key(key)] = dialogues.entries[key]
    doc[GIFT_DOC_KEY] = {
        "love": gift_dialogues.love,
        "like": gift_dialogues.like,
        "dislike": gift_dialogues.dislike,
        "hate": gift_dialogues.hate,
        "neutral": gift_dialogues.neutral,
    }
    return doc


def emit_schedules(schedule: "DailySchedule") -> dict:
    return serialize_daily_schedule(schedule)


def _bundled_asset(name: str) -> bytes:
    return importlib.resources.files("npcforge.resources.assets").joinpath(name).read_bytes()


def build_pack(expansion: CharacterExpansion, bundle, preferences: GiftPreferences,
               author: str = DEFAULT_AUTHOR, version: str = DEFAULT_VERSION,
               taken_ids: tuple[str, ...] = (),
               assets: dict[str, bytes] | None = None) -> ModPack:
    """Assemble the full pack from validated stage outputs."""
    if assets is None:
        assets = {
            PORTRAIT_FILE: _bundled_asset(PORTRAIT_FILE),
            SPRITE_FILE: _bundled_asset(SPRITE_FILE),
        }
    manifest = emit_manifest(
        name=expansion.name,
        description=expansion.summary,
        author=author,
        version=version,
        taken_ids=taken_ids,
    )
    content = emit_content(expansion, preferences)
    return ModPack(
        manifest=manifest,
        content=content,
        dialogues=emit_dialogues(bundle.dialogues, bundle.gift_dialogues),
        schedules=emit_schedules(bundle.schedule),
        assets=assets,
    )


def pack_members(pack: ModPack) -> list[tuple[str, bytes]]:
    """The pack's files as (name, bytes) in fixed emission order."""
    members = [
        (MANIFEST_FILE, canonical_json(pack.manifest)),
        (CONTENT_FILE, canonical_json(pack.content)),
        (DIALOGUES_FILE, canonical_json(pack.dialogues)),
        (SCHEDULES_FILE, canonical_json(pack.schedules)),
    ]
    for name in sorted(pack.assets):
        members.append((name, pack.assets[name]))
    return members


def archive_pack(pack: ModPack) -> bytes:
    """Deterministic zip: fixed member order, fixed timestamps, fixed attributes."""
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_DEFLATED, compresslevel=9) as archive:
        for name, data in pack_members(pack):
            info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            info.compress_type = zipfile.ZIP_DEFLATED
            archive.writestr(info, data)
    return buffer.getvalue()


def package_modpack(pack: ModPack, target: Path | None = None) -> Path | bytes:
    """Package a pack for delivery.

    With a target directory the files land on disk and the directory
    path comes back; with no target the result is the deterministic
    archive blob.
    """
    if target is None:
        return archive_pack(pack)
    return write_pack(pack, Path(target))


def write_pack(pack: ModPack, target: Path) -> Path:
    """Write the pack into a directory, holding an exclusive lock while writing."""
    target = Path(target)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise IoFailure(f"cannot create pack directory {target}: {err}") from err
    lock_path = target / ".pack.lock"
    try:
        lock_handle = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise IoFailure(f"pack directory {target} is locked by another writer") from None
    except OSError as err:
        raise IoFailure(f"cannot lock pack directory {target}: {err}") from err
    try:
        for name, data in pack_members(pack):
            try:
                (target / name).write_bytes(data)
            except OSError as err:
                raise IoFailure(f"cannot write {name} into {target}: {err}") from err
    finally:
        os.close(lock_handle)
        try:
            os.unlink(lock_path)
        except OSError:
            log.warning("could not remove lock file %s", lock_path)
    return target


def validate_pack(pack: ModPack, whitelist, catalog=None) -> list[str]:
    """Re-run the full validator suite over an emitted pack.

    Returns human-readable problems; empty means the pack is clean. The
    schedule/dialogue side goes back through the stage-three validator,
    so a pack can never be cleaner than the bundle it came from.
    """
    from .configgen import GIFT_CATEGORIES, ViolationReport, validate_config
    from .errors import EnumOutOfRange

    problems: list[str] = []
    manifest = pack.manifest
    for key in ("Name", "Author", "Version", "Description", "UniqueID", "ContentPackFor"):
        if key not in manifest:
            problems.append(f"manifest.json: missing {key}")
    version = manifest.get("Version")
    if isinstance(version, str) and not _SEMVER_RE.match(version):
        problems.append(f"manifest.json: Version {version!r} is not MAJOR.MINOR.PATCH")
    target = manifest.get("ContentPackFor")
    if not (isinstance(target, dict) and target.get("UniqueID") == CONTENT_PACK_TARGET):
        problems.append(f"manifest.json: ContentPackFor must target {CONTENT_PACK_TARGET}")

    content = pack.content
    character = content.get("Character")
    if not isinstance(character, dict):
        problems.append("content.json: missing Character object")
    else:
        for key in ("Name", "Gender", "Age", "Birthday"):
            if key not in character:
                problems.append(f"content.json: Character missing {key}")
        for key, enum in (("Manner", Manner), ("SocialAnxiety", SocialAnxiety), ("Optimism", Optimism)):
            value = character.get(key)
            try:
                enum.parse(str(value))
            except EnumOutOfRange:
                problems.append(f"content.json: Character.{key} {value!r} is out of range")
        birthday = character.get("Birthday")
        if isinstance(birthday, str):
            try:
                Birthday.parse(birthday)
            except InvariantViolation as err:
                problems.append(f"content.json: {err}")
    files = content.get("Files")
    pack_names = {name for name, _ in pack_members(pack)}
    if not isinstance(files, dict):
        problems.append("content.json: missing Files object")
    else:
        for role, filename in files.items():
            if filename not in pack_names:
                problems.append(f"content.json: Files.{role} points at {filename!r}, not part of the pack")
    gift_lists = content.get("GiftPreferences")
    if not isinstance(gift_lists, dict):
        problems.append("content.json: missing GiftPreferences object")
    else:
        seen: dict[str, str] = {}
        for category in ("Love", "Like", "Dislike", "Hate"):
            values = gift_lists.get(category)
            if not isinstance(values, list):
                problems.append(f"content.json: GiftPreferences.{category} must be a list")
                continue
            for item in values:
                if item in seen and seen[item] != category:
                    problems.append(f"content.json: {item!r} appears in both {seen[item]} and {category}")
                seen[item] = category
                if catalog is not None and item not in catalog.names():
                    problems.append(f"content.json: gift item {item!r} is not in the catalog")

    dialogue_doc = dict(pack.dialogues)
    gift_dialogues = dialogue_doc.pop(GIFT_DOC_KEY, None)
    if not isinstance(gift_dialogues, dict):
        problems.append(f"dialogues.json: missing {GIFT_DOC_KEY} object")
        gift_dialogues = {}
    raw = {
        "schedule": dict(pack.schedules),
        "dialogues": dialogue_doc,
        "giftDialogues": {category: gift_dialogues.get(category) for category in GIFT_CATEGORIES},
    }
    result = validate_config(raw, whitelist)
    if isinstance(result, ViolationReport):
        problems.extend(f"{v.category.value} at {v.where}: {v.detail}" for v in result.violations)
    return problems


def read_pack(directory: Path) -> ModPack:
    """Load a pack directory back into memory; raises IoFailure/InvariantViolation."""
    directory = Path(directory)
    docs = {}
    for name in (MANIFEST_FILE, CONTENT_FILE, DIALOGUES_FILE, SCHEDULES_FILE):
        path = directory / name
        try:
            docs[name] = json.loads(path.read_text(encoding="utf-8"))
        except OSError as err:
            raise IoFailure(f"cannot read {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise IoFailure(f"{path} is not valid JSON: {err}") from err
    assets = {}
    for path in sorted(directory.iterdir()):
        if path.suffix == ".png" and path.is_file():
            assets[path.name] = path.read_bytes()
    return ModPack(
        manifest=docs[MANIFEST_FILE],
        content=docs[CONTENT_FILE],
        dialogues=docs[DIALOGUES_FILE],
        schedules=docs[SCHEDULES_FILE],
        assets=assets,
    )
