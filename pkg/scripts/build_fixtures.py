"""Rebuild the committed replay stores under tests/fixtures/.

Runs the real pipeline for each canned character with a recording
gateway over scripted replies, so every store holds exactly the
request/reply files a replay of that character needs. Hashes are a
function of prompt template text, so editing a template and re-running
this script refreshes the stores.

Usage: python3 scripts/build_fixtures.py
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from canned import CHARACTERS, golden_replies  # noqa: E402
from helpers import ScriptedChatProvider  # noqa: E402

from npcforge.gateway import Gateway, LetterFrequencyEmbedding, RecordingChatProvider  # noqa: E402
from npcforge.gifts import ItemCatalog  # noqa: E402
from npcforge.grammar import LocationWhitelist  # noqa: E402
from npcforge.model import validate_description  # noqa: E402
from npcforge.pipeline import run_pipeline  # noqa: E402


def main() -> int:
    fixtures = ROOT / "tests" / "fixtures"
    whitelist = LocationWhitelist.bundled()
    catalog = ItemCatalog.bundled()
    for name, char in CHARACTERS.items():
        store = fixtures / name
        if store.exists():
            shutil.rmtree(store)
        store.mkdir(parents=True)
        scripted = ScriptedChatProvider(golden_replies(name))
        gateway = Gateway(chat=RecordingChatProvider(scripted, store),
                          embedder=LetterFrequencyEmbedding())
        description = validate_description(char["description"])
        result = run_pipeline(description, gateway, whitelist, catalog, select=char["select"])
        recorded = sorted(p.name for p in store.iterdir())
        print(f"{name}: {len(recorded)} fixtures, character {result.expansion.name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
