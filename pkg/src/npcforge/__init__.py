"""npcforge: turn a short character description into a Stardew Valley NPC content pack.

The pipeline runs three chat-model stages (highlight cards, trait sheet,
config files), validates the output against a strict schedule/dialogue
grammar, matches gift preferences against an item catalog by embedding
similarity, and emits a byte-deterministic content pack.
"""

__version__ = "0.1.0"

from .errors import ForgeError

__all__ = ["ForgeError", "__version__"]
