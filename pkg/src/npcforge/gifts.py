"""Gift preference matching: taste keywords against the item catalog.

The personality's foodAndDrinks and others sentences are clause-parsed
into polarity-tagged keywords. Each keyword is embedded alongside every
catalog item; its three most cosine-similar items become claims (the
single best match is a strong claim, the next two weak ones). Claims
are resolved into four pairwise disjoint lists with priority
love > hate > like > dislike.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
import logging
import math
import re
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    CatalogTooSmall,
    DimensionMismatch,
    EmptyKeywordSet,
    InvariantViolation,
    ZeroVector,
)
from .gateway import EmbeddingProvider, embed_text
from .model import GiftPreferences, PersonalityProfile

log = logging.getLogger(__name__)

TOP_K = 3


class Polarity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    def flipped(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


@dataclass(frozen=True)
class TasteKeyword:
    text: str
    polarity: Polarity


# Negative verbs first: "doesn't like" would otherwise match the positive "like".
_VERB_RE = re.compile(
    r"\b(?:(?P<neg>doesn['’]?t\s+(?:like|enjoy|love)|does\s+not\s+(?:like|enjoy|love)|dislikes?|hates?)"
    r"|(?P<pos>likes?|loves?|enjoys?))\b",
    re.IGNORECASE,
)

_SENTENCE_SPLIT = re.compile(r"[.;!?\n]+")
_SEGMENT_SPLIT = re.compile(r",|\band\b", re.IGNORECASE)

_STOPWORDS = {
    "a", "an", "the", "some", "any", "also", "his", "her", "their", "its",
    "of", "these", "those", "this", "that", "to", "very", "really", "all",
    "but", "or", "nor", "so", "he", "she", "it", "they", "we", "i", "you",
    "him", "them", "us", "who", "which", "while", "though", "although",
}

MAX_KEYWORD_WORDS = 4


def _clean_phrase(raw: str) -> str | None:
    words = [word for word in re.sub(r"[^a-z0-9' -]", " ", raw.lower()).split()
             if word not in _STOPWORDS]
    if not words or len(words) > MAX_KEYWORD_WORDS:
        return None
    return " ".join(words)


def _segment_keywords(segment: str, polarity: Polarity) -> list[TasteKeyword]:
    """One comma segment can carry an 'except X' sub-clause that flips X."""
    before, marker, after = segment.partition("except")
    keywords = []
    main = _clean_phrase(before)
    if main is not None:
        keywords.append(TasteKeyword(main, polarity))
    if marker:
        flipped = _clean_phrase(after)
        if flipped is not None:
            keywords.append(TasteKeyword(flipped, polarity.flipped()))
    return keywords


def extract_keywords(personality: PersonalityProfile) -> tuple[TasteKeyword, ...]:
    """Clause-parse the two taste sentences into polarity-tagged keywords.

    Each sentence is scanned for like/love/enjoy and dislike/hate verbs;
    a verb's objects run to the next verb or the sentence end and are
    split on commas and 'and'. Duplicate texts keep their first polarity.
    """
    keywords: list[TasteKeyword] = []
    seen: set[str] = set()
    for text in (personality.food_and_drinks, personality.others):
        for sentence in _SENTENCE_SPLIT.split(text):
            matches = list(_VERB_RE.finditer(sentence))
            for position, match in enumerate(matches):
                polarity = Polarity.NEGATIVE if match.group("neg") else Polarity.POSITIVE
                end = matches[position + 1].start() if position + 1 < len(matches) else len(sentence)
                tail = sentence[match.end():end]
                for segment in _SEGMENT_SPLIT.split(tail):
                    for keyword in _segment_keywords(segment, polarity):
                        if keyword.text not in seen:
                            seen.add(keyword.text)
                            keywords.append(keyword)
    if not keywords:
        raise EmptyKeywordSet("no like/dislike clauses found in the personality text")
    return tuple(keywords)


def cosine_similarity(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    if len(a) != len(b):
        raise DimensionMismatch(f"vector lengths differ: {len(a)} vs {len(b)}")
    norm_a = math.sqrt(sum(value * value for value in a))
    norm_b = math.sqrt(sum(value * value for value in b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine similarity against a zero vector is undefined")
    dot = sum(x * y for x, y in zip(a, b))
    return dot / (norm_a * norm_b)


@dataclass(frozen=True)
class CatalogItem:
    name: str
    embedding: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ItemCatalog:
    """Game item names, optionally carrying precomputed embeddings."""

    items: tuple[CatalogItem, ...]

    def __post_init__(self) -> None:
        names = [item.name for item in self.items]
        if len(set(names)) != len(names):
            raise InvariantViolation("catalog has duplicate item names")
        dimensions = {len(item.embedding) for item in self.items if item.embedding is not None}
        if len(dimensions) > 1:
            raise InvariantViolation(f"catalog mixes embedding dimensions: {sorted(dimensions)}")

    def __len__(self) -> int:
        return len(self.items)

    def names(self) -> tuple[str, ...]:
        return tuple(item.name for item in self.items)

    def has_embeddings(self) -> bool:
        return all(item.embedding is not None for item in self.items)

    @classmethod
    def from_names(cls, names: list[str]) -> "ItemCatalog":
        return cls(tuple(CatalogItem(name) for name in names))

    @classmethod
    def load(cls, path: Path) -> "ItemCatalog":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        names = [line.strip() for line in lines if line.strip() and not line.startswith("#")]
        return cls.from_names(names)

    @classmethod
    def bundled(cls) -> "ItemCatalog":
        text = importlib.resources.files("npcforge.resources").joinpath("items.txt").read_text(encoding="utf-8")
        names = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        return cls.from_names(names)


def catalog_fingerprint(catalog: ItemCatalog, embedder: EmbeddingProvider) -> str:
    payload = f"{embedder.name}:{embedder.dimension}:" + "\n".join(catalog.names())
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_CACHE_MAGIC = b"NPCEMB1\n"


def _write_embedding_cache(path: Path, fingerprint: str, vectors: list[tuple[float, ...]]) -> None:
    dimension = len(vectors[0]) if vectors else 0
    header = json.dumps({"fingerprint": fingerprint, "dimension": dimension, "count": len(vectors)}).encode("utf-8")
    flat = [value for vector in vectors for value in vector]
    with open(path, "wb") as handle:
        handle.write(_CACHE_MAGIC)
        handle.write(struct.pack(">I", len(header)))
        handle.write(header)
        handle.write(struct.pack(f"<{len(flat)}d", *flat))


def _read_embedding_cache(path: Path, fingerprint: str) -> list[tuple[float, ...]] | None:
    try:
        blob = path.read_bytes()
        if not blob.startswith(_CACHE_MAGIC):
            return None
        offset = len(_CACHE_MAGIC)
        (header_length,) = struct.unpack_from(">I", blob, offset)
        offset += 4
        header = json.loads(blob[offset:offset + header_length].decode("utf-8"))
        if header["fingerprint"] != fingerprint:
            return None
        offset += header_length
        dimension, count = header["dimension"], header["count"]
        flat = struct.unpack_from(f"<{dimension * count}d", blob, offset)
        return [tuple(flat[i * dimension:(i + 1) * dimension]) for i in range(count)]
    except (OSError, ValueError, KeyError, struct.error, json.JSONDecodeError):
        return None


def ensure_catalog_embeddings(catalog: ItemCatalog, embedder: EmbeddingProvider,
                              cache_path: Path | None = None) -> ItemCatalog:
    """Return a catalog where every item carries an embedding.

    A valid cache sidecar (matching provider, dimension and item list)
    short-circuits the provider entirely.
    """
    if catalog.has_embeddings():
        return catalog
    fingerprint = catalog_fingerprint(catalog, embedder)
    if cache_path is not None:
        cached = _read_embedding_cache(Path(cache_path), fingerprint)
        if cached is not None and len(cached) == len(catalog):
            log.info("catalog embeddings loaded from cache %s", cache_path)
            return ItemCatalog(tuple(
                CatalogItem(item.name, vector) for item, vector in zip(catalog.items, cached)))
    vectors = [embed_text(item.name, embedder) for item in catalog.items]
    if cache_path is not None:
        try:
            _write_embedding_cache(Path(cache_path), fingerprint, vectors)
        except OSError as err:
            log.warning("could not write embedding cache %s: %s", cache_path, err)
    return ItemCatalog(tuple(CatalogItem(item.name, vector) for item, vector in zip(catalog.items, vectors)))


def top_k_items(keyword: str, catalog: ItemCatalog, k: int,
                embedder: EmbeddingProvider) -> tuple[str, ...]:
    """The k catalog items most cosine-similar to the keyword.

    Ties keep catalog order, which makes the ranking total and
    deterministic. The catalog must already carry embeddings.
    """
    if len(catalog) < k:
        raise CatalogTooSmall(f"catalog has {len(catalog)} items, need at least {k}")
    if not catalog.has_embeddings():
        raise InvariantViolation("catalog items have no embeddings; call ensure_catalog_embeddings first")
    keyword_vector = embed_text(keyword, embedder)
    scored = []
    for index, item in enumerate(catalog.items):
        assert item.embedding is not None
        score = cosine_similarity(keyword_vector, item.embedding)
        scored.append((-score, index, item.name))
    scored.sort()
    return tuple(name for _, _, name in scored[:k])


def build_gift_preferences(personality: PersonalityProfile, catalog: ItemCatalog,
                           embedder: EmbeddingProvider) -> tuple[GiftPreferences, tuple[str, ...]]:
    """Resolve the personality's tastes into four disjoint item lists.

    Returns the preferences plus human-readable warnings. A personality
    with no extractable tastes yields four empty lists and a warning
    rather than an error.
    """
    warnings: list[str] = []
    try:
        keywords = extract_keywords(personality)
    except EmptyKeywordSet:
        return GiftPreferences(), ("no taste keywords found in the personality text; gift lists left empty",)

    claims: dict[str, list[str]] = {"love": [], "hate": [], "like": [], "dislike": []}
    for keyword in keywords:
        try:
            ranked = top_k_items(keyword.text, catalog, TOP_K, embedder)
        except ZeroVector:
            warnings.append(f"keyword {keyword.text!r} embeds to a zero vector; skipped")
            continue
        if keyword.polarity is Polarity.POSITIVE:
            claims["love"].append(ranked[0])
            claims["like"].extend(ranked[1:])
        else:
            claims["hate"].append(ranked[0])
            claims["dislike"].extend(ranked[1:])

    assigned: dict[str, str] = {}
    for category in ("love", "hate", "like", "dislike"):
        for name in claims[category]:
            assigned.setdefault(name, category)
    resolved: dict[str, list[str]] = {"love": [], "hate": [], "like": [], "dislike": []}
    for category in ("love", "hate", "like", "dislike"):
        for name in claims[category]:
            if assigned[name] == category and name not in resolved[category]:
                resolved[category].append(name)
    preferences = GiftPreferences(
        loves=tuple(resolved["love"]),
        likes=tuple(resolved["like"]),
        dislikes=tuple(resolved["dislike"]),
        hates=tuple(resolved["hate"]),
    )
    return preferences, tuple(warnings)
