"""Concept catalogue: attribute vocabularies, synonym lexicon, object metadata.

The catalogue ships as package data and is immutable after load; vocabulary
extensions (e.g. teaching the lexicon a new word for an existing concept)
produce a new memory instead of mutating in place.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import UnknownConcept

ATTRIBUTE_TYPES = ("category", "color", "material", "supercategory", "instance")

# concept kinds that can appear as a program's concept argument or a tag type
CONCEPT_KINDS = ATTRIBUTE_TYPES + ("relation", "location", "hyper_relation")

# tokens that read as a noun when deciding whether an ambiguous word
# (e.g. "orange") is used as a color or as a category
_NOUNISH = {"thing", "things", "object", "objects", "item", "items", "one", "ones"}

_PUNCT = re.compile(r"^[\"'?!.,;:()]+|[\"'?!.,;:()]+$")


def normalize_token(token: str) -> str:
    """Lowercase and strip surrounding punctuation; inner hyphens survive."""
    return _PUNCT.sub("", token.lower())


def tokenize(text: str) -> list[str]:
    return [t for t in (normalize_token(w) for w in text.split()) if t]


def canonical_key(phrase: str) -> str:
    """Normalize a multi-word phrase to its lookup key."""
    return " ".join(tokenize(phrase.replace("_", " ")))


IRREGULAR_PLURALS = {"mouse": "mice", "knife": "knives"}
IRREGULAR_SINGULARS = {v: k for k, v in IRREGULAR_PLURALS.items()}


def pluralize(surface: str) -> str:
    """Naive English plural of the last word; words already ending in s stay."""
    words = surface.split()
    last = words[-1]
    if last in IRREGULAR_PLURALS:
        last = IRREGULAR_PLURALS[last]
    elif last.endswith("s"):
        pass
    elif last.endswith(("ch", "sh", "x", "z")):
        last = last + "es"
    else:
        last = last + "s"
    return " ".join(words[:-1] + [last])


@dataclass(frozen=True)
class ObjectSpec:
    """Sampling metadata for one category."""

    category: str
    supercategory: str
    colors: tuple[str, ...]
    materials: tuple[str, ...]
    size: tuple[float, float, float]  # nominal extents in meters
    instances: tuple[str, ...]
    container: bool


@dataclass
class ConceptMemory:
    """Ordered concept vocabularies plus a surface-phrase lexicon.

    values: concept kind -> ordered canonical values.
    lexicon: normalized phrase -> list of (kind, canonical) readings in
        priority order (a phrase like "orange" has two readings).
    surfaces: (kind, canonical) -> surface forms usable in generated text.
    objects: category -> ObjectSpec.
    """

    values: dict[str, tuple[str, ...]]
    lexicon: dict[str, list[tuple[str, str]]]
    surfaces: dict[tuple[str, str], tuple[str, ...]]
    objects: dict[str, ObjectSpec]
    location_forms: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)

    def vocab_words(self) -> set[str]:
        """All single words appearing in lexicon phrases (for plural stripping)."""
        words: set[str] = set()
        for phrase in self.lexicon:
            words.update(phrase.split())
        return words

    def max_phrase_len(self) -> int:
        return max(len(p.split()) for p in self.lexicon)

    def with_synonym(self, kind: str, canonical: str, phrase: str) -> "ConceptMemory":
        """New memory with one extra surface phrase for an existing concept."""
        if canonical not in self.values.get(kind, ()):
            raise UnknownConcept(canonical, f"not a known {kind}")
        key = canonical_key(phrase)
        lexicon = {p: list(rs) for p, rs in self.lexicon.items()}
        readings = lexicon.setdefault(key, [])
        if (kind, canonical) not in readings:
            readings.append((kind, canonical))
        surfaces = dict(self.surfaces)
        surfaces[(kind, canonical)] = surfaces.get((kind, canonical), ()) + (key,)
        return ConceptMemory(self.values, lexicon, surfaces, self.objects, self.location_forms)

    def with_heldout_synonyms(self) -> "ConceptMemory":
        """Memory extended with the held-out vocabulary (lexicon-only change)."""
        mem = self
        for kind, canonical, phrase in _load_raw_heldout():
            if canonical in mem.values.get(kind, ()):
                key = canonical_key(phrase)
                if key in mem.lexicon:
                    continue  # first reading wins; never shadow base vocabulary
                mem = mem.with_synonym(kind, canonical, phrase)
        return mem


def resolve_concept(memory: ConceptMemory, phrase: str) -> tuple[str, str]:
    """Map a surface phrase to its (kind, canonical value) reading.

    Tries the normalized phrase, then a plural-stripped variant of its last
    word. Idempotent on canonical values. Raises UnknownConcept otherwise.
    """
    key = canonical_key(phrase)
    if key in memory.lexicon:
        return memory.lexicon[key][0]
    words = key.split()
    if words:
        vocab = memory.vocab_words()
        stripped = _deplural(words[-1], vocab)
        if stripped != words[-1]:
            alt = " ".join(words[:-1] + [stripped])
            if alt in memory.lexicon:
                return memory.lexicon[alt][0]
    raise UnknownConcept(phrase)


def _deplural(word: str, vocab: set[str]) -> str:
    """Strip a plural suffix only when the result is a known vocabulary word."""
    if word in vocab:
        return word
    irregular = IRREGULAR_SINGULARS.get(word)
    if irregular is not None and irregular in vocab:
        return irregular
    if word.endswith("es") and word[:-2] in vocab:
        return word[:-2]
    if word.endswith("s") and word[:-1] in vocab:
        return word[:-1]
    return word


def pick_reading(readings: list[tuple[str, str]], next_token: str | None,
                 next_is_concept: bool) -> tuple[str, str]:
    """Disambiguate a multi-reading phrase by its right context.

    A color reading wins when the next token starts a category/instance span
    or is a generic noun ("orange cup", "orange thing"); otherwise the first
    registered reading wins ("the orange" is the fruit).
    """
    if len(readings) == 1:
        return readings[0]
    color = next((r for r in readings if r[0] == "color"), None)
    if color and (next_is_concept or (next_token in _NOUNISH)):
        return color
    non_color = [r for r in readings if r[0] != "color"]
    return non_color[0] if non_color else readings[0]


# ---------------------------------------------------------------------------
# catalogue loading


def _raw_catalogue() -> dict:
    text = resources.files("tnsr.data").joinpath("concepts.json").read_text("utf-8")
    return json.loads(text)


def _load_raw_heldout() -> list[tuple[str, str, str]]:
    raw = _raw_catalogue()
    out: list[tuple[str, str, str]] = []
    for kind, entries in raw["attributes"].items():
        for e in entries:
            out.extend((kind, e["canonical"], p) for p in e.get("heldout", ()))
    return out


def load_memory() -> ConceptMemory:
    """Build the default concept memory from the shipped catalogue."""
    raw = _raw_catalogue()
    values: dict[str, tuple[str, ...]] = {}
    lexicon: dict[str, list[tuple[str, str]]] = {}
    surfaces: dict[tuple[str, str], tuple[str, ...]] = {}

    def register(kind: str, canonical: str, phrases: list[str]) -> None:
        forms: list[str] = []
        for phrase in phrases:
            key = canonical_key(phrase)
            readings = lexicon.setdefault(key, [])
            if (kind, canonical) not in readings:
                readings.append((kind, canonical))
            if key not in forms:
                forms.append(key)
        surfaces[(kind, canonical)] = tuple(forms)

    for kind in ATTRIBUTE_TYPES:
        entries = raw["attributes"][kind]
        values[kind] = tuple(e["canonical"] for e in entries)
        for e in entries:
            # surfaces[0] is the preferred display form: the canonical word
            # itself, except for instances where the authored spelling
            # ("coca-cola") reads better than the de-underscored canonical
            ck = canonical_key(e["canonical"])
            if kind == "instance" and e["synonyms"]:
                phrases = list(e["synonyms"])
                if ck not in phrases:
                    phrases.append(ck)
            else:
                phrases = [ck] + [p for p in e["synonyms"] if canonical_key(p) != ck]
            register(kind, e["canonical"], phrases)
            # canonical with underscores must resolve to itself
            lexicon.setdefault(e["canonical"], [(kind, e["canonical"])])

    values["relation"] = tuple(r["canonical"] for r in raw["relations"])
    for r in raw["relations"]:
        register("relation", r["canonical"], list(r["surfaces"]))

    values["hyper_relation"] = tuple(h["canonical"] for h in raw["hyper_relations"])
    for h in raw["hyper_relations"]:
        register("hyper_relation", h["canonical"], list(h["surfaces"]))

    values["location"] = tuple(l["canonical"] for l in raw["locations"])
    location_forms: dict[str, dict[str, tuple[str, ...]]] = {}
    for l in raw["locations"]:
        attributive = tuple(l["attributive"])
        postnominal = tuple(l["postnominal"])
        register("location", l["canonical"], list(attributive) + list(postnominal))
        location_forms[l["canonical"]] = {"attributive": attributive, "postnominal": postnominal}

    objects = {
        cat: ObjectSpec(
            category=cat,
            supercategory=spec["supercategory"],
            colors=tuple(spec["colors"]),
            materials=tuple(spec["materials"]),
            size=tuple(spec["size"]),
            instances=tuple(spec["instances"]),
            container=bool(spec["container"]),
        )
        for cat, spec in raw["objects"].items()
    }
    return ConceptMemory(values, lexicon, surfaces, objects, location_forms)
