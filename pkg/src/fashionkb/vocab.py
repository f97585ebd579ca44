"""Concept vocabulary: the closed worlds of occasions, garment categories and attributes.

The vocabulary is data, not code: it ships as a JSON file and everything
downstream (models, knowledge base, search) is sized and validated against it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

GENDERS = ("female", "male")
GENDER_UNKNOWN = "unknown"


class VocabularyError(ValueError):
    """Raised when a vocabulary file violates a structural invariant."""


@dataclass(frozen=True)
class AttributeType:
    """One garment attribute, e.g. color, with its closed set of values."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise VocabularyError(f"attribute {self.name!r} needs >= 2 values")
        if len(set(self.values)) != len(self.values):
            raise VocabularyError(f"attribute {self.name!r} has duplicate values")


@dataclass(frozen=True)
class ConceptVocabulary:
    occasions: tuple[str, ...]
    categories: tuple[str, ...]
    attributes: tuple[AttributeType, ...]
    version: str = "1.0"

    def __post_init__(self):
        for label, names in (("occasion", self.occasions), ("category", self.categories)):
            dupes = _duplicates(names)
            if dupes:
                raise VocabularyError(f"duplicate {label} name(s): {sorted(dupes)}")
        attr_names = [a.name for a in self.attributes]
        if _duplicates(attr_names):
            raise VocabularyError(f"duplicate attribute type name(s): {sorted(_duplicates(attr_names))}")
        seen: dict[str, str] = {}
        for attr in self.attributes:
            for value in attr.values:
                if value in seen:
                    raise VocabularyError(
                        f"value {value!r} appears under both {seen[value]!r} and {attr.name!r}"
                    )
                seen[value] = attr.name

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def n_attribute_values(self) -> int:
        return sum(len(a.values) for a in self.attributes)

    def attribute(self, name: str) -> AttributeType:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise KeyError(name)

    def counts(self) -> tuple[int, int, int, int]:
        """(occasions, categories, attribute types, attribute values)."""
        return (
            len(self.occasions),
            len(self.categories),
            len(self.attributes),
            self.n_attribute_values,
        )

    def occasion_index(self, name: str) -> int:
        return self.occasions.index(name)

    def category_index(self, name: str) -> int:
        return self.categories.index(name)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "occasions": list(self.occasions),
            "categories": list(self.categories),
            "attributes": [{"name": a.name, "values": list(a.values)} for a in self.attributes],
        }


def _duplicates(names) -> set:
    seen, dupes = set(), set()
    for n in names:
        if n in seen:
            dupes.add(n)
        seen.add(n)
    return dupes


def vocabulary_from_dict(raw: dict) -> ConceptVocabulary:
    try:
        attributes = tuple(
            AttributeType(name=a["name"], values=tuple(a["values"])) for a in raw["attributes"]
        )
        return ConceptVocabulary(
            occasions=tuple(raw["occasions"]),
            categories=tuple(raw["categories"]),
            attributes=attributes,
            version=str(raw.get("version", "1.0")),
        )
    except (KeyError, TypeError) as exc:
        raise VocabularyError(f"malformed vocabulary structure: {exc}") from exc


def load_vocabulary(path: str | Path) -> ConceptVocabulary:
    """Load and validate a vocabulary file.

    Raises VocabularyError on parse failure, duplicate names, a value listed
    under two attribute types, or an attribute with fewer than two values.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabularyError(f"cannot parse vocabulary file {path}: {exc}") from exc
    return vocabulary_from_dict(raw)


def save_vocabulary(vocab: ConceptVocabulary, path: str | Path) -> None:
    Path(path).write_text(json.dumps(vocab.to_dict(), indent=2) + "\n", encoding="utf-8")


def reference_vocabulary() -> ConceptVocabulary:
    """The vocabulary shipped with the package: 10 occasions, 21 categories,
    8 attribute types, 50 attribute values."""
    raw = json.loads(
        resources.files("fashionkb.data").joinpath("reference_vocab.json").read_text("utf-8")
    )
    return vocabulary_from_dict(raw)


def default_hashtag_data() -> dict[str, list[str]]:
    """The shipped occasion -> hashtags map (a configuration default)."""
    return json.loads(
        resources.files("fashionkb.data").joinpath("hashtags.json").read_text("utf-8")
    )
