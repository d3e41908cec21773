"""Key-phrase audit and six-category stratified corpus re-splitting.

Examples are bucketed by (phrase family x binary label): the family is
``none``, ``anti_immigration`` or ``anti_women``, matched as
case-insensitive substrings over *cleaned* text so that an expanded
abbreviation and its surviving lowercase form both hit. When both families
match, anti-immigration takes precedence (configurable via the phrase-set
ordering documented here).

The re-split shuffles each category with one seeded generator (after
sorting by id, so input order is irrelevant) and cuts by largest-remainder
rounding, keeping every split within +-1 of its exact ratio target.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

FAMILIES = ("anti_immigration", "anti_women")
SPLIT_NAMES = ("train", "val", "test")

# original EN proportions: 9000 / 1000 / 2971
DEFAULT_RATIOS = (9000 / 12971, 1000 / 12971, 2971 / 12971)


@dataclass(frozen=True)
class KeyPhraseSet:
    """Tracked phrase families; matching is case-insensitive substring."""

    anti_immigration: tuple[str, ...] = (
        "build the wall",
        "build that wall",
        "maga",
        "make america great again",
        "illegal aliens",
    )
    anti_women: tuple[str, ...] = ("bitch",)

    def family_phrases(self, family: str) -> tuple[str, ...]:
        return getattr(self, family)

    def all_phrases(self) -> list[tuple[str, str]]:
        return [(family, phrase) for family in FAMILIES for phrase in self.family_phrases(family)]


@dataclass(frozen=True)
class CategoryLabel:
    """One of the six stratification classes: phrase family x hatefulness."""

    family: str  # none | anti_immigration | anti_women
    hateful: bool

    @property
    def key(self) -> str:
        return f"{self.family}:{'hateful' if self.hateful else 'not_hateful'}"


ALL_CATEGORIES = tuple(
    CategoryLabel(family, hateful).key
    for family in ("none", "anti_immigration", "anti_women")
    for hateful in (True, False)
)


def load_phrases(path) -> KeyPhraseSet:
    """Read a family<TAB>phrase file into a KeyPhraseSet."""
    by_family: dict[str, list[str]] = {f: [] for f in FAMILIES}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"phrases file line {line_no}: expected family<TAB>phrase")
            family, phrase = line.split("\t", 1)
            if family not in by_family:
                raise ValueError(f"phrases file line {line_no}: unknown family {family!r}")
            by_family[family].append(phrase.strip().lower())
    if not all(by_family.values()):
        raise ValueError("each phrase family needs at least one pattern")
    return KeyPhraseSet(anti_immigration=tuple(by_family["anti_immigration"]),
                        anti_women=tuple(by_family["anti_women"]))


def _matches_any(text: str, phrases: tuple[str, ...]) -> bool:
    lowered = text.lower()
    return any(p in lowered for p in phrases)


def categorize(clean_text: str, label: int, phrases: KeyPhraseSet | None = None) -> CategoryLabel:
    """Assign the stratification category; anti-immigration wins on double match."""
    phrases = phrases or KeyPhraseSet()
    if _matches_any(clean_text, phrases.anti_immigration):
        family = "anti_immigration"
    elif _matches_any(clean_text, phrases.anti_women):
        family = "anti_women"
    else:
        family = "none"
    return CategoryLabel(family=family, hateful=bool(label))


# ---------------------------------------------------------------------------
# hate-ratio audit (per-phrase hatefulness by split group)


def hate_ratio_table(
    examples: dict[str, tuple[str, int]],
    split_ids: dict[str, list[str]],
    phrases: KeyPhraseSet | None = None,
) -> dict[str, dict[str, float | None]]:
    """Hate ratio per phrase for the train+val group versus the test group.

    ``examples`` maps id -> (cleaned text, label). A ratio is hateful
    occurrences / total occurrences of the phrase; groups with zero
    occurrences report None. Family totals count samples containing any
    phrase of the family.
    """
    phrases = phrases or KeyPhraseSet()
    groups = {
        "train+val": [*split_ids.get("train", []), *split_ids.get("val", [])],
        "test": list(split_ids.get("test", [])),
    }
    table: dict[str, dict[str, float | None]] = {}

    def ratio(ids: list[str], patterns: tuple[str, ...]) -> float | None:
        total = hateful = 0
        for ex_id in ids:
            text, label = examples[ex_id]
            if _matches_any(text, patterns):
                total += 1
                hateful += label
        return None if total == 0 else 100.0 * hateful / total

    for family, phrase in phrases.all_phrases():
        table[phrase] = {name: ratio(ids, (phrase,)) for name, ids in groups.items()}
    for family in FAMILIES:
        table[f"total {family}"] = {
            name: ratio(ids, phrases.family_phrases(family)) for name, ids in groups.items()
        }
    return table


def false_positive_breakdown(
    examples: dict[str, tuple[str, int]],
    test_ids: list[str],
    predictions: dict[str, int],
    phrases: KeyPhraseSet | None = None,
) -> dict:
    """Count test false positives and how many contain each tracked phrase."""
    phrases = phrases or KeyPhraseSet()
    fp_ids = [i for i in test_ids if examples[i][1] == 0 and predictions.get(i) == 1]
    per_phrase = {
        phrase: sum(1 for i in fp_ids if phrase in examples[i][0].lower())
        for _, phrase in phrases.all_phrases()
    }
    any_phrase = sum(
        1 for i in fp_ids
        if _matches_any(examples[i][0], phrases.anti_immigration + phrases.anti_women)
    )
    return {
        "test_size": len(test_ids),
        "false_positives": len(fp_ids),
        "false_positives_with_any_phrase": any_phrase,
        "per_phrase": per_phrase,
    }


# ---------------------------------------------------------------------------
# stratified re-split


@dataclass
class SplitBundle:
    """Named id partitions with the provenance needed to reproduce them."""

    train: list[str]
    val: list[str]
    test: list[str]
    seed: int
    ratios: tuple[float, float, float]
    histogram: dict[str, dict[str, int]] = field(default_factory=dict)
    provenance: str = "restratified"

    def split(self, name: str) -> list[str]:
        return getattr(self, name)

    def to_json(self) -> str:
        return json.dumps(
            {
                "provenance": self.provenance,
                "seed": self.seed,
                "ratios": list(self.ratios),
                "splits": {name: self.split(name) for name in SPLIT_NAMES},
                "histogram": self.histogram,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SplitBundle":
        doc = json.loads(text)
        return cls(
            train=doc["splits"]["train"],
            val=doc["splits"]["val"],
            test=doc["splits"]["test"],
            seed=doc["seed"],
            ratios=tuple(doc["ratios"]),
            histogram=doc.get("histogram", {}),
            provenance=doc.get("provenance", "restratified"),
        )

    @classmethod
    def load(cls, path) -> "SplitBundle":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    exact = [n * r for r in ratios]
    base = [int(np.floor(e)) for e in exact]
    remainder = n - sum(base)
    by_frac = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i))
    for i in by_frac[:remainder]:
        base[i] += 1
    return base


def stratified_resplit(
    categorized: list[tuple[str, CategoryLabel]],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitBundle:
    """Shuffle each category with the seed and cut it by the ratios."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    if len({ex_id for ex_id, _ in categorized}) != len(categorized):
        raise ValueError("duplicate example ids")
    by_category: dict[str, list[str]] = {}
    for ex_id, category in sorted(categorized, key=lambda pair: pair[0]):
        by_category.setdefault(category.key, []).append(ex_id)

    rng = np.random.default_rng(seed)
    splits: dict[str, list[str]] = {name: [] for name in SPLIT_NAMES}
    histogram: dict[str, dict[str, int]] = {name: {} for name in SPLIT_NAMES}
    for category in sorted(by_category):
        ids = by_category[category]
        if len(ids) < len(SPLIT_NAMES):
            logger.warning("category %s has only %d examples for %d splits",
                           category, len(ids), len(SPLIT_NAMES))
        order = rng.permutation(len(ids))
        shuffled = [ids[i] for i in order]
        counts = _largest_remainder(len(ids), ratios)
        offset = 0
        for name, count in zip(SPLIT_NAMES, counts):
            splits[name].extend(shuffled[offset:offset + count])
            histogram[name][category] = count
            offset += count
    return SplitBundle(
        train=splits["train"],
        val=splits["val"],
        test=splits["test"],
        seed=seed,
        ratios=tuple(ratios),
        histogram=histogram,
    )
