"""Tweet cleaning pipeline and descriptive corpus statistics.

Cleaning applies, in a fixed order: mention stripping, URL stripping,
genitive/apostrophe removal, contraction expansion, dash normalization,
ordinal-number spelling, abbreviation expansion, camel-case splitting of
hashtags and concatenations, emoji-to-name replacement, then lowercasing
and whitespace tokenization. The contraction, abbreviation and emoji rules
are data files, not code: swapping the tables changes behavior with no
rebuild. Note that because apostrophes are removed before contraction
expansion, the bundled contraction table is keyed on apostrophe-free forms
("youre"), and "'s"-contractions are reduced to the bare word by the
genitive rule.

Statistics (word/char counts, all-caps words, special characters) are
computed on the raw text, since cleaning removes exactly the markers they
count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class CorpusFormatError(ValueError):
    """Malformed corpus TSV content."""


@dataclass(frozen=True)
class RawTweet:
    id: str
    text: str
    label: int
    language: str


@dataclass(frozen=True)
class CleanTweet:
    id: str
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class RuleSet:
    contractions: dict[str, str]
    abbreviations: dict[str, str]
    emoji: dict[str, str]


_MENTION_RE = re.compile(r"@\w*")
_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)")
_GENITIVE_RE = re.compile(r"['’]s\b", re.IGNORECASE)
_APOSTROPHES = str.maketrans("", "", "'’‘")
_DASH_RE = re.compile(r"[–—]+|--+")
_ORDINAL_RE = re.compile(r"\b(\d+)(?:st|nd|rd|th)\b", re.IGNORECASE)
_TOKEN_EDGE_RE = re.compile(r"^([^\w#]*)#*(.*?)([^\w]*)$", re.UNICODE)
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")

_UNITS = ["", "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
          "eighth", "ninth"]
_UNITS_CARDINAL = ["", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"]
_TEENS = ["tenth", "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth",
          "sixteenth", "seventeenth", "eighteenth", "nineteenth"]
_TEENS_CARDINAL = ["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
                   "sixteen", "seventeen", "eighteen", "nineteen"]
_TENS = ["", "", "twentieth", "thirtieth", "fortieth", "fiftieth", "sixtieth",
         "seventieth", "eightieth", "ninetieth"]
_TENS_CARDINAL = ["", "", "twenty", "thirty", "forty", "fifty", "sixty",
                  "seventy", "eighty", "ninety"]


def ordinal_words(n: int) -> str | None:
    """Spell an ordinal (1 -> "first", 21 -> "twenty first"); None if out of range."""
    if n < 1 or n > 9999:
        return None
    if n >= 1000:
        head, rest = divmod(n, 1000)
        prefix = f"{_UNITS_CARDINAL[head]} thousand"
        return f"{prefix}th" if rest == 0 else f"{prefix} {ordinal_words(rest)}"
    if n >= 100:
        head, rest = divmod(n, 100)
        prefix = f"{_UNITS_CARDINAL[head]} hundred"
        return f"{prefix}th" if rest == 0 else f"{prefix} {ordinal_words(rest)}"
    if n >= 20:
        tens, unit = divmod(n, 10)
        return _TENS[tens] if unit == 0 else f"{_TENS_CARDINAL[tens]} {_UNITS[unit]}"
    if n >= 10:
        return _TEENS[n - 10]
    return _UNITS[n]


def _load_table(path: Path) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise CorpusFormatError(f"{path.name} line {line_no}: expected key<TAB>value")
            key, value = line.split("\t", 1)
            table[key] = value
    return table


def load_rules(rules_dir) -> RuleSet:
    """Read contractions.tsv, abbreviations.tsv and emoji.tsv from a directory."""
    rules_dir = Path(rules_dir)
    return RuleSet(
        contractions=_load_table(rules_dir / "contractions.tsv"),
        abbreviations=_load_table(rules_dir / "abbreviations.tsv"),
        emoji=_load_table(rules_dir / "emoji.tsv"),
    )


def default_rules() -> RuleSet:
    with resources.as_file(resources.files("frozenclf") / "rules") as rules_dir:
        return load_rules(rules_dir)


def _expand_tokenwise(text: str, table: dict[str, str], fold_case: bool) -> str:
    if fold_case:
        folded = {k.lower(): v for k, v in table.items()}
    out = []
    for token in text.split():
        m = _TOKEN_EDGE_RE.match(token)
        prefix, core, suffix = m.group(1), m.group(2), m.group(3)
        hit = folded.get(core.lower()) if fold_case else table.get(core)
        out.append(prefix + hit + suffix if hit is not None else token)
    return " ".join(out)


def _split_camel_token(token: str) -> str:
    core = token.lstrip("#")
    if not core:
        return token
    has_interior_upper = any(c.isupper() for c in core[1:])
    has_lower = any(c.islower() for c in core)
    if has_interior_upper and has_lower:
        return _CAMEL_RE.sub(" ", core)
    return core


def _replace_emoji(text: str, table: dict[str, str]) -> str:
    # longest keys first so multi-codepoint emoji (flags) win over prefixes
    for key in sorted(table, key=len, reverse=True):
        if key in text:
            text = text.replace(key, f" {table[key]} ")
    return text


def clean_text(text: str, rules: RuleSet) -> tuple[str, tuple[str, ...]]:
    """Run the full cleaning pipeline over one text; total, never raises."""
    s = _MENTION_RE.sub(" ", text)
    s = _URL_RE.sub(" ", s)
    s = _GENITIVE_RE.sub("", s)
    s = s.translate(_APOSTROPHES)
    s = _expand_tokenwise(s, rules.contractions, fold_case=True)
    s = _DASH_RE.sub("-", s)
    s = _ORDINAL_RE.sub(lambda m: ordinal_words(int(m.group(1))) or m.group(0), s)
    s = _expand_tokenwise(s, rules.abbreviations, fold_case=False)
    s = " ".join(_split_camel_token(tok) for tok in s.split())
    s = _replace_emoji(s, rules.emoji)
    tokens = tuple(s.lower().split())
    return " ".join(tokens), tokens


def clean(raw: RawTweet, rules: RuleSet) -> CleanTweet:
    text, tokens = clean_text(raw.text, rules)
    return CleanTweet(id=raw.id, text=text, tokens=tokens)


# ---------------------------------------------------------------------------
# descriptive statistics


SPECIAL_CHARS = ("!", "?", "#", ".", "@")


@dataclass(frozen=True)
class GroupStats:
    count: int
    word_mean: float
    word_sd: float
    char_mean: float
    char_sd: float
    allcaps_mean: float
    special_char_means: dict[str, float]


@dataclass(frozen=True)
class CorpusStats:
    groups: dict[tuple[str, int], GroupStats]


def _is_allcaps(token: str) -> bool:
    uppers = sum(1 for c in token if c.isupper())
    return uppers >= 2 and not any(c.islower() for c in token)


def corpus_stats(splits: dict[str, list[RawTweet]]) -> CorpusStats:
    """Per split x label: word/char count mean and population sd, all-caps
    word mean, and mean per-tweet counts of the special characters."""
    if not splits or not any(splits.values()):
        raise ValueError("corpus_stats needs a nonempty corpus")
    groups: dict[tuple[str, int], GroupStats] = {}
    for split_name, tweets in splits.items():
        by_label: dict[int, list[RawTweet]] = {}
        for tw in tweets:
            by_label.setdefault(tw.label, []).append(tw)
        for label, group in sorted(by_label.items()):
            words = np.array([len(tw.text.split()) for tw in group], dtype=np.float64)
            chars = np.array([len(tw.text) for tw in group], dtype=np.float64)
            caps = np.array([sum(_is_allcaps(tok) for tok in tw.text.split()) for tw in group],
                            dtype=np.float64)
            specials = {
                ch: float(np.mean([tw.text.count(ch) for tw in group])) for ch in SPECIAL_CHARS
            }
            groups[(split_name, label)] = GroupStats(
                count=len(group),
                word_mean=float(words.mean()),
                word_sd=float(words.std()),
                char_mean=float(chars.mean()),
                char_sd=float(chars.std()),
                allcaps_mean=float(caps.mean()),
                special_char_means=specials,
            )
    return CorpusStats(groups=groups)


def detect_outliers(tweets: list[RawTweet], max_words: int) -> list[str]:
    """Ids of tweets whose raw word count exceeds the threshold."""
    if max_words <= 0:
        raise ValueError("max_words must be positive")
    return [tw.id for tw in tweets if len(tw.text.split()) > max_words]


# ---------------------------------------------------------------------------
# corpus TSV I/O: id<TAB>text<TAB>HS<TAB>lang


def read_corpus_tsv(path) -> list[RawTweet]:
    tweets: list[RawTweet] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if line_no == 1 and cols[0].strip().lower() == "id":
                continue
            if len(cols) != 4:
                raise CorpusFormatError(f"line {line_no}: expected 4 tab-separated columns, got {len(cols)}")
            tweet_id, text, label_str, lang = cols
            if not text:
                raise CorpusFormatError(f"line {line_no}: empty text")
            if label_str not in ("0", "1"):
                raise CorpusFormatError(f"line {line_no}: label must be 0 or 1, got {label_str!r}")
            if tweet_id in seen:
                raise CorpusFormatError(f"line {line_no}: duplicate id {tweet_id!r}")
            seen.add(tweet_id)
            tweets.append(RawTweet(id=tweet_id, text=text, label=int(label_str), language=lang.strip().lower()))
    return tweets


def write_corpus_tsv(path, tweets: list[RawTweet]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id\ttext\tHS\tlang\n")
        for tw in tweets:
            if "\t" in tw.text or "\n" in tw.text:
                raise CorpusFormatError(f"id {tw.id!r}: text contains tab/newline")
            fh.write(f"{tw.id}\t{tw.text}\t{tw.label}\t{tw.language}\n")
