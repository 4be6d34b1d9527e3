"""Sentence segmentation, tokenization and normalization.

The functions here are pure: they map (text, tables) to token lists and
never mutate their inputs, so document pipelines can run in parallel over
shared tables. Normalization is deliberately light. Inflected words are
reduced with a rule-based suffix stripper driven by an external table
(a Croatian table ships with the package, plus a tiny English one for
tests), which keeps the pipeline language-pluggable. Part-of-speech
tagging and anaphora resolution exist only as identity pass-through
stages so richer linguistics can be plugged in later without reshaping
the pipeline.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

DATA_DIR = Path(__file__).parent / "data"

_TERMINATORS = ".!?"

# Digit citations like "123/03" or "3.14" stay whole; words keep interior
# hyphens ("e-učenje"). Order matters: the citation branch must win over
# the bare \w+ prefix of a number.
_TOKEN_RE = re.compile(r"\d+(?:[./]\d+)+|\w+(?:-\w+)*", re.UNICODE)

_ACRONYM_DEF_RE = re.compile(r"\(([^\W\d_]{2,10})\)", re.UNICODE)


@dataclass(frozen=True)
class Token:
    """One surface token tied to its sentence and in-sentence position.

    ``weight`` is 1.0 for body text and the configured metadata multiplier
    for tokens that came from a document's semantic fields. ``base`` is
    empty until normalization fills it.
    """

    surface: str
    sentence_index: int
    position_in_sentence: int
    base: str = ""
    weight: float = 1.0
    from_metadata: bool = False
    is_acronym: bool = False
    expanded_from: str | None = None


@dataclass(frozen=True)
class SentenceIndex:
    """Token-index ranges of consecutive sentences in one document."""

    ranges: tuple[tuple[int, int], ...]
    source_doc: str = ""

    def __post_init__(self):
        prev_end = 0
        for start, end in self.ranges:
            if start != prev_end or end < start:
                raise ValueError("sentence ranges must be contiguous and ordered")
            prev_end = end

    @classmethod
    def from_tokens(cls, tokens: Sequence[Token], source_doc: str = "") -> "SentenceIndex":
        ranges = []
        start = 0
        for i in range(1, len(tokens) + 1):
            if i == len(tokens) or tokens[i].sentence_index != tokens[start].sentence_index:
                ranges.append((start, i))
                start = i
        return cls(tuple(ranges), source_doc)


class StemRuleTable:
    """Ordered suffix-stripping rules: (suffix, minimum stem length)."""

    def __init__(self, rules: Iterable[tuple[str, int]]):
        rules = list(rules)
        seen = set()
        for suffix, min_stem in rules:
            if not suffix or suffix in seen:
                raise ValueError(f"duplicate or empty suffix {suffix!r}")
            if min_stem < 2:
                raise ValueError(f"min_stem_length for {suffix!r} must be >= 2")
            seen.add(suffix)
        # longest suffix first; lexicographic only to fix the order of
        # equal-length suffixes (at most one of them can match a word end)
        self.rules: tuple[tuple[str, int], ...] = tuple(
            sorted(rules, key=lambda r: (-len(r[0]), r[0]))
        )

    @classmethod
    def load(cls, path: str | Path) -> "StemRuleTable":
        rules = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            suffix, _, min_stem = line.partition("\t")
            rules.append((suffix.strip(), int(min_stem)))
        return cls(rules)

    @classmethod
    def croatian(cls) -> "StemRuleTable":
        return cls.load(DATA_DIR / "stem_rules_hr.tsv")

    @classmethod
    def english_test(cls) -> "StemRuleTable":
        return cls.load(DATA_DIR / "stem_rules_en.tsv")


def _strip_one_suffix(word: str, table: StemRuleTable) -> str:
    for suffix, min_stem in table.rules:
        if word.endswith(suffix) and len(word) - len(suffix) >= min_stem:
            return word[: -len(suffix)]
    return word


def stem(word: str, table: StemRuleTable) -> str:
    """Reduce an inflected word to a base form by suffix stripping.

    Stripping repeats until no rule applies, which makes the function
    idempotent for any rule table: a single pass can leave a residue that
    still ends in a strippable suffix (e.g. a stacked ending), and the
    fixpoint guarantees stem(stem(w)) == stem(w).
    """
    while True:
        stripped = _strip_one_suffix(word, table)
        if stripped == word:
            return word
        word = stripped


class AbbreviationTable:
    """Maps an abbreviation token to candidate expansions with probabilities.

    Probabilities per abbreviation must lie in (0, 1] and sum to 1.
    """

    def __init__(self, entries: dict[str, Sequence[tuple[str, float]]]):
        self.entries: dict[str, tuple[tuple[str, float], ...]] = {}
        for abbrev, expansions in entries.items():
            expansions = tuple(expansions)
            if not expansions:
                raise ValueError(f"{abbrev!r}: empty expansion list")
            total = 0.0
            for phrase, prob in expansions:
                if not 0.0 < prob <= 1.0:
                    raise ValueError(f"{abbrev!r}: probability {prob} outside (0, 1]")
                total += prob
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{abbrev!r}: probabilities sum to {total}, expected 1")
            self.entries[abbrev] = expansions

    @classmethod
    def empty(cls) -> "AbbreviationTable":
        return cls({})

    @classmethod
    def from_counts(cls, counts: dict[str, Counter]) -> "AbbreviationTable":
        """Turn per-abbreviation expansion counts into probability shares."""
        entries = {}
        for abbrev, ctr in counts.items():
            total = sum(ctr.values())
            entries[abbrev] = [
                (phrase, n / total) for phrase, n in sorted(ctr.items())
            ]
        return cls(entries)

    def best_expansion(self, abbrev: str) -> str | None:
        expansions = self.entries.get(abbrev)
        if not expansions:
            return None
        # highest probability wins; lexicographic order breaks ties
        return min(expansions, key=lambda e: (-e[1], e[0]))[0]

    def __contains__(self, abbrev: str) -> bool:
        return abbrev in self.entries

    @classmethod
    def load(cls, path: str | Path) -> "AbbreviationTable":
        entries: dict[str, list[tuple[str, float]]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            abbrev, phrase, prob = line.split("\t")
            entries.setdefault(abbrev, []).append((phrase, float(prob)))
        return cls(entries)

    def save(self, path: str | Path) -> None:
        lines = []
        for abbrev in sorted(self.entries):
            for phrase, prob in self.entries[abbrev]:
                lines.append(f"{abbrev}\t{phrase}\t{prob!r}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class Lexicon:
    """Concept terms paired with their synonym sets.

    The synonym relation is closed symmetrically on construction and a
    term never lists itself as its own synonym. Population is operator
    supplied; an empty lexicon is valid and common.
    """

    def __init__(self, entries: dict[str, Iterable[str]] | None = None):
        closed: dict[str, set[str]] = {}
        for term, synonyms in (entries or {}).items():
            closed.setdefault(term, set()).update(s for s in synonyms if s != term)
        for term, synonyms in list(closed.items()):
            for syn in synonyms:
                closed.setdefault(syn, set()).add(term)
        self.entries: dict[str, frozenset[str]] = {
            term: frozenset(syns) for term, syns in closed.items()
        }

    def synonyms(self, term: str) -> frozenset[str]:
        return self.entries.get(term, frozenset())

    def are_synonyms(self, a: str, b: str) -> bool:
        return b in self.entries.get(a, frozenset())

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        entries: dict[str, list[str]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].rstrip()
            if not line.strip():
                continue
            term, _, syns = line.partition("\t")
            entries[term.strip()] = [s.strip() for s in syns.split(";") if s.strip()]
        return cls(entries)

    def save(self, path: str | Path) -> None:
        lines = [
            f"{term}\t{';'.join(sorted(self.entries[term]))}"
            for term in sorted(self.entries)
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One lowercase word per line, '#' starts a comment."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line)
    return frozenset(words)


def _is_abbrev_before(text: str, dot_pos: int, abbreviations: AbbreviationTable | None) -> bool:
    """True when the word ending at text[dot_pos] == '.' must not end a sentence."""
    i = dot_pos
    while i > 0 and (text[i - 1].isalnum() or text[i - 1] == "-"):
        i -= 1
    word = text[i:dot_pos]
    if not word:
        return False
    if len(word) == 1 and word.isalpha():
        return True  # single-letter initial, "A. Dent"
    if abbreviations is not None:
        if word + "." in abbreviations or word in abbreviations:
            return True
        lowered = word.lower()
        if lowered + "." in abbreviations or lowered in abbreviations:
            return True
    return False


def split_sentences(body: str, abbreviations: AbbreviationTable | None = None) -> list[tuple[int, int]]:
    """Split cleaned text into sentence spans covering every character.

    A sentence ends at '.', '!' or '?' followed by whitespace and an
    uppercase letter, or at end of text. Periods after known abbreviations
    and single-letter initials do not terminate. Inter-sentence whitespace
    belongs to the sentence it follows.
    """
    if not body:
        return []
    spans = []
    start = 0
    i = 0
    n = len(body)
    while i < n:
        ch = body[i]
        if ch in _TERMINATORS:
            if ch == "." and _is_abbrev_before(body, i, abbreviations):
                i += 1
                continue
            j = i + 1
            while j < n and body[j].isspace():
                j += 1
            if j == n:
                break  # terminator at end of text; final span below
            if j > i + 1 and body[j].isupper():
                spans.append((start, j))
                start = j
                i = j
                continue
        i += 1
    spans.append((start, n))
    return spans


def tokenize(sentence: str, sentence_index: int = 0,
             abbreviations: AbbreviationTable | None = None,
             from_metadata: bool = False, weight: float = 1.0) -> list[Token]:
    """Break one sentence into tokens.

    Splits on whitespace and punctuation except that hyphenated words and
    digit groups (including digit/digit citations) stay whole, and
    abbreviation-table matches stay whole with their trailing period.
    """
    tokens: list[Token] = []
    abbrev_keys = ()
    if abbreviations is not None:
        abbrev_keys = sorted(abbreviations.entries, key=len, reverse=True)
    pos = 0
    i = 0
    n = len(sentence)
    while i < n:
        matched = None
        for key in abbrev_keys:
            if sentence.startswith(key, i):
                end = i + len(key)
                if end == n or not (sentence[end].isalnum() or sentence[end] == "-"):
                    matched = key
                    break
        if matched is not None:
            tokens.append(Token(matched, sentence_index, pos,
                                weight=weight, from_metadata=from_metadata))
            pos += 1
            i += len(matched)
            continue
        m = _TOKEN_RE.match(sentence, i)
        if m is not None:
            tokens.append(Token(m.group(), sentence_index, pos,
                                weight=weight, from_metadata=from_metadata))
            pos += 1
            i = m.end()
        else:
            i += 1
    return tokens


def normalize_case(tokens: Sequence[Token]) -> list[Token]:
    """Lowercase sentence-initial capitalized words, keep the rest.

    Mid-sentence capitalized words are preserved (likely proper nouns) and
    all-caps tokens of length >= 2 are kept verbatim and flagged as
    acronym candidates. Token count and positions never change.
    """
    out = []
    for tok in tokens:
        surface = tok.surface
        if len(surface) >= 2 and surface.isupper():
            out.append(replace(tok, is_acronym=True))
        elif tok.position_in_sentence == 0 and surface[:1].isupper():
            out.append(replace(tok, surface=surface.lower()))
        else:
            out.append(tok)
    return out


def remove_stopwords(tokens: Sequence[Token], stoplist: frozenset[str] | set[str]) -> list[Token]:
    """Drop stop words; surviving tokens keep their original positions."""
    return [t for t in tokens if t.surface.lower() not in stoplist]


def resolve_abbreviations(tokens: Sequence[Token], table: AbbreviationTable) -> list[Token]:
    """Replace known abbreviations with their most probable expansion.

    Every expansion token inherits the abbreviation's sentence position so
    downstream distance measures stay comparable; unknown abbreviations
    pass through unchanged.
    """
    out = []
    for tok in tokens:
        expansion = table.best_expansion(tok.surface)
        if expansion is None:
            out.append(tok)
            continue
        for word in expansion.split():
            out.append(replace(tok, surface=word, is_acronym=False,
                               expanded_from=tok.surface))
    return out


def stem_tokens(tokens: Sequence[Token], table: StemRuleTable) -> list[Token]:
    """Fill each token's base form: lowercase + suffix stripping.

    Acronym candidates bypass stemming and keep their surface as base.
    """
    return [
        replace(t, base=t.surface if t.is_acronym else stem(t.surface.lower(), table))
        for t in tokens
    ]


# Hooks for the second-iteration linguistics. Both are identity stages for
# now; the pipeline applies whatever stages the caller configures.
TokenStage = Callable[[list[Token]], list[Token]]


def pos_tag_stage(tokens: list[Token]) -> list[Token]:
    return tokens


def anaphora_resolution_stage(tokens: list[Token]) -> list[Token]:
    return tokens


def detect_abbreviation_definitions(text: str) -> list[tuple[str, str]]:
    """Find "Phrase (ACRONYM)" definition patterns in running text.

    The acronym is a parenthesized all-caps token; the phrase is the
    shortest preceding word sequence whose word initials spell the acronym
    (case-insensitive), where short function words (<= 3 chars) may sit
    between matched words. The phrase must start with a capitalized word.
    """
    found = []
    for m in _ACRONYM_DEF_RE.finditer(text):
        acronym = m.group(1)
        if not acronym.isupper():
            continue
        preceding = text[: m.start()]
        # a sentence boundary would break the phrase; keep only words after
        # the last terminator
        tail = re.split(r"[.!?;:]", preceding)[-1]
        words = _TOKEN_RE.findall(tail)
        phrase = _match_initials(words, acronym)
        if phrase:
            found.append((acronym, phrase))
    return found


def _match_initials(words: list[str], acronym: str) -> str | None:
    letters = list(acronym)
    i = len(words) - 1
    j = len(letters) - 1
    leftmost = None
    while j >= 0:
        if i < 0:
            return None
        word = words[i]
        if word[:1].lower() == letters[j].lower():
            leftmost = i
            i -= 1
            j -= 1
        elif len(word) <= 3 and j < len(letters) - 1:
            i -= 1  # interior function word ("i", "za"), skippable
        else:
            return None
    if leftmost is None or not words[leftmost][:1].isupper():
        return None
    return " ".join(words[leftmost:])
