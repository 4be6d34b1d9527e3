"""Source acquisition: charset detection, HTML cleanup, corpus storage.

Input files come from legacy web sources and arrive in one of three
encodings: UTF-8, Windows-1250 or ISO-8859-2. Detection trusts an HTML
meta declaration when it actually decodes the bytes, falls back to strict
UTF-8 validation, and otherwise scores the two single-byte candidates on
a fixed byte-class table (see ``detect_encoding``).

The corpus store is a flat directory: ``<id>.txt`` holds the cleaned
UTF-8 body, ``<id>.meta`` one ``field<TAB>value`` line per metadata entry,
and ``manifest.tsv`` one row per ingested document. Writes are serialized
behind a lock so ingestion can fan out across documents.
"""

from __future__ import annotations

import hashlib
import html
import re
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import EmptyCorpus, MalformedMarkup
from .lexical import detect_abbreviation_definitions, tokenize

UTF8 = "utf-8"
WINDOWS_1250 = "windows-1250"
ISO_8859_2 = "iso-8859-2"

_CODECS = {UTF8: "utf-8", WINDOWS_1250: "cp1250", ISO_8859_2: "iso8859-2"}

_CHARSET_ALIASES = {
    "utf-8": UTF8, "utf8": UTF8,
    "windows-1250": WINDOWS_1250, "cp1250": WINDOWS_1250, "cp-1250": WINDOWS_1250,
    "x-cp1250": WINDOWS_1250, "windows1250": WINDOWS_1250,
    "iso-8859-2": ISO_8859_2, "iso8859-2": ISO_8859_2, "iso_8859-2": ISO_8859_2,
    "iso/iec 8859-2": ISO_8859_2, "iso/iec8859-2": ISO_8859_2,
    "latin-2": ISO_8859_2, "latin2": ISO_8859_2, "iso-ir-101": ISO_8859_2,
}

# Croatian diacritic byte positions in each single-byte charset.
_WIN_DIACRITICS = frozenset((0xE8, 0xC8, 0xE6, 0xC6, 0xF0, 0xD0, 0x9A, 0x8A, 0x9E, 0x8E))
_ISO_DIACRITICS = frozenset((0xE8, 0xC8, 0xE6, 0xC6, 0xF0, 0xD0, 0xB9, 0xA9, 0xBE, 0xAE))
# 0x80-0x9F positions with no character assigned in Windows-1250.
_WIN_UNDEFINED = frozenset((0x81, 0x83, 0x88, 0x90, 0x98))

_META_CHARSET_RE = re.compile(
    rb"<meta[^>]*charset\s*=\s*[\"']?\s*([-A-Za-z0-9_/ ]+?)\s*[\"'/>]", re.IGNORECASE
)

METADATA_FIELDS = (
    "title", "heading", "abbreviation-def", "reference",
    "addressee", "author", "doc-type",
)


@dataclass(frozen=True)
class RawSource:
    """Undecoded input bytes plus their origin and any declared charset."""

    data: bytes
    origin: str = ""
    declared_charset: str | None = None

    def __post_init__(self):
        if not self.data:
            raise ValueError("a corpus source must have non-empty bytes")

    @classmethod
    def from_bytes(cls, data: bytes, origin: str = "") -> "RawSource":
        """Build a source, pulling the charset declaration out of HTML meta."""
        declared = None
        m = _META_CHARSET_RE.search(data)
        if m:
            declared = normalize_charset(m.group(1).decode("ascii", "ignore"))
        return cls(data, origin, declared)

    @classmethod
    def from_file(cls, path: str | Path) -> "RawSource":
        return cls.from_bytes(Path(path).read_bytes(), str(path))


@dataclass
class Document:
    """A cleaned document: plain-text body plus ordered semantic metadata."""

    id: str
    title: str = ""
    metadata: list[tuple[str, str]] = field(default_factory=list)
    body: str = ""
    suitable: bool = True

    def metadata_values(self, field_name: str) -> list[str]:
        return [v for name, v in self.metadata if name == field_name]


@dataclass(frozen=True)
class CorpusSplit:
    """Disjoint learning/test partition of all suitable document ids."""

    learning: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def side(self, doc_id: str) -> str:
        return "learning" if doc_id in self.learning else "test"


def normalize_charset(name: str | None) -> str | None:
    """Map a declared charset name to one of the recognized tokens."""
    if not name:
        return None
    return _CHARSET_ALIASES.get(name.strip().lower())


def _decodes(data: bytes, charset: str) -> bool:
    try:
        data.decode(_CODECS[charset])
        return True
    except (UnicodeDecodeError, KeyError):
        return False


def detect_encoding(source: RawSource) -> str:
    """Pick the charset of a raw source. Always returns one of the three tokens.

    Order of evidence:
      1. a declared charset that strictly decodes the bytes wins;
      2. bytes valid under strict UTF-8 mean UTF-8;
      3. otherwise score Windows-1250 against ISO-8859-2. Any 0x80-0x9F
         byte with an assigned Windows-1250 character is decisive for
         Windows-1250, because ISO-8859-2 keeps that whole range for C1
         control codes that never occur in legitimate text. Unassigned
         positions in that range add 2 to the Windows-1250 score; each
         byte decoding to a Croatian diacritic adds 1 to the charset it
         belongs to. Higher score wins, ties go to Windows-1250.
    """
    if source.declared_charset and _decodes(source.data, source.declared_charset):
        return source.declared_charset
    if _decodes(source.data, UTF8):
        return UTF8
    win = 0
    iso = 0
    for b in source.data:
        if 0x80 <= b <= 0x9F:
            if b not in _WIN_UNDEFINED:
                return WINDOWS_1250
            win += 2
            continue
        if b in _WIN_DIACRITICS:
            win += 1
        if b in _ISO_DIACRITICS:
            iso += 1
    return ISO_8859_2 if iso > win else WINDOWS_1250


_SCRIPT_RE = re.compile(r"<(script|style)\b[^>]*>.*?</\1\s*>", re.IGNORECASE | re.DOTALL)
_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_HEAD_RE = re.compile(r"<head\b[^>]*>.*?</head\s*>", re.IGNORECASE | re.DOTALL)
_TITLE_RE = re.compile(r"<title\b[^>]*>(.*?)</title\s*>", re.IGNORECASE | re.DOTALL)
_HEADING_RE = re.compile(r"<h([1-6])\b[^>]*>(.*?)</h\1\s*>", re.IGNORECASE | re.DOTALL)
_BLOCK_TAG_RE = re.compile(
    r"</?(?:p|div|br|hr|h[1-6]|li|ul|ol|tr|table|td|th|blockquote|pre|section|article|body|html|head|title)\b[^>]*/?>",
    re.IGNORECASE,
)
_ANY_TAG_RE = re.compile(r"<(?:[a-zA-Z][^<>]*|/[a-zA-Z][^<>]*|![^<>]*|\?[^<>]*)>")


def _strip_markup(text: str) -> str:
    text = _COMMENT_RE.sub(" ", text)
    text = _SCRIPT_RE.sub(" ", text)
    text = _BLOCK_TAG_RE.sub("\n", text)
    return _ANY_TAG_RE.sub("", text)


def _normalize_whitespace(text: str) -> str:
    lines = []
    for line in text.split("\n"):
        line = re.sub(r"[ \t\r\f\v]+", " ", line).strip()
        if line:
            lines.append(line)
    return "\n".join(lines)


def _clean_pass(text: str) -> str:
    return _normalize_whitespace(html.unescape(_strip_markup(text)))


def _inline_text(fragment: str) -> str:
    return re.sub(r"\s+", " ", html.unescape(_ANY_TAG_RE.sub("", fragment))).strip()


def clean_html(source: RawSource, charset: str) -> Document:
    """Decode and clean one source into a Document.

    Tags are stripped best-effort (unbalanced markup is tolerated), named
    and numeric character entities are decoded, whitespace runs collapse
    to single spaces and paragraph breaks survive as newlines. Title and
    heading tags plus detected "Phrase (ACRONYM)" definitions populate the
    metadata list. Cleaning runs to a fixpoint, so cleaning an already
    cleaned body changes nothing.

    Raises MalformedMarkup when the bytes do not decode under ``charset``.
    """
    try:
        text = source.data.decode(_CODECS[charset])
    except KeyError:
        raise MalformedMarkup(f"unrecognized charset token {charset!r}")
    except UnicodeDecodeError as exc:
        raise MalformedMarkup(f"{source.origin or '<bytes>'}: cannot decode as {charset}: {exc}")

    metadata: list[tuple[str, str]] = []
    title = ""
    m = _TITLE_RE.search(text)
    if m:
        title = _inline_text(m.group(1))
        if title:
            metadata.append(("title", title))
    for _, fragment in _HEADING_RE.findall(text):
        heading = _inline_text(fragment)
        if heading:
            metadata.append(("heading", heading))

    # drop non-content regions before stripping; <title> content would
    # otherwise leak into the body when no <head> wraps it
    text = _HEAD_RE.sub(" ", text)
    text = _TITLE_RE.sub(" ", text)

    body = _clean_pass(text)
    for _ in range(10):
        again = _clean_pass(body)
        if again == body:
            break
        body = again

    if not title:
        headings = [v for k, v in metadata if k == "heading"]
        title = headings[0] if headings else ""
    for acronym, phrase in detect_abbreviation_definitions(body):
        metadata.append(("abbreviation-def", f"{acronym} = {phrase}"))

    return Document(id=_id_from_origin(source.origin, source.data),
                    title=title, metadata=metadata, body=body)


def _id_from_origin(origin: str, data: bytes) -> str:
    stem = Path(origin).stem if origin else ""
    stem = re.sub(r"[^\w.-]+", "-", stem).strip("-")
    if stem:
        return stem
    return "doc-" + hashlib.sha256(data).hexdigest()[:12]


def count_tokens(body: str) -> int:
    return sum(len(tokenize(span_text)) for span_text in body.split("\n"))


def assess_suitability(doc: Document, min_tokens: int = 150,
                       doc_type_exclude: tuple[str, ...] = ()) -> bool:
    """Decide whether a document is worth mining; records the decision.

    Too-short documents and excluded genres (by doc-type metadata,
    case-insensitive substring match) are rejected. The token threshold is
    inclusive: exactly ``min_tokens`` tokens is suitable.
    """
    suitable = count_tokens(doc.body) >= min_tokens
    if suitable:
        for doc_type in doc.metadata_values("doc-type"):
            lowered = doc_type.lower()
            if any(excl.lower() in lowered for excl in doc_type_exclude):
                suitable = False
                break
    doc.suitable = suitable
    return suitable


def _shuffle_key(seed: int, doc_id: str) -> str:
    return hashlib.sha256(f"{seed}\x00{doc_id}".encode("utf-8")).hexdigest()


def split_corpus(docs: list[Document], ratio: float = 0.75, seed: int = 1) -> CorpusSplit:
    """Partition suitable documents into learning and test sets.

    The shuffle is a fixed algorithm independent of any RNG library:
    ids are sorted, then ordered by SHA-256 of ``"<seed>\\x00<id>"``. The
    first round(ratio * n) ids (round half up) form the learning set, so
    the same (corpus, seed, ratio) always yields the identical split.

    Raises EmptyCorpus when there is nothing to split.
    """
    if not docs:
        raise EmptyCorpus("cannot split an empty corpus")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be strictly between 0 and 1")
    unsuitable = [d.id for d in docs if not d.suitable]
    if unsuitable:
        raise ValueError(f"unsuitable documents passed to split_corpus: {unsuitable}")
    ids = sorted(d.id for d in docs)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate document ids")
    permuted = sorted(ids, key=lambda i: _shuffle_key(seed, i))
    n_learning = int(ratio * len(ids) + 0.5)
    learning = set(permuted[:n_learning])
    return CorpusSplit(
        learning=tuple(i for i in ids if i in learning),
        test=tuple(i for i in ids if i not in learning),
        seed=seed,
    )


@dataclass(frozen=True)
class ManifestRow:
    id: str
    origin: str
    charset: str
    suitable: bool
    token_count: int


class CorpusStore:
    """Directory-backed document store with a TSV manifest."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._rows: dict[str, ManifestRow] = {}
        self._lock = threading.Lock()

    def add(self, doc: Document, origin: str, charset: str) -> None:
        token_count = count_tokens(doc.body)
        with self._lock:
            if doc.id in self._rows:
                raise ValueError(f"duplicate document id {doc.id!r}")
            (self.root / f"{doc.id}.txt").write_text(doc.body, encoding="utf-8")
            meta_lines = [f"{name}\t{value}" for name, value in doc.metadata]
            (self.root / f"{doc.id}.meta").write_text(
                "\n".join(meta_lines) + ("\n" if meta_lines else ""), encoding="utf-8")
            self._rows[doc.id] = ManifestRow(doc.id, origin, charset, doc.suitable, token_count)

    def write_manifest(self) -> None:
        lines = ["# id\torigin\tcharset\tsuitable\ttokens"]
        for doc_id in sorted(self._rows):
            r = self._rows[doc_id]
            lines.append(f"{r.id}\t{r.origin}\t{r.charset}\t{str(r.suitable).lower()}\t{r.token_count}")
        (self.root / "manifest.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def open(cls, root: str | Path) -> "CorpusStore":
        store = cls(root)
        manifest = store.root / "manifest.tsv"
        if manifest.exists():
            for line in manifest.read_text(encoding="utf-8").splitlines():
                if not line.strip() or line.startswith("#"):
                    continue
                doc_id, origin, charset, suitable, tokens = line.split("\t")
                store._rows[doc_id] = ManifestRow(
                    doc_id, origin, charset, suitable == "true", int(tokens))
        return store

    def ids(self, suitable_only: bool = True) -> list[str]:
        return sorted(i for i, r in self._rows.items() if r.suitable or not suitable_only)

    def load(self, doc_id: str) -> Document:
        body = (self.root / f"{doc_id}.txt").read_text(encoding="utf-8")
        metadata = []
        meta_path = self.root / f"{doc_id}.meta"
        if meta_path.exists():
            for line in meta_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    name, _, value = line.partition("\t")
                    metadata.append((name, value))
        row = self._rows.get(doc_id)
        titles = [v for k, v in metadata if k == "title"]
        return Document(id=doc_id, title=titles[0] if titles else "",
                        metadata=metadata, body=body,
                        suitable=row.suitable if row else True)


def write_split(path: str | Path, split: CorpusSplit, ratio: float) -> None:
    lines = [f"# seed={split.seed} ratio={ratio!r}"]
    for doc_id in sorted(split.learning + split.test):
        lines.append(f"{doc_id}\t{split.side(doc_id)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_split(path: str | Path) -> CorpusSplit:
    learning: list[str] = []
    test: list[str] = []
    seed = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            m = re.search(r"seed=(\d+)", line)
            if m:
                seed = int(m.group(1))
            continue
        if not line.strip():
            continue
        doc_id, _, side = line.partition("\t")
        (learning if side == "learning" else test).append(doc_id)
    return CorpusSplit(tuple(sorted(learning)), tuple(sorted(test)), seed)
