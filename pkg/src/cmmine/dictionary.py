"""Key-term dictionary built from the learning corpus.

Candidate terms are stemmed unigrams (stop words removed) plus multiword
phrases found by frequency and pointwise mutual information. Terms are
ranked by their best per-document TF-IDF and the top K survive. One
TF-IDF variant is used package-wide:

    tfidf(t, d) = tf(t, d) * ln(N / df(t))

with raw counts, natural log and no smoothing; df >= 1 holds by
construction. Related terms are grouped in a low-rank latent space and
share a group id.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpus
from .lexical import AbbreviationTable, Token

PHRASE_JOIN = " "


@dataclass
class DictEntry:
    base: str
    display: str
    df: int
    cf: int
    tfidf_max: float
    group_id: str = ""
    surfaces: Counter = field(default_factory=Counter, repr=False, compare=False)


@dataclass
class Dictionary:
    entries: dict[str, DictEntry]
    acronyms: AbbreviationTable
    corpus_size: int

    def lookup(self, base: str) -> DictEntry | None:
        """Exact match on the base-form key; keys are case-normalized at build."""
        return self.entries.get(base)

    def idf(self, base: str) -> float:
        """ln(N / df); bases unseen in the corpus act as df = 1."""
        entry = self.entries.get(base)
        df = entry.df if entry else 1
        return math.log(self.corpus_size / df)

    def phrase_keys(self) -> list[tuple[str, ...]]:
        return [tuple(b.split(PHRASE_JOIN)) for b in self.entries if PHRASE_JOIN in b]


def _is_stopword(token: Token, stoplist: frozenset[str]) -> bool:
    return token.surface.lower() in stoplist


def iter_sentence_runs(tokens: list[Token]) -> list[list[Token]]:
    runs: list[list[Token]] = []
    for tok in tokens:
        if runs and runs[-1][0].sentence_index == tok.sentence_index:
            runs[-1].append(tok)
        else:
            runs.append([tok])
    return runs


def detect_phrases(docs_tokens: dict[str, list[Token]], stoplist: frozenset[str],
                   min_support: int = 5, pmi_threshold: float = 3.0,
                   max_len: int = 4) -> set[tuple[str, ...]]:
    """Find multiword phrases in normalized (stop words still present) streams.

    A contiguous n-gram (2 <= n <= max_len, within one sentence) is a
    phrase when its corpus frequency reaches ``min_support`` and its
    pointwise mutual information

        pmi(g) = log2( c(g) * W^(n-1) / (c(w1) * ... * c(wn)) )

    exceeds ``pmi_threshold`` bits, where W is the corpus token count.
    Phrases may contain interior stop words but may not begin or end with
    one. Keys are base-form tuples.
    """
    unigram = Counter()
    ngram: Counter = Counter()
    boundary_ok: dict[tuple[str, ...], bool] = {}
    for tokens in docs_tokens.values():
        unigram.update(t.base for t in tokens)
        for run in iter_sentence_runs(tokens):
            for n in range(2, max_len + 1):
                for i in range(len(run) - n + 1):
                    window = run[i:i + n]
                    key = tuple(t.base for t in window)
                    ngram[key] += 1
                    if key not in boundary_ok:
                        boundary_ok[key] = not (_is_stopword(window[0], stoplist)
                                                or _is_stopword(window[-1], stoplist))
    total = sum(unigram.values())
    phrases = set()
    for key, count in ngram.items():
        if count < min_support or not boundary_ok[key]:
            continue
        denom = 1.0
        for base in key:
            denom *= unigram[base]
        pmi = math.log2(count * total ** (len(key) - 1) / denom)
        if pmi > pmi_threshold:
            phrases.add(key)
    return phrases


def phrase_occurrences(tokens: list[Token], phrases: set[tuple[str, ...]],
                       max_len: int = 4) -> list[tuple[tuple[str, ...], list[Token]]]:
    """All in-sentence occurrences of the given phrase keys, in stream order.

    Occurrences are counted independently per phrase; overlapping phrases
    do not suppress each other.
    """
    found = []
    for run in iter_sentence_runs(tokens):
        for n in range(2, max_len + 1):
            for i in range(len(run) - n + 1):
                key = tuple(t.base for t in run[i:i + n])
                if key in phrases:
                    found.append((key, run[i:i + n]))
    return found


@dataclass
class TermCounts:
    """Per-document term frequencies feeding the dictionary and LSA grouping."""

    per_doc: dict[str, Counter]
    surfaces: dict[str, Counter]

    def document_frequency(self, base: str) -> int:
        return sum(1 for ctr in self.per_doc.values() if ctr[base] > 0)


def count_terms(docs_tokens: dict[str, list[Token]], stoplist: frozenset[str],
                phrases: set[tuple[str, ...]], max_phrase_len: int = 4) -> TermCounts:
    per_doc: dict[str, Counter] = {}
    surfaces: dict[str, Counter] = {}
    for doc_id, tokens in docs_tokens.items():
        ctr = Counter()
        for tok in tokens:
            if _is_stopword(tok, stoplist):
                continue
            ctr[tok.base] += 1
            surfaces.setdefault(tok.base, Counter())[tok.surface] += 1
        for key, window in phrase_occurrences(tokens, phrases, max_phrase_len):
            base = PHRASE_JOIN.join(key)
            ctr[base] += 1
            surfaces.setdefault(base, Counter())[" ".join(t.surface for t in window)] += 1
        per_doc[doc_id] = ctr
    return TermCounts(per_doc, surfaces)


def _display_form(surface_counts: Counter) -> str:
    # most frequent surface; lexicographically smallest on ties
    return min(surface_counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def ranking_key(entry: DictEntry) -> tuple:
    return (-entry.tfidf_max, -entry.cf, entry.base)


def build_dictionary(counts: TermCounts, acronyms: AbbreviationTable,
                     top_k: int = 500) -> Dictionary:
    """Rank candidate terms by max per-document TF-IDF and keep the top K.

    Ties break on higher corpus frequency, then lexicographic base form.
    """
    if not counts.per_doc:
        raise EmptyCorpus("no learning documents to build a dictionary from")
    n_docs = len(counts.per_doc)
    df: Counter = Counter()
    cf: Counter = Counter()
    for ctr in counts.per_doc.values():
        cf.update(ctr)
        df.update(base for base, c in ctr.items() if c > 0)
    entries = []
    for base in cf:
        idf = math.log(n_docs / df[base])
        tfidf_max = max(ctr[base] for ctr in counts.per_doc.values()) * idf
        entries.append(DictEntry(
            base=base,
            display=_display_form(counts.surfaces[base]),
            df=df[base],
            cf=cf[base],
            tfidf_max=tfidf_max,
            surfaces=counts.surfaces[base],
        ))
    entries.sort(key=ranking_key)
    kept = entries[:top_k]
    return Dictionary({e.base: e for e in kept}, acronyms, n_docs)


def term_document_matrix(dictionary: Dictionary, counts: TermCounts) -> tuple[np.ndarray, list[str], list[str]]:
    """TF-IDF matrix over (sorted dictionary terms) x (sorted documents)."""
    bases = sorted(dictionary.entries)
    doc_ids = sorted(counts.per_doc)
    n = len(doc_ids)
    matrix = np.zeros((len(bases), n))
    for i, base in enumerate(bases):
        idf = math.log(n / dictionary.entries[base].df) if n else 0.0
        for j, doc_id in enumerate(doc_ids):
            tf = counts.per_doc[doc_id][base]
            if tf:
                matrix[i, j] = tf * idf
    return matrix, bases, doc_ids


def group_similar_terms(dictionary: Dictionary, matrix: np.ndarray, bases: list[str],
                        k: int = 50, cosine_threshold: float = 0.85) -> Dictionary:
    """Cluster terms whose latent-space vectors are nearly parallel.

    Terms are projected into the rank-k space of the matrix (k clamped to
    its rank); pairs with cosine similarity >= the threshold are linked
    and connected components form groups. Each group's member with the
    highest TF-IDF becomes the representative; group ids are assigned in
    sorted representative order. Degenerate matrices (rank < 2) leave all
    group ids empty.
    """
    for entry in dictionary.entries.values():
        entry.group_id = ""
    if matrix.size == 0:
        return dictionary
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    rank = int(np.sum(s > (s[0] * 1e-12 if s.size and s[0] > 0 else 0)))
    if rank < 2:
        return dictionary
    k = min(k, rank)
    vectors = u[:, :k] * s[:k]
    norms = np.linalg.norm(vectors, axis=1)
    m = len(bases)
    adjacency: dict[int, set[int]] = {i: set() for i in range(m)}
    for i in range(m):
        if norms[i] == 0:
            continue
        for j in range(i + 1, m):
            if norms[j] == 0:
                continue
            cos = float(vectors[i] @ vectors[j]) / (norms[i] * norms[j])
            if cos >= cosine_threshold:
                adjacency[i].add(j)
                adjacency[j].add(i)
    seen: set[int] = set()
    groups: list[list[int]] = []
    for i in range(m):
        if i in seen or not adjacency[i]:
            continue
        stack = [i]
        component = []
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            component.append(node)
            stack.extend(adjacency[node] - seen)
        if len(component) > 1:
            groups.append(component)
    # stable ids: order groups by their representative's base form
    labelled = []
    for component in groups:
        members = [dictionary.entries[bases[i]] for i in component]
        representative = min(members, key=ranking_key)
        labelled.append((representative.base, members))
    for idx, (_, members) in enumerate(sorted(labelled), start=1):
        for entry in members:
            entry.group_id = f"g{idx}"
    return dictionary


def save_dictionary(dictionary: Dictionary, path: str | Path, top_k: int) -> None:
    lines = [f"# dict v1 N={dictionary.corpus_size} K={top_k}"]
    for entry in sorted(dictionary.entries.values(), key=ranking_key):
        lines.append("\t".join((
            entry.base, entry.display, str(entry.df), str(entry.cf),
            repr(entry.tfidf_max), entry.group_id,
        )))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dictionary(path: str | Path,
                    acronyms: AbbreviationTable | None = None) -> Dictionary:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# dict v1"):
        raise ValueError(f"{path}: not a dictionary file")
    header = dict(part.split("=", 1) for part in lines[0].split()[3:])
    entries = {}
    for line in lines[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        base, display, df, cf, tfidf_max, group_id = line.split("\t")
        entries[base] = DictEntry(base, display, int(df), int(cf),
                                  float(tfidf_max), group_id)
    return Dictionary(entries, acronyms or AbbreviationTable.empty(), int(header["N"]))
