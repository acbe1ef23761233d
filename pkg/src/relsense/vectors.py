"""Precomputed sentence-vector stores and n-gram composition.

Two strict text formats are handled here. Sentence-vector files carry a
"<count> <dimension>" header followed by exactly `count` lines of
"<id> <f1> ... <fdim>". N-gram tables use the same body with a
"<unigram_count> <bigram_count> <dimension>" header; bigram ids join
their two tokens with a single underscore. Parsing is strict on purpose:
a malformed export should fail loudly, not degrade a comparison between
encoders.
"""

from __future__ import annotations

import numpy as np

from .encoder import SentenceRepresentation
from .errors import EmptyCompositionError, FormatError, MissingIdError, ShapeError

Array = np.ndarray


class SentenceVectorStore:
    """Immutable id -> vector map of precomputed sentence embeddings."""

    def __init__(self, dimension: int, entries: dict[str, Array], source_name: str = ""):
        self.dimension = int(dimension)
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.entries = {}
        for key, vec in entries.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dimension,):
                raise ShapeError(
                    f"vector for {key!r} has shape {arr.shape}, expected ({self.dimension},)")
            self.entries[key] = arr
        self.source_name = source_name

    def lookup(self, sentence_id: str) -> Array:
        """Stored vector for the id; missing ids are an error, never a default."""
        try:
            return self.entries[sentence_id]
        except KeyError:
            raise MissingIdError(
                f"no vector for id {sentence_id!r} in store {self.source_name!r}") from None

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self.entries


def _parse_body_line(line: str, line_no: int, dimension: int, seen: dict):
    fields = line.split()
    if len(fields) != dimension + 1:
        raise FormatError(
            f"expected id plus {dimension} values, got {len(fields)} fields",
            line=line_no)
    key = fields[0]
    if key in seen:
        raise FormatError(f"duplicate id {key!r}", line=line_no)
    try:
        vec = np.array([float(v) for v in fields[1:]], dtype=np.float64)
    except ValueError:
        raise FormatError("unparseable float value", line=line_no) from None
    return key, vec


def load_vector_file(path, source_name: str = "") -> SentenceVectorStore:
    """Load a sentence-vector file, enforcing its header exactly."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty vector file", line=1)
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError(f"header must be '<count> <dimension>', got {lines[0]!r}", line=1)
    try:
        count, dimension = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError(f"non-integer header {lines[0]!r}", line=1) from None
    if count < 0 or dimension < 1:
        raise FormatError(f"invalid header counts {lines[0]!r}", line=1)
    entries: dict[str, Array] = {}
    for offset, line in enumerate(lines[1:], start=2):
        if len(entries) == count:
            if line.strip():
                raise FormatError(
                    f"header declares {count} entries but more follow", line=offset)
            continue
        key, vec = _parse_body_line(line, offset, dimension, entries)
        entries[key] = vec
    if len(entries) != count:
        raise FormatError(
            f"header declares {count} entries, file has {len(entries)}",
            line=len(lines))
    return SentenceVectorStore(dimension, entries, source_name or str(path))


def save_vector_file(store: SentenceVectorStore, path) -> None:
    """Write a store back out; float text round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store.entries)} {store.dimension}\n")
        for key, vec in store.entries.items():
            fh.write(key + " " + " ".join(repr(float(v)) for v in vec) + "\n")


class NgramTable:
    """Unigram and bigram embedding tables sharing one dimension."""

    def __init__(self, dimension: int, unigrams: dict[str, Array],
                 bigrams: dict[str, Array]):
        self.dimension = int(dimension)
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self.unigrams = self._checked(unigrams)
        self.bigrams = self._checked(bigrams)

    def _checked(self, table: dict[str, Array]) -> dict[str, Array]:
        out = {}
        for key, vec in table.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dimension,):
                raise ShapeError(
                    f"vector for {key!r} has shape {arr.shape}, expected ({self.dimension},)")
            out[key] = arr
        return out


def load_ngram_table(path) -> NgramTable:
    """Load an n-gram table file with a '<U> <B> <dim>' header."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty n-gram table file", line=1)
    header = lines[0].split()
    if len(header) != 3:
        raise FormatError(
            f"header must be '<unigrams> <bigrams> <dimension>', got {lines[0]!r}", line=1)
    try:
        uni_count, bi_count, dimension = (int(v) for v in header)
    except ValueError:
        raise FormatError(f"non-integer header {lines[0]!r}", line=1) from None
    if uni_count < 0 or bi_count < 0 or dimension < 1:
        raise FormatError(f"invalid header counts {lines[0]!r}", line=1)
    unigrams: dict[str, Array] = {}
    bigrams: dict[str, Array] = {}
    for offset, line in enumerate(lines[1:], start=2):
        if len(unigrams) < uni_count:
            key, vec = _parse_body_line(line, offset, dimension, unigrams)
            unigrams[key] = vec
        elif len(bigrams) < bi_count:
            key, vec = _parse_body_line(line, offset, dimension, bigrams)
            bigrams[key] = vec
        elif line.strip():
            raise FormatError("more entries than the header declares", line=offset)
    if len(unigrams) != uni_count or len(bigrams) != bi_count:
        raise FormatError(
            f"header declares {uni_count}+{bi_count} entries, "
            f"file has {len(unigrams)}+{len(bigrams)}", line=len(lines))
    return NgramTable(dimension, unigrams, bigrams)


def save_ngram_table(table: NgramTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.unigrams)} {len(table.bigrams)} {table.dimension}\n")
        for section in (table.unigrams, table.bigrams):
            for key, vec in section.items():
                fh.write(key + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def bigram_key(first: str, second: str) -> str:
    return f"{first}_{second}"


def sent2vec_compose(tokens: list[str], table: NgramTable) -> SentenceRepresentation:
    """Mean of the unigram and adjacent-bigram vectors found in the table.

    N-grams absent from the table contribute nothing and do not count in
    the divisor; a sequence with no known n-gram at all is an error.
    """
    if not tokens:
        raise ValueError("cannot compose an empty token sequence")
    found: list[Array] = []
    for token in tokens:
        vec = table.unigrams.get(token)
        if vec is not None:
            found.append(vec)
    for first, second in zip(tokens, tokens[1:]):
        vec = table.bigrams.get(bigram_key(first, second))
        if vec is not None:
            found.append(vec)
    if not found:
        raise EmptyCompositionError(
            f"no unigram or bigram of {tokens!r} appears in the table")
    values = np.mean(np.stack(found), axis=0)
    return SentenceRepresentation(values, "pretrained")
