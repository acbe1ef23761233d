"""Seeded synthetic corpora and resources.

The generated corpus is separable by construction: each sense owns a
disjoint slice of the vocabulary and instances draw their tokens from
their sense's slice only. That makes it a usable overfitting oracle for
the whole training stack without any licensed data.
"""

from __future__ import annotations

import numpy as np

from .corpus import RelationInstance
from .encoder import EmbeddingTable
from .features import fnv1a64
from .nn import make_rng
from .vectors import SentenceVectorStore

DEFAULT_SENSES = (
    "Comparison.Contrast",
    "Contingency.Cause",
    "Expansion.Conjunction",
    "Temporal.Asynchronous",
    "Expansion.Instantiation",
    "Expansion.Restatement",
    "Comparison.Concession",
    "Temporal.Synchrony",
)

TRAIN_SECTIONS = tuple(range(2, 21))


def make_corpus(n_instances: int = 50, n_senses: int = 4, vocab_size: int = 100,
                seed: int = 0, min_len: int = 3, max_len: int = 7,
                double_label_every: int = 0) -> list[RelationInstance]:
    """Separable corpus: sense k draws tokens only from its vocab slice.

    With double_label_every = m > 0, every m-th instance carries a second
    sense label (the next sense cyclically).
    """
    if not 1 <= n_senses <= len(DEFAULT_SENSES):
        raise ValueError(f"n_senses must be in [1, {len(DEFAULT_SENSES)}]")
    if vocab_size < n_senses:
        raise ValueError("need at least one token per sense")
    rng = make_rng(seed)
    vocab = [f"w{k:03d}" for k in range(vocab_size)]
    slice_size = vocab_size // n_senses
    instances = []
    for i in range(n_instances):
        sense_idx = i % n_senses
        pool = vocab[sense_idx * slice_size:(sense_idx + 1) * slice_size]
        senses = [DEFAULT_SENSES[sense_idx]]
        if double_label_every and (i + 1) % double_label_every == 0 and n_senses > 1:
            senses.append(DEFAULT_SENSES[(sense_idx + 1) % n_senses])

        def draw() -> list[str]:
            length = int(rng.integers(min_len, max_len + 1))
            return [pool[int(rng.integers(len(pool)))] for _ in range(length)]

        arg1 = draw()
        arg2 = draw()
        section = TRAIN_SECTIONS[i % len(TRAIN_SECTIONS)]
        instances.append(RelationInstance(
            id=f"syn-{i:04d}",
            doc_id=f"wsj_{section:02d}{i % 100:02d}",
            arg1_text=" ".join(arg1), arg2_text=" ".join(arg2),
            arg1_tokens=arg1, arg2_tokens=arg2,
            senses=senses, relation_type="Implicit", split="train"))
    return instances


def corpus_vocabulary(instances: list[RelationInstance]) -> list[str]:
    tokens = {t for inst in instances for t in inst.arg1_tokens + inst.arg2_tokens}
    return sorted(tokens)


def make_embeddings(tokens: list[str], dimension: int = 16, seed: int = 0,
                    dtype=np.float32) -> EmbeddingTable:
    """Random word vectors, uniform in [-0.5, 0.5], one per token."""
    rng = make_rng(seed)
    vectors = {
        token: rng.uniform(-0.5, 0.5, size=dimension).astype(dtype)
        for token in sorted(tokens)
    }
    return EmbeddingTable(dimension, vectors, dtype=dtype)


def fake_sentence_vector(sentence_id: str, dimension: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-embedding keyed by (seed, id)."""
    child = np.random.SeedSequence([seed, fnv1a64(sentence_id.encode("utf-8"))])
    rng = np.random.Generator(np.random.PCG64(child))
    return rng.standard_normal(dimension)


def make_fake_store(instances: list[RelationInstance], dimension: int = 16,
                    seed: int = 0) -> SentenceVectorStore:
    """Fake-encoder store: one seeded random vector per argument id."""
    entries = {}
    for inst in instances:
        for slot in ("arg1", "arg2"):
            key = f"{inst.id}#{slot}"
            entries[key] = fake_sentence_vector(key, dimension, seed)
    return SentenceVectorStore(dimension, entries, source_name="fake-encoder")
