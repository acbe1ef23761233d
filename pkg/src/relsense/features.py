"""Word-pair cluster features over the two arguments.

Every (arg1 token, arg2 token) pair is reduced to the pair of Brown
cluster ids and hashed into a fixed-dimension binary vector. The hash is
FNV-1a 64-bit, chosen because it is trivially portable and has no
per-process randomization, so feature indices are stable across runs and
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError

FNV1A_OFFSET = 0xCBF29CE484222325
FNV1A_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

UNKNOWN_CLUSTER = "UNK"


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    value = FNV1A_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV1A_PRIME) & _MASK64
    return value


def _valid_cluster_id(cluster: str) -> bool:
    if cluster == UNKNOWN_CLUSTER:
        return True
    return bool(cluster) and set(cluster) <= {"0", "1"}


class BrownClusterMap:
    """token -> bit-string cluster path; unknown tokens map to "UNK"."""

    def __init__(self, entries: dict[str, str]):
        for token, cluster in entries.items():
            if not _valid_cluster_id(cluster):
                raise ValueError(
                    f"cluster id for {token!r} must be a non-empty 0/1 string "
                    f"or 'UNK', got {cluster!r}")
        self.entries = dict(entries)

    def cluster(self, token: str) -> str:
        return self.entries.get(token, UNKNOWN_CLUSTER)

    def __len__(self) -> int:
        return len(self.entries)


def load_brown_clusters(path) -> BrownClusterMap:
    """Parse the tab-separated cluster format: "<path>\\t<token>[\\t<freq>]".

    The frequency column is optional and ignored.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise FormatError(
                    f"expected 2 or 3 tab-separated fields, got {len(fields)}",
                    line=line_no)
            cluster, token = fields[0], fields[1]
            if not token:
                raise FormatError("empty token", line=line_no)
            if not _valid_cluster_id(cluster):
                raise FormatError(f"invalid cluster path {cluster!r}", line=line_no)
            entries[token] = cluster
    return BrownClusterMap(entries)


def save_brown_clusters(clusters: BrownClusterMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token, cluster in clusters.entries.items():
            fh.write(f"{cluster}\t{token}\n")


@dataclass(frozen=True)
class SparseFeatureVector:
    """Binary presence features: a sorted set of active indices."""

    dimension: int
    active_indices: tuple[int, ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        if any(not 0 <= i < self.dimension for i in self.active_indices):
            raise ValueError("active index out of range")
        if len(set(self.active_indices)) != len(self.active_indices):
            raise ValueError("active indices must be unique")

    def to_dense(self, dtype=np.float32) -> np.ndarray:
        dense = np.zeros(self.dimension, dtype=dtype)
        for idx in self.active_indices:
            dense[idx] = 1.0
        return dense


def word_pair_features(arg1_tokens: list[str], arg2_tokens: list[str],
                       clusters: BrownClusterMap,
                       dimension: int = 2 ** 15) -> SparseFeatureVector:
    """Hashed binary features over ordered cluster-id pairs.

    For every pair (t1 in arg1, t2 in arg2) the key is
    c(t1) + "|" + c(t2) and the active index is fnv1a64(key) mod
    dimension. Duplicates collapse, so the output depends only on the
    cluster-id sets of the two arguments.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be positive, got {dimension}")
    left = {clusters.cluster(t) for t in arg1_tokens}
    right = {clusters.cluster(t) for t in arg2_tokens}
    indices = {
        fnv1a64(f"{c1}|{c2}".encode("utf-8")) % dimension
        for c1 in left for c2 in right
    }
    return SparseFeatureVector(dimension, tuple(sorted(indices)))
