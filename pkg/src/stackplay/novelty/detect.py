"""Embedding-outlier scoring of a probe batch against a known class.

A trained episode CNN maps every padded episode to a 64-dim embedding.
Given the embeddings of one known class S and a batch N of probe
embeddings, each vector v gets a dispersion ratio

    rho_v = cosdist(mu_S, v) / cosdist(mu_S, mu_S + sigma_S)

where cosdist is cosine distance (1 - cosine similarity) and sigma_S is
the elementwise standard deviation of S.  Vectors with rho > 1 sit
outside the typical spread of S and form the outlier sets O_N and O_S;
extreme entries (Z-score >= 3 within their own set) are discarded.  The
dissimilarity score compares the surviving outlier mass of the batch to
that of the known class itself:

    OR = sum(rho over O_N) / sum(rho over O_S)
    D  = OR * cosdist(mu_S, mu_N) / (cosdist(mu_S, mu_S + sigma_S) * sum(rho over O_S))

and the batch is declared novel when D exceeds a threshold (default 25).
Note the denominator repeats the O_S mass already inside OR; the
single-division variant that drops the repeat is available through a
flag, and every verdict carries both scores so the choice is visible in
the output rather than buried in configuration.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NOVELTY_THRESHOLD = 25.0
MIN_BATCH = 10
Z_CUTOFF = 3.0


def cos_dist(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine distance 1 - cos_sim, rejecting zero-norm inputs."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance undefined for a zero-norm vector")
    return float(1.0 - float(a @ b) / (na * nb))


@dataclass(frozen=True)
class EmbeddingSet:
    """Embeddings of one class with their mean and elementwise spread."""

    name: str
    vectors: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray

    @classmethod
    def from_vectors(cls, name: str, vectors: np.ndarray) -> "EmbeddingSet":
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] == 0:
            raise ValueError(f"expected a nonempty (n, d) array, got {vectors.shape}")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(norms == 0.0):
            bad = int(np.argmax(norms == 0.0))
            raise ValueError(f"zero-norm embedding at index {bad} of set {name!r}")
        return cls(name=name, vectors=vectors,
                   mu=vectors.mean(axis=0), sigma=vectors.std(axis=0))

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class NoveltyVerdict:
    """Outcome of scoring one probe batch against one known class."""

    known_class: str
    batch_size: int
    threshold: float
    single_division: bool
    known_outliers: int
    batch_outliers: int
    outlier_ratio: float
    d_literal: float
    d_single: float
    is_novel: bool

    @property
    def d(self) -> float:
        """The score the verdict was decided on."""
        return self.d_single if self.single_division else self.d_literal


def rho_values(mu_s: np.ndarray, denom: float, vectors: np.ndarray) -> np.ndarray:
    """Dispersion ratio of every vector relative to the known mean."""
    return np.array([cos_dist(mu_s, v) / denom for v in vectors])


def z_filter(rho: np.ndarray, cutoff: float = Z_CUTOFF) -> np.ndarray:
    """Drop entries whose Z-score within this set reaches the cutoff."""
    if rho.size == 0:
        return rho
    sd = float(rho.std())
    if sd == 0.0:
        return rho
    return rho[(rho - rho.mean()) / sd < cutoff]


def detect(known: EmbeddingSet, batch: np.ndarray | EmbeddingSet,
           threshold: float = NOVELTY_THRESHOLD,
           single_division: bool = False) -> NoveltyVerdict:
    """Score a probe batch against one known class.

    The batch must hold at least 10 embeddings; smaller batches make the
    outlier statistics meaningless and are rejected.
    """
    vectors = batch.vectors if isinstance(batch, EmbeddingSet) else (
        np.asarray(batch, dtype=float))
    if vectors.ndim != 2:
        raise ValueError(f"expected a (n, d) batch, got shape {vectors.shape}")
    n = vectors.shape[0]
    if n < MIN_BATCH:
        raise ValueError(f"batch has {n} embeddings, needs at least {MIN_BATCH}")
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.argmax(norms == 0.0))
        raise ValueError(f"zero-norm embedding at index {bad} of probe batch")

    mu_s, sigma_s = known.mu, known.sigma
    denom = cos_dist(mu_s, mu_s + sigma_s)
    if denom == 0.0:
        raise ValueError(
            f"known set {known.name!r} has no dispersion around its mean")

    rho_batch = rho_values(mu_s, denom, vectors)
    rho_known = rho_values(mu_s, denom, known.vectors)
    o_batch = z_filter(rho_batch[rho_batch > 1.0])
    o_known = z_filter(rho_known[rho_known > 1.0])
    sum_ob = float(o_batch.sum())
    sum_os = float(o_known.sum())
    if sum_os == 0.0:
        # degenerate: the known set has no outlier mass at all
        warnings.warn(
            f"known set {known.name!r} has no surviving outliers; "
            "substituting 1 for its rho mass", RuntimeWarning, stacklevel=2)
        sum_os = 1.0

    ratio = sum_ob / sum_os
    mu_n = vectors.mean(axis=0)
    d_single = ratio * cos_dist(mu_s, mu_n) / denom
    d_literal = d_single / sum_os
    d = d_single if single_division else d_literal
    return NoveltyVerdict(
        known_class=known.name,
        batch_size=n,
        threshold=float(threshold),
        single_division=bool(single_division),
        known_outliers=int(o_known.size),
        batch_outliers=int(o_batch.size),
        outlier_ratio=ratio,
        d_literal=d_literal,
        d_single=d_single,
        is_novel=bool(d > threshold),
    )


def plurality_class(predictions: Iterable[str], class_names: Sequence[str]) -> str:
    """Most frequent prediction; ties resolve to the earliest class name."""
    counts = Counter(predictions)
    unknown = set(counts) - set(class_names)
    if unknown:
        raise ValueError(f"predictions outside known classes: {sorted(unknown)}")
    return max(class_names, key=lambda c: counts.get(c, 0))
