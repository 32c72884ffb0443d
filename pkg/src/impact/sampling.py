"""Example distributions, sample drawing, and evaluation metrics.

Seeding is hash based and hierarchical: every consumer derives its generator
from (seed, stream tags...) through sha256, so adding a new consumer never
shifts anyone else's stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .concepts import (
    Adfsa,
    Concept,
    ConceptDag,
    Example,
    ThresholdCircuit,
    adfsa_labels,
    evaluate_batch,
    max_path_depth,
)
from .errors import InvalidParameterError, UndefinedMetricError


def stable_entropy(*parts) -> list[int]:
    """Deterministic 128-bit entropy from a mixed tuple of ints and strings."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    digest = h.digest()
    return [int.from_bytes(digest[i : i + 4], "big") for i in range(0, 16, 4)]


def rng_from(*parts) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(stable_entropy(*parts)))


def derive_seed(*parts) -> int:
    """Collapse mixed parts into one stable 64-bit seed value."""
    words = stable_entropy(*parts)
    return (words[0] << 32) | words[1]


@dataclass(frozen=True)
class Distribution:
    """Input distribution over bit vectors, or over bit strings for automata.

    kind "uniform": each bit fair and independent.
    kind "product": bit i is 1 with probability probabilities[i].
    kind "strings": length drawn uniformly from [length_low, length_high],
    then fair bits.
    """

    kind: str
    n: int
    seed: int
    probabilities: tuple[float, ...] | None = None
    length_low: int = 1
    length_high: int | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "product", "strings"):
            raise InvalidParameterError(f"unknown distribution kind {self.kind!r}")
        if self.n < 1:
            raise InvalidParameterError("n must be at least 1")
        if self.kind == "product":
            if self.probabilities is None or len(self.probabilities) != self.n:
                raise InvalidParameterError("product distribution needs n probabilities")
            if any(not (0.0 <= p <= 1.0) for p in self.probabilities):
                raise InvalidParameterError("bit probabilities must lie in [0, 1]")
        if self.kind == "strings":
            high = self.length_high if self.length_high is not None else self.n
            if not (1 <= self.length_low <= high <= self.n):
                raise InvalidParameterError(
                    f"string lengths must satisfy 1 <= {self.length_low} <= {high} <= n"
                )

    @staticmethod
    def uniform(n: int, seed: int) -> "Distribution":
        return Distribution(kind="uniform", n=n, seed=seed)

    @staticmethod
    def product(probabilities, seed: int) -> "Distribution":
        probs = tuple(float(p) for p in probabilities)
        return Distribution(kind="product", n=len(probs), seed=seed, probabilities=probs)

    @staticmethod
    def strings(n: int, seed: int, length_low: int = 1, length_high: int | None = None) -> "Distribution":
        return Distribution(
            kind="strings", n=n, seed=seed, length_low=length_low, length_high=length_high
        )

    @staticmethod
    def strings_for(a: Adfsa, seed: int) -> "Distribution":
        """String distribution whose minimum length covers the automaton's deepest walk."""
        return Distribution.strings(a.n, seed, length_low=max(1, max_path_depth(a)))


@dataclass
class Sample:
    """Immutable batch of labeled examples.

    bits is (m, n); for string concepts only the first lengths[i] entries of
    row i are meaningful and the rest are zero padding. source_indices tracks
    each row's position in the originally drawn sample, so moderated subsets
    can prove they are genuine subsets.
    """

    bits: np.ndarray
    labels: np.ndarray
    lengths: np.ndarray
    source_indices: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.source_indices is None:
            self.source_indices = np.arange(len(self.labels), dtype=np.int64)
        for arr in (self.bits, self.labels, self.lengths, self.source_indices):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n(self) -> int:
        return int(self.bits.shape[1])

    def subset(self, selector) -> "Sample":
        """Row subset in original order (boolean mask) or given order (index array)."""
        sel = np.asarray(selector)
        return Sample(
            bits=self.bits[sel].copy(),
            labels=self.labels[sel].copy(),
            lengths=self.lengths[sel].copy(),
            source_indices=self.source_indices[sel].copy(),
        )

    def examples(self) -> list[Example]:
        out = []
        for i in range(len(self)):
            row = self.bits[i, : self.lengths[i]]
            out.append(Example(bits=tuple(int(b) for b in row), label=int(self.labels[i])))
        return out


def draw_sample(d: Distribution, concept: Concept, m: int, *, stream=0) -> Sample:
    """Draw m labeled examples. The same (distribution, stream) always yields
    the same sample; distinct streams are independent."""
    if m < 1:
        raise InvalidParameterError(f"sample size must be positive, got {m}")
    if d.n != concept.n:
        raise InvalidParameterError(
            f"distribution is over {d.n} bits but the concept reads {concept.n}"
        )
    is_string_concept = isinstance(concept, Adfsa)
    if is_string_concept != (d.kind == "strings"):
        raise InvalidParameterError(
            "string concepts need a strings distribution and vice versa"
        )
    rng = rng_from(d.seed, "draw", stream)
    if d.kind == "strings":
        high = d.length_high if d.length_high is not None else d.n
        lengths = rng.integers(d.length_low, high + 1, size=m).astype(np.int64)
        bits = rng.integers(0, 2, size=(m, d.n), dtype=np.uint8)
        mask = np.arange(d.n)[None, :] >= lengths[:, None]
        bits[mask] = 0
        labels = adfsa_labels(concept, bits, lengths)
        return Sample(bits=bits, labels=labels, lengths=lengths)
    if d.kind == "uniform":
        bits = rng.integers(0, 2, size=(m, d.n), dtype=np.uint8)
    else:
        probs = np.asarray(d.probabilities, dtype=np.float64)
        bits = (rng.random(size=(m, d.n)) < probs[None, :]).astype(np.uint8)
    labels = evaluate_batch(concept, bits).astype(np.uint8)
    lengths = np.full(m, d.n, dtype=np.int64)
    return Sample(bits=bits, labels=labels, lengths=lengths)


def predictions(h, s: Sample) -> np.ndarray:
    """Labels assigned by a classifier; -1 marks an abstention."""
    if callable(h) and not hasattr(h, "predict_sample"):
        return np.asarray(h(s))
    return np.asarray(h.predict_sample(s))


def accuracy(h, s: Sample) -> float:
    """Fraction of s the classifier labels correctly. Abstentions count as wrong."""
    if len(s) == 0:
        raise UndefinedMetricError("accuracy over an empty sample is undefined")
    preds = predictions(h, s)
    return float(np.mean(preds == s.labels))


def dont_know_rate(h, s: Sample) -> float:
    if len(s) == 0:
        raise UndefinedMetricError("rate over an empty sample is undefined")
    preds = predictions(h, s)
    return float(np.mean(preds == -1))
