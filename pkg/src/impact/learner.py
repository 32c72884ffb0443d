"""Per-round learners and the growing attribute space.

The learner never sees the concept. Each round it receives moderated data
over the current attributes, fits the round's simple hypothesis, and the
attribute space then grows by that hypothesis and its complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, UndefinedMetricError
from .sampling import Sample

AND = "and"
OR = "or"


class DontKnowType:
    """Singleton returned by reliable-mode learning when nothing fits."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DontKnow"


DONT_KNOW = DontKnowType()


# ---------------------------------------------------------------------------
# Hypothesis shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairHypothesis:
    """and/or over two attribute references, each optionally negated.

    Canonical form keeps left_attr <= right_attr; when they are equal the
    negation flags are non-decreasing. The same attribute twice un-negated
    is the identity, which is how a bare input bit stays representable.
    """

    op: str
    left_attr: int
    left_negated: bool
    right_attr: int
    right_negated: bool

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        lv = rows[self.left_attr]
        rv = rows[self.right_attr]
        if self.left_negated:
            lv = 1 - lv
        if self.right_negated:
            rv = 1 - rv
        return (lv & rv) if self.op == AND else (lv | rv)


@dataclass(eq=False)
class PerceptronHypothesis:
    """Linear threshold over the attribute values: fires when w.x >= threshold."""

    weights: np.ndarray
    threshold: float

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        # rows may come from a later, wider space; weights fix the width
        live = rows[: self.weights.shape[0]].astype(np.float64)
        scores = self.weights @ live
        return (scores >= self.threshold).astype(np.uint8)


@dataclass(frozen=True)
class AdfsaNodeHypothesis:
    """One decision step: look at the bit at `offset`, then hand off to the
    on0 or on1 attribute, each a terminal or a previously learned step.

    The stored offset is where the round's aligned data examined the input.
    When the hypothesis is reused as someone else's child it reads wherever
    the parent has walked to, exactly like an automaton state.
    """

    offset: int
    on0: int
    on1: int


@dataclass(eq=False)
class ReliablePairSet:
    """Every zero-disagreement pair from one round.

    Classifies by unanimity: a label only when all members agree, -1
    otherwise. The canonically first member stands in when a single
    two-valued attribute is required downstream.
    """

    members: tuple[PairHypothesis, ...]

    @property
    def primary(self) -> PairHypothesis:
        return self.members[0]

    def classify_rows(self, rows: np.ndarray) -> np.ndarray:
        out = self.members[0].evaluate_rows(rows).astype(np.int8)
        settled = np.ones(out.shape, dtype=bool)
        for h in self.members[1:]:
            vals = h.evaluate_rows(rows).astype(np.int8)
            settled &= vals == out
        result = np.where(settled, out, -1).astype(np.int8)
        return result


RoundHypothesis = PairHypothesis | PerceptronHypothesis | AdfsaNodeHypothesis


# ---------------------------------------------------------------------------
# Attribute space
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class PureAttr:
    bit: int


@dataclass(eq=False)
class TerminalAttr:
    accepting: bool


@dataclass(eq=False)
class DerivedAttr:
    hypothesis: RoundHypothesis


@dataclass(eq=False)
class ComplementAttr:
    hypothesis: RoundHypothesis


Attribute = PureAttr | TerminalAttr | DerivedAttr | ComplementAttr


@dataclass(frozen=True)
class AttributeSpace:
    """Ordered, append-only attribute list.

    mode "bits": starts as the n raw input bits. mode "strings": starts as
    the two terminal outcomes. Each finished round appends the learned
    hypothesis and its complement, so earlier indices never change meaning.
    """

    mode: str
    attributes: tuple[Attribute, ...]

    @staticmethod
    def pure(n: int) -> "AttributeSpace":
        if n < 1:
            raise InvalidParameterError("need at least one input bit")
        return AttributeSpace(mode="bits", attributes=tuple(PureAttr(i) for i in range(n)))

    @staticmethod
    def terminals() -> "AttributeSpace":
        return AttributeSpace(
            mode="strings",
            attributes=(TerminalAttr(accepting=True), TerminalAttr(accepting=False)),
        )

    def __len__(self) -> int:
        return len(self.attributes)

    def values(self, bits: np.ndarray) -> np.ndarray:
        """Attribute-value matrix (A, m) for fixed-width inputs."""
        if self.mode != "bits":
            raise InvalidParameterError("values() applies to bit-vector attribute spaces")
        X = np.asarray(bits, dtype=np.uint8)
        if X.ndim == 1:
            X = X[None, :]
        m = X.shape[0]
        rows = np.empty((len(self.attributes), m), dtype=np.uint8)
        for j, attr in enumerate(self.attributes):
            if isinstance(attr, PureAttr):
                rows[j] = X[:, attr.bit]
            elif isinstance(attr, DerivedAttr):
                rows[j] = attr.hypothesis.evaluate_rows(rows[:j])
            elif isinstance(attr, ComplementAttr):
                rows[j] = 1 - attr.hypothesis.evaluate_rows(rows[:j])
            else:
                raise InvalidParameterError("terminal attributes have no bit-vector value")
        return rows

    def eval_table(self, bits: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        """String-mode value cube (A, n+1, m); entry -1 means the walk from
        that offset ran off the end of the string."""
        if self.mode != "strings":
            raise InvalidParameterError("eval_table applies to string attribute spaces")
        X = np.asarray(bits, dtype=np.uint8)
        m, width = X.shape
        A = len(self.attributes)
        table = np.empty((A, width + 1, m), dtype=np.int8)
        for j, attr in enumerate(self.attributes):
            if isinstance(attr, TerminalAttr):
                table[j] = 1 if attr.accepting else 0
                continue
            hyp = attr.hypothesis
            table[j] = -1
            for o in range(width - 1, -1, -1):
                inside = o < lengths
                bit = X[:, o]
                picked = np.where(bit == 1, table[hyp.on1, o + 1], table[hyp.on0, o + 1])
                table[j, o] = np.where(inside, picked, -1)
            if isinstance(attr, ComplementAttr):
                defined = table[j] >= 0
                table[j] = np.where(defined, 1 - table[j], -1)
        return table


def augment(z: AttributeSpace, h: RoundHypothesis) -> AttributeSpace:
    """Grow the space by a finished round: the hypothesis and its complement."""
    if isinstance(h, ReliablePairSet):
        h = h.primary
    if isinstance(h, AdfsaNodeHypothesis) != (z.mode == "strings"):
        raise InvalidParameterError("hypothesis kind does not match the attribute space")
    return AttributeSpace(
        mode=z.mode, attributes=z.attributes + (DerivedAttr(h), ComplementAttr(h))
    )


def corrupted_view(z: AttributeSpace, bits) -> np.ndarray:
    """Attribute values the learner would see for one raw input."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise InvalidParameterError("corrupted_view takes a single input vector")
    return z.values(arr[None, :])[:, 0]


# ---------------------------------------------------------------------------
# Sample complexity
# ---------------------------------------------------------------------------


def sample_budget(epsilon: float, delta: float) -> int:
    """Examples needed so an empirical error estimate lands within epsilon of
    truth with probability at least 1 - delta (two-sided tail bound)."""
    if not (0.0 < epsilon < 1.0):
        raise InvalidParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not (0.0 < delta < 1.0):
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))


@dataclass(frozen=True)
class ErrorBudget:
    """Total error budget split evenly across the concept's teachable nodes."""

    epsilon_total: float
    delta: float
    node_count: int

    def __post_init__(self):
        if not (0.0 < self.epsilon_total < 1.0):
            raise InvalidParameterError("epsilon_total must lie in (0, 1)")
        if not (0.0 < self.delta < 1.0):
            raise InvalidParameterError("delta must lie in (0, 1)")
        if self.node_count < 1:
            raise InvalidParameterError("node_count must be at least 1")

    @property
    def epsilon_per_node(self) -> float:
        return self.epsilon_total / self.node_count

    @property
    def per_round_budget(self) -> int:
        return sample_budget(self.epsilon_per_node, self.delta)


# ---------------------------------------------------------------------------
# Pair learning
# ---------------------------------------------------------------------------


def pair_space_size(attribute_count: int) -> int:
    """Canonical pair-hypothesis count for A attributes: two operators over
    unordered reference pairs, identity pairs included."""
    a = attribute_count
    return 2 * (math.comb(2 * a, 2) + 2 * a)


@lru_cache(maxsize=32)
def _pair_candidates(A: int) -> tuple[np.ndarray, ...]:
    """Candidate arrays in canonical order: operator-major (and before or),
    then left attribute, right attribute, un-negated before negated."""
    li, ri, ln, rn = [], [], [], []
    for left in range(A):
        for right in range(left, A):
            if left < right:
                flag_pairs = ((0, 0), (0, 1), (1, 0), (1, 1))
            else:
                flag_pairs = ((0, 0), (0, 1), (1, 1))
            for fl, fr in flag_pairs:
                li.append(left)
                ri.append(right)
                ln.append(fl)
                rn.append(fr)
    li = np.array(li * 2)
    ri = np.array(ri * 2)
    ln = np.array(ln * 2)
    rn = np.array(rn * 2)
    half = len(li) // 2
    ops = np.zeros(len(li), dtype=np.uint8)
    ops[half:] = 1  # 0 = and, 1 = or
    return ops, li, ri, ln, rn


def _pair_errors(V: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Disagreement count of every canonical pair hypothesis, via label-split
    co-occurrence counts."""
    A, m = V.shape
    W = np.vstack([V, 1 - V]).astype(np.float32)
    pos = y == 1
    W1 = W[:, pos]
    W0 = W[:, ~pos]
    m1 = int(pos.sum())
    m0 = m - m1
    both1_pos = W1 @ W1.T
    both1_neg = W0 @ W0.T
    comp1 = 1 - W1
    comp0 = 1 - W0
    both0_pos = comp1 @ comp1.T
    both0_neg = comp0 @ comp0.T
    err_and = (m1 - both1_pos) + both1_neg
    err_or = both0_pos + (m0 - both0_neg)
    ops, li, ri, ln, rn = _pair_candidates(A)
    lref = li + A * ln
    rref = ri + A * rn
    errs = np.where(ops == 0, err_and[lref, rref], err_or[lref, rref])
    return np.rint(errs).astype(np.int64)


def _candidate_hypothesis(A: int, index: int) -> PairHypothesis:
    ops, li, ri, ln, rn = _pair_candidates(A)
    return PairHypothesis(
        op=AND if ops[index] == 0 else OR,
        left_attr=int(li[index]),
        left_negated=bool(ln[index]),
        right_attr=int(ri[index]),
        right_negated=bool(rn[index]),
    )


def canonical_first_pair(attribute_count: int) -> PairHypothesis:
    """First candidate in canonical order: the identity on attribute 0.

    Every candidate fits an empty round equally well, so this is what
    best-fit degenerates to when moderation leaves nothing behind.
    """
    return _candidate_hypothesis(attribute_count, 0)


def learn_pair_node(
    z: AttributeSpace, s: Sample, mode: str = "best-fit"
) -> PairHypothesis | ReliablePairSet | DontKnowType:
    """Exhaust the canonical pair space against the round's data.

    best-fit returns the first candidate with minimal disagreement in
    canonical order. reliable returns the whole zero-disagreement set, or
    DONT_KNOW when that set is empty.
    """
    if mode not in ("best-fit", "reliable"):
        raise InvalidParameterError(f"unknown learning mode {mode!r}")
    if len(s) == 0:
        raise UndefinedMetricError("cannot learn from an empty sample")
    V = z.values(s.bits)
    errs = _pair_errors(V, s.labels)
    A = len(z)
    if mode == "best-fit":
        return _candidate_hypothesis(A, int(np.argmin(errs)))
    consistent = np.flatnonzero(errs == 0)
    if consistent.size == 0:
        return DONT_KNOW
    members = tuple(_candidate_hypothesis(A, int(i)) for i in consistent)
    return ReliablePairSet(members=members)


def pair_training_error(z: AttributeSpace, h, s: Sample) -> float:
    """Fraction of the round's data a hypothesis (or set's primary) gets wrong."""
    if isinstance(h, ReliablePairSet):
        h = h.primary
    V = z.values(s.bits)
    return float(np.mean(h.evaluate_rows(V) != s.labels))


# ---------------------------------------------------------------------------
# Threshold-gate learning
# ---------------------------------------------------------------------------


def learn_threshold_node(
    z: AttributeSpace,
    s: Sample,
    *,
    max_epochs: int = 1000,
    learning_rate: float = 1.0,
) -> PerceptronHypothesis:
    """Pocket perceptron over the attribute values.

    Weights start at zero, updates are the classic rule at the given rate,
    and the best end-of-epoch weights by training accuracy are kept. Stops
    early on a mistake-free epoch.
    """
    if len(s) == 0:
        raise UndefinedMetricError("cannot learn from an empty sample")
    V = z.values(s.bits)
    X = V.T.astype(np.float64)
    y = s.labels.astype(np.int8)
    m, A = X.shape
    w = np.zeros(A, dtype=np.float64)
    theta = 0.0

    def acc(wv, tv):
        return float(np.mean(((X @ wv >= tv)) == (y == 1)))

    pocket_w, pocket_theta, pocket_acc = w.copy(), theta, acc(w, theta)
    for _ in range(max_epochs):
        i = 0
        mistakes = 0
        while i < m:
            scores = X[i:] @ w
            wrong = (scores >= theta) != (y[i:] == 1)
            hits = np.flatnonzero(wrong)
            if hits.size == 0:
                break
            j = i + int(hits[0])
            if y[j] == 1:
                w += learning_rate * X[j]
                theta -= learning_rate
            else:
                w -= learning_rate * X[j]
                theta += learning_rate
            mistakes += 1
            i = j + 1
        epoch_acc = acc(w, theta)
        if epoch_acc > pocket_acc:
            pocket_w, pocket_theta, pocket_acc = w.copy(), theta, epoch_acc
        if mistakes == 0:
            break
    return PerceptronHypothesis(weights=pocket_w, threshold=pocket_theta)


# ---------------------------------------------------------------------------
# Automaton-state learning
# ---------------------------------------------------------------------------


def learn_adfsa_node(z: AttributeSpace, s: Sample, offset: int) -> AdfsaNodeHypothesis:
    """Pick the (offset, on0, on1) step that best matches the aligned data.

    The `offset` argument documents where the teacher aligned the subset;
    selection does not trust it and searches every offset. Because agreement
    splits over the examined bit, the two children are chosen independently,
    and ties resolve to the lower offset then lower attribute indices.
    """
    if len(s) == 0:
        raise UndefinedMetricError("cannot learn from an empty sample")
    width = s.bits.shape[1]
    table = z.eval_table(s.bits, s.lengths)
    y = s.labels.astype(np.int8)
    best = None
    best_score = -1
    for o in range(width):
        inside = o < s.lengths
        bit = s.bits[:, o]
        side0 = inside & (bit == 0)
        side1 = inside & (bit == 1)
        match = table[:, o + 1, :] == y[None, :]
        agree0 = (match & side0[None, :]).sum(axis=1)
        agree1 = (match & side1[None, :]).sum(axis=1)
        a0 = int(np.argmax(agree0))
        a1 = int(np.argmax(agree1))
        score = int(agree0[a0] + agree1[a1])
        if score > best_score:
            best = AdfsaNodeHypothesis(offset=o, on0=a0, on1=a1)
            best_score = score
    return best


def adfsa_candidate_count(z: AttributeSpace, width: int) -> int:
    return width * len(z) * len(z)
