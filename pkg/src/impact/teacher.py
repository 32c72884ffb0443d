"""Sample moderation. The teacher filters the round's training data and does
nothing else: it never relabels, reorders, or talks to the learner.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .concepts import (
    Adfsa,
    Concept,
    ConceptDag,
    ThresholdCircuit,
    adfsa_labels,
    arrival_offsets,
    node_values,
    relevance_mask,
    walk_from_state,
)
from .errors import InsufficientDataError, InvalidParameterError
from .plan import ModerationRule, RoundPlan
from .sampling import Sample


def _check_labels_boolean(concept, s: Sample, vals: np.ndarray) -> None:
    if not np.array_equal(vals[:, concept.root], s.labels):
        raise InvalidParameterError(
            "sample labels disagree with the concept; the teacher never relabels"
        )


def _boolean_mask(
    concept: ConceptDag | ThresholdCircuit,
    node: int,
    s: Sample,
    rule: ModerationRule,
    vals: np.ndarray,
) -> np.ndarray:
    if rule is ModerationRule.RELEVANT_FILTER:
        return relevance_mask(concept, node, s.bits)
    if rule is ModerationRule.LARGER_PARTITION:
        agree = vals[:, node] == s.labels
        n_agree = int(agree.sum())
        n_disagree = len(s) - n_agree
        # Ties keep the agreeing half.
        return agree if n_agree >= n_disagree else ~agree
    raise InvalidParameterError(f"rule {rule.value} does not apply to this concept")


def moderate_boolean(
    concept: ConceptDag | ThresholdCircuit,
    node: int,
    s: Sample,
    rule: ModerationRule = ModerationRule.RELEVANT_FILTER,
) -> Sample:
    """Select this round's training subset, preserving order and labels.

    The default rule keeps the examples whose root value depends on the
    target node. The partition rule splits on agreement between node value
    and label and keeps the larger half, which is never below half the
    sample. An empty selection raises InsufficientDataError.
    """
    vals = node_values(concept, s.bits)
    _check_labels_boolean(concept, s, vals)
    mask = _boolean_mask(concept, node, s, rule, vals)
    if not mask.any():
        raise InsufficientDataError(
            f"no usable examples for node {node}", node=node, subset_size=0
        )
    return s.subset(mask)


def _adfsa_buckets(a: Adfsa, state: int, s: Sample) -> list[tuple[int, bool, np.ndarray]]:
    """All nonempty (offset, agreeing, membership mask) buckets in priority order."""
    arrivals = arrival_offsets(a, s.bits, s.lengths, state)
    never = arrivals < 0
    buckets: list[tuple[int, bool, np.ndarray]] = []
    for offset in range(a.n):
        out = walk_from_state(a, s.bits, s.lengths, state, offset)
        defined = out >= 0
        eligible = (arrivals == offset) | (never & defined)
        agree = eligible & (out == s.labels)
        disagree = eligible & defined & (out != s.labels)
        for flag, mask in ((True, agree), (False, disagree)):
            if mask.any():
                buckets.append((offset, flag, mask))
    return buckets


def moderate_adfsa(a: Adfsa, state: int, s: Sample) -> tuple[Sample, int]:
    """Select the largest offset-aligned bucket for a branch-state round.

    Every string that walks through the state lands in the bucket of its
    arrival offset. Strings that never touch the state are usable at any
    offset where the walk from the state stays inside them, and the teacher
    files them by whether the state's output there matches their label.
    Returns the chosen subset along with its offset.
    """
    if not np.array_equal(adfsa_labels(a, s.bits, s.lengths), s.labels):
        raise InvalidParameterError(
            "sample labels disagree with the automaton; the teacher never relabels"
        )
    buckets = _adfsa_buckets(a, state, s)
    if not buckets:
        raise InsufficientDataError(
            f"no usable examples for state {state}", node=state, subset_size=0
        )
    best = None
    best_size = -1
    for offset, agreeing, mask in buckets:
        size = int(mask.sum())
        # Strict comparison plus ordering makes ties resolve to the lower
        # offset and, within an offset, to the agreeing bucket.
        if size > best_size:
            best = (offset, agreeing, mask)
            best_size = size
    offset, _, mask = best
    return s.subset(mask), offset


def moderate(concept: Concept, node: int, s: Sample, rule: ModerationRule) -> tuple[Sample, int | None]:
    """Uniform entry point: returns (subset, offset or None)."""
    if rule is ModerationRule.OFFSET_PARTITION:
        if not isinstance(concept, Adfsa):
            raise InvalidParameterError("offset moderation needs an automaton")
        subset, offset = moderate_adfsa(concept, node, s)
        return subset, offset
    if isinstance(concept, Adfsa):
        raise InvalidParameterError("automaton rounds need offset moderation")
    return moderate_boolean(concept, node, s, rule), None


@dataclass
class PrivilegedView:
    """Per-example round membership: entry (i, r) is 1 iff example i was in
    the moderated subset of round r."""

    membership: np.ndarray  # (m, R) uint8

    @property
    def round_count(self) -> int:
        return int(self.membership.shape[1])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"bit_{r}" for r in range(self.round_count)])
            for row in self.membership:
                writer.writerow([int(v) for v in row])


def export_privileged_view(plan: RoundPlan, s: Sample, concept: Concept) -> PrivilegedView:
    """Replay every round's moderation over the full sample.

    Rounds that would select nothing produce an all-zero column here instead
    of aborting; the abort semantics belong to the session driver.
    """
    m = len(s)
    membership = np.zeros((m, len(plan)), dtype=np.uint8)
    vals = None if isinstance(concept, Adfsa) else node_values(concept, s.bits)
    for r, rnd in enumerate(plan.rounds):
        if rnd.rule is ModerationRule.OFFSET_PARTITION:
            buckets = _adfsa_buckets(concept, rnd.node, s)
            best_mask = None
            best_size = -1
            for _, _, mask in buckets:
                size = int(mask.sum())
                if size > best_size:
                    best_mask = mask
                    best_size = size
            if best_mask is not None:
                membership[:, r] = best_mask.astype(np.uint8)
        else:
            mask = _boolean_mask(concept, rnd.node, s, rnd.rule, vals)
            membership[:, r] = mask.astype(np.uint8)
    return PrivilegedView(membership=membership)
