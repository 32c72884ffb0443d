"""Slow reference implementations used to cross-check the fast paths.

Everything here re-derives results from first principles with its own
traversal code. Nothing in this module calls the vectorized evaluators,
so a bug would have to appear twice, independently, to slip through.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .concepts import (
    AcceptState,
    Adfsa,
    And,
    Concept,
    ConceptDag,
    Literal,
    Not,
    Or,
    RejectState,
    ThresholdCircuit,
)
from .errors import EnumerationCapError, InvalidParameterError, UndefinedMetricError
from .sampling import Distribution, Sample, rng_from

ENUMERATION_CAP = 20


def _eval_dag(c: ConceptDag, bits, target: int, override: dict[int, int] | None = None) -> int:
    memo: dict[int, int] = {}
    stack = [target]
    while stack:
        i = stack[-1]
        if i in memo:
            stack.pop()
            continue
        if override is not None and i in override:
            memo[i] = override[i]
            stack.pop()
            continue
        node = c.nodes[i]
        if isinstance(node, Literal):
            memo[i] = int(bits[node.bit])
            stack.pop()
        elif isinstance(node, Not):
            if node.child in memo:
                memo[i] = 1 - memo[node.child]
                stack.pop()
            else:
                stack.append(node.child)
        else:
            left_ready = node.left in memo
            right_ready = node.right in memo
            if left_ready and right_ready:
                a, b = memo[node.left], memo[node.right]
                memo[i] = (a & b) if isinstance(node, And) else (a | b)
                stack.pop()
            else:
                if not left_ready:
                    stack.append(node.left)
                if not right_ready:
                    stack.append(node.right)
    return memo[target]


def _eval_circuit(
    c: ThresholdCircuit, bits, target: int, override: dict[int, int] | None = None
) -> int:
    memo: dict[int, int] = {}
    stack = [target]
    while stack:
        i = stack[-1]
        if i in memo:
            stack.pop()
            continue
        if override is not None and i in override:
            memo[i] = override[i]
            stack.pop()
            continue
        gate = c.gates[i]
        pending = [w.index for w in gate.inputs if w.source == "gate" and w.index not in memo]
        if pending:
            stack.extend(pending)
            continue
        total = 0
        for w in gate.inputs:
            total += int(bits[w.index]) if w.source == "bit" else memo[w.index]
        memo[i] = 1 if total >= gate.threshold else 0
        stack.pop()
    return memo[target]


def run_automaton(a: Adfsa, bits) -> int:
    """Walk the automaton over a bit sequence. Returns 1 / 0, or -1 when the
    input runs out mid-walk (the automaton's answer is undefined there)."""
    state = a.states[a.start]
    pos = 0
    while True:
        if isinstance(state, AcceptState):
            return 1
        if isinstance(state, RejectState):
            return 0
        if pos >= len(bits):
            return -1
        step = state.on1 if int(bits[pos]) == 1 else state.on0
        pos += 1
        state = a.states[step]


def reference_evaluate(concept: Concept, bits) -> int:
    """One input, one output, no vectorization."""
    if isinstance(concept, ConceptDag):
        return _eval_dag(concept, bits, concept.root)
    if isinstance(concept, ThresholdCircuit):
        return _eval_circuit(concept, bits, concept.root)
    out = run_automaton(concept, bits)
    if out < 0:
        raise UndefinedMetricError("input exhausted before the walk finished")
    return out


def reference_node_value(concept: ConceptDag | ThresholdCircuit, node: int, bits) -> int:
    if isinstance(concept, ConceptDag):
        return _eval_dag(concept, bits, node)
    return _eval_circuit(concept, bits, node)


def relevance_by_substitution(
    concept: ConceptDag | ThresholdCircuit, node: int, bits
) -> bool:
    """A node matters on an input exactly when pinning it to 0 versus 1
    changes the root."""
    if isinstance(concept, ConceptDag):
        low = _eval_dag(concept, bits, concept.root, {node: 0})
        high = _eval_dag(concept, bits, concept.root, {node: 1})
    else:
        low = _eval_circuit(concept, bits, concept.root, {node: 0})
        high = _eval_circuit(concept, bits, concept.root, {node: 1})
    return low != high


# ---------------------------------------------------------------------------
# Exhaustive comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DisagreementReport:
    checked: int
    disagreements: int
    witnesses: tuple[tuple[tuple[int, ...], int, int], ...]

    @property
    def fraction(self) -> float:
        return self.disagreements / self.checked if self.checked else 0.0


def _apply_bits(f, bits) -> int:
    if isinstance(f, (ConceptDag, ThresholdCircuit)):
        return reference_evaluate(f, bits)
    if isinstance(f, Adfsa):
        return run_automaton(f, bits)
    return int(f(bits))


def exhaustive_equivalence(
    f, g, n: int, *, witness_limit: int = 5
) -> DisagreementReport | None:
    """Compare two fixed-width predictors on every one of the 2**n inputs.
    Returns None when they agree everywhere. Witnesses are re-evaluated
    before being recorded, so a report never lies about its examples."""
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"refusing to enumerate 2**{n} inputs (cap is n <= {ENUMERATION_CAP})"
        )
    disagreements = 0
    witnesses = []
    for bits in itertools.product((0, 1), repeat=n):
        a = _apply_bits(f, bits)
        b = _apply_bits(g, bits)
        if a != b:
            disagreements += 1
            if len(witnesses) < witness_limit:
                again_a = _apply_bits(f, bits)
                again_b = _apply_bits(g, bits)
                assert (again_a, again_b) == (a, b)
                witnesses.append((bits, a, b))
    if disagreements == 0:
        return None
    return DisagreementReport(
        checked=2**n, disagreements=disagreements, witnesses=tuple(witnesses)
    )


def exhaustive_string_equivalence(
    f: Adfsa,
    g: Adfsa,
    *,
    max_len: int | None = None,
    ignore_undefined: bool = False,
    witness_limit: int = 5,
) -> DisagreementReport | None:
    """Compare two automata on every bit string up to max_len. Outcomes are
    three-valued (accept / reject / undefined); with ignore_undefined only
    strings defined for both sides count."""
    if max_len is None:
        max_len = max(f.n, g.n)
    if max_len > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"refusing to enumerate strings up to length {max_len} "
            f"(cap is {ENUMERATION_CAP})"
        )
    checked = 0
    disagreements = 0
    witnesses = []
    for length in range(max_len + 1):
        for bits in itertools.product((0, 1), repeat=length):
            a = run_automaton(f, bits)
            b = run_automaton(g, bits)
            if ignore_undefined and (a < 0 or b < 0):
                continue
            checked += 1
            if a != b:
                disagreements += 1
                if len(witnesses) < witness_limit:
                    witnesses.append((bits, a, b))
    if disagreements == 0:
        return None
    return DisagreementReport(
        checked=checked, disagreements=disagreements, witnesses=tuple(witnesses)
    )


# ---------------------------------------------------------------------------
# Sampled comparison
# ---------------------------------------------------------------------------


def _rows_outputs(h, rows: np.ndarray) -> np.ndarray:
    if hasattr(h, "evaluate_rows"):
        return np.asarray(h.evaluate_rows(rows))
    return np.asarray(h(rows))


def empirical_disagreement(f, g, s, z, truth: np.ndarray | None = None) -> float:
    """Per-sample norm: fraction of examples where f on the true attribute
    rows differs from g on the corrupted rows. With truth omitted both sides
    see the same rows, so f = g gives 0."""
    if len(s) == 0:
        raise UndefinedMetricError("disagreement over an empty sample is undefined")
    corrupted = z.values(s.bits)
    true_rows = corrupted if truth is None else np.asarray(truth)
    fa = _rows_outputs(f, true_rows)
    fb = _rows_outputs(g, corrupted)
    return float(np.mean(fa != fb))


def sampled_disagreement(f, g, d: Distribution, m: int, *, stream: int = 0) -> float:
    """Fraction of freshly drawn inputs on which two predictors differ.
    Draws its own inputs rather than trusting the library sampler."""
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    rng = rng_from(d.seed, "oracle-disagreement", stream)
    n = d.n
    if d.kind == "strings":
        high = d.length_high if d.length_high is not None else n
        lengths = rng.integers(d.length_low, high + 1, size=m)
        bits = rng.integers(0, 2, size=(m, n)).astype(np.uint8)
        for i in range(m):
            bits[i, lengths[i] :] = 0
    else:
        lengths = np.full(m, n, dtype=np.int64)
        if d.kind == "product":
            p = np.asarray(d.probabilities, dtype=np.float64)
            bits = (rng.random((m, n)) < p).astype(np.uint8)
        else:
            bits = rng.integers(0, 2, size=(m, n)).astype(np.uint8)

    def outputs(h) -> np.ndarray:
        if isinstance(h, (ConceptDag, ThresholdCircuit, Adfsa)) or callable(h):
            out = np.empty(m, dtype=np.int8)
            for i in range(m):
                row = bits[i, : lengths[i]] if d.kind == "strings" else bits[i]
                out[i] = _apply_bits(h, row)
            return out
        s = Sample(
            bits=bits.copy(),
            labels=np.zeros(m, dtype=np.uint8),
            lengths=lengths.copy(),
        )
        return np.asarray(h.predict_sample(s), dtype=np.int8)

    fa = outputs(f)
    fb = outputs(g)
    defined = (fa >= 0) & (fb >= 0)
    if not defined.any():
        raise UndefinedMetricError("no input was defined for both predictors")
    return float(np.mean(fa[defined] != fb[defined]))
