"""Concept classes the teacher can hold: formula DAGs, threshold circuits, acyclic automata.

All three representations store their internal structure as an index-ordered
list in which every edge points to a strictly lower index, so acyclicity is
structural rather than checked by traversal.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InputShapeError,
    InvalidConceptError,
    MalformedAutomatonError,
)


@dataclass(frozen=True)
class Example:
    """One labeled training instance. For string concepts, bits holds the string."""

    bits: tuple[int, ...]
    label: int


# ---------------------------------------------------------------------------
# Boolean formula DAGs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    bit: int


@dataclass(frozen=True)
class Not:
    child: int


@dataclass(frozen=True)
class And:
    left: int
    right: int


@dataclass(frozen=True)
class Or:
    left: int
    right: int


DagNode = Literal | Not | And | Or


def node_children(node: DagNode) -> tuple[int, ...]:
    if isinstance(node, Literal):
        return ()
    if isinstance(node, Not):
        return (node.child,)
    return (node.left, node.right)


@dataclass(frozen=True)
class ConceptDag:
    """Boolean formula DAG over n input bits.

    size_bound caps the node count; None means the default cubic bound in n.
    """

    nodes: tuple[DagNode, ...]
    root: int
    n: int
    size_bound: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if self.n < 1:
            raise InvalidConceptError(f"need at least one input bit, got n={self.n}")
        if not self.nodes:
            raise InvalidConceptError("a DAG needs at least one node")
        if len(self.nodes) > self.effective_size_bound:
            raise InvalidConceptError(
                f"{len(self.nodes)} nodes exceeds the size bound "
                f"{self.effective_size_bound} for n={self.n}"
            )
        if not (0 <= self.root < len(self.nodes)):
            raise InvalidConceptError(f"root index {self.root} out of range")
        for i, node in enumerate(self.nodes):
            if isinstance(node, Literal):
                if not (0 <= node.bit < self.n):
                    raise InvalidConceptError(f"node {i} reads bit {node.bit}, n={self.n}")
                continue
            for child in node_children(node):
                if not (0 <= child < i):
                    raise InvalidConceptError(
                        f"node {i} has edge to {child}; edges must point to lower indices"
                    )

    @property
    def effective_size_bound(self) -> int:
        if self.size_bound is not None:
            return self.size_bound
        return self.n**3

    @property
    def size(self) -> int:
        return len(self.nodes)


# ---------------------------------------------------------------------------
# Threshold circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Wire:
    """Input reference for a gate: a raw bit or an earlier gate's output."""

    source: str  # "bit" or "gate"
    index: int


@dataclass(frozen=True)
class Gate:
    """Fires iff at least `threshold` of its inputs are 1."""

    threshold: int
    inputs: tuple[Wire, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass(frozen=True)
class ThresholdCircuit:
    gates: tuple[Gate, ...]
    root: int
    n: int
    depth_cap: int = 8

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise InvalidConceptError(f"need at least one input bit, got n={self.n}")
        if not self.gates:
            raise InvalidConceptError("a circuit needs at least one gate")
        if not (0 <= self.root < len(self.gates)):
            raise InvalidConceptError(f"root gate {self.root} out of range")
        for i, gate in enumerate(self.gates):
            k = len(gate.inputs)
            if k == 0:
                raise InvalidConceptError(f"gate {i} has no inputs")
            if not (1 <= gate.threshold <= k):
                raise InvalidConceptError(
                    f"gate {i} threshold {gate.threshold} outside 1..{k}"
                )
            for wire in gate.inputs:
                if wire.source == "bit":
                    if not (0 <= wire.index < self.n):
                        raise InvalidConceptError(f"gate {i} reads bit {wire.index}")
                elif wire.source == "gate":
                    if not (0 <= wire.index < i):
                        raise InvalidConceptError(
                            f"gate {i} reads gate {wire.index}; must be a lower index"
                        )
                else:
                    raise InvalidConceptError(f"unknown wire source {wire.source!r}")
        if self.depth > self.depth_cap:
            raise InvalidConceptError(
                f"circuit depth {self.depth} exceeds cap {self.depth_cap}"
            )

    @property
    def depth(self) -> int:
        """Longest gate-to-gate chain, counting the gates on it."""
        depths = []
        for gate in self.gates:
            d = 1
            for wire in gate.inputs:
                if wire.source == "gate":
                    d = max(d, depths[wire.index] + 1)
            depths.append(d)
        return depths[self.root]

    @property
    def size(self) -> int:
        return len(self.gates)


# ---------------------------------------------------------------------------
# Acyclic automata
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AcceptState:
    pass


@dataclass(frozen=True)
class RejectState:
    pass


@dataclass(frozen=True)
class BranchState:
    """Consumes one bit: 0 moves to on0, 1 moves to on1. Both point to lower indices."""

    on0: int
    on1: int


State = AcceptState | RejectState | BranchState


@dataclass(frozen=True)
class Adfsa:
    """Acyclic decision automaton over bit strings of length at most n.

    A walk starts at `start` and consumes one bit per branch state. Reaching
    a terminal classifies the string; any bits left over are ignored.
    """

    states: tuple[State, ...]
    start: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.n < 1:
            raise InvalidConceptError(f"need n >= 1, got {self.n}")
        if not (0 <= self.start < len(self.states)):
            raise InvalidConceptError(f"start state {self.start} out of range")
        accepts = sum(isinstance(s, AcceptState) for s in self.states)
        rejects = sum(isinstance(s, RejectState) for s in self.states)
        if accepts != 1 or rejects != 1:
            raise InvalidConceptError(
                f"need exactly one accept and one reject terminal, got {accepts}/{rejects}"
            )
        for i, state in enumerate(self.states):
            if isinstance(state, BranchState):
                for nxt in (state.on0, state.on1):
                    if not (0 <= nxt < i):
                        raise InvalidConceptError(
                            f"state {i} moves to {nxt}; moves must point to lower indices"
                        )
        if max_path_depth(self) > self.n:
            raise InvalidConceptError(
                f"some walk takes {max_path_depth(self)} steps, more than n={self.n}"
            )

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def branch_indices(self) -> tuple[int, ...]:
        return tuple(
            i for i, s in enumerate(self.states) if isinstance(s, BranchState)
        )


def max_path_depth(a: Adfsa) -> int:
    """Length in consumed bits of the longest walk from start to a terminal."""
    depths = []
    for state in a.states:
        if isinstance(state, BranchState):
            depths.append(1 + max(depths[state.on0], depths[state.on1]))
        else:
            depths.append(0)
    return depths[a.start]


Concept = ConceptDag | ThresholdCircuit | Adfsa


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def as_bit_matrix(bits, n: int) -> np.ndarray:
    """Coerce one vector or a matrix of bits to a (m, n) uint8 array."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise InputShapeError(f"expected vectors of {n} bits, got shape {arr.shape}")
    if arr.size and arr.max() > 1:
        raise InputShapeError("inputs must be 0/1 valued")
    return arr


def node_values(concept: ConceptDag | ThresholdCircuit, X: np.ndarray) -> np.ndarray:
    """Value of every node (or gate) on every row of X, shape (m, size)."""
    X = as_bit_matrix(X, concept.n)
    m = X.shape[0]
    if isinstance(concept, ConceptDag):
        vals = np.empty((m, concept.size), dtype=np.uint8)
        for i, node in enumerate(concept.nodes):
            if isinstance(node, Literal):
                vals[:, i] = X[:, node.bit]
            elif isinstance(node, Not):
                vals[:, i] = 1 - vals[:, node.child]
            elif isinstance(node, And):
                vals[:, i] = vals[:, node.left] & vals[:, node.right]
            else:
                vals[:, i] = vals[:, node.left] | vals[:, node.right]
        return vals
    vals = np.empty((m, concept.size), dtype=np.uint8)
    for i, gate in enumerate(concept.gates):
        total = np.zeros(m, dtype=np.int32)
        for wire in gate.inputs:
            col = X[:, wire.index] if wire.source == "bit" else vals[:, wire.index]
            total += col
        vals[:, i] = (total >= gate.threshold).astype(np.uint8)
    return vals


def root_values_with_override(
    concept: ConceptDag | ThresholdCircuit, X: np.ndarray, node: int, forced: int
) -> np.ndarray:
    """Root value on every row when `node` is clamped to `forced`."""
    X = as_bit_matrix(X, concept.n)
    m = X.shape[0]
    size = concept.size
    if not (0 <= node < size):
        raise InvalidConceptError(f"node {node} out of range")
    vals = np.empty((m, size), dtype=np.uint8)
    if isinstance(concept, ConceptDag):
        for i, item in enumerate(concept.nodes):
            if i == node:
                vals[:, i] = forced
            elif isinstance(item, Literal):
                vals[:, i] = X[:, item.bit]
            elif isinstance(item, Not):
                vals[:, i] = 1 - vals[:, item.child]
            elif isinstance(item, And):
                vals[:, i] = vals[:, item.left] & vals[:, item.right]
            else:
                vals[:, i] = vals[:, item.left] | vals[:, item.right]
    else:
        for i, gate in enumerate(concept.gates):
            if i == node:
                vals[:, i] = forced
                continue
            total = np.zeros(m, dtype=np.int32)
            for wire in gate.inputs:
                col = X[:, wire.index] if wire.source == "bit" else vals[:, wire.index]
                total += col
            vals[:, i] = (total >= gate.threshold).astype(np.uint8)
    return vals[:, concept.root]


def evaluate(concept: ConceptDag | ThresholdCircuit, bits) -> int:
    """Root value of the concept on one input vector."""
    X = as_bit_matrix(bits, concept.n)
    if X.shape[0] != 1:
        raise InputShapeError("evaluate takes a single input vector")
    return int(node_values(concept, X)[0, concept.root])


def evaluate_batch(concept: ConceptDag | ThresholdCircuit, X: np.ndarray) -> np.ndarray:
    return node_values(concept, X)[:, concept.root]


def relevance_mask(
    concept: ConceptDag | ThresholdCircuit, node: int, X: np.ndarray
) -> np.ndarray:
    """True where clamping the node to 0 and to 1 produces different root values."""
    low = root_values_with_override(concept, X, node, 0)
    high = root_values_with_override(concept, X, node, 1)
    return low != high


def is_relevant(concept: ConceptDag | ThresholdCircuit, node: int, bits) -> bool:
    X = as_bit_matrix(bits, concept.n)
    if X.shape[0] != 1:
        raise InputShapeError("is_relevant takes a single input vector")
    return bool(relevance_mask(concept, node, X)[0])


class Correlation(enum.Enum):
    CORRELATED = "correlated"
    ANTICORRELATED = "anticorrelated"


def correlation_at(concept: ConceptDag | ThresholdCircuit, node: int, bits) -> Correlation:
    """Whether the node's value on this input matches the root's value."""
    X = as_bit_matrix(bits, concept.n)
    if X.shape[0] != 1:
        raise InputShapeError("correlation_at takes a single input vector")
    vals = node_values(concept, X)
    if vals[0, node] == vals[0, concept.root]:
        return Correlation.CORRELATED
    return Correlation.ANTICORRELATED


def reachable_indices(concept: Concept) -> set[int]:
    """Indices reachable from the root (or start) by following edges."""
    if isinstance(concept, ConceptDag):
        children = lambda i: node_children(concept.nodes[i])
        top = concept.root
    elif isinstance(concept, ThresholdCircuit):
        children = lambda i: tuple(
            w.index for w in concept.gates[i].inputs if w.source == "gate"
        )
        top = concept.root
    else:
        def children(i):
            state = concept.states[i]
            if isinstance(state, BranchState):
                return (state.on0, state.on1)
            return ()
        top = concept.start
    seen: set[int] = set()
    stack = [top]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(children(i))
    return seen


# ---------------------------------------------------------------------------
# Restructuring: push every negation down to the leaves
# ---------------------------------------------------------------------------


def push_negations_to_leaves(g: ConceptDag) -> ConceptDag:
    """Equivalent DAG in which Not nodes appear only directly above literals.

    Builds positive and negated variants of the reachable nodes on demand,
    applying the usual and/or duality, so the output has at most twice as
    many nodes as the input. The output size bound is doubled to match.
    """
    out_nodes: list[DagNode] = []
    memo: dict[tuple[int, bool], int] = {}

    def emit(node: DagNode) -> int:
        out_nodes.append(node)
        return len(out_nodes) - 1

    # Iterative post-order: (index, negated, children_done).
    stack: list[tuple[int, bool, bool]] = [(g.root, False, False)]
    while stack:
        idx, neg, ready = stack.pop()
        if (idx, neg) in memo:
            continue
        node = g.nodes[idx]
        if isinstance(node, Not):
            # Pure alias, no node of its own.
            if (node.child, not neg) in memo:
                memo[(idx, neg)] = memo[(node.child, not neg)]
            else:
                stack.append((idx, neg, False))
                stack.append((node.child, not neg, False))
            continue
        if isinstance(node, Literal):
            if not neg:
                memo[(idx, False)] = emit(Literal(node.bit))
            else:
                if (idx, False) not in memo:
                    memo[(idx, False)] = emit(Literal(node.bit))
                memo[(idx, True)] = emit(Not(memo[(idx, False)]))
            continue
        if not ready:
            stack.append((idx, neg, True))
            stack.append((node.left, neg, False))
            stack.append((node.right, neg, False))
            continue
        left = memo[(node.left, neg)]
        right = memo[(node.right, neg)]
        want_and = isinstance(node, And) != neg
        memo[(idx, neg)] = emit(And(left, right) if want_and else Or(left, right))

    bound = max(2 * g.effective_size_bound, len(out_nodes))
    return ConceptDag(
        nodes=tuple(out_nodes), root=memo[(g.root, False)], n=g.n, size_bound=bound
    )


# ---------------------------------------------------------------------------
# Automaton walks
# ---------------------------------------------------------------------------


def _string_bits(string, n: int) -> np.ndarray:
    if isinstance(string, str):
        if any(c not in "01" for c in string):
            raise InputShapeError(f"bit string may only contain 0/1, got {string!r}")
        arr = np.array([int(c) for c in string], dtype=np.uint8)
    else:
        arr = np.asarray(string, dtype=np.uint8)
        if arr.ndim != 1:
            raise InputShapeError("expected a single bit string")
        if arr.size and arr.max() > 1:
            raise InputShapeError("inputs must be 0/1 valued")
    if len(arr) > n:
        raise InputShapeError(f"string of length {len(arr)} exceeds n={n}")
    return arr


def _adfsa_tables(a: Adfsa) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    size = a.size
    on0 = np.zeros(size, dtype=np.int64)
    on1 = np.zeros(size, dtype=np.int64)
    branch = np.zeros(size, dtype=bool)
    accept = np.zeros(size, dtype=bool)
    for i, state in enumerate(a.states):
        if isinstance(state, BranchState):
            branch[i] = True
            on0[i] = state.on0
            on1[i] = state.on1
        else:
            on0[i] = on1[i] = i
            accept[i] = isinstance(state, AcceptState)
    return on0, on1, branch, accept


def run_adfsa(a: Adfsa, string) -> int:
    """Classify one bit string: 1 if the walk reaches the accept terminal.

    Raises MalformedAutomatonError if the string runs out while the walk is
    still on a branch state.
    """
    bits = _string_bits(string, a.n)
    cur = a.start
    for pos in range(len(bits)):
        state = a.states[cur]
        if not isinstance(state, BranchState):
            break
        cur = state.on1 if bits[pos] else state.on0
    state = a.states[cur]
    if isinstance(state, BranchState):
        raise MalformedAutomatonError(
            f"string of length {len(bits)} exhausted at state {cur}"
        )
    return int(isinstance(state, AcceptState))


def walk_from_state(
    a: Adfsa, X: np.ndarray, lengths: np.ndarray, state: int, offset: int
) -> np.ndarray:
    """Batch walk starting at `state`, consuming bits from `offset` on.

    Returns 1/0 for walks that reach a terminal and -1 where the string is
    exhausted first (including strings shorter than the offset itself).
    """
    on0, on1, branch, accept = _adfsa_tables(a)
    m = X.shape[0]
    cur = np.full(m, state, dtype=np.int64)
    pos = offset
    while True:
        active = branch[cur] & (pos < lengths)
        if not active.any():
            break
        bit = X[active, pos]
        nxt = np.where(bit == 1, on1[cur[active]], on0[cur[active]])
        cur[active] = nxt
        pos += 1
    out = np.where(accept[cur], 1, 0).astype(np.int8)
    out[branch[cur]] = -1
    return out


def adfsa_labels(a: Adfsa, X: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Classify a batch of strings; exhaustion anywhere is an error."""
    out = walk_from_state(a, X, lengths, a.start, 0)
    if (out < 0).any():
        count = int((out < 0).sum())
        raise MalformedAutomatonError(
            f"{count} strings exhausted before reaching a terminal"
        )
    return out.astype(np.uint8)


def arrival_offsets(a: Adfsa, X: np.ndarray, lengths: np.ndarray, target: int) -> np.ndarray:
    """Bit position at which each string's walk first sits on `target`, else -1."""
    on0, on1, branch, _ = _adfsa_tables(a)
    m = X.shape[0]
    cur = np.full(m, a.start, dtype=np.int64)
    arrived = np.full(m, -1, dtype=np.int64)
    pos = 0
    while True:
        hit = (cur == target) & (arrived < 0)
        arrived[hit] = pos
        active = branch[cur] & (pos < lengths)
        if not active.any():
            break
        bit = X[active, pos]
        cur[active] = np.where(bit == 1, on1[cur[active]], on0[cur[active]])
        pos += 1
    return arrived


# ---------------------------------------------------------------------------
# Parity construction
# ---------------------------------------------------------------------------


def build_parity(n: int, subset) -> ConceptDag:
    """DAG computing the parity of the given bit subset via and/or/not expansion."""
    subset = list(subset)
    if not subset:
        raise InvalidConceptError("parity needs at least one bit")
    if len(set(subset)) != len(subset):
        raise InvalidConceptError("parity subset has repeated bits")
    for b in subset:
        if not (0 <= b < n):
            raise InvalidConceptError(f"parity bit {b} out of range for n={n}")

    nodes: list[DagNode] = []

    def emit(node: DagNode) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def xor_tree(bits: list[int]) -> int:
        if len(bits) == 1:
            return emit(Literal(bits[0]))
        mid = len(bits) // 2
        a = xor_tree(bits[:mid])
        b = xor_tree(bits[mid:])
        not_a = emit(Not(a))
        not_b = emit(Not(b))
        only_a = emit(And(a, not_b))
        only_b = emit(And(not_a, b))
        return emit(Or(only_a, only_b))

    root = xor_tree(subset)
    bound = max(n**3, len(nodes))
    return ConceptDag(nodes=tuple(nodes), root=root, n=n, size_bound=bound)


# ---------------------------------------------------------------------------
# JSON concept files
# ---------------------------------------------------------------------------


def concept_to_dict(concept: Concept) -> dict:
    if isinstance(concept, ConceptDag):
        nodes = []
        for node in concept.nodes:
            if isinstance(node, Literal):
                nodes.append({"op": "lit", "bit": node.bit})
            elif isinstance(node, Not):
                nodes.append({"op": "not", "child": node.child})
            elif isinstance(node, And):
                nodes.append({"op": "and", "left": node.left, "right": node.right})
            else:
                nodes.append({"op": "or", "left": node.left, "right": node.right})
        return {"type": "dag", "n": concept.n, "nodes": nodes, "root": concept.root}
    if isinstance(concept, ThresholdCircuit):
        gates = []
        for gate in concept.gates:
            gates.append(
                {
                    "threshold": gate.threshold,
                    "inputs": [{w.source: w.index} for w in gate.inputs],
                }
            )
        return {"type": "threshold", "n": concept.n, "gates": gates, "root": concept.root}
    states = []
    for state in concept.states:
        if isinstance(state, AcceptState):
            states.append({"kind": "accept"})
        elif isinstance(state, RejectState):
            states.append({"kind": "reject"})
        else:
            states.append({"kind": "branch", "on0": state.on0, "on1": state.on1})
    return {"type": "adfsa", "n": concept.n, "states": states, "start": concept.start}


def _require(mapping: dict, key: str, kind: str):
    if key not in mapping:
        raise InvalidConceptError(f"{kind} concept file is missing {key!r}")
    return mapping[key]


def concept_from_dict(data: dict) -> Concept:
    if not isinstance(data, dict):
        raise InvalidConceptError("concept file must hold a JSON object")
    ctype = _require(data, "type", "a")
    try:
        if ctype == "dag":
            nodes: list[DagNode] = []
            for entry in _require(data, "nodes", "dag"):
                op = _require(entry, "op", "dag node")
                if op == "lit":
                    nodes.append(Literal(int(entry["bit"])))
                elif op == "not":
                    nodes.append(Not(int(entry["child"])))
                elif op == "and":
                    nodes.append(And(int(entry["left"]), int(entry["right"])))
                elif op == "or":
                    nodes.append(Or(int(entry["left"]), int(entry["right"])))
                else:
                    raise InvalidConceptError(f"unknown dag op {op!r}")
            bound = max(int(data["n"]) ** 3, len(nodes))
            return ConceptDag(
                nodes=tuple(nodes),
                root=int(_require(data, "root", "dag")),
                n=int(_require(data, "n", "dag")),
                size_bound=bound,
            )
        if ctype == "threshold":
            gates = []
            for entry in _require(data, "gates", "threshold"):
                wires = []
                for ref in _require(entry, "inputs", "gate"):
                    if "bit" in ref:
                        wires.append(Wire("bit", int(ref["bit"])))
                    elif "gate" in ref:
                        wires.append(Wire("gate", int(ref["gate"])))
                    else:
                        raise InvalidConceptError(f"unknown wire {ref!r}")
                gates.append(Gate(int(_require(entry, "threshold", "gate")), tuple(wires)))
            return ThresholdCircuit(
                gates=tuple(gates),
                root=int(_require(data, "root", "threshold")),
                n=int(_require(data, "n", "threshold")),
            )
        if ctype == "adfsa":
            states: list[State] = []
            for entry in _require(data, "states", "adfsa"):
                kind = _require(entry, "kind", "state")
                if kind == "accept":
                    states.append(AcceptState())
                elif kind == "reject":
                    states.append(RejectState())
                elif kind == "branch":
                    states.append(BranchState(int(entry["on0"]), int(entry["on1"])))
                else:
                    raise InvalidConceptError(f"unknown state kind {kind!r}")
            return Adfsa(
                states=tuple(states),
                start=int(_require(data, "start", "adfsa")),
                n=int(_require(data, "n", "adfsa")),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConceptError(f"malformed concept file: {exc}") from exc
    raise InvalidConceptError(f"unknown concept type {ctype!r}")


def load_concept(path: str | Path) -> Concept:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConceptError(f"cannot read concept file {path}: {exc}") from exc
    return concept_from_dict(data)


def save_concept(concept: Concept, path: str | Path) -> None:
    Path(path).write_text(json.dumps(concept_to_dict(concept), indent=2) + "\n")
