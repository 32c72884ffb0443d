"""Concept representations, evaluation, restructuring, relevance."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    all_inputs,
    and_dag,
    chain_automaton,
    layered_circuit,
    mixed_relevance_dag,
    nand_dag,
    one_bit_acceptor,
    or_dag,
    vote_circuit,
)
from impact import (
    Adfsa,
    And,
    BranchState,
    ConceptDag,
    Correlation,
    Gate,
    InvalidConceptError,
    Literal,
    MalformedAutomatonError,
    Not,
    Or,
    RejectState,
    AcceptState,
    ThresholdCircuit,
    Wire,
    adfsa_labels,
    arrival_offsets,
    build_parity,
    concept_from_dict,
    concept_to_dict,
    correlation_at,
    evaluate,
    evaluate_batch,
    is_relevant,
    load_concept,
    max_path_depth,
    node_values,
    push_negations_to_leaves,
    relevance_mask,
    run_adfsa,
    save_concept,
)
from impact.concepts import walk_from_state
from impact.generate import random_automaton, random_circuit, random_dag
from impact.oracle import (
    reference_evaluate,
    reference_node_value,
    relevance_by_substitution,
    run_automaton,
)
from impact.plan import postfix_order


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------


def test_dag_rejects_forward_edge():
    with pytest.raises(InvalidConceptError):
        ConceptDag(nodes=(And(left=1, right=1), Literal(bit=0)), root=0, n=1)


def test_dag_rejects_out_of_range_literal():
    with pytest.raises(InvalidConceptError):
        ConceptDag(nodes=(Literal(bit=3),), root=0, n=2)


def test_dag_rejects_size_over_bound():
    nodes = [Literal(bit=0)] + [Not(child=i) for i in range(9)]
    with pytest.raises(InvalidConceptError):
        ConceptDag(nodes=tuple(nodes), root=9, n=2, size_bound=4)


def test_circuit_rejects_forward_gate_wire():
    g = Gate(threshold=1, inputs=(Wire("gate", 1),))
    g2 = Gate(threshold=1, inputs=(Wire("bit", 0),))
    with pytest.raises(InvalidConceptError):
        ThresholdCircuit(gates=(g, g2), root=0, n=1)


def test_automaton_needs_both_terminals():
    with pytest.raises(InvalidConceptError):
        Adfsa(states=(RejectState(), BranchState(on0=0, on1=0)), start=1, n=1)


def test_automaton_depth_cannot_exceed_n():
    states = [RejectState(), AcceptState()]
    for i in range(3):
        states.append(BranchState(on0=len(states) - 1, on1=len(states) - 1))
    with pytest.raises(InvalidConceptError):
        Adfsa(states=tuple(states), start=4, n=2)


# ---------------------------------------------------------------------------
# Evaluation against the oracle
# ---------------------------------------------------------------------------


def test_and_identity():
    assert evaluate(and_dag(), (1, 1)) == 1


def test_parity_all_zeros():
    g = build_parity(10, (1, 6, 8, 9))
    assert evaluate(g, (0,) * 10) == 0


def test_random_dag_matches_recursive_oracle_exhaustively():
    g = random_dag(10, 15, seed=41)
    X = all_inputs(10)
    fast = node_values(g, X)[:, g.root]
    for i, bits in enumerate(X):
        assert fast[i] == reference_evaluate(g, bits)


def test_node_values_all_nodes_match_oracle():
    g = random_dag(6, 12, seed=13)
    X = all_inputs(6)
    vals = node_values(g, X)
    for node in range(g.size):
        for i in (0, 17, 43, 63):
            assert vals[i, node] == reference_node_value(g, node, X[i])


def test_circuit_values_match_oracle():
    for seed in range(5):
        c = random_circuit(7, 4, seed)
        X = all_inputs(7)
        fast = node_values(c, X)[:, c.root]
        for i in (0, 1, 64, 127):
            assert fast[i] == reference_evaluate(c, X[i])
    c = layered_circuit()
    X = all_inputs(4)
    fast = evaluate_batch(c, X)
    for i, bits in enumerate(X):
        assert fast[i] == reference_evaluate(c, bits)


def test_parity_matches_fold_oracle():
    for n, subset in ((4, (0, 2)), (6, (1, 3, 5)), (12, (0, 5, 7, 11))):
        g = build_parity(n, subset)
        X = all_inputs(n)
        out = evaluate_batch(g, X)
        folded = np.bitwise_xor.reduce(X[:, list(subset)], axis=1)
        assert np.array_equal(out, folded)


def test_parity_single_bit_is_the_bit():
    g = build_parity(5, (3,))
    X = all_inputs(5)
    assert np.array_equal(evaluate_batch(g, X), X[:, 3])


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------


def test_single_branch_acceptance():
    a = one_bit_acceptor()
    assert run_adfsa(a, (1,)) == 1
    assert run_adfsa(a, (0,)) == 0


def test_run_adfsa_exhaustion_raises():
    with pytest.raises(MalformedAutomatonError):
        run_adfsa(chain_automaton(), (1,))


def test_random_automaton_matches_walk_oracle():
    a = random_automaton(6, 5, seed=3)
    depth = max_path_depth(a)
    for length in range(depth, 7):
        X = np.zeros((1 << length, 6), dtype=np.uint8)
        X[:, :length] = all_inputs(length)
        lengths = np.full(1 << length, length)
        labels = adfsa_labels(a, X, lengths)
        for i in range(len(labels)):
            assert labels[i] == run_automaton(a, X[i, :length])


def test_walk_from_state_undefined_when_short():
    a = chain_automaton()
    X = np.array([[1, 0]], dtype=np.uint8)
    assert walk_from_state(a, X, np.array([1]), a.start, 0)[0] == -1
    assert walk_from_state(a, X, np.array([2]), a.start, 0)[0] == 0
    # the inner branch state read at offset 1 sees bit 0 there
    assert walk_from_state(a, X, np.array([2]), 2, 1)[0] == 0


def test_arrival_offsets_chain():
    a = chain_automaton()
    X = np.array([[1, 1], [1, 0], [0, 1], [0, 0]], dtype=np.uint8)
    lengths = np.full(4, 2)
    # inner branch state 2 is reached only after a leading 1
    offsets = arrival_offsets(a, X, lengths, 2)
    assert offsets.tolist() == [1, 1, -1, -1]
    # the start state is everyone's offset 0
    assert arrival_offsets(a, X, lengths, a.start).tolist() == [0, 0, 0, 0]


def test_max_path_depth():
    assert max_path_depth(one_bit_acceptor()) == 1
    assert max_path_depth(chain_automaton()) == 2


# ---------------------------------------------------------------------------
# Restructuring
# ---------------------------------------------------------------------------


def test_push_negations_demorgan():
    g = nand_dag()
    out = push_negations_to_leaves(g)
    # NOT(AND(x0,x1)) becomes OR over negated literals
    assert isinstance(out.nodes[out.root], Or)
    for idx, node in enumerate(out.nodes):
        if isinstance(node, Not):
            assert isinstance(out.nodes[node.child], Literal)
    assert exhaustive_agree(g, out, 2)


def test_push_negations_fixed_point_without_nots():
    g = and_dag()
    out = push_negations_to_leaves(g)
    assert all(not isinstance(node, Not) for node in out.nodes)
    assert exhaustive_agree(g, out, 2)


def exhaustive_agree(g, out, n):
    X = all_inputs(n)
    return np.array_equal(
        node_values(g, X)[:, g.root], node_values(out, X)[:, out.root]
    )


def test_restructure_hundred_random_dags():
    for seed in range(100):
        g = random_dag(10, 12 + (seed % 10), seed=seed)
        out = push_negations_to_leaves(g)
        assert out.size <= 2 * g.size
        X = all_inputs(10)
        assert exhaustive_agree(g, out, 10)
        for idx, node in enumerate(out.nodes):
            if isinstance(node, Not):
                assert isinstance(out.nodes[node.child], Literal)


# ---------------------------------------------------------------------------
# Relevance and correlation
# ---------------------------------------------------------------------------


def test_root_always_relevant_and_correlated():
    g = mixed_relevance_dag()
    X = all_inputs(3)
    assert relevance_mask(g, g.root, X).all()
    for bits in X:
        assert correlation_at(g, g.root, bits) is Correlation.CORRELATED


def test_blocked_and_leaf_irrelevant():
    g = and_dag()
    assert not is_relevant(g, 0, (1, 0))
    assert is_relevant(g, 0, (0, 1))


def test_relevance_matches_substitution_oracle():
    for seed in range(10):
        g = random_dag(6, 11, seed=100 + seed)
        X = all_inputs(6)
        for node in range(g.size):
            mask = relevance_mask(g, node, X)
            for i in (0, 9, 31, 63):
                assert mask[i] == relevance_by_substitution(g, node, X[i])


def test_circuit_relevance_matches_oracle():
    c = layered_circuit()
    X = all_inputs(4)
    for gate in range(c.size):
        mask = relevance_mask(c, gate, X)
        for i in range(len(X)):
            assert mask[i] == relevance_by_substitution(c, gate, X[i])


def test_taught_nodes_relevant_implies_correlated():
    for seed in range(20):
        g = push_negations_to_leaves(random_dag(8, 14, seed=200 + seed))
        X = all_inputs(8)
        vals = node_values(g, X)
        root = vals[:, g.root]
        for rnd in postfix_order(g).rounds:
            rel = relevance_mask(g, rnd.node, X)
            assert not np.any(rel & (vals[:, rnd.node] != root))


def test_shared_literal_breaks_the_rule_outside_taught_nodes():
    g = mixed_relevance_dag()
    # x0 relevant and correlated on (1,1,0), relevant and anticorrelated on (0,0,1)
    assert is_relevant(g, 0, (1, 1, 0))
    assert correlation_at(g, 0, (1, 1, 0)) is Correlation.CORRELATED
    assert is_relevant(g, 0, (0, 0, 1))
    assert correlation_at(g, 0, (0, 0, 1)) is Correlation.ANTICORRELATED


def test_irrelevant_examples_mix_correlations():
    found_mixed = False
    for seed in range(30):
        g = push_negations_to_leaves(random_dag(6, 12, seed=300 + seed))
        X = all_inputs(6)
        vals = node_values(g, X)
        root = vals[:, g.root]
        for rnd in postfix_order(g).rounds:
            irrelevant = ~relevance_mask(g, rnd.node, X)
            same = vals[irrelevant, rnd.node] == root[irrelevant]
            if same.any() and (~same).any():
                found_mixed = True
                break
        if found_mixed:
            break
    assert found_mixed


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "concept",
    [and_dag(), nand_dag(), mixed_relevance_dag(), vote_circuit(), layered_circuit(),
     one_bit_acceptor(), chain_automaton(), build_parity(10, (1, 6, 8, 9))],
    ids=["and", "nand", "mixed", "vote", "layered", "one-bit", "chain", "parity"],
)
def test_json_round_trip(concept, tmp_path):
    path = tmp_path / "concept.json"
    save_concept(concept, path)
    loaded = load_concept(path)
    assert concept_to_dict(loaded) == concept_to_dict(concept)


def test_round_trip_preserves_semantics(tmp_path):
    g = build_parity(6, (0, 2, 4))
    path = tmp_path / "parity.json"
    save_concept(g, path)
    loaded = load_concept(path)
    X = all_inputs(6)
    assert np.array_equal(evaluate_batch(g, X), evaluate_batch(loaded, X))


@pytest.mark.parametrize(
    "raw",
    [
        {"type": "mystery", "n": 2},
        {"type": "dag", "n": 2, "nodes": [{"op": "lit"}], "root": 0},
        {"type": "dag", "n": 2, "nodes": [{"op": "lit", "bit": 0}], "root": 5},
        {"type": "threshold", "n": 2, "gates": [], "root": 0},
        {"type": "adfsa", "n": 1, "states": [{"kind": "accept"}], "start": 0},
        "not even a dict",
    ],
)
def test_malformed_json_rejected(raw):
    with pytest.raises(InvalidConceptError):
        concept_from_dict(raw)


@given(st.integers(min_value=2, max_value=8), st.data())
@settings(max_examples=40, deadline=None)
def test_property_random_dag_round_trip(n, data):
    seed = data.draw(st.integers(min_value=0, max_value=10_000))
    g = random_dag(n, n + 4, seed=seed)
    assert concept_to_dict(concept_from_dict(concept_to_dict(g))) == concept_to_dict(g)


@given(st.integers(min_value=0, max_value=2000))
@settings(max_examples=60, deadline=None)
def test_property_restructure_preserves_root_function(seed):
    g = random_dag(5, 9, seed=seed)
    out = push_negations_to_leaves(g)
    X = all_inputs(5)
    assert exhaustive_agree(g, out, 5)
    assert out.size <= 2 * g.size
