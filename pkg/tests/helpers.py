"""Independent oracles and generators shared by the test modules.

Everything here is deliberately brute-force (full joint enumeration,
pair counting, backtracking coloring) so it cannot share a failure mode
with the vectorized implementation under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from samegibbs import CptSet, Network, build_network
from samegibbs.model import parent_config_index


def random_dag(rng: np.random.Generator, num_vars: int, edge_prob: float = 0.3,
               max_card: int = 2) -> tuple[list[int], list[tuple[int, int]]]:
    """Random DAG via a random topological order; cards uniform in [2, max_card]."""
    cards = [int(rng.integers(2, max_card + 1)) for _ in range(num_vars)]
    order = rng.permutation(num_vars)
    edges = []
    for i in range(num_vars):
        for j in range(i + 1, num_vars):
            if rng.random() < edge_prob:
                edges.append((int(order[i]), int(order[j])))
    return cards, edges


def random_network(rng: np.random.Generator, num_vars: int, edge_prob: float = 0.3,
                   max_card: int = 2) -> Network:
    cards, edges = random_dag(rng, num_vars, edge_prob, max_card)
    return build_network(cards, edges)


def random_cpts(net: Network, rng: np.random.Generator, concentration: float = 1.0) -> CptSet:
    tables = []
    for i in range(net.num_vars):
        rows, card = net.table_shape(i)
        tables.append(rng.dirichlet(np.full(card, concentration), size=rows))
    return CptSet(tables)


def all_assignments(net: Network):
    """Every complete assignment, as int arrays."""
    for combo in itertools.product(*(range(c) for c in net.cardinalities)):
        yield np.asarray(combo, dtype=np.int64)


def joint_probability(net: Network, cpts: CptSet, assignment: np.ndarray) -> float:
    p = 1.0
    for i in range(net.num_vars):
        p *= float(cpts.tables[i][parent_config_index(net, i, assignment), assignment[i]])
    return p


def enumerated_conditional(net: Network, cpts: CptSet, v: int, assignment: np.ndarray) -> np.ndarray:
    """p(X_v | everything else) by brute-force joint evaluation."""
    weights = np.zeros(net.cardinalities[v])
    scratch = np.array(assignment, copy=True)
    for s in range(net.cardinalities[v]):
        scratch[v] = s
        weights[s] = joint_probability(net, cpts, scratch)
    return weights / weights.sum()


def enumerated_latent_distribution(net: Network, cpts: CptSet,
                                   observed: dict[int, int]) -> tuple[list[int], np.ndarray]:
    """Exact joint distribution of the unobserved variables given the observed ones.

    Returns the latent variable list and a probability vector indexed
    mixed-radix over those variables (first latent most significant).
    """
    latent = [v for v in range(net.num_vars) if v not in observed]
    sizes = [net.cardinalities[v] for v in latent]
    probs = np.zeros(int(np.prod(sizes)) if latent else 1)
    scratch = np.zeros(net.num_vars, dtype=np.int64)
    for v, s in observed.items():
        scratch[v] = s
    for flat, combo in enumerate(itertools.product(*(range(c) for c in sizes))):
        for v, s in zip(latent, combo):
            scratch[v] = s
        probs[flat] = joint_probability(net, cpts, scratch)
    total = probs.sum()
    if total <= 0:
        raise ValueError("observed evidence has zero probability")
    return latent, probs / total


def min_colors_brute_force(num_vars: int, edges) -> int:
    """Smallest k admitting a proper coloring, by exhaustive assignment."""
    edge_list = list(edges)
    for k in range(1, num_vars + 1):
        for combo in itertools.product(range(k), repeat=num_vars):
            if all(combo[u] != combo[v] for u, v in edge_list):
                return k
    return num_vars


def mann_whitney_auc(scores, labels) -> float:
    """Pair-counting AUC with half credit for tied scores."""
    scores = list(scores)
    labels = list(labels)
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                credit += 1.0
            elif sp == sn:
                credit += 0.5
    return credit / (len(pos) * len(neg))


def kl_rows_oracle(truth: CptSet, estimate: CptSet) -> float:
    """Scalar-loop mean row KL, skipping q=0 terms; independent of the array path."""
    total = 0.0
    rows = 0
    for p_table, q_table in zip(truth.tables, estimate.tables):
        for p_row, q_row in zip(p_table, q_table):
            for p, q in zip(p_row, q_row):
                if p > 0 and q > 0:
                    total += p * math.log(p / q)
            rows += 1
    return total / rows


def count_normalized_cpts(net: Network, dense: np.ndarray) -> CptSet:
    """Empirical conditional frequencies of fully observed data (scalar loop)."""
    tables = [np.zeros(net.table_shape(i)) for i in range(net.num_vars)]
    for case in range(dense.shape[1]):
        assignment = dense[:, case]
        for i in range(net.num_vars):
            tables[i][parent_config_index(net, i, assignment), assignment[i]] += 1.0
    return CptSet([t / np.maximum(t.sum(axis=1, keepdims=True), 1e-300) for t in tables])
