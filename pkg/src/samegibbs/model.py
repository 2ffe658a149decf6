"""CPT storage, Dirichlet prior, full conditionals, and CPT resampling.

A table set holds one dense array per variable, shaped
``(num_parent_configs, cardinality)``. Probability rows always sum to 1;
count rows hold nonnegative reals so that moving sums, exponential decay,
and replica weights compose without special cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, ZeroSupport
from .network import Network
from .rng import substream

ROW_SUM_TOL = 1e-9


@dataclass(eq=False)
class CptSet:
    """Per-variable conditional probability tables (the learned parameters)."""

    tables: list[np.ndarray]

    def copy(self) -> "CptSet":
        return CptSet([t.copy() for t in self.tables])

    @property
    def num_rows(self) -> int:
        return sum(t.shape[0] for t in self.tables)

    def iter_rows(self):
        for t in self.tables:
            yield from t

    def validate(self) -> None:
        for i, t in enumerate(self.tables):
            if np.any(t < 0) or np.any(t > 1):
                raise ValueError(f"table {i} has entries outside [0, 1]")
            if np.max(np.abs(t.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
                raise ValueError(f"table {i} has a row not summing to 1")


@dataclass(eq=False)
class CountSet:
    """Accumulated state counts, congruent in shape with a CptSet."""

    tables: list[np.ndarray]

    def copy(self) -> "CountSet":
        return CountSet([t.copy() for t in self.tables])

    def add(self, other: "CountSet", scale: float = 1.0) -> None:
        for mine, theirs in zip(self.tables, other.tables):
            mine += scale * theirs

    def scale(self, factor: float) -> None:
        for t in self.tables:
            t *= factor

    def total_mass(self, v: int) -> float:
        return float(self.tables[v].sum())

    @property
    def nbytes(self) -> int:
        return sum(t.nbytes for t in self.tables)


@dataclass(frozen=True)
class DirichletPrior:
    """Symmetric per-cell concentration, optionally overridden per variable."""

    alpha: float = 1.0
    per_variable: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.per_variable is not None and any(a <= 0 for a in self.per_variable):
            raise ValueError("per-variable alpha overrides must all be > 0")

    def alpha_for(self, v: int) -> float:
        if self.per_variable is not None:
            return self.per_variable[v]
        return self.alpha


def zero_counts(net: Network) -> CountSet:
    return CountSet([np.zeros(net.table_shape(i)) for i in range(net.num_vars)])


def check_congruent(a: CptSet | CountSet, b: CptSet | CountSet) -> None:
    shapes_a = [t.shape for t in a.tables]
    shapes_b = [t.shape for t in b.tables]
    if shapes_a != shapes_b:
        raise ShapeMismatch(f"table shapes differ: {shapes_a} vs {shapes_b}")


def parent_config_index(net: Network, v: int, assignment: np.ndarray) -> int:
    """Mixed-radix row index of v's parent configuration in ``assignment``."""
    idx = 0
    strides = net.parent_strides(v)
    for j, p in enumerate(net.parents[v]):
        idx += int(assignment[p]) * int(strides[j])
    return idx


def init_cpts(net: Network, seed: int) -> CptSet:
    """Random initialization: every row uniform over the simplex (Dirichlet(1))."""
    tables = []
    for i in range(net.num_vars):
        rows, card = net.table_shape(i)
        rng = substream(seed, "init_cpts", i)
        tables.append(rng.dirichlet(np.ones(card), size=rows))
    return CptSet(tables)


def full_conditional(net: Network, cpts: CptSet, v: int, assignment: np.ndarray) -> np.ndarray:
    """Distribution of X_v given its Markov blanket in ``assignment``.

    p(s) is proportional to Pr(X_v=s | parents) times the product over
    children c of Pr(X_c = a_c | c's parents with X_v=s). The value stored at
    ``assignment[v]`` is ignored. Raises ZeroSupport if every state has zero
    unnormalized weight.
    """
    card = net.cardinalities[v]
    weights = cpts.tables[v][parent_config_index(net, v, assignment)].copy()
    scratch = np.array(assignment, dtype=np.int64, copy=True)
    for s in range(card):
        scratch[v] = s
        for c in net.children[v]:
            weights[s] *= cpts.tables[c][parent_config_index(net, c, scratch), scratch[c]]
    total = weights.sum()
    if total <= 0.0:
        raise ZeroSupport(f"all full-conditional weights of variable {v} are zero")
    return weights / total


def accumulate_counts(net: Network, assignment: np.ndarray, out: CountSet, weight: float = 1.0) -> None:
    """Add ``weight`` to each variable's (parent-config, state) cell."""
    for i in range(net.num_vars):
        out.tables[i][parent_config_index(net, i, assignment), int(assignment[i])] += weight


def tally_counts(net: Network, values: np.ndarray, weights: np.ndarray) -> CountSet:
    """Vectorized count extraction from complete assignments.

    ``values`` is (num_vars, lanes) with every cell assigned; ``weights`` is a
    per-lane mass (0 skips padded lanes). Equivalent to accumulate_counts over
    each lane.
    """
    tables = []
    for i in range(net.num_vars):
        rows, card = net.table_shape(i)
        configs = np.zeros(values.shape[1], dtype=np.int64)
        strides = net.parent_strides(i)
        for j, p in enumerate(net.parents[i]):
            configs += values[p].astype(np.int64) * strides[j]
        flat = configs * card + values[i]
        table = np.bincount(flat, weights=weights, minlength=rows * card)
        tables.append(table.reshape(rows, card))
    return CountSet(tables)


def _draw_dirichlet_rows(shape_params: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row-wise Dirichlet draws via normalized gammas; redraws degenerate rows."""
    draws = rng.standard_gamma(shape_params)
    sums = draws.sum(axis=1)
    bad = np.flatnonzero(sums <= 0.0)
    for r in bad:  # only reachable with tiny alphas that underflow the gamma
        draws[r] = rng.dirichlet(shape_params[r])
        sums[r] = draws[r].sum()
    return draws / sums[:, None]


def sample_cpts(counts: CountSet, prior: DirichletPrior, seed: int) -> CptSet:
    """Draw each row from Dirichlet(counts_row + alpha)."""
    tables = []
    for i, table in enumerate(counts.tables):
        rng = substream(seed, "sample_cpts", i)
        tables.append(_draw_dirichlet_rows(table + prior.alpha_for(i), rng))
    return CptSet(tables)


def mean_cpts(counts: CountSet, prior: DirichletPrior) -> CptSet:
    """Posterior-mean rows (counts + alpha, normalized); the MAP-estimate path."""
    tables = []
    for i, table in enumerate(counts.tables):
        shifted = table + prior.alpha_for(i)
        tables.append(shifted / shifted.sum(axis=1, keepdims=True))
    return CptSet(tables)
