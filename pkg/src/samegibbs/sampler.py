"""The replicated Gibbs engine: minibatch streaming, chromatic sweeps, counts.

The engine walks the data in fixed-size minibatches. Each visit replicates
the minibatch's observed cells into m lanes, restores (or initializes) the
latent cells, runs one or more chromatic Gibbs sweeps, tallies state counts
over all lanes, folds them into the count accumulator, and resamples the
CPTs from the accumulated Dirichlet parameters.

The moving-sum accumulator keeps each minibatch's last counts and latent
replica assignments between visits, so every visit continues a burned-in
chain; its bookkeeping grows with the number of minibatches. The
exponential accumulator keeps no per-minibatch state at all — latents
restart at every visit — bounding resident memory by model plus one
minibatch regardless of dataset size.

Every random draw comes from a counter-based stream keyed by
(seed, site, pass, minibatch, sweep, variable), which makes results
bit-identical across worker counts.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .datagen import DataMatrix
from .errors import DimensionMismatch, EmptyData, ValidationError, ZeroSupport
from .model import (
    CountSet,
    CptSet,
    DirichletPrior,
    init_cpts,
    mean_cpts,
    sample_cpts,
    tally_counts,
    zero_counts,
)
from .network import Coloring, Network, color_graph, moralize
from .rng import derive_seed, substream

MSchedule = Union[int, Sequence[tuple[int, int]]]

ACCUMULATOR_MODES = ("moving_sum", "exponential")


@dataclass
class SamplerConfig:
    """Knobs for one training run.

    ``same_m`` is either a fixed replication count or an annealing schedule
    of (m, num_passes) pieces; passes beyond the schedule keep the last m.
    """

    same_m: MSchedule = 1
    minibatch_size: int = 1024
    num_passes: int = 1
    prior: DirichletPrior = DirichletPrior(1.0)
    accumulator_mode: str = "moving_sum"
    exp_decay: float = 1.0
    sweeps_per_minibatch: int = 1
    map_estimate: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.same_m, Sequence):
            self.same_m = tuple((int(m), int(p)) for m, p in self.same_m)
            if not self.same_m:
                raise ValueError("same_m schedule must be nonempty")
            if any(m < 1 or p < 1 for m, p in self.same_m):
                raise ValueError("same_m schedule entries must have m >= 1 and passes >= 1")
        elif self.same_m < 1:
            raise ValueError(f"same_m must be >= 1, got {self.same_m}")
        if self.minibatch_size < 1:
            raise ValueError(f"minibatch_size must be >= 1, got {self.minibatch_size}")
        if self.num_passes < 0:
            raise ValueError(f"num_passes must be >= 0, got {self.num_passes}")
        if self.accumulator_mode not in ACCUMULATOR_MODES:
            raise ValueError(f"accumulator_mode must be one of {ACCUMULATOR_MODES}")
        if not 0.0 < self.exp_decay <= 1.0:
            raise ValueError(f"exp_decay must be in (0, 1], got {self.exp_decay}")
        if self.sweeps_per_minibatch < 1:
            raise ValueError(f"sweeps_per_minibatch must be >= 1, got {self.sweeps_per_minibatch}")


def anneal_m(schedule: MSchedule, pass_index: int) -> int:
    """Piecewise-constant replication count for a 0-based pass index."""
    if pass_index < 0:
        raise ValueError(f"pass_index must be >= 0, got {pass_index}")
    if isinstance(schedule, int):
        if schedule < 1:
            raise ValueError(f"m must be >= 1, got {schedule}")
        return schedule
    if not schedule:
        raise ValueError("schedule must be nonempty")
    consumed = 0
    for m, passes in schedule:
        consumed += passes
        if pass_index < consumed:
            return m
    return schedule[-1][0]


@dataclass(eq=False)
class Minibatch:
    """One dense block of cases; -1 marks missing cells, weight 0 marks padding."""

    index: int
    values: np.ndarray  # (num_vars, size) int32
    weights: np.ndarray  # (size,) float64
    num_real: int

    @property
    def size(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class ReplicatedBatch:
    """m lane-copies of a minibatch sharing observed cells.

    ``values`` is (num_vars, m*size); lane r*size+c is replica r of case c.
    ``missing_lanes[v]`` indexes the lanes whose cell (v, lane) is latent.
    """

    m: int
    base_size: int
    values: np.ndarray
    lane_weights: np.ndarray
    missing_lanes: list[np.ndarray]

    @property
    def num_lanes(self) -> int:
        return self.values.shape[1]


class MatrixSource:
    """Re-iterable minibatch stream over an in-memory DataMatrix."""

    def __init__(self, data: DataMatrix, minibatch_size: int):
        self.num_vars = data.num_vars
        self.num_cases = data.num_cases
        self.minibatch_size = minibatch_size
        self._data = data

    def __iter__(self) -> Iterator[Minibatch]:
        size = self.minibatch_size
        for index in range(num_minibatches(self.num_cases, size)):
            lo = index * size
            hi = min(lo + size, self.num_cases)
            block = self._data.dense_block(lo, hi)
            yield pad_block(index, block, size)


def num_minibatches(num_cases: int, minibatch_size: int) -> int:
    return math.ceil(num_cases / minibatch_size)


def pad_block(index: int, block: np.ndarray, size: int) -> Minibatch:
    """Zero-pad a final short block to the uniform minibatch size."""
    real = block.shape[1]
    if real < size:
        pad = np.full((block.shape[0], size - real), -1, dtype=np.int32)
        block = np.concatenate([block, pad], axis=1)
    weights = np.zeros(size, dtype=np.float64)
    weights[:real] = 1.0
    return Minibatch(index=index, values=block, weights=weights, num_real=real)


def replicate_minibatch(mb: Minibatch, m: int) -> ReplicatedBatch:
    """Tile the observed cells into m lanes with independent latent cells."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    values = np.tile(mb.values, (1, m)).astype(np.int32)
    lane_weights = np.tile(mb.weights, m)
    missing = [np.flatnonzero(values[v] < 0) for v in range(values.shape[0])]
    return ReplicatedBatch(
        m=m,
        base_size=mb.size,
        values=values,
        lane_weights=lane_weights,
        missing_lanes=missing,
    )


class _NetCache:
    """Precomputed index arrays used by the vectorized sweep."""

    def __init__(self, net: Network):
        self.cardinalities = np.asarray(net.cardinalities, dtype=np.int64)
        self.parents = [list(net.parents[v]) for v in range(net.num_vars)]
        self.strides = [net.parent_strides(v) for v in range(net.num_vars)]
        # child_links[v]: (child, stride of v inside child's parent config)
        self.child_links: list[list[tuple[int, int]]] = [[] for _ in range(net.num_vars)]
        for v in range(net.num_vars):
            for c in net.children[v]:
                slot = net.parents[c].index(v)
                self.child_links[v].append((c, int(net.parent_strides(c)[slot])))


def init_latent(net: Network, batch: ReplicatedBatch, seed: int, *context: int) -> None:
    """Fill every latent cell with a uniform state draw."""
    for v in range(net.num_vars):
        lanes = batch.missing_lanes[v]
        if lanes.size == 0:
            continue
        rng = substream(seed, "latent_init", *context, v)
        batch.values[v, lanes] = rng.integers(
            0, net.cardinalities[v], size=lanes.size, dtype=np.int32
        )


def _resample_variable(
    cache: _NetCache,
    tables: list[np.ndarray],
    values: np.ndarray,
    v: int,
    lanes: np.ndarray,
    sweep_seed: int,
) -> None:
    """Redraw X_v on the given lanes from its full conditional, in place."""
    card = int(cache.cardinalities[v])
    cfg = np.zeros(lanes.size, dtype=np.int64)
    for p, stride in zip(cache.parents[v], cache.strides[v]):
        cfg += values[p, lanes].astype(np.int64) * int(stride)
    weights = tables[v][cfg]  # fancy indexing copies

    for c, v_stride in cache.child_links[v]:
        child_states = values[c, lanes]
        cfg0 = np.zeros(lanes.size, dtype=np.int64)
        for p, stride in zip(cache.parents[c], cache.strides[c]):
            if p != v:
                cfg0 += values[p, lanes].astype(np.int64) * int(stride)
        child_table = tables[c]
        for s in range(card):
            weights[:, s] *= child_table[cfg0 + s * v_stride, child_states]

    norm = weights.sum(axis=1)
    if np.any(norm <= 0.0):
        raise ZeroSupport(f"all full-conditional weights of variable {v} are zero")
    u = substream(sweep_seed, "var", v).random(lanes.size)
    cum = np.cumsum(weights, axis=1)
    drawn = (u[:, None] * norm[:, None] > cum).sum(axis=1)
    values[v, lanes] = np.minimum(drawn, card - 1)


def gibbs_pass(
    net: Network,
    coloring: Coloring,
    cpts: CptSet,
    batch: ReplicatedBatch,
    sweep_seed: int,
    executor: ThreadPoolExecutor | None = None,
    cache: _NetCache | None = None,
) -> None:
    """Resample every latent cell exactly once, color group by color group.

    Color groups run strictly in order; within a group, variables may be
    resampled on any number of workers because they are pairwise non-adjacent
    in the moral graph. Observed cells are never touched.
    """
    if cache is None:
        cache = _NetCache(net)
    tables = cpts.tables
    for group in coloring.groups:
        todo = [v for v in group if batch.missing_lanes[v].size]
        if executor is not None and len(todo) > 1:
            list(
                executor.map(
                    lambda v: _resample_variable(
                        cache, tables, batch.values, v, batch.missing_lanes[v], sweep_seed
                    ),
                    todo,
                )
            )
        else:
            for v in todo:
                _resample_variable(
                    cache, tables, batch.values, v, batch.missing_lanes[v], sweep_seed
                )


def sweep(
    net: Network,
    coloring: Coloring,
    cpts: CptSet,
    batch: ReplicatedBatch,
    sweep_seed: int,
    executor: ThreadPoolExecutor | None = None,
    cache: _NetCache | None = None,
) -> CountSet:
    """One chromatic Gibbs sweep plus a count tally of the final assignments.

    The returned counts tally every cell (observed and latent) of every lane
    at its post-sweep state, weighted by lane weight.
    """
    if cache is None:
        cache = _NetCache(net)
    gibbs_pass(net, coloring, cpts, batch, sweep_seed, executor=executor, cache=cache)
    return tally_counts(net, batch.values, batch.lane_weights)


@dataclass(eq=False)
class SamplerState:
    """Mutable engine state between minibatch visits.

    In moving-sum mode the latent replica assignments of each minibatch
    persist between visits (stored sparsely, latent cells only), so each
    visit continues a burned-in chain. Exponential mode keeps no
    per-minibatch state at all: latents are drawn fresh at every visit,
    which is what bounds its memory by model plus minibatch size.
    """

    current_cpts: CptSet
    total_counts: CountSet
    per_minibatch_counts: dict[int, CountSet] = field(default_factory=dict)
    latent: dict[int, list[np.ndarray]] = field(default_factory=dict)
    pass_index: int = 0
    minibatch_index: int = 0
    batch: ReplicatedBatch | None = None  # lanes of the resident minibatch

    def check_moving_sum(self, rel_tol: float = 1e-6) -> None:
        """Assert total == sum of stored per-minibatch counts."""
        for i, total in enumerate(self.total_counts.tables):
            acc = np.zeros_like(total)
            for counts in self.per_minibatch_counts.values():
                acc += counts.tables[i]
            scale = max(acc.max(), 1.0)
            if np.max(np.abs(acc - total)) > rel_tol * scale:
                raise AssertionError(f"moving sum out of sync on variable {i}")


def update_moving_sum(state: SamplerState, mb_id: int, new_counts: CountSet) -> None:
    """Replace minibatch mb_id's contribution inside the running total."""
    previous = state.per_minibatch_counts.get(mb_id)
    if previous is not None:
        state.total_counts.add(previous, scale=-1.0)
    state.total_counts.add(new_counts)
    state.per_minibatch_counts[mb_id] = new_counts


def update_exponential(state: SamplerState, new_counts: CountSet, decay: float) -> None:
    """Fold counts into a decayed running sum; no per-minibatch storage."""
    if not 0.0 < decay <= 1.0:
        raise ValueError(f"decay must be in (0, 1], got {decay}")
    state.total_counts.scale(decay)
    state.total_counts.add(new_counts)


@dataclass
class TraceRecord:
    pass_index: int  # 1-based, recorded at end of pass
    seconds: float  # cumulative wall time since run start
    kl_avg: float | None
    vars_per_sec: float | None
    vars_sampled: int


@dataclass
class MemoryStats:
    """Allocation accounting for the streaming-memory contract."""

    model_bytes: int = 0
    accumulator_bytes: int = 0
    latent_bytes: int = 0
    batch_bytes: int = 0


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    memory: MemoryStats = field(default_factory=MemoryStats)


def as_source(data, minibatch_size: int):
    if isinstance(data, DataMatrix):
        return MatrixSource(data, minibatch_size)
    return data


def run(
    net: Network,
    data,
    cfg: SamplerConfig,
    truth: CptSet | None = None,
    threads: int = 1,
) -> tuple[CptSet, Trace]:
    """Train CPTs on a minibatch stream; returns the final CPTs and a trace.

    ``data`` is a DataMatrix or any re-iterable minibatch source exposing
    ``num_vars``, ``num_cases``, and ``minibatch_size``-sized blocks. When
    ``truth`` is given, each pass records the mean KL divergence between the
    true and current tables. Results are identical for any ``threads``.
    """
    from .metrics import kl_avg

    source = as_source(data, cfg.minibatch_size)
    if source.num_vars != net.num_vars:
        raise DimensionMismatch(
            f"data has {source.num_vars} variables, network has {net.num_vars}"
        )
    if source.num_cases == 0:
        raise EmptyData("data stream contains no cases")

    coloring = color_graph(moralize(net))
    cache = _NetCache(net)
    cards = cache.cardinalities[:, None]

    state = SamplerState(
        current_cpts=init_cpts(net, cfg.seed),
        total_counts=zero_counts(net),
    )
    trace = Trace()
    trace.memory.model_bytes = sum(t.nbytes for t in state.current_cpts.tables)
    trace.memory.accumulator_bytes = state.total_counts.nbytes

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    start = time.perf_counter()
    try:
        for pass_index in range(cfg.num_passes):
            pass_start = time.perf_counter()
            m = anneal_m(cfg.same_m, pass_index)
            state.pass_index = pass_index
            for mb in source:
                if np.any((mb.values >= cards) & (mb.values >= 0)):
                    raise ValidationError("data contains a state >= its variable's cardinality")
                state.minibatch_index = mb.index
                batch = replicate_minibatch(mb, m)
                state.batch = batch
                stored = state.latent.get(mb.index)
                if stored is not None and all(
                    s.size == batch.missing_lanes[v].size for v, s in enumerate(stored)
                ):
                    for v, kept in enumerate(stored):
                        batch.values[v, batch.missing_lanes[v]] = kept
                else:
                    init_latent(net, batch, cfg.seed, pass_index, mb.index)
                counts = None
                for s in range(cfg.sweeps_per_minibatch):
                    counts = sweep(
                        net,
                        coloring,
                        state.current_cpts,
                        batch,
                        derive_seed(cfg.seed, "sweep", pass_index, mb.index, s),
                        executor=executor,
                        cache=cache,
                    )
                if cfg.accumulator_mode == "moving_sum":
                    update_moving_sum(state, mb.index, counts)
                    state.latent[mb.index] = [
                        batch.values[v, batch.missing_lanes[v]].copy()
                        for v in range(net.num_vars)
                    ]
                else:
                    update_exponential(state, counts, cfg.exp_decay)
                if cfg.map_estimate:
                    state.current_cpts = mean_cpts(state.total_counts, cfg.prior)
                else:
                    state.current_cpts = sample_cpts(
                        state.total_counts,
                        cfg.prior,
                        derive_seed(cfg.seed, "cpt_update", pass_index, mb.index),
                    )
                batch_bytes = batch.values.nbytes + batch.lane_weights.nbytes
                trace.memory.batch_bytes = max(trace.memory.batch_bytes, batch_bytes)
                state.batch = None

            now = time.perf_counter()
            pass_seconds = now - pass_start
            vars_sampled = net.num_vars * source.num_cases * m * cfg.sweeps_per_minibatch
            trace.records.append(
                TraceRecord(
                    pass_index=pass_index + 1,
                    seconds=now - start,
                    kl_avg=kl_avg(truth, state.current_cpts) if truth is not None else None,
                    vars_per_sec=vars_sampled / pass_seconds if pass_seconds > 0 else None,
                    vars_sampled=vars_sampled,
                )
            )
    finally:
        if executor is not None:
            executor.shutdown()

    stored_counts = sum(c.nbytes for c in state.per_minibatch_counts.values())
    trace.memory.accumulator_bytes = state.total_counts.nbytes + stored_counts
    trace.memory.latent_bytes = sum(
        arr.nbytes for kept in state.latent.values() for arr in kept
    )
    trace.memory.model_bytes = sum(t.nbytes for t in state.current_cpts.tables)
    return state.current_cpts, trace
