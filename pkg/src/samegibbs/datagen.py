"""Synthetic data: forward sampling, random masking, and horizontal replication."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyData
from .model import CptSet
from .network import Network
from .rng import substream


@dataclass(eq=False)
class DataMatrix:
    """Sparse variables-by-cases observation matrix; absent entries are missing.

    Entries are kept in case-major order (case, then variable). States are
    0-based ints strictly below the owning variable's cardinality.
    """

    num_vars: int
    num_cases: int
    var_idx: np.ndarray
    case_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.var_idx = np.asarray(self.var_idx, dtype=np.int64)
        self.case_idx = np.asarray(self.case_idx, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.int32)
        if not (len(self.var_idx) == len(self.case_idx) == len(self.values)):
            raise ValueError("entry arrays must have equal length")
        if self.nnz:
            if self.var_idx.min() < 0 or self.var_idx.max() >= self.num_vars:
                raise ValueError("variable index out of range")
            if self.case_idx.min() < 0 or self.case_idx.max() >= self.num_cases:
                raise ValueError("case index out of range")
            if self.values.min() < 0:
                raise ValueError("states must be nonnegative")
        order = np.lexsort((self.var_idx, self.case_idx))
        self.var_idx = self.var_idx[order]
        self.case_idx = self.case_idx[order]
        self.values = self.values[order]
        keys = self.case_idx * self.num_vars + self.var_idx
        if self.nnz and np.any(np.diff(keys) == 0):
            raise ValueError("duplicate (var, case) entry")

    @property
    def nnz(self) -> int:
        return len(self.values)

    @property
    def density(self) -> float:
        cells = self.num_vars * self.num_cases
        return self.nnz / cells if cells else 0.0

    @classmethod
    def from_dense(cls, dense: np.ndarray, missing: int = -1) -> "DataMatrix":
        var_idx, case_idx = np.nonzero(dense != missing)
        return cls(
            num_vars=dense.shape[0],
            num_cases=dense.shape[1],
            var_idx=var_idx,
            case_idx=case_idx,
            values=dense[var_idx, case_idx],
        )

    def to_dense(self, missing: int = -1) -> np.ndarray:
        dense = np.full((self.num_vars, self.num_cases), missing, dtype=np.int32)
        dense[self.var_idx, self.case_idx] = self.values
        return dense

    def dense_block(self, lo: int, hi: int) -> np.ndarray:
        """Dense (num_vars, hi-lo) slice of cases [lo, hi); -1 marks missing."""
        left = np.searchsorted(self.case_idx, lo)
        right = np.searchsorted(self.case_idx, hi)
        block = np.full((self.num_vars, hi - lo), -1, dtype=np.int32)
        sl = slice(left, right)
        block[self.var_idx[sl], self.case_idx[sl] - lo] = self.values[sl]
        return block

    def entry_dict(self) -> dict[tuple[int, int], int]:
        return {
            (int(v), int(c)): int(s)
            for v, c, s in zip(self.var_idx, self.case_idx, self.values)
        }


def forward_sample(net: Network, cpts: CptSet, num_cases: int, seed: int) -> DataMatrix:
    """Sample complete cases in topological order from the given CPTs."""
    if num_cases <= 0:
        raise EmptyData(f"num_cases must be >= 1, got {num_cases}")
    dense = np.zeros((net.num_vars, num_cases), dtype=np.int32)
    for v in net.topo_order:
        strides = net.parent_strides(v)
        configs = np.zeros(num_cases, dtype=np.int64)
        for j, p in enumerate(net.parents[v]):
            configs += dense[p].astype(np.int64) * strides[j]
        probs = cpts.tables[v][configs]
        u = substream(seed, "forward_sample", v).random(num_cases)
        cum = np.cumsum(probs, axis=1)
        dense[v] = np.minimum(
            (u[:, None] > cum).sum(axis=1), net.cardinalities[v] - 1
        )
    return DataMatrix.from_dense(dense)


def mask(data: DataMatrix, hide_fraction: float, seed: int) -> DataMatrix:
    """Independently remove each present entry with probability hide_fraction."""
    if not 0.0 <= hide_fraction <= 1.0:
        raise ValueError(f"hide_fraction must be in [0, 1], got {hide_fraction}")
    keep = substream(seed, "mask").random(data.nnz) >= hide_fraction
    return DataMatrix(
        num_vars=data.num_vars,
        num_cases=data.num_cases,
        var_idx=data.var_idx[keep],
        case_idx=data.case_idx[keep],
        values=data.values[keep],
    )


def replicate(data: DataMatrix, times: int) -> DataMatrix:
    """Tile the cases horizontally ``times`` times; variables unchanged."""
    if times < 1:
        raise ValueError(f"times must be >= 1, got {times}")
    offsets = np.repeat(np.arange(times, dtype=np.int64) * data.num_cases, data.nnz)
    return DataMatrix(
        num_vars=data.num_vars,
        num_cases=data.num_cases * times,
        var_idx=np.tile(data.var_idx, times),
        case_idx=np.tile(data.case_idx, times) + offsets,
        values=np.tile(data.values, times),
    )


def train_test_split(data: DataMatrix, train_fraction: float, seed: int) -> tuple[DataMatrix, DataMatrix]:
    """Randomly partition the present entries; both sides keep the full shape."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    in_train = substream(seed, "train_test_split").random(data.nnz) < train_fraction

    def _subset(keep: np.ndarray) -> DataMatrix:
        return DataMatrix(
            num_vars=data.num_vars,
            num_cases=data.num_cases,
            var_idx=data.var_idx[keep],
            case_idx=data.case_idx[keep],
            values=data.values[keep],
        )

    return _subset(in_train), _subset(~in_train)
