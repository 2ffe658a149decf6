"""File formats: network/CPT JSON, coordinate data files, trace CSV, manifests.

Network files are JSON objects with ``cardinalities`` (list of ints),
``edges`` (list of [parent, child] pairs), and an optional ``cpts`` list
holding one row-major probability array per variable, rows indexed by the
ascending-parent mixed-radix convention. A CPT checkpoint is the same schema
with ``cpts`` present, so checkpoints are self-describing.

Data files are MatrixMarket-style coordinate text: a header line
``vars cases nnz`` followed by ``var case state`` triples, everything
1-based (a stored 0 never occurs, so absence unambiguously means missing).
Triples are written case-major; the streaming reader requires that order.
"""

from __future__ import annotations

import importlib.resources
import json
from pathlib import Path
from typing import Iterator

import numpy as np
import pandas as pd

from .datagen import DataMatrix
from .errors import IoError, ParseError
from .model import CptSet
from .network import Network, build_network
from .sampler import Minibatch, Trace, TraceRecord, num_minibatches, pad_block

_ROWS_PER_CHUNK = 1 << 18


def bundled_network_path(name: str) -> Path:
    """Path of a network file shipped inside the package."""
    resource = importlib.resources.files("samegibbs.data") / f"{name}.json"
    if not resource.is_file():
        raise IoError(f"no bundled network named {name!r}")
    return Path(str(resource))


def _load_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise IoError(f"file not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}") from exc


def load_network_file(path: str | Path) -> tuple[Network, CptSet | None]:
    """Read a network JSON file; returns the structure and its CPTs if present."""
    obj = _load_json(path)
    for key in ("cardinalities", "edges"):
        if key not in obj:
            raise ParseError(f"{path}: missing required field {key!r}")
    try:
        net = build_network(
            [int(c) for c in obj["cardinalities"]],
            [(int(p), int(c)) for p, c in obj["edges"]],
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed network fields: {exc}") from exc

    cpts = None
    if obj.get("cpts") is not None:
        raw = obj["cpts"]
        if len(raw) != net.num_vars:
            raise ParseError(
                f"{path}: cpts has {len(raw)} tables for {net.num_vars} variables"
            )
        tables = []
        for i, flat in enumerate(raw):
            rows, card = net.table_shape(i)
            arr = np.asarray(flat, dtype=np.float64)
            if arr.size != rows * card:
                raise ParseError(
                    f"{path}: cpts[{i}] has {arr.size} entries, expected {rows * card}"
                )
            tables.append(arr.reshape(rows, card))
        cpts = CptSet(tables)
        try:
            cpts.validate()
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    return net, cpts


def write_network_file(path: str | Path, net: Network, cpts: CptSet | None = None) -> None:
    obj: dict = {
        "cardinalities": list(net.cardinalities),
        "edges": sorted(
            [p, c] for c in range(net.num_vars) for p in net.parents[c]
        ),
    }
    if cpts is not None:
        obj["cpts"] = [t.ravel().tolist() for t in cpts.tables]
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def write_data(path: str | Path, data: DataMatrix) -> None:
    """Write coordinate triples, case-major, all indices and states 1-based."""
    frame = pd.DataFrame(
        {
            "var": data.var_idx + 1,
            "case": data.case_idx + 1,
            "state": data.values.astype(np.int64) + 1,
        }
    )
    with open(path, "w") as fh:
        fh.write(f"{data.num_vars} {data.num_cases} {data.nnz}\n")
        frame.to_csv(fh, sep=" ", header=False, index=False, lineterminator="\n")


def read_data(path: str | Path) -> DataMatrix:
    """Read a full coordinate file into memory."""
    path = Path(path)
    if not path.exists():
        raise IoError(f"file not found: {path}")
    with open(path) as fh:
        header = fh.readline()
        try:
            num_vars, num_cases, nnz = (int(tok) for tok in header.split())
        except ValueError as exc:
            raise ParseError(f"{path}:1: bad header {header.strip()!r}") from exc
        try:
            triples = pd.read_csv(
                fh, sep=" ", header=None, names=["var", "case", "state"], dtype=np.int64
            )
        except pd.errors.EmptyDataError:
            triples = pd.DataFrame({"var": [], "case": [], "state": []}, dtype=np.int64)
        except (ValueError, pd.errors.ParserError) as exc:
            raise ParseError(f"{path}: bad triple row: {exc}") from exc
    if len(triples) != nnz:
        raise ParseError(f"{path}: header promises {nnz} entries, found {len(triples)}")
    return _matrix_from_triples(path, num_vars, num_cases, triples)


def _matrix_from_triples(path: Path, num_vars: int, num_cases: int, triples: pd.DataFrame) -> DataMatrix:
    try:
        return DataMatrix(
            num_vars=num_vars,
            num_cases=num_cases,
            var_idx=triples["var"].to_numpy() - 1,
            case_idx=triples["case"].to_numpy() - 1,
            values=triples["state"].to_numpy() - 1,
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


class FileSource:
    """Streaming minibatch reader over a coordinate data file.

    Only one chunk of triples is resident at a time, so memory stays bounded
    by the minibatch size regardless of how many cases the file holds. The
    triples must be sorted by case (the layout write_data produces).
    """

    def __init__(self, path: str | Path, minibatch_size: int):
        self.path = Path(path)
        self.minibatch_size = minibatch_size
        if not self.path.exists():
            raise IoError(f"file not found: {self.path}")
        with open(self.path) as fh:
            header = fh.readline()
        try:
            self.num_vars, self.num_cases, self.nnz = (int(t) for t in header.split())
        except ValueError as exc:
            raise ParseError(f"{self.path}:1: bad header {header.strip()!r}") from exc

    def __iter__(self) -> Iterator[Minibatch]:
        size = self.minibatch_size
        total = num_minibatches(self.num_cases, size)
        pending: list[pd.DataFrame] = []
        index = 0
        last_case = 1

        def _emit(buffered: pd.DataFrame | None, index: int) -> Minibatch:
            lo = index * size
            hi = min(lo + size, self.num_cases)
            block = np.full((self.num_vars, hi - lo), -1, dtype=np.int32)
            if buffered is not None and len(buffered):
                v = buffered["var"].to_numpy() - 1
                c = buffered["case"].to_numpy() - 1 - lo
                s = buffered["state"].to_numpy() - 1
                if v.min() < 0 or v.max() >= self.num_vars or s.min() < 0:
                    raise ParseError(f"{self.path}: triple out of range in minibatch {index}")
                block[v, c] = s
            return pad_block(index, block, size)

        def _merge(parts: list[pd.DataFrame]) -> pd.DataFrame | None:
            if not parts:
                return None
            return pd.concat(parts) if len(parts) > 1 else parts[0]

        try:
            reader = pd.read_csv(
                self.path,
                sep=" ",
                header=None,
                names=["var", "case", "state"],
                dtype=np.int64,
                skiprows=1,
                chunksize=_ROWS_PER_CHUNK,
            )
        except pd.errors.EmptyDataError:  # header-only file: every cell missing
            reader = None

        if reader is not None:
            with reader:
                for chunk in reader:
                    if not len(chunk):
                        continue
                    cases = chunk["case"].to_numpy()
                    if cases.min() < last_case or np.any(np.diff(cases) < 0):
                        raise ParseError(f"{self.path}: triples are not sorted by case")
                    if cases.max() > self.num_cases:
                        raise ParseError(f"{self.path}: case id beyond header count")
                    last_case = int(cases.max())
                    while index < total and cases.max() > (index + 1) * size:
                        boundary = (index + 1) * size  # 1-based cases <= boundary belong here
                        split = int(np.searchsorted(cases, boundary, side="right"))
                        pending.append(chunk.iloc[:split])
                        yield _emit(_merge(pending), index)
                        pending = []
                        chunk = chunk.iloc[split:]
                        cases = cases[split:]
                        index += 1
                    if len(chunk):
                        pending.append(chunk)

        while index < total:
            yield _emit(_merge(pending), index)
            pending = []
            index += 1


def write_trace(path: str | Path, trace: Trace) -> None:
    with open(path, "w") as fh:
        fh.write("pass,seconds,kl_avg,vars_per_sec\n")
        for r in trace.records:
            kl = "" if r.kl_avg is None else repr(r.kl_avg)
            vps = "" if r.vars_per_sec is None else repr(r.vars_per_sec)
            fh.write(f"{r.pass_index},{r.seconds!r},{kl},{vps}\n")


def read_trace(path: str | Path) -> Trace:
    trace = Trace()
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != "pass,seconds,kl_avg,vars_per_sec":
            raise ParseError(f"{path}:1: unexpected trace header")
        for line in fh:
            pass_ix, seconds, kl, vps = line.rstrip("\n").split(",")
            trace.records.append(
                TraceRecord(
                    pass_index=int(pass_ix),
                    seconds=float(seconds),
                    kl_avg=float(kl) if kl else None,
                    vars_per_sec=float(vps) if vps else None,
                    vars_sampled=0,
                )
            )
    return trace


def write_manifest(path: str | Path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_manifest(path: str | Path) -> dict:
    return _load_json(path)
