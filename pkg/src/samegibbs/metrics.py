"""Evaluation: KL over CPT rows, absolute error, held-out prediction, ROC/AUC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .datagen import DataMatrix
from .errors import DegenerateLabels, DimensionMismatch, EmptyTrace
from .model import CptSet, check_congruent
from .network import Network

if TYPE_CHECKING:
    from .sampler import Trace


def kl_avg(truth: CptSet, estimate: CptSet) -> float:
    """Mean KL divergence over all CPT component rows.

    Each row (one parent configuration of one variable) contributes
    sum_x p(x) * ln(p(x) / q(x)). Terms with q(x) = 0 are skipped — this
    follows the reference protocol verbatim and can understate divergence
    when the estimate has hard zeros where the truth does not. Terms with
    p(x) = 0 contribute 0.
    """
    check_congruent(truth, estimate)
    total = 0.0
    rows = 0
    for p_table, q_table in zip(truth.tables, estimate.tables):
        include = (p_table > 0) & (q_table > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(include, p_table * np.log(p_table / q_table), 0.0)
        total += float(terms.sum())
        rows += p_table.shape[0]
    return total / rows


def avg_abs_error(truth: CptSet, estimate: CptSet) -> float:
    """Mean absolute difference over all CPT cells."""
    check_congruent(truth, estimate)
    total = sum(float(np.abs(p - q).sum()) for p, q in zip(truth.tables, estimate.tables))
    cells = sum(p.size for p in truth.tables)
    return total / cells


@dataclass
class RocCurve:
    """Threshold-sweep ROC points from (0,0) to (1,1) and their trapezoid area."""

    points: np.ndarray  # (k, 2) columns fpr, tpr
    auc: float


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Standard ROC with equal scores grouped into a single threshold step.

    The trapezoid over tie groups gives ties half credit, so the area equals
    the Mann-Whitney pair-counting statistic.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-D sequences")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    num_pos = int(labels.sum())
    num_neg = len(labels) - num_pos
    if num_pos == 0 or num_neg == 0:
        raise DegenerateLabels("need at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # last index of each tie group = one threshold step
    steps = np.flatnonzero(np.diff(sorted_scores))
    steps = np.append(steps, len(sorted_scores) - 1)
    tp = np.concatenate([[0], np.cumsum(sorted_labels)[steps]]).astype(np.int64)
    fp = np.concatenate([[0], np.cumsum(1 - sorted_labels)[steps]]).astype(np.int64)

    # Integer trapezoid numerator; one final division keeps the area exactly
    # equal to pair counting with half credit for ties.
    numerator = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = numerator / (2 * num_pos * num_neg)
    return RocCurve(points=np.column_stack([fp / num_neg, tp / num_pos]), auc=auc)


def predict_missing(
    net: Network,
    cpts: CptSet,
    context: DataMatrix,
    targets: Sequence[tuple[int, int]],
    num_samples: int,
    seed: int,
    burn_in: int = 0,
) -> np.ndarray:
    """Per-target state frequencies from Gibbs sweeps with frozen CPTs.

    The context's present entries stay clamped; every other cell is latent.
    Runs ``num_samples`` sweeps (after ``burn_in`` discarded ones) and returns
    an array (num_targets, max target cardinality) of state frequencies —
    an unbiased estimate of each target's conditional state probability.
    """
    from .network import color_graph, moralize
    from .rng import derive_seed
    from .sampler import Minibatch, _NetCache, gibbs_pass, init_latent, replicate_minibatch

    if context.num_vars != net.num_vars:
        raise DimensionMismatch(
            f"context has {context.num_vars} variables, network has {net.num_vars}"
        )
    if num_samples < 1:
        raise ValueError(f"num_samples must be >= 1, got {num_samples}")
    t_vars = np.asarray([t[0] for t in targets], dtype=np.int64)
    t_cases = np.asarray([t[1] for t in targets], dtype=np.int64)

    dense = context.to_dense()
    mb = Minibatch(
        index=0,
        values=dense,
        weights=np.ones(context.num_cases),
        num_real=context.num_cases,
    )
    batch = replicate_minibatch(mb, 1)
    init_latent(net, batch, seed, 0)
    cache = _NetCache(net)
    coloring = color_graph(moralize(net))

    max_card = int(max(net.cardinalities[v] for v in t_vars)) if len(t_vars) else 0
    freq = np.zeros((len(t_vars), max_card))
    rows = np.arange(len(t_vars))

    for it in range(burn_in + num_samples):
        gibbs_pass(net, coloring, cpts, batch, derive_seed(seed, "predict", it), cache=cache)
        if it >= burn_in:
            states = batch.values[t_vars, t_cases]
            np.add.at(freq, (rows, states), 1.0)
    return freq / num_samples


@dataclass
class ThroughputSummary:
    """Variables sampled per second, per pass and overall; None when unmeasurable."""

    per_pass: list[float | None]
    overall: float | None


def throughput(trace: "Trace") -> ThroughputSummary:
    """Summarize sampling throughput from a run trace."""
    if not trace.records:
        raise EmptyTrace("trace has no records")
    per_pass: list[float | None] = []
    previous = 0.0
    for record in trace.records:
        duration = record.seconds - previous
        per_pass.append(record.vars_sampled / duration if duration > 0 else None)
        previous = record.seconds
    total_time = trace.records[-1].seconds
    total_vars = sum(r.vars_sampled for r in trace.records)
    overall = total_vars / total_time if total_time > 0 else None
    return ThroughputSummary(per_pass=per_pass, overall=overall)
