"""Statistics for manual evaluation: label aggregation, agreement, ranks.

Crowd judgments arrive as a sparse item x worker matrix. Aggregation
follows the classic Bayesian annotator-competence model: each
annotation either copies the item's true label (with worker-specific
probability) or is drawn from the worker's private spam distribution.
EM fits competences and spam distributions; several random restarts
guard against local optima, and the best restart by log-likelihood
wins (ties broken by restart index, so results are reproducible).

Also here: Cohen's kappa, Krippendorff's alpha in the pairable-values
formulation, an exact/approximate Wilcoxon signed-rank test, mean
ranks over ranking annotations, and Jaccard overlap of type sets.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import OptimizationType


@dataclass(frozen=True)
class Scale:
    kind: str  # "categorical" | "ordinal"
    bounds: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in ("categorical", "ordinal"):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        if self.kind == "ordinal" and self.bounds is not None:
            lo, hi = self.bounds
            if lo >= hi:
                raise ValueError(f"bad ordinal bounds {self.bounds}")


@dataclass(frozen=True)
class AnnotationMatrix:
    """Sparse item x worker label matrix with scale metadata."""

    items: tuple[str, ...]
    workers: tuple[str, ...]
    labels: Mapping[tuple[str, str], object]
    scale: Scale = Scale("categorical")

    @classmethod
    def from_labels(
        cls, labels: Mapping[tuple[str, str], object], scale: Scale = Scale("categorical")
    ) -> "AnnotationMatrix":
        items = tuple(sorted({item for item, _ in labels}))
        workers = tuple(sorted({worker for _, worker in labels}))
        return cls(items=items, workers=workers, labels=dict(labels), scale=scale)

    def __post_init__(self):
        if not self.labels:
            raise ValueError("empty annotation matrix")
        annotated = {item for item, _ in self.labels}
        for item in self.items:
            if item not in annotated:
                raise ValueError(f"item {item!r} has zero labels")
        if self.scale.kind == "ordinal" and self.scale.bounds is not None:
            lo, hi = self.scale.bounds
            for (item, worker), value in self.labels.items():
                if not isinstance(value, (int, float)) or not lo <= value <= hi:
                    raise ValueError(
                        f"label {value!r} for ({item}, {worker}) outside ordinal bounds"
                    )

    def item_labels(self, item: str) -> list:
        return [v for (it, _), v in sorted(self.labels.items()) if it == item]


@dataclass(frozen=True)
class MaceResult:
    competence: dict[str, float]
    posterior_labels: dict[str, object]
    log_likelihood: float


@dataclass(frozen=True)
class RankAnnotation:
    item: str
    worker: str
    ranking: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking) or not self.ranking:
            raise ValueError(f"ranking {self.ranking!r} is not a permutation")


# ---------------------------------------------------------------------------
# MACE-style aggregation

def mace_aggregate(
    matrix: AnnotationMatrix,
    iterations: int = 50,
    restarts: int = 10,
    smoothing: float = 0.1,
    seed: int = 0,
) -> MaceResult:
    """EM fit of the annotator-competence model; best of ``restarts``.

    Competence for worker j is the fitted probability that one of
    their annotations copies the true label rather than their spam
    distribution. Add-k smoothing (k = ``smoothing``) keeps both
    parameter families interior. Deterministic for a fixed seed.
    """
    if iterations < 1 or restarts < 1:
        raise ValueError("iterations and restarts must be >= 1")

    items = matrix.items
    workers = matrix.workers
    label_values = sorted({v for v in matrix.labels.values()}, key=lambda v: (str(type(v)), v))
    item_index = {item: i for i, item in enumerate(items)}
    worker_index = {w: i for i, w in enumerate(workers)}
    label_index = {v: i for i, v in enumerate(label_values)}

    entries = sorted(matrix.labels.items())
    a_item = np.array([item_index[it] for (it, _), _ in entries], dtype=np.int64)
    a_worker = np.array([worker_index[w] for (_, w), _ in entries], dtype=np.int64)
    a_label = np.array([label_index[v] for _, v in entries], dtype=np.int64)

    n_items, n_workers, n_labels = len(items), len(workers), len(label_values)
    n_ann = len(entries)
    arange_ann = np.arange(n_ann)
    n_per_worker = np.bincount(a_worker, minlength=n_workers).astype(np.float64)

    def e_step(
        theta: np.ndarray, xi: np.ndarray
    ) -> tuple[np.ndarray, float, np.ndarray]:
        # per-annotation mixture density for each candidate true label
        spam_part = (1.0 - theta[a_worker]) * xi[a_worker, a_label]
        mix = np.repeat(spam_part[:, None], n_labels, axis=1)
        mix[arange_ann, a_label] += theta[a_worker]
        item_ll = np.full((n_items, n_labels), -math.log(n_labels))
        np.add.at(item_ll, a_item, np.log(mix))
        norm = np.logaddexp.reduce(item_ll, axis=1)
        posterior = np.exp(item_ll - norm[:, None])
        log_lik = float(norm.sum())
        if not math.isfinite(log_lik):
            raise ValueError("non-finite likelihood during EM")
        # expected probability each annotation copied the true label
        honest = posterior[a_item, a_label] * theta[a_worker] / mix[arange_ann, a_label]
        return posterior, log_lik, honest

    def run_em(theta: np.ndarray, xi: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        for _ in range(iterations):
            _, _, honest = e_step(theta, xi)
            honest_per_worker = np.bincount(a_worker, weights=honest, minlength=n_workers)
            theta = (honest_per_worker + smoothing) / (n_per_worker + 2.0 * smoothing)
            spam_counts = np.zeros((n_workers, n_labels))
            np.add.at(spam_counts, (a_worker, a_label), 1.0 - honest)
            xi = (spam_counts + smoothing) / (
                spam_counts.sum(axis=1, keepdims=True) + smoothing * n_labels
            )
        posterior, log_lik, _ = e_step(theta, xi)
        return log_lik, posterior, theta

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        theta0 = rng.uniform(0.3, 0.95, size=n_workers)
        xi0 = rng.uniform(0.5, 1.5, size=(n_workers, n_labels))
        xi0 /= xi0.sum(axis=1, keepdims=True)
        log_lik, posterior, theta = run_em(theta0, xi0)
        if best is None or log_lik > best[0]:
            best = (log_lik, posterior, theta)

    assert best is not None
    log_lik, posterior, theta = best
    posterior_labels = {
        item: label_values[int(np.argmax(posterior[i]))] for item, i in item_index.items()
    }
    competence = {worker: float(theta[worker_index[worker]]) for worker in workers}
    return MaceResult(
        competence=competence, posterior_labels=posterior_labels, log_likelihood=log_lik
    )


def competent_workers(result: MaceResult, threshold: float = 0.3) -> list[str]:
    """Workers whose fitted competence strictly exceeds ``threshold``."""
    return sorted(w for w, c in result.competence.items() if c > threshold)


# ---------------------------------------------------------------------------
# agreement coefficients

def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """(p_o - p_e) / (1 - p_e) with marginal-product chance agreement."""
    if len(labels_a) != len(labels_b):
        raise ValueError(f"length mismatch: {len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty label lists")
    p_o = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    marg_a = Counter(labels_a)
    marg_b = Counter(labels_b)
    p_e = sum(marg_a[lab] * marg_b.get(lab, 0) for lab in marg_a) / (n * n)
    if abs(1.0 - p_e) < 1e-12:
        raise ValueError("chance agreement is 1; kappa is undefined")
    return (p_o - p_e) / (1.0 - p_e)


def _ordinal_ranks(values: Sequence, scale: Scale) -> dict:
    """Rank positions used by the ordinal distance.

    With declared bounds the rank is the value's position on the full
    scale (so unobserved scale points still count); otherwise it is
    the position among the observed distinct values.
    """
    if scale.bounds is not None:
        return {v: float(v) for v in values}
    ordered = sorted(values)
    return {v: float(i) for i, v in enumerate(ordered, start=1)}


def krippendorff_alpha(matrix: AnnotationMatrix, level: str = "nominal") -> float:
    """1 - D_o/D_e over pairable values; alpha = 1 when D_e = 0.

    Items with fewer than two annotations cannot produce coincidences
    and are ignored. Distances: nominal 0/1, ordinal squared rank
    difference (see _ordinal_ranks), interval squared value difference.
    """
    if level not in ("nominal", "ordinal", "interval"):
        raise ValueError(f"unknown level {level!r}")

    by_item: dict[str, list] = {}
    for (item, _), value in matrix.labels.items():
        by_item.setdefault(item, []).append(value)
    units = [vals for vals in by_item.values() if len(vals) >= 2]
    if not units:
        raise ValueError("no pairable values (no item has two or more annotations)")

    values = sorted({v for vals in units for v in vals})
    index = {v: i for i, v in enumerate(values)}
    k = len(values)

    if level == "nominal":
        dist = 1.0 - np.eye(k)
    else:
        if level == "ordinal":
            pos = _ordinal_ranks(values, matrix.scale)
            coords = np.array([pos[v] for v in values], dtype=np.float64)
        else:
            coords = np.array([float(v) for v in values], dtype=np.float64)
        dist = (coords[:, None] - coords[None, :]) ** 2

    coincidence = np.zeros((k, k))
    for vals in units:
        m = len(vals)
        idx = [index[v] for v in vals]
        for a in range(m):
            for b in range(m):
                if a != b:
                    coincidence[idx[a], idx[b]] += 1.0 / (m - 1)

    n_c = coincidence.sum(axis=1)
    n = n_c.sum()
    d_o = float((coincidence * dist).sum()) / n
    expected = np.outer(n_c, n_c) * dist  # diagonal distance is 0 either way
    d_e = float(expected.sum()) / (n * (n - 1.0))
    if d_e == 0.0:
        return 1.0
    return 1.0 - d_o / d_e


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank

def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties getting the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def _exact_p_leq(scaled_ranks: Sequence[int], threshold: int) -> float:
    """P(W+ <= threshold/2) when each rank's sign is a fair coin.

    ``scaled_ranks`` are doubled so average ranks become integers; the
    subset-sum distribution is counted by dynamic programming.
    """
    total = sum(scaled_ranks)
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in scaled_ranks:
        counts[r:] += counts[:-r].copy()
    limit = min(threshold, total)
    return float(counts[: limit + 1].sum() / 2.0 ** len(scaled_ranks))


def wilcoxon_signed_rank(
    x: Sequence[float], y: Sequence[float], zero_policy: str = "drop"
) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    The statistic is min(W+, W-) over the ranks of |x - y| with
    average ranks for ties. Zero differences are discarded before
    ranking under ``"drop"`` (the classic treatment); under
    ``"pratt"`` they participate in the ranking and are discarded
    from the rank sums afterwards. The p-value uses the exact
    sign-flip distribution for n <= 25 retained differences and a
    normal approximation with continuity correction beyond that.
    """
    if zero_policy not in ("drop", "pratt"):
        raise ValueError(f"unknown zero_policy {zero_policy!r}")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    if zero_policy == "drop":
        d = d[d != 0.0]
        if d.size == 0:
            raise ValueError("all differences are zero")
        ranks = _average_ranks(np.abs(d))
        retained = ranks
    else:
        if np.all(d == 0.0):
            raise ValueError("all differences are zero")
        ranks = _average_ranks(np.abs(d))
        nonzero = d != 0.0
        retained = ranks[nonzero]
        d = d[nonzero]

    w_plus = float(retained[d > 0.0].sum())
    w_minus = float(retained[d < 0.0].sum())
    statistic = min(w_plus, w_minus)

    n = d.size
    if n <= 25:
        scaled = [int(round(2.0 * r)) for r in retained]
        p = 2.0 * _exact_p_leq(scaled, int(round(2.0 * statistic)))
    else:
        mu = float(retained.sum()) / 2.0
        sigma = math.sqrt(float((retained**2).sum()) / 4.0)
        if sigma == 0.0:
            raise ValueError("degenerate rank distribution")
        z = (statistic - mu + 0.5) / sigma
        p = 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0))
    return statistic, min(p, 1.0)


# ---------------------------------------------------------------------------
# ranks and type overlap

def mean_rank(annotations: Sequence[RankAnnotation]) -> dict[str, float]:
    """Per strategy, the mean 1-based rank across all annotations."""
    if not annotations:
        raise ValueError("no rank annotations")
    universe = frozenset(annotations[0].ranking)
    sums: dict[str, float] = {name: 0.0 for name in universe}
    for ann in annotations:
        if frozenset(ann.ranking) != universe:
            raise ValueError(
                f"annotation for item {ann.item!r} ranks a different strategy set"
            )
        for position, name in enumerate(ann.ranking, start=1):
            sums[name] += position
    return {name: sums[name] / len(annotations) for name in sorted(universe)}


def jaccard_types(
    set_a: frozenset[OptimizationType] | set, set_b: frozenset[OptimizationType] | set
) -> float:
    """|intersection| / |union|; 1.0 when both sets are empty."""
    a, b = set(set_a), set(set_b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


# ---------------------------------------------------------------------------
# annotation file loading

# Likert fields and their ordinal bounds.
FIELD_SCALES: dict[str, Scale] = {
    "fluency": Scale("ordinal", (1, 3)),
    "meaning": Scale("ordinal", (1, 5)),
    "argument": Scale("ordinal", (1, 5)),
}


def load_annotations(
    path,
) -> tuple[dict[str, AnnotationMatrix], list[RankAnnotation]]:
    """Read an annotations.jsonl file of Likert and ranking records.

    Likert records: ``{"item", "worker", "field", "value"}`` with field
    one of fluency/meaning/argument. Ranking records: ``{"item",
    "worker", "ranking": [...]}``. Returns one AnnotationMatrix per
    field plus the list of rank annotations.
    """
    likert: dict[str, dict[tuple[str, str], int]] = {}
    rankings: list[RankAnnotation] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {line_no}: malformed JSON ({exc.msg})") from None
            if "ranking" in rec:
                for key in ("item", "worker"):
                    if key not in rec:
                        raise ValueError(f"line {line_no}: missing key {key!r}")
                rankings.append(
                    RankAnnotation(
                        item=str(rec["item"]),
                        worker=str(rec["worker"]),
                        ranking=tuple(str(s) for s in rec["ranking"]),
                    )
                )
                continue
            for key in ("item", "worker", "field", "value"):
                if key not in rec:
                    raise ValueError(f"line {line_no}: missing key {key!r}")
            fld = rec["field"]
            if fld not in FIELD_SCALES:
                raise ValueError(f"line {line_no}: unknown field {fld!r}")
            key_pair = (str(rec["item"]), str(rec["worker"]))
            bucket = likert.setdefault(fld, {})
            if key_pair in bucket:
                raise ValueError(
                    f"line {line_no}: duplicate {fld} annotation for {key_pair}"
                )
            value = rec["value"]
            lo, hi = FIELD_SCALES[fld].bounds  # type: ignore[misc]
            if not isinstance(value, int) or not lo <= value <= hi:
                raise ValueError(
                    f"line {line_no}: {fld} value {value!r} outside [{lo}, {hi}]"
                )
            bucket[key_pair] = value
    matrices = {
        fld: AnnotationMatrix.from_labels(labels, scale=FIELD_SCALES[fld])
        for fld, labels in likert.items()
    }
    return matrices, rankings
