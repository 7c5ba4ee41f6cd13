"""Empirical risk minimization and projection coverings of a class."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from multidist.model import (
    Hypothesis,
    HypothesisClass,
    LabeledExample,
    MdlInstance,
    RandomizedHypothesis,
    SampleLedger,
    brute_force_vc,
    mixture_sample_many,
    oracle_sample_many,
)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A drawn sample, kept as parallel (points, labels) arrays."""

    points: np.ndarray
    labels: np.ndarray
    source: str = ""

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def from_examples(cls, examples: Sequence[LabeledExample], source: str = "") -> "SampleBatch":
        return cls(np.array([z.point for z in examples], dtype=np.int64),
                   np.array([z.label for z in examples], dtype=np.int64),
                   source)


@dataclass(frozen=True, eq=False)
class CoverResult:
    """Representatives of the distinct behaviors on the witness points."""

    subclass: HypothesisClass
    witness_points: list[int]
    behavior_count: int
    representative_ids: list[int]  # ids in the original class


def empirical_loss(h: Hypothesis | RandomizedHypothesis, batch: SampleBatch) -> float:
    """Mean 0-1 loss over the batch (expected loss for mixtures)."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    if isinstance(h, Hypothesis):
        return float((h.labels[batch.points] != batch.labels).mean())
    pm = h.prediction_mean()
    per = np.where(batch.labels == 1, 1.0 - pm[batch.points], pm[batch.points])
    return float(per.mean())


def erm(hclass: HypothesisClass, batch: SampleBatch) -> Hypothesis:
    """Exhaustive empirical minimizer; ties broken by lowest id."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    if len(hclass) == 0:
        raise ValueError("empty class")
    errors = (hclass.matrix[:, batch.points] != batch.labels).mean(axis=1)
    return hclass.hypotheses[int(np.argmin(errors))]


def agnostic_sample_size(d: int, epsilon: float, alpha: float, delta: float,
                         C1: float = 4.0) -> int:
    return math.ceil(C1 * (d + math.log(1.0 / delta)) / (epsilon * alpha))


def agnostic_learn(instance: MdlInstance, hclass: HypothesisClass,
                   target: int | Sequence[float], epsilon: float, alpha: float,
                   delta: float, C1: float, rng: np.random.Generator,
                   ledger: SampleLedger, vc_dim: int | None = None) -> Hypothesis:
    """ERM on a fresh ledgered sample sized for an agnostic guarantee.

    `target` is either an oracle index or mixture weights over the oracles.
    The (epsilon, alpha, delta) guarantee is statistical; the postcondition
    here is only the exact sample count and the exact ERM.
    """
    if not 0 < epsilon < 0.5 or not 0 < alpha < 0.5:
        raise ValueError("epsilon and alpha must be in (0, 0.5)")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    d = brute_force_vc(hclass, instance.domain_size) if vc_dim is None else vc_dim
    count = agnostic_sample_size(d, epsilon, alpha, delta, C1)
    if isinstance(target, (int, np.integer)):
        points, labels = oracle_sample_many(instance, int(target), count, rng, ledger)
        source = f"oracle:{int(target)}"
    else:
        points, labels = mixture_sample_many(instance, target, count, rng, ledger)
        source = "mixture"
    return erm(hclass, SampleBatch(points, labels, source))


def projection_cover(hclass: HypothesisClass, points: Sequence[int]) -> CoverResult:
    """Group hypotheses by their labels on the points; keep the lowest id of
    each group.  Distinct behaviors are in bijection with the subclass."""
    pts = sorted(set(int(p) for p in points))
    if not pts:
        raise ValueError("cover needs at least one witness point")
    if max(pts) >= hclass.domain_size or min(pts) < 0:
        raise ValueError("witness point outside the class domain")
    projected = hclass.matrix[:, pts]
    seen: dict[bytes, int] = {}
    reps: list[int] = []
    for i in range(len(hclass)):
        key = projected[i].tobytes()
        if key not in seen:
            seen[key] = i
            reps.append(i)
    subclass = HypothesisClass([hclass.matrix[i] for i in reps], "explicit")
    return CoverResult(subclass=subclass, witness_points=pts,
                       behavior_count=len(reps), representative_ids=reps)


def cover_sample_size(d: int, epsilon: float, delta: float, C: float = 4.0) -> int:
    """Number of witness draws needed for an epsilon-net by projection."""
    if d < 1:
        raise ValueError("d must be ≥ 1")
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must be in (0, 1)")
    return math.ceil(C * (d * math.log(d / epsilon) + math.log(1.0 / delta)) / epsilon)
