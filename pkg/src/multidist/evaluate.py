"""Exact ground truth: brute-force optima, worst-case losses, generators.

This is the only module allowed to read distribution masses directly.
Algorithms are audited against the quantities computed here; they never
call into this module themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from multidist.model import (
    GuardError,
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    MdlInstance,
    RandomizedHypothesis,
    exact_loss,
    make_rng,
)

OPT_CELL_GUARD = 10_000_000
MINORITY_MAX_K = 12


@dataclass(frozen=True)
class OptResult:
    """Exact min-max optimum over deterministic hypotheses."""

    opt_value: float
    argmin_id: int
    loss_matrix: np.ndarray  # shape (k, |class|)


def loss_matrix(instance: MdlInstance) -> np.ndarray:
    """Exact per-(distribution, hypothesis) loss table."""
    hmat = instance.hypothesis_class.matrix
    cells = len(instance.hypothesis_class) * sum(
        d.support_size for d in instance.distributions)
    if cells > OPT_CELL_GUARD:
        raise GuardError(f"loss matrix would need {cells} cell evaluations")
    rows = []
    for dist in instance.distributions:
        errs = hmat[:, dist.points] != dist.labels
        rows.append(errs @ dist.probs)
    return np.array(rows, dtype=np.float64)


def brute_force_opt(instance: MdlInstance) -> OptResult:
    """OPT = min over hypotheses of max over distributions, exactly."""
    matrix = loss_matrix(instance)
    worst = matrix.max(axis=0)
    argmin = int(np.argmin(worst))  # first minimum, i.e. lowest id
    return OptResult(float(worst[argmin]), argmin, matrix)


def _per_distribution_losses(instance: MdlInstance,
                             h: Hypothesis | RandomizedHypothesis) -> np.ndarray:
    return np.array([exact_loss(d, h) for d in instance.distributions])


def max_loss(instance: MdlInstance,
             h: Hypothesis | RandomizedHypothesis) -> tuple[float, int]:
    """Exact worst-case loss of h and the index of a worst distribution."""
    losses = _per_distribution_losses(instance, h)
    worst = int(np.argmax(losses))
    return float(losses[worst]), worst


@dataclass(frozen=True)
class EpsOptimality:
    ok: bool
    slack: float
    max_loss: float
    worst_index: int
    opt: float
    epsilon: float
    alpha: float


def check_eps_optimal(instance: MdlInstance, h: Hypothesis | RandomizedHypothesis,
                      epsilon: float, alpha: float = 0.0,
                      opt: OptResult | None = None) -> EpsOptimality:
    """Is max-loss <= epsilon + (1+alpha)*OPT?  Negative slack means no.

    Randomized outputs may beat the deterministic benchmark, so the slack
    can exceed epsilon.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must be in [0, 1)")
    if opt is None:
        opt = brute_force_opt(instance)
    value, worst = max_loss(instance, h)
    bound = epsilon + (1.0 + alpha) * opt.opt_value
    return EpsOptimality(ok=value <= bound, slack=float(bound - value),
                         max_loss=value, worst_index=worst,
                         opt=opt.opt_value, epsilon=epsilon, alpha=alpha)


def smooth_argmax(losses: Sequence[float], cap: float) -> tuple[float, np.ndarray]:
    """Exact maximum of <w, losses> over the capped simplex {w : w_i <= cap}.

    Greedy is exact for a linear objective: pour mass `cap` onto the largest
    coordinates until the unit budget runs out.  Ties go to the lowest index.
    """
    v = np.asarray(losses, dtype=np.float64)
    k = len(v)
    if k < 1:
        raise ValueError("need at least one coordinate")
    if cap <= 0 or cap * k < 1.0 - 1e-12:
        raise ValueError(f"infeasible cap {cap} for dimension {k}")
    order = np.argsort(-v, kind="stable")
    weights = np.zeros(k, dtype=np.float64)
    remaining = 1.0
    for idx in order:
        take = min(cap, remaining)
        weights[idx] = take
        remaining -= take
        if remaining <= 0.0:
            break
    return float(weights @ v), weights


def minority_bound_check(instance: MdlInstance,
                         h: Hypothesis | RandomizedHypothesis) -> bool:
    """Does some majority subset's worst loss stay under the 2-smooth max?

    Exhaustive over all subsets containing at least half the distributions;
    a False on any input is a build-breaking bug, not data.
    """
    k = instance.k
    if k > MINORITY_MAX_K:
        raise GuardError(f"minority check guard: k <= {MINORITY_MAX_K}")
    losses = _per_distribution_losses(instance, h)
    cap = min(1.0, 2.0 / k)
    smooth_value, _ = smooth_argmax(losses, cap)
    for mask in range(1, 1 << k):
        size = mask.bit_count()
        if 2 * size < k:
            continue
        subset_max = max(losses[i] for i in range(k) if mask >> i & 1)
        if subset_max <= smooth_value + 1e-12:
            return True
    return False


# ---------------------------------------------------------------------------
# instance generators

GENERATOR_FAMILIES = ("random", "realizable", "opposed_labels", "shared_bayes")


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for a generated instance; same spec -> identical instance."""

    family: str
    n: int
    k: int
    class_size: int
    seed: int
    class_family: str = "explicit"

    def __post_init__(self) -> None:
        if self.family not in GENERATOR_FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be ≥ 1")
        if self.k < 1:
            raise ValueError("k must be ≥ 1")
        if self.class_size < 1:
            raise ValueError("class size must be ≥ 1")
        if self.family == "opposed_labels" and self.k < 2:
            raise ValueError("opposed_labels needs k ≥ 2")


def _random_class(spec: InstanceSpec, rng: np.random.Generator) -> HypothesisClass:
    if spec.class_family != "explicit":
        return HypothesisClass.from_family(spec.class_family, spec.n)
    want = min(spec.class_size, 2 ** spec.n)
    vectors: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    attempts = 0
    while len(vectors) < want and attempts < 200 * want:
        vec = tuple(int(b) for b in rng.integers(0, 2, size=spec.n))
        attempts += 1
        if vec not in seen:
            seen.add(vec)
            vectors.append(vec)
    return HypothesisClass(vectors)


def _with_member(hclass: HypothesisClass, member: np.ndarray) -> tuple[HypothesisClass, int]:
    """Class guaranteed to contain `member`; returns (class, member id)."""
    key = tuple(int(v) for v in member)
    for h in hclass:
        if tuple(int(v) for v in h.labels) == key:
            return hclass, h.id
    vectors = [key] + [tuple(int(v) for v in h.labels) for h in hclass]
    rebuilt = HypothesisClass(vectors, "explicit")
    return rebuilt, 0


def _support_points(n: int, rng: np.random.Generator) -> np.ndarray:
    size = int(rng.integers(1, min(n, 6) + 1))
    return rng.choice(n, size=size, replace=False)


def _build(spec: InstanceSpec, rng: np.random.Generator) -> tuple[MdlInstance, int | None]:
    n, k = spec.n, spec.k
    hclass = _random_class(spec, rng)
    planted: int | None = None

    if spec.family == "random":
        dists = []
        for _ in range(k):
            size = int(rng.integers(1, min(2 * n, 8) + 1))
            pairs = rng.choice(2 * n, size=size, replace=False)
            probs = rng.dirichlet(np.ones(size))
            dists.append(FiniteDistribution(
                [(int(v // 2), int(v % 2), float(p)) for v, p in zip(pairs, probs)]))
        return MdlInstance(n, dists, hclass), None

    if spec.family == "realizable":
        planted = int(rng.integers(len(hclass)))
        star = hclass.hypotheses[planted].labels
        dists = []
        for _ in range(k):
            pts = _support_points(n, rng)
            probs = rng.dirichlet(np.ones(len(pts)))
            dists.append(FiniteDistribution(
                [(int(x), int(star[x]), float(p)) for x, p in zip(pts, probs)]))
        return MdlInstance(n, dists, hclass), planted

    if spec.family == "opposed_labels":
        # Shared support and masses, labels flipped between two halves, so
        # any hypothesis pays >= 1/2 on one side: a high-OPT stress instance.
        pts = _support_points(n, rng)
        probs = rng.dirichlet(np.ones(len(pts)))
        zeros = FiniteDistribution([(int(x), 0, float(p)) for x, p in zip(pts, probs)])
        ones = FiniteDistribution([(int(x), 1, float(p)) for x, p in zip(pts, probs)])
        half = (k + 1) // 2
        dists = [zeros if i < half else ones for i in range(k)]
        return MdlInstance(n, dists, hclass), None

    # shared_bayes: one conditional label rule for every distribution, with
    # differing marginals; the planted rule is Bayes-optimal everywhere.
    planted_vec = (hclass.hypotheses[int(rng.integers(len(hclass)))].labels
                   if spec.class_family != "explicit"
                   else rng.integers(0, 2, size=n).astype(np.uint8))
    hclass, planted = _with_member(hclass, np.asarray(planted_vec))
    star = hclass.hypotheses[planted].labels
    noise = rng.uniform(0.05, 0.45, size=n)
    q = np.where(star == 1, 1.0 - noise, noise)  # P(label=1 | x)
    dists = []
    for _ in range(k):
        pts = _support_points(n, rng)
        marg = rng.dirichlet(np.ones(len(pts)))
        atoms = []
        for x, m in zip(pts, marg):
            atoms.append((int(x), 1, float(m * q[x])))
            atoms.append((int(x), 0, float(m * (1.0 - q[x]))))
        dists.append(FiniteDistribution(atoms))
    return MdlInstance(n, dists, hclass), planted


def _post_check(spec: InstanceSpec, instance: MdlInstance, planted: int | None) -> bool:
    if spec.family == "random":
        return True
    if spec.family == "realizable":
        return brute_force_opt(instance).opt_value <= 1e-12
    if spec.family == "opposed_labels":
        return brute_force_opt(instance).opt_value >= 0.5 - 1e-9
    matrix = loss_matrix(instance)
    per_dist_min = matrix.min(axis=1)
    return bool(np.all(matrix[:, planted] <= per_dist_min + 1e-12))


def generate(spec: InstanceSpec) -> MdlInstance:
    """Generate an instance satisfying the family's defining property."""
    rng = make_rng(spec.seed)
    for _ in range(100):
        instance, planted = _build(spec, rng)
        if _post_check(spec, instance, planted):
            return instance
    raise GuardError(f"could not generate a {spec.family} instance in 100 attempts")
