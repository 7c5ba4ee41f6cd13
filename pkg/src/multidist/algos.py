"""Game-dynamics learners: a configurable template plus the named
instantiations (fast ERM-vs-Hedge, finite Hedge-vs-Exp3, cover-then-finite,
the capped-adversary mid dynamics, and the personalized halving loop).

Each run owns a seeded generator and a fresh :class:`SampleLedger`; the only
access to the distributions is through the ledgered oracles, so the realized
query totals in every report can be checked against the predicted budgets.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from multidist.cover import (
    SampleBatch,
    cover_sample_size,
    empirical_loss,
    erm,
    projection_cover,
)
from multidist.model import (
    Hypothesis,
    HypothesisClass,
    LabeledExample,
    MdlInstance,
    RandomizedHypothesis,
    SampleLedger,
    brute_force_vc,
    derive_seed,
    make_rng,
    mixture_sample,
    mixture_sample_many,
    oracle_sample,
    oracle_sample_many,
    zero_one_loss,
)
from multidist.online import (
    CostVector,
    SimplexWeights,
    exp3_step,
    hedge_step_cost,
    hedge_step_payoff,
)

DEFAULT_CONSTANTS = {"C": 4.0, "C1": 4.0, "C2": 4.0, "Cprime": 4.0, "Ceval": 4.0}

LEARNER_KINDS = ("erm", "hedge_over_cover")
ADVERSARY_KINDS = ("exp3", "hedge_full_feedback", "hedge_capped")
ESTIMATORS = ("unbiased", "literal")

# Rates are clamped into the range Hedge accepts; the lower clamp only
# matters in degenerate dimensions (single action, k = 1).
_RATE_FLOOR = 1e-9
_RATE_CEIL = 0.5


def resolve_constants(overrides: dict[str, float] | None) -> dict[str, float]:
    out = dict(DEFAULT_CONSTANTS)
    if overrides:
        unknown = set(overrides) - set(DEFAULT_CONSTANTS)
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        for key, val in overrides.items():
            if float(val) <= 0:
                raise ValueError(f"constant {key} must be positive")
            out[key] = float(val)
    return out


def _clamp_rate(x: float) -> float:
    return min(_RATE_CEIL, max(_RATE_FLOOR, x))


def _resolve_vc(instance: MdlInstance, vc_dim: int | None) -> int:
    if vc_dim is not None:
        if vc_dim < 0:
            raise ValueError("vc_dim must be >= 0")
        return vc_dim
    return brute_force_vc(instance.hypothesis_class, instance.domain_size)


@dataclass
class RunReport:
    """Everything one execution produced, replayable from (seed, config)."""

    algorithm: str
    seed: int
    config: dict
    hypothesis: RandomizedHypothesis | None
    ledger_per_oracle: list[int]
    ledger_total: int
    trace: list[dict]
    assignments: dict[int, RandomizedHypothesis] | None = None
    wall_ms: float = 0.0

    def to_dict(self, include_timing: bool = False, include_trace: bool = True) -> dict:
        out: dict = {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "config": self.config,
            "hypothesis": _mixture_to_dict(self.hypothesis),
            "assignments": (
                None if self.assignments is None
                else {str(i): _mixture_to_dict(h) for i, h in sorted(self.assignments.items())}
            ),
            "ledger": {"per_oracle": self.ledger_per_oracle, "total": self.ledger_total},
        }
        if include_trace:
            out["trace"] = self.trace
        if include_timing:
            out["wall_ms"] = self.wall_ms
        return out


def _mixture_to_dict(h: RandomizedHypothesis | None) -> dict | None:
    if h is None:
        return None
    return {
        "atoms": [
            {"id": hyp.id, "weight": w, "labels": hyp.labels.astype(int).tolist()}
            for hyp, w in h.atoms
        ]
    }


def _uniform_over_ids(hclass: HypothesisClass, ids: Sequence[int]) -> RandomizedHypothesis:
    weights = np.zeros(len(hclass))
    for i in ids:
        weights[i] += 1.0 / len(ids)
    return RandomizedHypothesis.from_weights(hclass.hypotheses, weights)


# ---------------------------------------------------------------------------
# fast dynamics: ERM learner vs full-feedback Hedge adversary


@dataclass(frozen=True)
class FastParams:
    """Schedule for the fast dynamics; formulas re-checked on construction."""

    epsilon: float
    alpha: float
    delta: float
    k: int
    d: int
    C1: float
    C2: float
    T: int
    r1: int
    r2: int
    clamped: bool = False

    def __post_init__(self) -> None:
        T = max(1, math.ceil(math.log(self.k) / (self.epsilon * self.alpha)))
        r1 = math.ceil(self.C1 * (self.d + math.log(T / self.delta))
                       / (self.epsilon * self.alpha))
        r2 = math.ceil(self.C2 * math.log(self.k / self.delta) / (T * self.epsilon ** 2))
        if (T, r1, r2) != (self.T, self.r1, self.r2):
            raise ValueError("fast schedule fields do not match their formulas")

    @property
    def predicted_budget(self) -> int:
        return self.T * (self.r1 + self.k * self.r2)


def fast_params(epsilon: float, alpha: float, delta: float, k: int, d: int,
                C1: float = 4.0, C2: float = 4.0) -> FastParams:
    """Iteration and batch sizes for the fast dynamics.

    The analysis assumes epsilon <= alpha, so a larger epsilon is clamped
    down to alpha and flagged.  A single distribution degenerates the
    iteration formula to zero, so T is floored at one round.
    """
    if not 0 < epsilon < 0.5 or not 0 < alpha < 0.5:
        raise ValueError("epsilon and alpha must be in (0, 0.5)")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if k < 1 or d < 0:
        raise ValueError("need k >= 1 and d >= 0")
    clamped = epsilon > alpha
    eps = min(epsilon, alpha)
    T = max(1, math.ceil(math.log(k) / (eps * alpha)))
    r1 = math.ceil(C1 * (d + math.log(T / delta)) / (eps * alpha))
    r2 = math.ceil(C2 * math.log(k / delta) / (T * eps ** 2))
    return FastParams(epsilon=eps, alpha=alpha, delta=delta, k=k, d=d,
                      C1=C1, C2=C2, T=T, r1=r1, r2=r2, clamped=clamped)


def run_fast(instance: MdlInstance, epsilon: float, alpha: float, delta: float,
             seed: int, constants: dict[str, float] | None = None,
             vc_dim: int | None = None, record_trace: bool = True) -> RunReport:
    """ERM learner against a Hedge adversary with fresh per-round batches.

    Round t: draw r1 points from the adversary's mixture and take the
    empirical minimizer, then show the adversary the mean loss of that
    hypothesis on r2 fresh draws from every distribution.  Output is the
    uniform mixture of the per-round minimizers.  Total queries are exactly
    T * (r1 + k * r2).
    """
    t0 = time.perf_counter()
    cons = resolve_constants(constants)
    k = instance.k
    d = _resolve_vc(instance, vc_dim)
    params = fast_params(epsilon, alpha, delta, k, d, cons["C1"], cons["C2"])
    rng = make_rng(seed)
    ledger = SampleLedger(k)
    hclass = instance.hypothesis_class
    adversary = SimplexWeights.uniform(k)
    chosen_ids: list[int] = []
    trace: list[dict] = []
    for t in range(params.T):
        pts, lbs = mixture_sample_many(instance, adversary.w, params.r1, rng, ledger)
        h = erm(hclass, SampleBatch(pts, lbs, source="mixture"))
        chosen_ids.append(h.id)
        payoffs = np.empty(k)
        for i in range(k):
            bp, bl = oracle_sample_many(instance, i, params.r2, rng, ledger)
            payoffs[i] = empirical_loss(h, SampleBatch(bp, bl, source=f"oracle:{i}"))
        if record_trace:
            trace.append({"t": t, "adversary": adversary.w.tolist(),
                          "learner_id": h.id, "payoffs": payoffs.tolist()})
        adversary = hedge_step_payoff(adversary, payoffs, params.alpha)
    config = {
        "epsilon_requested": epsilon, "epsilon": params.epsilon,
        "alpha": alpha, "delta": delta, "clamped": params.clamped,
        "T": params.T, "r1": params.r1, "r2": params.r2,
        "predicted_budget": params.predicted_budget,
        "constants": cons, "vc_dim": d,
    }
    return RunReport(
        algorithm="fast", seed=seed, config=config,
        hypothesis=_uniform_over_ids(hclass, chosen_ids),
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)


# ---------------------------------------------------------------------------
# finite dynamics: Hedge learner vs Exp3 adversary, one query per round


def _finite_schedule(class_size: int, k: int, epsilon: float, delta: float,
                     C: float) -> tuple[int, float, float, float]:
    T = max(1, math.ceil(C * (math.log(class_size) + k * math.log(k / delta))
                         / epsilon ** 2))
    eta_learner = _clamp_rate(math.sqrt(math.log(max(class_size, 2)) / T))
    exploration = min(1.0, math.sqrt(k * math.log(max(k, 2)) / T))
    eta_exp3 = max(exploration / k, _RATE_FLOOR)
    return T, eta_learner, eta_exp3, exploration


def _finite_loop(instance: MdlInstance, hclass: HypothesisClass, epsilon: float,
                 delta: float, rng: np.random.Generator, ledger: SampleLedger,
                 C: float, record_trace: bool,
                 trace: list[dict]) -> tuple[RandomizedHypothesis, dict]:
    k = instance.k
    class_size = len(hclass)
    matrix = hclass.matrix
    T, eta_learner, eta_exp3, exploration = _finite_schedule(
        class_size, k, epsilon, delta, C)
    learner = SimplexWeights.uniform(class_size)
    adversary = SimplexWeights.uniform(k)
    mean_weights = np.zeros(class_size)
    for t in range(T):
        mean_weights += learner.w
        chosen = int(rng.choice(k, p=adversary.w))
        z = oracle_sample(instance, chosen, rng, ledger)
        costs = (matrix[:, z.point] != z.label).astype(np.float64)
        observed_loss = float(learner.w @ costs)
        if record_trace:
            trace.append({"t": t, "adversary": adversary.w.tolist(),
                          "learner_id": int(np.argmax(learner.w)),
                          "chosen": chosen, "observed_loss": observed_loss})
        learner = hedge_step_cost(learner, costs, eta_learner)
        adversary = exp3_step(adversary, chosen, 1.0 - observed_loss,
                              eta_exp3, exploration)
    mean_weights /= T
    meta = {"T": T, "eta_learner": eta_learner, "eta_exp3": eta_exp3,
            "exploration": exploration, "class_size": class_size}
    return RandomizedHypothesis.from_weights(hclass.hypotheses, mean_weights), meta


def run_finite(instance: MdlInstance, epsilon: float, delta: float, seed: int,
               constants: dict[str, float] | None = None,
               record_trace: bool = True) -> RunReport:
    """Hedge over the explicit class against an Exp3 adversary.

    One oracle query per round serves both players: the learner's cost
    vector is the per-hypothesis loss on the drawn point, and the adversary
    banks the learner mixture's loss on it as payoff.  Total queries = T.
    """
    t0 = time.perf_counter()
    cons = resolve_constants(constants)
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must be in (0, 1)")
    rng = make_rng(seed)
    ledger = SampleLedger(instance.k)
    trace: list[dict] = []
    mixture, meta = _finite_loop(instance, instance.hypothesis_class, epsilon,
                                 delta, rng, ledger, cons["C"], record_trace, trace)
    config = {"epsilon": epsilon, "delta": delta, "constants": cons, **meta}
    return RunReport(
        algorithm="finite", seed=seed, config=config, hypothesis=mixture,
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)


def run_cover_then_finite(instance: MdlInstance, epsilon: float, delta: float,
                          seed: int, constants: dict[str, float] | None = None,
                          vc_dim: int | None = None,
                          record_trace: bool = True) -> RunReport:
    """Offline projection cover per oracle, then the finite dynamics on it."""
    t0 = time.perf_counter()
    cons = resolve_constants(constants)
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must be in (0, 1)")
    k = instance.k
    d = _resolve_vc(instance, vc_dim)
    per_oracle = max(1, math.ceil(cons["C"] * d / epsilon))
    rng = make_rng(seed)
    ledger = SampleLedger(k)
    points: set[int] = set()
    for i in range(k):
        pts, _ = oracle_sample_many(instance, i, per_oracle, rng, ledger)
        points.update(int(p) for p in pts)
    cover = projection_cover(instance.hypothesis_class, sorted(points))
    trace: list[dict] = []
    mixture, meta = _finite_loop(instance, cover.subclass, epsilon, delta,
                                 rng, ledger, cons["C"], record_trace, trace)
    config = {"epsilon": epsilon, "delta": delta, "constants": cons,
              "vc_dim": d, "cover_samples_per_oracle": per_oracle,
              "cover_behaviors": cover.behavior_count, **meta}
    return RunReport(
        algorithm="cover_finite", seed=seed, config=config, hypothesis=mixture,
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)


# ---------------------------------------------------------------------------
# mid dynamics: Hedge over a sampled cover vs capped Hedge adversary


def mid_adversary_estimate(weights: SimplexWeights | Sequence[float], chosen: int,
                           z: LabeledExample, h: Hypothesis | RandomizedHypothesis,
                           estimator: str = "unbiased") -> CostVector:
    """One-sample cost estimate for the capped adversary.

    With `chosen` uniform over the k distributions and z drawn from it, the
    unbiased form puts k * (1 - loss(h, z)) on the chosen coordinate, so its
    expectation per coordinate is 1 - exact loss.  The `literal` form keeps
    an extra factor of the adversary's current weight on the chosen
    coordinate, which biases the linear cost; it exists for comparison.
    """
    w = weights.w if isinstance(weights, SimplexWeights) else np.asarray(weights, float)
    k = len(w)
    if not 0 <= chosen < k:
        raise IndexError(f"chosen index {chosen} out of range")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    loss = (float(zero_one_loss(h, z)) if isinstance(h, Hypothesis)
            else h.expected_loss(z))
    value = k * (1.0 - loss)
    if estimator == "literal":
        value *= float(w[chosen])
    costs = np.zeros(k)
    costs[chosen] = value
    return CostVector(costs, bound=float(k))


def _mid_schedule(epsilon: float, delta: float, k: int, d: int,
                  cons: dict[str, float]) -> dict:
    term1 = math.ceil(cons["Cprime"] * math.log(k / delta) / epsilon ** 2)
    if d >= 1:
        inner = d * k * math.log(d / (epsilon * delta)) / epsilon
        term2 = math.ceil(cons["C"] * d * math.log(inner) / epsilon ** 2)
    else:
        term2 = 0
    T = max(1, term1, term2)
    N = cover_sample_size(max(d, 1), epsilon, delta, cons["C"])
    cap = min(1.0, 2.0 / k)
    # The single-sample estimate scales with k; folding that scale into the
    # adversary's rate keeps the effective exponent in the [0, 2] range the
    # capped analysis expects.
    eta_adversary = _clamp_rate(2.0 * math.sqrt(math.log(max(k, 2)) / T) / k)
    return {"T": T, "N": N, "cap": cap, "eta_adversary": eta_adversary,
            "term1": term1, "term2": term2}


def run_mid(instance: MdlInstance, epsilon: float, delta: float, seed: int,
            constants: dict[str, float] | None = None, estimator: str = "unbiased",
            vc_dim: int | None = None, record_trace: bool = True) -> RunReport:
    """Covered Hedge learner vs capped (2-smooth) Hedge adversary.

    First N uniform-mixture draws build a projection cover; then each of
    the T rounds costs exactly two queries, one for the learner's cost at a
    point from the adversary's mixture and one for the adversary's own
    uniform-index estimate.  Total queries are exactly N + 2T.
    """
    t0 = time.perf_counter()
    cons = resolve_constants(constants)
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must be in (0, 1)")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    k = instance.k
    d = _resolve_vc(instance, vc_dim)
    sched = _mid_schedule(epsilon, delta, k, d, cons)
    rng = make_rng(seed)
    ledger = SampleLedger(k)

    uniform = np.full(k, 1.0 / k)
    pts, _ = mixture_sample_many(instance, uniform, sched["N"], rng, ledger)
    cover = projection_cover(instance.hypothesis_class, sorted(set(int(p) for p in pts)))
    sub = cover.subclass
    matrix = sub.matrix
    eta_learner = _clamp_rate(math.sqrt(math.log(max(len(sub), 2)) / sched["T"]))

    learner = SimplexWeights.uniform(len(sub))
    adversary = SimplexWeights.uniform(k, cap=sched["cap"])
    mean_weights = np.zeros(len(sub))
    trace: list[dict] = []
    for t in range(sched["T"]):
        mean_weights += learner.w
        z = mixture_sample(instance, adversary.w, rng, ledger)
        learner_costs = (matrix[:, z.point] != z.label).astype(np.float64)
        chosen = int(rng.integers(k))
        z2 = oracle_sample(instance, chosen, rng, ledger)
        iterate = RandomizedHypothesis.from_weights(sub.hypotheses, learner.w)
        estimate = mid_adversary_estimate(adversary, chosen, z2, iterate, estimator)
        if record_trace:
            trace.append({"t": t, "adversary": adversary.w.tolist(),
                          "learner_id": int(np.argmax(learner.w)),
                          "chosen": chosen,
                          "estimate": float(estimate.values[chosen])})
        learner = hedge_step_cost(learner, learner_costs, eta_learner)
        adversary = hedge_step_cost(adversary, estimate, sched["eta_adversary"])
    mean_weights /= sched["T"]
    config = {"epsilon": epsilon, "delta": delta, "constants": cons,
              "estimator": estimator, "vc_dim": d, "eta_learner": eta_learner,
              "cover_behaviors": cover.behavior_count, **sched}
    return RunReport(
        algorithm="mid", seed=seed, config=config,
        hypothesis=RandomizedHypothesis.from_weights(sub.hypotheses, mean_weights),
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)


# ---------------------------------------------------------------------------
# personalized halving loop


def median_filter(losses: Sequence[float]) -> list[int]:
    """Indices strictly above the median (midpoint rule for even counts).

    At most half the entries can lie strictly above the median, so the
    surviving set always halves.
    """
    v = np.asarray(losses, dtype=np.float64)
    if len(v) == 0:
        raise ValueError("median of empty losses")
    med = float(np.median(v))
    return [i for i in range(len(v)) if v[i] > med]


def personalized_eval_size(epsilon: float, delta: float, k: int,
                           Ceval: float = 4.0) -> int:
    # k * ln(k) degenerates to 0 at k = 1; floor the log argument at 1/delta.
    inside = max(k * math.log(k), 1.0) / delta
    return math.ceil(Ceval * math.log(inside) / epsilon ** 2)


def run_personalized(instance: MdlInstance, epsilon: float, delta: float, seed: int,
                     constants: dict[str, float] | None = None,
                     estimator: str = "unbiased", vc_dim: int | None = None,
                     record_trace: bool = True) -> RunReport:
    """Halving loop that hands each distribution its own hypothesis.

    Each round runs the mid dynamics on the still-active distributions,
    scores the result on fresh evaluation batches, and retires every
    distribution at or below the median loss with that round's hypothesis.
    The failure budget delta is split across the ceil(log2 k) rounds.
    """
    t0 = time.perf_counter()
    cons = resolve_constants(constants)
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must be in (0, 1)")
    k = instance.k
    d = _resolve_vc(instance, vc_dim)
    rounds = max(1, math.ceil(math.log2(k)))
    delta_inner = delta / rounds
    m_eval = personalized_eval_size(epsilon, delta, k, cons["Ceval"])

    ledger = SampleLedger(k)
    active = list(range(k))
    assignments: dict[int, RandomizedHypothesis] = {}
    trace: list[dict] = []
    inner_meta: list[dict] = []
    last_hypothesis: RandomizedHypothesis | None = None
    for t in range(rounds):
        if not active:
            break
        sub = instance.restrict(active)
        inner = run_mid(sub, epsilon, delta_inner, derive_seed(seed, t, 0),
                        constants=cons, estimator=estimator, vc_dim=d,
                        record_trace=False)
        ledger.merge_from(_ledger_view(inner), active)
        h_t = inner.hypothesis
        last_hypothesis = h_t
        eval_rng = make_rng(derive_seed(seed, t, 1))
        losses = []
        for global_i in active:
            bp, bl = oracle_sample_many(instance, global_i, m_eval, eval_rng, ledger)
            losses.append(empirical_loss(h_t, SampleBatch(bp, bl)))
        survivors = median_filter(losses)
        survivor_set = set(survivors)
        removed = [g for j, g in enumerate(active) if j not in survivor_set]
        for g in removed:
            assignments[g] = h_t
        if record_trace:
            trace.append({"round": t, "active": list(active),
                          "losses": [float(x) for x in losses],
                          "removed": removed})
        inner_meta.append({"round": t, "active_size": len(active),
                           "mid_total": inner.ledger_total,
                           "T": inner.config["T"], "N": inner.config["N"]})
        active = [active[j] for j in survivors]
    for g in active:  # at most one distribution can outlast the halving
        assignments[g] = last_hypothesis
    config = {"epsilon": epsilon, "delta": delta, "delta_inner": delta_inner,
              "rounds": rounds, "m_eval": m_eval, "constants": cons,
              "estimator": estimator, "vc_dim": d, "inner": inner_meta}
    return RunReport(
        algorithm="personalized", seed=seed, config=config, hypothesis=None,
        assignments=assignments,
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)


def _ledger_view(report: RunReport) -> SampleLedger:
    ledger = SampleLedger(len(report.ledger_per_oracle))
    for i, count in enumerate(report.ledger_per_oracle):
        ledger.record(i, count)
    return ledger


# ---------------------------------------------------------------------------
# configurable template


@dataclass(frozen=True)
class DynamicsConfig:
    """Knobs for the generic learner-vs-adversary loop."""

    T: int
    n_learn: int = 1
    n_adv: int = 1
    eta_learner: float = 0.1
    eta_adversary: float = 0.1
    learner_kind: str = "erm"
    adversary_kind: str = "hedge_full_feedback"

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError("T must be ≥ 1")
        if self.n_learn < 1:
            raise ValueError("n_learn must be ≥ 1")
        if self.n_adv < 0:
            raise ValueError("n_adv must be ≥ 0")
        for eta in (self.eta_learner, self.eta_adversary):
            if not 0 < eta <= _RATE_CEIL:
                raise ValueError(f"rates must be in (0, {_RATE_CEIL}]")
        if self.learner_kind not in LEARNER_KINDS:
            raise ValueError(f"unknown learner kind {self.learner_kind!r}")
        if self.adversary_kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.adversary_kind!r}")


def run_dynamics(instance: MdlInstance, cfg: DynamicsConfig, seed: int,
                 cover: HypothesisClass | None = None,
                 record_trace: bool = True) -> RunReport:
    """T rounds of the template: the learner responds to the adversary's
    current mixture, the adversary updates on sampled losses of the
    learner's play.  Returns the uniform mixture over learner iterates.
    """
    t0 = time.perf_counter()
    k = instance.k
    hclass = cover if cover is not None else instance.hypothesis_class
    if hclass.domain_size != instance.domain_size:
        raise ValueError("cover domain does not match the instance")
    if cfg.adversary_kind != "exp3" and cfg.n_adv < 1:
        raise ValueError("hedge adversaries need n_adv >= 1")
    matrix = hclass.matrix
    rng = make_rng(seed)
    ledger = SampleLedger(k)
    cap = min(1.0, 2.0 / k) if cfg.adversary_kind == "hedge_capped" else None
    adversary = SimplexWeights.uniform(k, cap=cap)
    exploration = min(1.0, math.sqrt(k * math.log(max(k, 2)) / cfg.T))
    learner = SimplexWeights.uniform(len(hclass))
    mean_weights = np.zeros(len(hclass))
    chosen_ids: list[int] = []
    trace: list[dict] = []

    for t in range(cfg.T):
        pts, lbs = mixture_sample_many(instance, adversary.w, cfg.n_learn, rng, ledger)
        batch = SampleBatch(pts, lbs, source="mixture")
        if cfg.learner_kind == "erm":
            h = erm(hclass, batch)
            chosen_ids.append(h.id)
            play: RandomizedHypothesis | Hypothesis = h
            learner_id = h.id
        else:
            costs = (matrix[:, pts] != lbs).mean(axis=1)
            mean_weights += learner.w
            play = RandomizedHypothesis.from_weights(hclass.hypotheses, learner.w)
            learner_id = int(np.argmax(learner.w))
            learner = hedge_step_cost(learner, costs, cfg.eta_learner)

        if cfg.adversary_kind == "exp3":
            chosen = int(rng.choice(k, p=adversary.w))
            z = oracle_sample(instance, chosen, rng, ledger)
            loss = (float(zero_one_loss(play, z)) if isinstance(play, Hypothesis)
                    else play.expected_loss(z))
            feedback: dict = {"chosen": chosen, "observed_loss": loss}
            next_adversary = exp3_step(adversary, chosen, 1.0 - loss,
                                       max(exploration / k, _RATE_FLOOR), exploration)
        else:
            payoffs = np.empty(k)
            for i in range(k):
                bp, bl = oracle_sample_many(instance, i, cfg.n_adv, rng, ledger)
                payoffs[i] = empirical_loss(play, SampleBatch(bp, bl))
            feedback = {"payoffs": payoffs.tolist()}
            next_adversary = hedge_step_payoff(adversary, payoffs, cfg.eta_adversary)

        if record_trace:
            trace.append({"t": t, "adversary": adversary.w.tolist(),
                          "learner_id": learner_id, **feedback})
        adversary = next_adversary

    if cfg.learner_kind == "erm":
        mixture = _uniform_over_ids(hclass, chosen_ids)
    else:
        mixture = RandomizedHypothesis.from_weights(hclass.hypotheses,
                                                    mean_weights / cfg.T)
    config = {"T": cfg.T, "n_learn": cfg.n_learn, "n_adv": cfg.n_adv,
              "eta_learner": cfg.eta_learner, "eta_adversary": cfg.eta_adversary,
              "learner_kind": cfg.learner_kind, "adversary_kind": cfg.adversary_kind,
              "exploration": exploration, "class_size": len(hclass)}
    return RunReport(
        algorithm="dynamics", seed=seed, config=config, hypothesis=mixture,
        ledger_per_oracle=list(ledger.per_oracle), ledger_total=ledger.total,
        trace=trace, wall_ms=(time.perf_counter() - t0) * 1000.0)
