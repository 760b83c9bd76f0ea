"""Conditioning-set selection and query reformulation.

A hard inference Pr[query | evidence] is split into easier pieces: a
greedy search picks a conditioning set S of parent nodes, the joint
distribution over S is estimated once, each instantiation of S spawns a
pair of conditioned subproblems, and the weighted pieces recombine into
a ratio estimate whose relative-error and failure budgets compose to the
caller's epsilon and delta.
"""

from dataclasses import dataclass

from .dependence import (
    CostEstimate,
    dependence_value,
    node_lambda,
    predicted_cost,
)
from .errors import (
    LengthMismatchError,
    OverlappingSetsError,
    ZeroDenominatorError,
)
from .network import Assignment, BeliefNetwork
from .sampling import (
    DEFAULT_REJECTION_CAP,
    RandomSource,
    RasEstimate,
    TrialGeneratorKind,
    estimate_conditional_fraction,
    estimate_distribution_over,
)
from .stopping import PriorChoice

DEFAULT_SEED = 271828182845

_STRATEGIES = ("direct", "selective", "auto")


@dataclass(frozen=True)
class InferConfig:
    """Tunables for infer; defaults suit networks of desk scale."""

    greedy_exponent: float = 1.0
    max_s: int = 12
    prior: PriorChoice = PriorChoice.UNBIASED
    generator: TrialGeneratorKind = TrialGeneratorKind.rejection()
    sample_cap: int | None = None
    rejection_cap: int = DEFAULT_REJECTION_CAP


@dataclass(frozen=True)
class GreedyStep:
    """One accepted addition of a candidate's unbound parents."""

    node: str
    added: tuple[str, ...]
    lambda_before: float
    candidate_ratio: float
    cost_before: CostEstimate
    cost_after: CostEstimate


@dataclass(frozen=True)
class GreedyTrace:
    steps: tuple[GreedyStep, ...]
    stop_reason: str
    final_cost: CostEstimate


@dataclass(frozen=True)
class Subproblem:
    """One instantiation of the conditioning set with its two targets."""

    index: int
    instantiation: dict[str, int]
    numerator_target: dict[str, int]
    denominator_target: dict[str, int]


@dataclass(frozen=True)
class InferenceResult:
    """Estimate plus the full accounting needed to audit or rerun it."""

    estimate: float
    epsilon: float
    delta: float
    strategy_used: str
    selected_s: tuple[str, ...]
    mu_s: tuple[float, ...]
    weight_trials: int
    subproblem_estimates: tuple[tuple[RasEstimate, RasEstimate], ...]
    numerator: float
    denominator: float
    clamped: bool
    dependence_before: float
    dependence_after: float
    trials_total: int
    seed: int
    greedy_trace: "GreedyTrace | None"


def greedy_select(net: BeliefNetwork, evidence: Assignment,
                  exponent: float = 1.0, max_s: int = 12,
                  exclude: tuple[str, ...] = ()
                  ) -> tuple[tuple[str, ...], GreedyTrace]:
    """Pick a conditioning set that shrinks the dependence value.

    Each round scores every node i whose conditioned lambda exceeds 1:
    with u' its parents not yet bound, i is eligible when 2^|u'| is less
    than lambda^exponent, and the eligible candidate with the largest
    lambda^exponent / 2^|u'| wins (declaration order breaks ties). The
    search stops when estimating the weights would cost at least as much
    as the subproblems, when no candidate is eligible, or when the next
    addition would push |S| past max_s. Nodes in ``exclude`` never enter
    S, so query nodes can be kept out of the conditioning set.
    """
    if exponent < 1.0:
        raise ValueError(f"exponent must be at least 1, got {exponent!r}")
    if max_s < 0:
        raise ValueError(f"max_s must be nonnegative, got {max_s!r}")
    net.validate_assignment(evidence)
    bound = set(evidence)
    kept_out = set(exclude)
    selected: list[str] = []
    steps: list[GreedyStep] = []
    cost_now = predicted_cost(net, evidence, ())
    reason = ""
    while True:
        if cost_now.weight_term >= cost_now.subproblem_term:
            reason = "weight term dominates"
            break
        best = None
        for rank, name in enumerate(net.nodes):
            lam = node_lambda(net, name, evidence, tuple(selected))
            if lam <= 1.0:
                continue
            unbound = tuple(p for p in net.parents(name)
                            if p not in bound and p not in selected)
            if any(p in kept_out for p in unbound):
                continue
            subsets = float(1 << len(unbound))
            strength = lam ** exponent
            if not subsets < strength:
                continue
            key = (strength / subsets, -rank)
            if best is None or key > best[0]:
                best = (key, name, unbound, lam)
        if best is None:
            reason = "no eligible candidate"
            break
        _, name, unbound, lam = best
        if len(selected) + len(unbound) > max_s:
            reason = "size cap reached"
            break
        after = predicted_cost(net, evidence, tuple(selected) + unbound)
        steps.append(GreedyStep(name, unbound, lam, best[0][0],
                                cost_now, after))
        selected.extend(unbound)
        cost_now = after
    trace = GreedyTrace(tuple(steps), reason, cost_now)
    return tuple(selected), trace


def decompose(net: BeliefNetwork, query: Assignment, evidence: Assignment,
              s_nodes: tuple[str, ...]) -> list[Subproblem]:
    """One subproblem per instantiation of the conditioning set.

    Index i encodes the instantiation in binary with the first listed
    node as the most significant bit. Every subproblem shares the same
    numerator target (query plus evidence) and denominator target
    (evidence); its trial condition is the instantiation alone.
    """
    net.validate_assignment(query)
    net.validate_assignment(evidence)
    for name in s_nodes:
        net.index(name)
    overlap = sorted((set(query) & set(evidence))
                     | (set(s_nodes) & (set(query) | set(evidence))))
    if overlap:
        raise OverlappingSetsError(
            f"query, evidence, and conditioning set must be disjoint; "
            f"shared: {', '.join(overlap)}")
    if len(set(s_nodes)) != len(s_nodes):
        raise OverlappingSetsError("conditioning set repeats a node")
    numerator_target = {**query, **evidence}
    width = len(s_nodes)
    out = []
    for index in range(1 << width):
        inst = {name: (index >> (width - 1 - pos)) & 1
                for pos, name in enumerate(s_nodes)}
        out.append(Subproblem(index, inst, dict(numerator_target),
                              dict(evidence)))
    return out


def combine_weighted(sub_values: "list[float] | tuple[float, ...]",
                     weights: "list[float] | tuple[float, ...]") -> float:
    """Weighted sum accumulated in index order."""
    if len(sub_values) != len(weights):
        raise LengthMismatchError(
            f"{len(sub_values)} values against {len(weights)} weights")
    if any(w < 0.0 for w in weights):
        raise ValueError("weights must be nonnegative")
    total = 0.0
    for value, weight in zip(sub_values, weights):
        total += value * weight
    return total


def bayes_ratio(numerator: float,
                denominator: float) -> tuple[float, bool]:
    """numerator / denominator clamped into [0, 1], with a clamp flag."""
    if denominator <= 0.0:
        raise ZeroDenominatorError(
            f"denominator must be positive, got {denominator!r}")
    if numerator < 0.0:
        raise ValueError(f"numerator must be nonnegative: {numerator!r}")
    value = numerator / denominator
    if value > 1.0:
        return 1.0, True
    return value, False


def _budget_split(epsilon: float, delta: float,
                  s_size: int) -> tuple[float, float, float]:
    """Per-stage budgets whose composition meets (epsilon, delta).

    Both sums and their ratio multiply (1 + e) factors, so each stage
    runs at (1 + epsilon)^(1/4) - 1; failure probabilities add, so the
    weight phase gets delta/2 and each of the 2 * 2^s_size subproblem
    estimates gets delta / (4 * 2^s_size).
    """
    stage_eps = (1.0 + epsilon) ** 0.25 - 1.0
    return stage_eps, delta / 2.0, delta / (4.0 * (1 << s_size))


def infer(net: BeliefNetwork, query: Assignment, evidence: Assignment,
          epsilon: float, delta: float, strategy: str = "auto",
          config: InferConfig | None = None,
          seed: int = DEFAULT_SEED) -> InferenceResult:
    """Estimate Pr[query | evidence] to relative error epsilon with
    failure probability at most delta.

    The direct strategy scores trials conditioned on the evidence. The
    selective strategy reformulates through the greedy conditioning set:
    weights over S come from one distribution estimate, each instantiation
    contributes certified numerator and denominator fractions, and the
    weighted sums meet in a clamped ratio. Auto picks selective exactly
    when the greedy set is nonempty. Equal arguments and seed reproduce
    the result bit for bit.
    """
    if config is None:
        config = InferConfig()
    if strategy not in _STRATEGIES:
        raise ValueError(f"strategy must be one of {_STRATEGIES}, "
                         f"got {strategy!r}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    net.validate_assignment(query)
    net.validate_assignment(evidence)
    if not query:
        raise ValueError("query must bind at least one node")
    shared = sorted(set(query) & set(evidence))
    if shared:
        raise OverlappingSetsError(
            f"query and evidence both bind: {', '.join(shared)}")
    root = RandomSource(seed)
    dependence_before = dependence_value(net, evidence).value

    trace: GreedyTrace | None = None
    selected: tuple[str, ...] = ()
    if strategy != "direct":
        selected, trace = greedy_select(net, evidence, config.greedy_exponent,
                                        config.max_s,
                                        exclude=tuple(query))
    use_selective = (strategy == "selective"
                     or (strategy == "auto" and bool(selected)))

    if not use_selective:
        estimate = estimate_conditional_fraction(
            net, query, evidence, epsilon, delta, config.generator,
            root.derive(1), prior=config.prior,
            sample_cap=config.sample_cap, attempt_cap=config.rejection_cap)
        vacuous = RasEstimate(1.0, epsilon, delta, 0, 0)
        return InferenceResult(
            estimate=estimate.value, epsilon=epsilon, delta=delta,
            strategy_used="direct", selected_s=(), mu_s=(1.0,),
            weight_trials=0, subproblem_estimates=((estimate, vacuous),),
            numerator=estimate.value, denominator=1.0, clamped=False,
            dependence_before=dependence_before,
            dependence_after=dependence_before,
            trials_total=estimate.trials, seed=seed, greedy_trace=trace)

    stage_eps, delta_w, delta_s = _budget_split(epsilon, delta,
                                                len(selected))
    mu_s, weight_trials = estimate_distribution_over(
        net, selected, stage_eps, delta_w, config.prior, root.derive(0),
        sample_cap=config.sample_cap)
    pairs = []
    numerator_values = []
    denominator_values = []
    trials_total = weight_trials
    for sub in decompose(net, query, evidence, selected):
        num = estimate_conditional_fraction(
            net, sub.numerator_target, sub.instantiation, stage_eps,
            delta_s, config.generator, root.derive(2 * sub.index + 1),
            prior=config.prior, sample_cap=config.sample_cap,
            attempt_cap=config.rejection_cap)
        den = estimate_conditional_fraction(
            net, sub.denominator_target, sub.instantiation, stage_eps,
            delta_s, config.generator, root.derive(2 * sub.index + 2),
            prior=config.prior, sample_cap=config.sample_cap,
            attempt_cap=config.rejection_cap)
        pairs.append((num, den))
        numerator_values.append(num.value)
        denominator_values.append(den.value)
        trials_total += num.trials + den.trials
    numerator = combine_weighted(numerator_values, mu_s)
    denominator = combine_weighted(denominator_values, mu_s)
    estimate, clamped = bayes_ratio(numerator, denominator)
    dependence_after = dependence_value(net, evidence,
                                        conditioning=selected).value
    return InferenceResult(
        estimate=estimate, epsilon=epsilon, delta=delta,
        strategy_used="selective", selected_s=selected, mu_s=mu_s,
        weight_trials=weight_trials, subproblem_estimates=tuple(pairs),
        numerator=numerator, denominator=denominator, clamped=clamped,
        dependence_before=dependence_before,
        dependence_after=dependence_after, trials_total=trials_total,
        seed=seed, greedy_trace=trace)
