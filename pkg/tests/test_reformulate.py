import numpy as np
import pytest

from condsim.dependence import satisfies_ras
from condsim.errors import (
    LengthMismatchError,
    OverlappingSetsError,
    SampleBudgetExceededError,
    ZeroDenominatorError,
)
from condsim.exact import exact_conditional, exact_distribution_over, \
    exact_marginal
from condsim.network import parse_network
from condsim.reformulate import (
    DEFAULT_SEED,
    InferConfig,
    bayes_ratio,
    combine_weighted,
    decompose,
    greedy_select,
    infer,
)
from condsim.sampling import (
    RandomSource,
    RasEstimate,
    TrialGeneratorKind,
    estimate_conditional_fraction,
    mix_seed,
)

from helpers import arcless_network, random_network


def test_greedy_trace_on_the_chain_network(net_c):
    selected, trace = greedy_select(net_c, {})
    assert selected == ("A", "B")
    assert trace.stop_reason == "weight term dominates"
    assert len(trace.steps) == 2

    first, second = trace.steps
    assert first.node == "B"
    assert first.added == ("A",)
    assert first.lambda_before == pytest.approx(9.0)
    assert first.candidate_ratio == pytest.approx(4.5)
    assert first.cost_before.subproblem_term == pytest.approx(
        1296.0 ** 4)
    assert first.cost_before.weight_term == pytest.approx(1.0)
    assert first.cost_after.subproblem_term == pytest.approx(131072.0)
    assert first.cost_after.weight_term == pytest.approx(4.0)

    assert second.node == "C"
    assert second.added == ("B",)
    assert second.lambda_before == pytest.approx(4.0)
    assert second.candidate_ratio == pytest.approx(2.0)
    assert second.cost_after.subproblem_term == pytest.approx(4.0)
    assert second.cost_after.weight_term == pytest.approx(80.0)

    assert trace.final_cost.subproblem_term == pytest.approx(4.0)
    assert trace.final_cost.weight_term == pytest.approx(80.0)


def test_greedy_skips_independent_networks():
    net = arcless_network(5)
    selected, trace = greedy_select(net, {})
    assert selected == ()
    assert trace.stop_reason == "weight term dominates"
    assert trace.steps == ()


def test_greedy_stops_when_evidence_already_decouples(net_a):
    selected, trace = greedy_select(net_a, {"A": 1})
    assert selected == ()
    assert trace.stop_reason == "weight term dominates"


def test_greedy_selects_the_parent_of_a_strong_link(net_a):
    selected, trace = greedy_select(net_a, {})
    assert selected == ("A",)
    assert trace.steps[0].node == "B"


def test_greedy_exclusion_blocks_the_only_candidate(net_a):
    selected, trace = greedy_select(net_a, {}, exclude=("A",))
    assert selected == ()
    assert trace.stop_reason == "no eligible candidate"


def test_greedy_respects_the_size_cap(net_c):
    selected, trace = greedy_select(net_c, {}, max_s=1)
    assert selected == ("A",)
    assert trace.stop_reason == "size cap reached"
    assert len(trace.steps) == 1


def test_greedy_parameter_validation(net_a):
    with pytest.raises(ValueError):
        greedy_select(net_a, {}, exponent=0.5)
    with pytest.raises(ValueError):
        greedy_select(net_a, {}, max_s=-1)


def test_greedy_never_returns_excluded_or_bound_nodes():
    gen = np.random.Generator(np.random.PCG64(97))
    for _ in range(25):
        net = random_network(gen, int(gen.integers(3, 9)))
        names = list(net.nodes)
        evidence = {names[0]: 1}
        exclude = (names[1],)
        selected, _ = greedy_select(net, evidence, exclude=exclude)
        assert set(selected).isdisjoint(evidence)
        assert set(selected).isdisjoint(exclude)
        assert len(set(selected)) == len(selected)


def test_decompose_enumerates_instantiations(net_c):
    subs = decompose(net_c, {"C": 1}, {}, ("A", "B"))
    assert len(subs) == 4
    assert [s.index for s in subs] == [0, 1, 2, 3]
    assert subs[2].instantiation == {"A": 1, "B": 0}
    assert subs[2].numerator_target == {"C": 1}
    assert subs[2].denominator_target == {}


def test_decompose_merges_evidence_into_the_numerator(net_c):
    subs = decompose(net_c, {"C": 1}, {"B": 0}, ("A",))
    assert len(subs) == 2
    assert subs[1].instantiation == {"A": 1}
    assert subs[1].numerator_target == {"C": 1, "B": 0}
    assert subs[1].denominator_target == {"B": 0}


def test_decompose_rejects_overlaps(net_c):
    with pytest.raises(OverlappingSetsError):
        decompose(net_c, {"C": 1}, {"C": 0}, ())
    with pytest.raises(OverlappingSetsError):
        decompose(net_c, {"C": 1}, {}, ("C",))
    with pytest.raises(OverlappingSetsError):
        decompose(net_c, {"C": 1}, {"B": 0}, ("B",))
    with pytest.raises(OverlappingSetsError):
        decompose(net_c, {"C": 1}, {}, ("A", "A"))


def test_combine_weighted_reference_value():
    assert combine_weighted([0.9, 0.2], [0.3, 0.7]) == pytest.approx(0.41)


def test_combine_weighted_passthrough_and_convexity():
    assert combine_weighted([0.123], [1.0]) == pytest.approx(0.123)
    gen = np.random.Generator(np.random.PCG64(101))
    for _ in range(20):
        values = gen.uniform(0, 1, size=4)
        raw = gen.uniform(0, 1, size=4)
        weights = raw / raw.sum()
        mixed = combine_weighted(list(values), list(weights))
        assert values.min() - 1e-12 <= mixed <= values.max() + 1e-12


def test_combine_weighted_guards():
    with pytest.raises(LengthMismatchError):
        combine_weighted([0.5], [0.5, 0.5])
    with pytest.raises(ValueError):
        combine_weighted([0.5, 0.5], [0.7, -0.2])


def test_bayes_ratio_reference_values():
    value, clamped = bayes_ratio(0.27, 0.41)
    assert value == pytest.approx(27 / 41)
    assert not clamped
    assert bayes_ratio(0.3, 0.3) == (1.0, False)
    assert bayes_ratio(0.0, 0.5) == (0.0, False)
    assert bayes_ratio(0.5, 0.4) == (1.0, True)


def test_bayes_ratio_guards():
    with pytest.raises(ZeroDenominatorError):
        bayes_ratio(0.2, 0.0)
    with pytest.raises(ValueError):
        bayes_ratio(-0.1, 0.5)


def test_weighted_decomposition_identities_hold_exactly():
    # with oracle values in place of estimates the combination must
    # reproduce the oracle conditional
    gen = np.random.Generator(np.random.PCG64(103))
    done = 0
    while done < 30:
        n = int(gen.integers(3, 9))
        net = random_network(gen, n)
        names = list(gen.permutation(net.nodes))
        s_size = int(gen.integers(1, min(4, n - 1)))
        s_nodes = tuple(names[:s_size])
        query = {names[s_size]: int(gen.integers(0, 2))}
        evidence = {}
        if n > s_size + 1 and gen.random() < 0.7:
            evidence = {names[s_size + 1]: int(gen.integers(0, 2))}
        weights = exact_distribution_over(net, list(s_nodes))
        nums = []
        dens = []
        for sub in decompose(net, query, evidence, s_nodes):
            nums.append(exact_conditional(net, sub.numerator_target,
                                          sub.instantiation))
            dens.append(exact_conditional(net, sub.denominator_target,
                                          sub.instantiation))
        numerator = combine_weighted(nums, weights)
        denominator = combine_weighted(dens, weights)
        target = {**query, **evidence}
        assert numerator == pytest.approx(exact_marginal(net, target),
                                          abs=1e-10)
        value, clamped = bayes_ratio(numerator, denominator)
        want = exact_conditional(net, query, evidence)
        if not clamped:
            assert value == pytest.approx(want, abs=1e-10)
        done += 1


def test_infer_guards(net_a):
    with pytest.raises(ValueError):
        infer(net_a, {"B": 1}, {}, 0.2, 0.1, strategy="magic")
    with pytest.raises(ValueError):
        infer(net_a, {"B": 1}, {}, 0.0, 0.1)
    with pytest.raises(ValueError):
        infer(net_a, {"B": 1}, {}, 0.2, 1.5)
    with pytest.raises(ValueError):
        infer(net_a, {}, {"A": 1}, 0.2, 0.1)
    with pytest.raises(OverlappingSetsError):
        infer(net_a, {"B": 1}, {"B": 0}, 0.2, 0.1)


def test_infer_auto_falls_back_to_direct(net_a):
    result = infer(net_a, {"B": 1}, {"A": 1}, 0.2, 0.1, seed=5)
    assert result.strategy_used == "direct"
    assert result.selected_s == ()
    assert result.mu_s == (1.0,)
    assert result.weight_trials == 0
    assert result.denominator == 1.0
    assert not result.clamped
    assert result.subproblem_estimates[0][1] == RasEstimate(
        1.0, 0.2, 0.1, 0, 0)
    assert result.greedy_trace is not None
    assert result.dependence_after == result.dependence_before


def test_infer_direct_strategy_skips_greedy(net_c):
    result = infer(net_c, {"C": 1}, {}, 0.3, 0.2, strategy="direct",
                   seed=5)
    assert result.strategy_used == "direct"
    assert result.greedy_trace is None
    assert result.trials_total == result.subproblem_estimates[0][0].trials


def test_infer_direct_uses_its_reserved_stream(net_a):
    seed = 8675309
    result = infer(net_a, {"B": 1}, {"A": 1}, 0.2, 0.1,
                   strategy="direct", seed=seed)
    manual = estimate_conditional_fraction(
        net_a, {"B": 1}, {"A": 1}, 0.2, 0.1,
        TrialGeneratorKind.rejection(), RandomSource(seed).derive(1))
    assert result.estimate == manual.value
    assert result.trials_total == manual.trials


def test_infer_selective_accounting(net_c):
    result = infer(net_c, {"C": 1}, {}, 0.2, 0.1, strategy="selective",
                   seed=11)
    assert result.strategy_used == "selective"
    assert result.selected_s == ("A", "B")
    assert len(result.mu_s) == 4
    assert sum(result.mu_s) == pytest.approx(1.0)
    assert len(result.subproblem_estimates) == 4
    assert result.dependence_before == pytest.approx(1296.0)
    assert result.dependence_after == pytest.approx(1.0)
    spent = result.weight_trials + sum(
        n.trials + d.trials for n, d in result.subproblem_estimates)
    assert result.trials_total == spent
    assert result.denominator == pytest.approx(1.0)
    value, clamped = bayes_ratio(result.numerator, result.denominator)
    assert result.estimate == value
    assert result.clamped == clamped


def test_infer_is_deterministic_per_seed(net_c):
    a = infer(net_c, {"C": 1}, {"A": 0}, 0.3, 0.2, seed=DEFAULT_SEED)
    b = infer(net_c, {"C": 1}, {"A": 0}, 0.3, 0.2, seed=DEFAULT_SEED)
    assert a == b
    c = infer(net_c, {"C": 1}, {"A": 0}, 0.3, 0.2, seed=DEFAULT_SEED + 1)
    assert c.estimate != a.estimate or c.trials_total != a.trials_total


def test_infer_direct_certifies_at_stated_risk(net_a):
    epsilon, delta = 0.1, 0.05
    phi = 27 / 41
    covered = 0
    for rep in range(200):
        result = infer(net_a, {"A": 1}, {"B": 1}, epsilon, delta,
                       seed=mix_seed(515, rep))
        assert result.strategy_used == "direct"
        covered += satisfies_ras(phi, result.estimate, epsilon)
    assert covered >= 190


def test_infer_selective_certifies_at_stated_risk(net_c):
    epsilon, delta = 0.2, 0.1
    phi = 0.5
    covered = 0
    for rep in range(200):
        result = infer(net_c, {"C": 1}, {}, epsilon, delta,
                       strategy="selective", seed=mix_seed(616, rep))
        covered += satisfies_ras(phi, result.estimate, epsilon)
    assert covered >= 180


def test_infer_dependence_never_grows_under_conditioning():
    gen = np.random.Generator(np.random.PCG64(107))
    for _ in range(15):
        net = random_network(gen, int(gen.integers(3, 8)))
        names = list(net.nodes)
        result = infer(net, {names[-1]: 1}, {}, 0.5, 0.5,
                       seed=int(gen.integers(0, 2 ** 32)))
        assert result.dependence_after <= result.dependence_before + 1e-9


def test_infer_selective_propagates_sample_budget(net_c):
    with pytest.raises(SampleBudgetExceededError) as einfo:
        infer(net_c, {"C": 1}, {}, 0.2, 0.1, strategy="selective",
              config=InferConfig(sample_cap=2), seed=3)
    assert einfo.value.phase == "distribution"


def test_infer_accepts_gibbs_generator(net_c):
    config = InferConfig(generator=TrialGeneratorKind.gibbs(4))
    result = infer(net_c, {"C": 1}, {"A": 1}, 0.3, 0.2, strategy="direct",
                   config=config, seed=21)
    phi = exact_conditional(net_c, {"C": 1}, {"A": 1})
    assert abs(result.estimate - phi) < 0.15
