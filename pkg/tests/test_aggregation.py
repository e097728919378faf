import itertools

import numpy as np
import pytest
from scipy import stats

from tailcoupling.aggregation import (
    CustomAggregation,
    WeightedSum,
    aggregate_distribution,
    binomial_var,
    comonotone_distribution,
    conditional_distribution,
    conditional_var,
    expectile_aggregate,
    first_crossing,
    q_alpha,
    ratio_bounds,
    var_aggregate,
    var_ratio_curve,
    weighted_sum_law,
)
from tailcoupling.coupling import GammaCoupling
from tailcoupling.errors import DomainError, HypothesisNotSatisfied
from tailcoupling.marginals import Bernoulli, Dirac, Discrete, Empirical, Exponential, Uniform01
from tailcoupling.riskmeasures import es, tails_equal, var


@pytest.fixture(scope="module")
def credit():
    return GammaCoupling(0.999, [Bernoulli(0.01)] * 1000), WeightedSum.ones(1000)


def test_q_alpha_examples(credit):
    c, f = credit
    assert q_alpha(f, c.marginals, 0.999) == 1000
    assert q_alpha(WeightedSum((2, 3)), [Uniform01()] * 2, 0.5) == pytest.approx(2.5)
    assert q_alpha(WeightedSum((1,)), [Exponential(1.0)], 0.7) == pytest.approx(var(Exponential(1.0), 0.7))


def test_binomial_var_examples():
    assert binomial_var(1000, 0.009 / 0.999, 0.999) == 20
    assert binomial_var(1, 0.5, 0.6) == 1
    assert binomial_var(10, 1e-9, 0.999) == 0


@pytest.mark.parametrize("n", [1, 7, 100, 1000, 50_000])
@pytest.mark.parametrize("p", [1e-4, 0.009, 0.3, 0.97])
def test_binomial_var_matches_scipy(n, p):
    for a in (0.01, 0.3, 0.5, 0.9, 0.99, 0.999):
        ref = int(stats.binom.ppf(a, n, p))
        got = binomial_var(n, p, a)
        # ppf and the cumulative sum can only disagree when the cdf sits
        # within rounding of alpha; then both answers are one apart
        if got != ref:
            assert abs(got - ref) == 1
            assert abs(stats.binom.cdf(min(got, ref), n, p) - a) < 1e-12
        else:
            assert got == ref


def poisson_binomial_pmf(ps):
    pmf = np.array([1.0])
    for p in ps:
        pmf = np.concatenate([pmf * (1 - p), [0.0]]) + np.concatenate([[0.0], pmf * p])
    return pmf


def test_weighted_sum_law_poisson_binomial():
    ps = [0.01, 0.05, 0.2, 0.2, 0.5]
    law = weighted_sum_law([1.0] * 5, [Bernoulli(p) for p in ps])
    ref = poisson_binomial_pmf(ps)
    vals, probs = law.atoms()
    assert np.allclose(vals, np.arange(ref.size))
    assert np.allclose(probs, ref, atol=1e-15)


def test_weighted_sum_law_general_atoms():
    # enumerate all outcomes of three independent coordinates
    margs = [Discrete([0.0, 1.5], [0.3, 0.7]), Bernoulli(0.4), Discrete([-1.0, 0.0, 2.0], [0.2, 0.5, 0.3])]
    w = [1.0, 2.5, 0.5]
    law = weighted_sum_law(w, margs)
    outcomes = {}
    for combo in itertools.product(*[zip(*m.atoms()) for m in margs]):
        value = sum(wi * v for wi, (v, _) in zip(w, combo))
        outcomes[round(value, 12)] = outcomes.get(round(value, 12), 0.0) + np.prod([p for _, p in combo])
    for u in np.linspace(0.01, 0.99, 50):
        ref = Discrete(list(outcomes), list(outcomes.values())).quantile(u)
        assert law.quantile(u) == pytest.approx(ref, abs=1e-12)


def test_weighted_sum_law_limits():
    assert weighted_sum_law([1.0], [Uniform01()]) is None
    many = [Discrete(np.arange(10.0) + 0.1 * i, np.full(10, 0.1)) for i in range(6)]
    assert weighted_sum_law([1.0, np.pi, np.e, 0.3, 0.7, 1.1], many, max_atoms=200) is None


def test_var_aggregate_plateau(credit):
    c, f = credit
    for a in (0.999, 0.9992, 0.9995, 0.9999):
        assert var_aggregate(f, c, a) == q_alpha(f, c.marginals, a) == 1000


def test_var_aggregate_below_gamma(credit):
    c, f = credit
    v = var_aggregate(f, c, 0.99)
    assert v == binomial_var(1000, 0.009 / 0.999, 0.99 / 0.999)
    assert v >= conditional_var(f, c, 0.99)


def test_two_routes_to_aggregate_law(credit):
    # exact mixture law versus the conditional binomial at alpha / gamma
    c, f = credit
    law = aggregate_distribution(f, c)
    for a in np.round(np.arange(0.99, 0.9999, 0.0005), 10):
        assert law.quantile(a) == var_aggregate(f, c, a)


def test_aggregate_tail_matches_comonotone(credit):
    c, f = credit
    assert tails_equal(aggregate_distribution(f, c), comonotone_distribution(f, c.marginals), c.gamma, 64)


def test_single_coordinate_identity():
    for g in (0.2, 0.7):
        c = GammaCoupling(g, [Exponential(1.0)])
        for a in (0.75, 0.9):
            assert var_aggregate(WeightedSum((1.0,)), c, a) == pytest.approx(var(Exponential(1.0), a))


def test_heterogeneous_conditional_var_exact():
    ps = [0.01] * 20 + [0.03] * 10
    c = GammaCoupling(0.995, [Bernoulli(p) for p in ps])
    qs = [(0.995 - 1 + p) / 0.995 for p in ps]
    ref = Discrete(np.arange(len(ps) + 1.0), poisson_binomial_pmf(qs))
    for a in (0.5, 0.9, 0.99):
        assert conditional_var(WeightedSum.ones(30), c, a) == ref.quantile(a)


def test_mc_fallback_for_continuous_marginals():
    c = GammaCoupling(0.5, [Uniform01()] * 2)
    v = var_aggregate(WeightedSum((1, 1)), c, 0.4, mc_budget=200_000, seed=3)
    # sum of two U(0, 1/2) at level 0.8: triangular law
    assert v == pytest.approx(0.5 * (2 - np.sqrt(0.4)), abs=0.005)
    with pytest.raises(DomainError):
        var_aggregate(WeightedSum((1, 1)), c, 0.4, mc_budget=999)


def test_custom_aggregation():
    c = GammaCoupling(0.5, [Uniform01()] * 2)
    mx = CustomAggregation(lambda x: x.max(axis=1))
    assert var_aggregate(mx, c, 0.9) == pytest.approx(0.9)
    assert var_aggregate(mx, c, 0.4, mc_budget=200_000, seed=1) == pytest.approx(0.5 * np.sqrt(0.8), abs=0.004)
    with pytest.raises(DomainError):
        var_aggregate(CustomAggregation(lambda x: -x.sum(axis=1)), c, 0.4, mc_budget=10_000)


def test_weights_validated():
    with pytest.raises(DomainError):
        WeightedSum((1.0, -0.5))
    with pytest.raises(DomainError):
        q_alpha(WeightedSum((1.0,)), [Uniform01()] * 2, 0.5)


def test_expectile_aggregate():
    assert expectile_aggregate([1, 1, 1], Bernoulli(0.5), 0.4, 0.9) == pytest.approx(2.7, abs=1e-10)
    assert expectile_aggregate([2, 3], Exponential(1.0), 0.6, 0.5) == pytest.approx(5.0, abs=1e-10)
    with pytest.raises(HypothesisNotSatisfied):
        expectile_aggregate([1, 1], Bernoulli(0.5), 0.6, 0.9)
    with pytest.raises(DomainError):
        expectile_aggregate([1, 1], Bernoulli(0.5), 0.4, 0.3)


def test_ratio_curve_examples():
    (n, r), = var_ratio_curve(0.01, 0.999, 0.999, [1000])
    assert n == 1000 and r == 50
    decades = [10**k for k in range(2, 7)]
    assert first_crossing(var_ratio_curve(0.01, 0.999, 0.999, decades), 100) == 100_000
    with pytest.raises(DomainError):
        var_ratio_curve(0.01, 0.9995, 0.999, [10])


def test_ratio_curve_bounded_by_limsup():
    lim, _ = ratio_bounds(Bernoulli(0.01), 0.999, 0.999)
    curve = var_ratio_curve(0.01, 0.999, 0.999, [10**k for k in range(2, 7)])
    assert all(r <= lim + 1e-9 for _, r in curve)
    assert curve[-1][1] > 0.95 * lim


def test_ratio_bounds():
    lim, mean_ratio = ratio_bounds(Bernoulli(0.01), 0.999, 0.999)
    assert lim == pytest.approx(111, rel=1e-9)
    assert mean_ratio == pytest.approx(100, rel=1e-9)
    assert ratio_bounds(Dirac(4.0), 0.7, 0.3) == pytest.approx((1.0, 1.0))
    shifted = Empirical(1 + (np.arange(100_000) + 0.5) / 100_000)
    expected = 1.9 / ((0.9 + 0.405) / 0.9)
    assert ratio_bounds(shifted, 0.9, 0.5)[0] == pytest.approx(expected, rel=1e-4)
    with pytest.raises(DomainError):
        ratio_bounds(Dirac(-1.0), 0.7, 0.3)
    with pytest.raises(DomainError):
        ratio_bounds(Uniform01(), 0.3, 0.7)


@pytest.mark.parametrize(
    "dist,alphas",
    [
        (Bernoulli(0.01), (0.995, 0.999, 0.9999)),
        (Exponential(2.0), (0.5, 0.9, 0.999)),
        (Uniform01(), (0.5, 0.9, 0.999)),
        (Empirical([1.0, 3.0, 8.0]), (0.5, 0.9, 0.999)),
    ],
    ids=repr,
)
def test_ratio_bound_at_least_one(dist, alphas):
    for a in alphas:
        assert ratio_bounds(dist, a, a)[0] >= 1.0


def test_ratio_bounds_need_positive_pretail_mean():
    # below 1 - p a Bernoulli quantile is 0, so the pre-tail mean vanishes
    with pytest.raises(DomainError):
        ratio_bounds(Bernoulli(0.01), 0.5, 0.5)


def test_positive_homogeneity_above_gamma():
    w = (0.5, 2.0, 3.5)
    c = GammaCoupling(0.9, [Bernoulli(0.2)] * 3)
    law = aggregate_distribution(WeightedSum(w), c)
    for a in (0.9, 0.95, 0.99):
        assert law.quantile(a) == sum(w) * var(Bernoulli(0.2), a)
        assert es(law, a) == pytest.approx(sum(w) * es(Bernoulli(0.2), a), rel=1e-12)


def test_conditional_distribution_requires_weighted_sum():
    c = GammaCoupling(0.5, [Bernoulli(0.5)] * 2)
    assert conditional_distribution(CustomAggregation(lambda x: x.max(axis=1)), c) is None
    d = conditional_distribution(WeightedSum((1, 1)), c)
    assert d == Dirac(0.0)
