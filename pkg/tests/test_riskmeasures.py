import numpy as np
import pytest
from scipy import integrate, optimize

from tailcoupling.errors import DomainError
from tailcoupling.marginals import Bernoulli, Dirac, Discrete, Empirical, Exponential, Uniform01, reparameterize
from tailcoupling.riskmeasures import (
    bernoulli_expectile,
    es,
    expectile,
    expectile_residual,
    tail_distribution,
    tails_equal,
    var,
)

KINDS = [
    Bernoulli(0.01),
    Bernoulli(0.5),
    Exponential(1.0),
    Exponential(0.25),
    Uniform01(),
    Dirac(7.0),
    Empirical([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]),
    Discrete([-1.0, 0.0, 2.5], [0.25, 0.5, 0.25]),
]
ALPHAS = np.round(np.arange(1, 100) / 100, 10)


def test_var_examples():
    assert var(Uniform01(), 0.3) == pytest.approx(0.3)
    assert var(Bernoulli(0.01), 0.999) == 1.0
    assert var(Dirac(7.0), 0.42) == 7.0
    with pytest.raises(DomainError):
        var(Uniform01(), 1.0)


def test_es_examples():
    assert es(Uniform01(), 0.9) == pytest.approx(0.95)
    assert es(Bernoulli(0.01), 0.999) == pytest.approx(1.0)
    assert es(Dirac(-2.0), 0.3) == pytest.approx(-2.0)
    assert es(Exponential(2.0), 0.9) == pytest.approx(np.log(10) / 2 + 0.5, rel=1e-12)


@pytest.mark.parametrize("dist", KINDS, ids=repr)
def test_expectile_at_half_is_mean(dist):
    assert expectile(dist, 0.5) == pytest.approx(dist.moments()[0], abs=1e-12)


def test_bernoulli_expectile_closed_form():
    assert expectile(Bernoulli(0.5), 0.9) == pytest.approx(0.9, abs=1e-12)
    for p in (0.001, 0.01, 0.2, 0.5, 0.8, 0.99):
        for a in (0.05, 0.3, 0.5, 0.75, 0.9, 0.99, 0.999):
            assert abs(expectile(Bernoulli(p), a) - bernoulli_expectile(p, a)) < 1e-10


@pytest.mark.parametrize("dist", KINDS, ids=repr)
def test_expectile_residual_small(dist):
    for a in np.round(np.arange(1, 10) / 10, 10):
        assert abs(expectile_residual(dist, a, expectile(dist, a))) < 1e-12


@pytest.mark.parametrize("a", [0.1, 0.6, 0.95])
def test_expectile_exponential_against_scipy_root(a):
    # independent oracle: partial moments by quadrature, root by brentq
    lam = 1.5

    def h(e):
        up = integrate.quad(lambda x: (x - e) * lam * np.exp(-lam * x), e, np.inf)[0]
        down = integrate.quad(lambda x: (e - x) * lam * np.exp(-lam * x), 0, e)[0]
        return a * up - (1 - a) * down

    ref = optimize.brentq(h, 1e-9, 20, xtol=1e-14)
    assert expectile(Exponential(lam), a) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("dist", KINDS, ids=repr)
def test_monotone_in_alpha_and_es_dominates_var(dist):
    v = np.array([var(dist, a) for a in ALPHAS])
    e = np.array([es(dist, a) for a in ALPHAS])
    x = np.array([expectile(dist, a) for a in ALPHAS])
    assert np.all(np.diff(v) >= 0)
    assert np.all(np.diff(e) >= -1e-12)
    assert np.all(np.diff(x) >= -1e-12)
    assert np.all(e >= v - 1e-12)


def test_tail_distribution_examples():
    t = tail_distribution(Uniform01(), 0.5)
    assert var(t, 0.5) == pytest.approx(0.75)
    assert tail_distribution(Dirac(3.0), 0.2) == Dirac(3.0)
    assert tail_distribution(Bernoulli(0.01), 0.999) == Dirac(1.0)


def test_tails_equal():
    assert tails_equal(Uniform01(), Uniform01(), 0.5, 10)
    assert not tails_equal(Uniform01(), reparameterize(Uniform01(), 0.0, 0.5), 0.5, 10)
    # laws that differ only strictly below alpha
    a = Discrete([0.0, 1.0, 5.0], [0.4, 0.5, 0.1])
    b = Discrete([-3.0, 1.0, 5.0], [0.4, 0.5, 0.1])
    assert tails_equal(a, b, 0.5, 32)
    # the level alpha itself belongs to the tail
    assert not tails_equal(a, b, 0.4, 32)
    with pytest.raises(DomainError):
        tails_equal(a, b, 0.5, 1)


@pytest.mark.parametrize("dist", KINDS, ids=repr)
def test_tail_measures_law_determined(dist):
    # each risk measure of the tail law equals the tail-averaged original
    alpha = 0.8
    t = tail_distribution(dist, alpha)
    assert var(t, 0.3) == pytest.approx(var(dist, alpha + 0.2 * 0.3), abs=1e-10)
    assert es(t, 0.0001) == pytest.approx(es(dist, alpha + 0.2 * 0.0001), rel=1e-9, abs=1e-10)
