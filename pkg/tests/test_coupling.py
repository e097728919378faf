import csv

import numpy as np
import pytest

from tailcoupling.coupling import (
    GammaCoupling,
    comonotone_sample,
    conditional_marginal,
    copula_value,
    lower_orthant_dominates,
    rectangle_volumes,
    sample,
    sample_conditional,
    write_sample_csv,
)
from tailcoupling.errors import DomainError
from tailcoupling.marginals import Bernoulli, Exponential, Uniform01


def test_copula_examples():
    assert copula_value(0.5, [0.6, 0.9]) == pytest.approx(0.6)
    assert copula_value(0.5, [0.3, 0.2]) == pytest.approx(0.12)
    assert copula_value(0.5, [0.3, 0.7]) == pytest.approx(0.3)
    assert copula_value(0.2, [0.7, 0.9, 0.8]) == pytest.approx(0.7)


def test_copula_rejects_bad_input():
    with pytest.raises(DomainError):
        copula_value(1.0, [0.5, 0.5])
    with pytest.raises(DomainError):
        copula_value(0.5, [0.5, 1.2])


def brute_force_cdf(gamma, u, grid=400):
    # integrate P(all X_i <= u_i | U = s) over s by the midpoint rule
    s = (np.arange(grid) + 0.5) / grid
    upper = np.all(s[:, None] <= np.asarray(u)[None, :], axis=1)
    lower = np.prod(np.minimum(np.asarray(u) / gamma, 1.0))
    cond = np.where(s <= gamma, lower, upper)
    return cond.mean()


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.8])
@pytest.mark.parametrize("u", [(0.1, 0.2), (0.3, 0.9), (0.95, 0.99), (0.6, 0.6, 0.9)])
def test_copula_matches_mixture_definition(gamma, u):
    assert copula_value(gamma, u) == pytest.approx(brute_force_cdf(gamma, u, grid=200_000), abs=1e-5)


@pytest.mark.parametrize("gamma", [0.3, 0.7, 0.999])
def test_copula_grounded_and_uniform_margins(gamma):
    t = np.linspace(0, 1, 21)
    for i in range(3):
        pts = np.full((t.size, 3), 1.0)
        pts[:, i] = t
        assert np.allclose(copula_value(gamma, pts), t, atol=1e-12)
        pts[:, i] = 0.0
        assert np.all(copula_value(gamma, pts) == 0.0)


@pytest.mark.parametrize("gamma", [0.3, 0.7, 0.999])
def test_rectangle_volumes_nonnegative(gamma):
    assert rectangle_volumes(gamma, np.linspace(0, 1, 21), 2).min() >= -1e-12
    assert rectangle_volumes(gamma, np.linspace(0, 1, 11), 3).min() >= -1e-12
    assert rectangle_volumes(gamma, np.linspace(0, 1, 11), 3).sum() == pytest.approx(1.0)


def test_lower_orthant_order():
    assert lower_orthant_dominates(0.9, 0.1, 2, 11)
    assert lower_orthant_dominates(0.5, 0.5, 3, 6)
    with pytest.raises(DomainError):
        lower_orthant_dominates(0.1, 0.9, 2, 11)
    with pytest.raises(DomainError):
        lower_orthant_dominates(0.9, 0.1, 2, 1)


def test_sample_is_deterministic_across_workers():
    c = GammaCoupling(0.7, [Uniform01(), Exponential(2.0), Bernoulli(0.2)])
    base = sample(c, 50_000, seed=11)
    assert base.shape == (50_000, 3)
    for w in (2, 4):
        assert np.array_equal(sample(c, 50_000, seed=11, workers=w), base)
    assert not np.array_equal(sample(c, 50_000, seed=12), base)


def test_sample_structure():
    c = GammaCoupling(0.6, [Uniform01(), Uniform01()])
    u, x = sample(c, 20_000, seed=3, return_u=True)
    tail = u > 0.6
    assert np.array_equal(x[tail, 0], u[tail])
    assert np.array_equal(x[tail, 1], u[tail])
    assert np.all(x[~tail] <= 0.6)
    assert abs(tail.mean() - 0.4) < 0.02


def test_marginals_preserved_in_sample():
    gamma = 0.8
    c = GammaCoupling(gamma, [Exponential(1.0), Bernoulli(0.3)])
    x = sample(c, 200_000, seed=5)
    assert abs(x[:, 0].mean() - 1.0) < 0.02
    assert abs(x[:, 1].mean() - 0.3) < 0.01


def test_conditional_sampler_and_law():
    c = GammaCoupling(0.999, [Bernoulli(0.01)] * 3)
    cm = conditional_marginal(c, 1)
    assert isinstance(cm, Bernoulli)
    assert cm.p == pytest.approx(0.009 / 0.999, rel=1e-12)
    z = sample_conditional(c, 400_000, seed=1)
    assert abs(z.mean() - cm.p) < 5 * np.sqrt(cm.p / (3 * 400_000))
    with pytest.raises(DomainError):
        conditional_marginal(c, 3)


def test_comonotone_sample():
    x = comonotone_sample([Uniform01(), Exponential(1.0)], 1000, seed=2)
    assert np.allclose(x[:, 1], -np.log1p(-x[:, 0]))


def test_write_sample_csv(tmp_path):
    c = GammaCoupling(0.5, [Uniform01(), Uniform01()])
    u, x = sample(c, 5, seed=0, return_u=True)
    path = tmp_path / "s.csv"
    write_sample_csv(path, u, x)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["u", "x1", "x2"]
    assert float(rows[1][0]) == u[0]
    assert len(rows) == 6


def test_coupling_validation():
    with pytest.raises(DomainError):
        GammaCoupling(0.0, [Uniform01()])
    with pytest.raises(DomainError):
        GammaCoupling(0.5, [])
