"""From a dependence budget to a threshold, for three measures.

Rank measures have closed forms. Pearson depends on the marginal; for a
Bernoulli default indicator the inversion is closed form too, for the
exponential law it is solved by bisection.
"""

from tailcoupling import Bernoulli, Exponential, delta_from_gamma, gamma_from_delta

delta = 0.1
for measure, dist in [
    ("spearman", None),
    ("kendall", None),
    ("pearson", Bernoulli(0.01)),
    ("pearson", Exponential(1.0)),
]:
    res = gamma_from_delta(measure, delta, dist)
    back = delta_from_gamma(measure, res.gamma, dist)
    name = measure if dist is None else f"{measure} / {dist!r}"
    print(f"{name:36s} gamma={res.gamma:.9f} ({res.method}, {res.iterations} steps), delta back={back:.12f}")

# a rarer default event needs a threshold closer to 1 for the same budget
for p in (0.1, 0.01, 0.001):
    print(f"p={p:<6} gamma={gamma_from_delta('pearson', delta, Bernoulli(p)).gamma:.9f}")
