"""Tail risk measures of single laws and of aggregates above and below gamma."""

import numpy as np

from tailcoupling import (
    Bernoulli,
    Exponential,
    GammaCoupling,
    WeightedSum,
    es,
    expectile,
    expectile_aggregate,
    var,
    var_aggregate,
)

for dist in (Bernoulli(0.01), Exponential(2.0)):
    for a in (0.9, 0.99, 0.999):
        print(f"{dist!r:20s} alpha={a:<6} VaR={var(dist, a):8.4f} ES={es(dist, a):8.4f} ex={expectile(dist, a):8.4f}")

# weighted exponential losses: at or above gamma VaR is additive
weights = (1.0, 2.0, 0.5)
coupling = GammaCoupling(0.95, [Exponential(1.0)] * 3)
f = WeightedSum(weights)
for a in (0.9, 0.95, 0.99):
    v = var_aggregate(f, coupling, a, mc_budget=200_000, seed=3)
    additive = sum(weights) * var(Exponential(1.0), a)
    print(f"alpha={a}: VaR of weighted sum {v:.4f}, sum of VaRs {additive:.4f}")

print("expectile of the sum at alpha=0.95:", round(expectile_aggregate(weights, Exponential(1.0), 0.8, 0.95), 6))
print("3.5 * ex(Exp(1)) =", round(3.5 * expectile(Exponential(1.0), 0.95), 6))
