"""Monte Carlo against the closed forms, and determinism across workers."""

from tailcoupling import Bernoulli, GammaCoupling, McConfig, Uniform01, WeightedSum, mc_dependence_sweep, mc_var
from tailcoupling.aggregation import var_aggregate

cfg = McConfig(samples=200_000, seed=7)
for p in mc_dependence_sweep("kendall", [Uniform01()] * 2, [0.5, 0.9, 0.99], cfg):
    print(f"kendall gamma={p.gamma:<5} MC {p.estimate:.4f} +- {p.stderr:.4f}   exact {1 - p.gamma**2:.4f}")

coupling = GammaCoupling(0.999, [Bernoulli(0.01)] * 200)
f = WeightedSum.ones(200)
for a in (0.99, 0.9995):
    q = mc_var(coupling, f, a, cfg)
    print(f"alpha={a}: MC VaR {q.estimate:.0f} in [{q.lower:.0f}, {q.upper:.0f}], exact {var_aggregate(f, coupling, a):.0f}")

one = mc_var(coupling, f, 0.99, McConfig(200_000, seed=7, workers=1))
four = mc_var(coupling, f, 0.99, McConfig(200_000, seed=7, workers=4))
print("identical with 1 and 4 workers:", one == four)
