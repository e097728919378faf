"""A homogeneous credit portfolio: 1000 loans of exposure 1, default probability 1%.

With a pairwise correlation budget of 0.1 the threshold can be set to the
VaR level 0.999 itself. Above that level the loss behaves as if all loans
defaulted together, while the conditionally independent part only
produces about 20 defaults.
"""

from tailcoupling import PortfolioSpec, run_report
from tailcoupling.aggregation import var_ratio_curve

report = run_report(PortfolioSpec.homogeneous(1000, exposure=1.0, pd=0.01), delta=0.1, alpha=0.999)
print(report.to_json())

print("\nratio of worst-case to conditional VaR by portfolio size")
for n, r in var_ratio_curve(0.01, 0.999, 0.999, [100, 1000, 10_000, 100_000, 1_000_000]):
    print(f"{n:>9d}  {r:8.3f}")
