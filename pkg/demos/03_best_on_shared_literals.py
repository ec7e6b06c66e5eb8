"""Greedy query-aware selection pays off when queries share literals.

On a workload whose queries repeat a few popular literals, the greedy
benefit-per-cost selector finds the grams those queries need, while
query-agnostic selection spends its budget elsewhere.
"""

from fractions import Fraction

from gramdex.bench import run_workload
from gramdex.select_best import BestConfig, select_best
from gramdex.select_free import FreeConfig
from gramdex.workload import SyntheticSpec, generate_synthetic

workload, _ = generate_synthetic(SyntheticSpec(seed=7, literal_skew=1.5))
print("distinct query patterns:", len({q.pattern for q in workload.queries}), "of", len(workload.queries))

trace = []
select_best(workload, BestConfig(c=0.5, max_keys=5), trace=trace)
for gram, benefit, cost, util in trace:
    print(f"  pick {gram!r:10} benefit {benefit:7d} cost {cost:4d} utility {float(Fraction(util)):10.1f}")

best = run_workload(workload, "BEST", BestConfig(c=0.5, max_keys=20))
free = run_workload(workload, "FREE", FreeConfig(c=0.7, max_n=2, max_keys=20))
print(f"K=20 precision: BEST {best.precision:.3f} (T_I {best.T_I:.2f}s), "
      f"FREE {free.precision:.3f} (T_I {free.T_I:.3f}s)")
