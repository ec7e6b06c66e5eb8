"""Watch the LP relaxation at each gram length.

Each iteration prints the LP shape, its optimum, and what rounding kept.
The rounded set's coverage is never below the LP bound.
"""

import numpy as np

from gramdex.select_lpms import LpmsConfig, select_lpms
from gramdex.workload import SyntheticSpec, generate_synthetic

workload, _ = generate_synthetic(SyntheticSpec(seed=3, record_count=1000))

for mode in ("deterministic", "randomized"):
    audit = []
    result = select_lpms(workload, LpmsConfig(mode=mode), audit=audit)
    print(f"{mode}: {len(result.grams)} grams")
    for problem, sol, chosen in audit:
        n = len(problem.grams[0]) if problem.grams else 0
        frac = int(np.sum((sol.x > 1e-9) & (sol.x < 1 - 1e-9)))
        print(f"  n={n}: {problem.A.shape[0]} rows x {problem.A.shape[1]} cols, "
              f"LP {sol.objective:.3f}, {frac} fractional, rounded cost {problem.cv[chosen].sum():.3f}")
