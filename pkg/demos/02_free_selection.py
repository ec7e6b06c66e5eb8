"""Query-agnostic selection on the synthetic workload.

Shows how the breadth-first search grows candidates level by level and how
the threshold trades key count against filter strength.
"""

from gramdex.bench import run_workload
from gramdex.select_free import FreeConfig, select_free
from gramdex.workload import SyntheticSpec, generate_synthetic

workload, _ = generate_synthetic(SyntheticSpec(seed=7))
print(f"{workload.record_count} records, {len(workload.queries)} queries")

for c, max_n in [(0.7, 2), (0.5, 2), (0.1, 4)]:
    res = select_free(workload, FreeConfig(c=c, max_n=max_n))
    levels = ", ".join(f"n={i + 1}: {cand} cand/{sel} kept" for i, (cand, sel) in enumerate(res.per_iteration))
    metrics = run_workload(workload, "FREE", FreeConfig(c=c, max_n=max_n))
    print(f"c={c} max_n={max_n}: {len(res.grams)} keys [{levels}] precision {metrics.precision:.3f}")
