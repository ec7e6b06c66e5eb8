"""The full benchmark on the synthetic robustness setup.

Indexes are built from one query set and evaluated on unseen test queries.
Pass a path to also write the rows as CSV.
"""

import sys

from gramdex.bench import run_workload, write_report
from gramdex.select_best import BestConfig
from gramdex.select_free import FreeConfig
from gramdex.select_lpms import LpmsConfig
from gramdex.workload import SyntheticSpec, generate_synthetic

workload, tests = generate_synthetic(SyntheticSpec(seed=7))
runs = []
for K in (20, 100):
    runs.append(run_workload(workload, "FREE", FreeConfig(c=0.7, max_n=2, max_keys=K), test_queries=tests))
    runs.append(run_workload(workload, "BEST", BestConfig(c=0.5, max_keys=K), test_queries=tests))
    runs.append(run_workload(workload, "LPMS-D", LpmsConfig(max_keys=K), test_queries=tests))

print(f"{'method':7} {'K':>4} {'keys':>5} {'T_I s':>8} {'T_Q s':>7} {'S_I B':>8} {'prec':>7}")
for m in runs:
    print(f"{m.method:7} {m.K:>4} {m.key_count:>5} {m.T_I:8.3f} {m.T_Q:7.3f} {m.S_I:>8} {m.precision:7.4f}")

if len(sys.argv) > 1:
    write_report(runs, sys.argv[1])
    print("wrote", sys.argv[1])
