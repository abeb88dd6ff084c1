# Interleaved inserts and queries through the benchmark harness.
# Every answer is checked against brute force as the run goes.

from metricindex.datasets import synthetic_gaussian_mixture
from metricindex.harness import ExperimentConfig, rows_to_csv, run_interleaved

items = synthetic_gaussian_mixture(4000, 10, 4, 0.02, seed=0)
rows = []
for index in ("vp-mv", "rbc-imp", "cover-b"):
    for rw in ("100:1", "1:1"):
        cfg = ExperimentConfig(index=index, ks=(1, 25), rw_ratio=rw, insert_cap=500,
                               queries=200, seed=0)
        rows.extend(run_interleaved(cfg, items))
print(rows_to_csv(rows))

# the same thing from a shell:
#   metricindex interleave-bench --index vp-mv,rbc-imp,cover-b --rw 100:1 \
#       --synthetic n=4000,d=10,k=4 --seed 0
