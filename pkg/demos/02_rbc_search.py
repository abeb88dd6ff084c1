# Random Ball Cover: the two-bound search vs the nearest-first search,
# and growth of the representative set under insertion.

import math

from metricindex import CountingMetric, RbcIndex, get_metric
from metricindex.audit import audit_rbc
from metricindex.datasets import synthetic_gaussian_mixture

items = synthetic_gaussian_mixture(4000, 10, 4, 0.02, seed=0)
metric = CountingMetric(get_metric("euclidean"))
index = RbcIndex(metric, seed=1).build(items[:2000])
print("representatives after build:", len(index.reps), "= ceil(sqrt(2000)) =",
      math.ceil(math.sqrt(2000)))

for k in (1, 5, 25, 100):
    costs = {}
    for method in ("original", "improved"):
        metric.reset()
        for q in items[:100]:
            index.knn(q, k, method)
        costs[method] = metric.count / 100
    print(f"k={k:>3}: original {costs['original']:7.1f}  improved {costs['improved']:7.1f} calls/query")

# inserting the second half; a new representative appears whenever n is a perfect square
for it in items[2000:]:
    index.insert(it)
print("representatives after inserts:", len(index.reps), "(n =", index.n, ")")
audit_rbc(index, get_metric("euclidean"))
print("ownership and radii audit passed")
