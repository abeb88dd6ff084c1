# VP-tree on a clustered point cloud: median vs minimum-variance splits.
# Counts every distance evaluation and compares against brute force.

import numpy as np

from metricindex import CountingMetric, Item, VpTree, brute_knn, get_metric
from metricindex.datasets import synthetic_gaussian_mixture

items = synthetic_gaussian_mixture(5000, 10, 4, 0.02, seed=0)
metric = CountingMetric(get_metric("euclidean"))

rng = np.random.default_rng(1)
# queries are perturbed copies of indexed points
queries = [Item(-1, items[int(j)].payload + rng.normal(scale=0.01, size=10))
           for j in rng.choice(len(items), size=200, replace=False)]

for strategy in ("median", "min-variance"):
    metric.reset()
    tree = VpTree(metric, strategy=strategy, bucket_size=16, seed=2).build(items)
    built = metric.count
    metric.reset()
    for q in queries:
        tree.knn(q, 5)
    per_query = metric.count / len(queries)
    print(f"{strategy:>13}: build {built} calls, {per_query:.1f} calls/query "
          f"({per_query / len(items):.4f} of brute force), depth {tree.stats()['depth']}")

# the answers are exact
q = queries[0]
print(tree.knn(q, 3))
print(brute_knn(items, get_metric("euclidean"), q, 3))
