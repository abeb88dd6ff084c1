# Cover tree: the pruning counterexample and outlier insertion.

import numpy as np

from metricindex import CoverTree, Item, get_metric
from metricindex.audit import audit_covertree
from metricindex.covertree import LEGACY, LEVEL_BOUND, MAXDIST
from metricindex.datasets import synthetic_gaussian_mixture

euclid = get_metric("euclidean")

# root at 5 with a single child at -2, query at 0
tree = CoverTree(euclid, initial_level=3)
tree.insert(Item(0, np.array([5.0])))
tree.insert(Item(1, np.array([-2.0])))
q = Item(-1, np.array([0.0]))
for mode in (MAXDIST, LEVEL_BOUND, LEGACY):
    print(f"{mode:>14}:", tree.knn(q, 1, mode=mode))

# an outlier far outside the tree becomes the new root without looping
tree = CoverTree(euclid).build(synthetic_gaussian_mixture(1000, 3, 4, 0.05, seed=0))
print("root level before:", tree.root.level)
tree.insert(Item(1000, np.full(3, 100.0)))
print("new root:", tree.root.item.id, "level", tree.root.level,
      "raise-loop iterations:", tree.last_raise_iterations)
audit_covertree(tree, euclid)
print("covering, level and maxdist audit passed")
