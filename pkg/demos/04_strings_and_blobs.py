# Non-vector data: edit distance on short titles, LZ-Jaccard on byte blobs.

from metricindex import CountingMetric, Item, VpTree, get_metric, lz_set
from metricindex.datasets import prepare, synthetic_blobs

titles = [b"casablanca", b"casa blanca", b"batman", b"batman returns", b"the godfather",
          b"the godfather part ii", b"alien", b"aliens", b"blade runner", b"heat"]
edit = get_metric("levenshtein")
tree = VpTree(edit, bucket_size=2, seed=0).build([Item(i, t) for i, t in enumerate(titles)])
for nb in tree.knn(Item(-1, b"godfather"), 3):
    print(nb.distance, titles[nb.id].decode())

# byte blobs become LZ phrase sets once, then the metric is a set Jaccard distance
print(sorted(lz_set(b"aabbbababab")))
blobs = prepare(synthetic_blobs(800, 256, seed=1), "lz-jaccard")
metric = CountingMetric(get_metric("lz-jaccard"))
tree = VpTree(metric, seed=2).build(blobs)
metric.reset()
for q in blobs[:50]:
    tree.knn(q, 10)
print(f"{metric.count / 50:.0f} calls/query out of {len(blobs)}")
