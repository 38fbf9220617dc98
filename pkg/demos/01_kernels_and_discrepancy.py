"""Kernels and two-sample discrepancies.

Builds two small samples whose global means coincide while their local
cluster means do not, then shows why the per-manifold discrepancy sees a gap
the global one misses.
"""
import numpy as np

from tmda import (
    DomainSplit,
    KernelSpec,
    empirical_m3d,
    empirical_mmd,
    kernel_matrix,
    median_bandwidth,
)

rng = np.random.default_rng(0)

# Two clusters per domain. The source puts cluster A at +2 and cluster B at
# -2; the target swaps nothing globally (same overall mean) but shifts each
# cluster by +0.8 / -0.8.
n = 30
src = np.hstack([
    rng.normal(+2.0, 0.15, (2, n)),
    rng.normal(-2.0, 0.15, (2, n)),
])
tgt = np.hstack([
    rng.normal(+2.8, 0.15, (2, n)),
    rng.normal(-2.8, 0.15, (2, n)),
])
joint = np.hstack([src, tgt])
split = DomainSplit(src.shape[1], tgt.shape[1])

# cluster labels: first half of each domain is cluster 1, rest cluster 2
labels = np.concatenate([np.repeat([1, 2], n), np.repeat([1, 2], n)])

gamma = median_bandwidth(joint)
print(f"median-heuristic rbf bandwidth: {gamma:.4f}")

for spec in (KernelSpec("linear"), KernelSpec("rbf", gamma)):
    K = kernel_matrix(joint, spec)
    global_gap = empirical_mmd(K, split)
    local_gap = empirical_m3d(K, split, labels)
    print(f"{spec.kind:>6} kernel: global discrepancy {global_gap:.4f}, "
          f"per-cluster discrepancy {local_gap:.4f}")

# With the linear kernel the global value is ~0 (the cluster shifts cancel in
# the overall mean) while the per-cluster value stays visibly positive.
