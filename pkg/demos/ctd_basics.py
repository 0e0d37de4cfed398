"""
Canonical tensor decompositions: algebra and rank reduction
===========================================================

A walk through the core CTD type: building tensors as sums of outer
products, doing arithmetic without ever materializing the dense array,
and squeezing redundant terms back out.
"""

import numpy as np

from ctdopt import (
    CTD,
    ReductionConfig,
    add,
    eval_entry,
    frobenius_norm,
    hadamard,
    inner,
    random_ctd,
    reduce,
    scale,
    spike_ctd,
    to_dense,
    to_json,
    from_json,
)

rng = np.random.default_rng(0)

# A CTD stores a rank-r tensor as r outer products: one positive weight
# (s-value) per term and one unit-norm factor column per dimension.  This
# one lives on a 4 x 5 x 6 grid.
U = random_ctd([4, 5, 6], rank=3, rng=rng)
print(f"U: modes {U.modes}, rank {U.rank}")
print(f"s-values: {U.svalues}")

# Entries are evaluated on demand; the dense array exists only if you ask.
print(f"U[1, 2, 3] = {eval_entry(U, (1, 2, 3)):.6f}")
dense = to_dense(U)
print(f"dense check: {dense[1, 2, 3]:.6f}")

# Arithmetic stays in the compressed format.  Addition concatenates terms,
# the Hadamard (entrywise) product multiplies ranks, and inner products
# reduce to small per-dimension Gram matrices.
V = random_ctd([4, 5, 6], rank=2, rng=rng)
W = add(U, scale(V, -0.5))
H = hadamard(U, V)
print(f"\nadd: rank {U.rank} + rank {V.rank} -> rank {W.rank}")
print(f"hadamard: rank {U.rank} * rank {V.rank} -> rank {H.rank}")
print(f"inner(U, V) = {inner(U, V):.6f}")
print(f"dense check: {np.sum(to_dense(U) * to_dense(V)):.6f}")
print(f"frobenius_norm(U) = {frobenius_norm(U):.6f}")

# Formats grow under arithmetic even when the underlying tensor does not.
# Summing U with a rescaled copy doubles the stored rank but adds nothing:
doubled = add(U, scale(U, 0.25))
print(f"\nredundant sum: stored rank {doubled.rank}")

# reduce() finds a smaller representation within a relative tolerance,
# measured in the Frobenius norm or the s-norm.  The interpolative
# algorithm keeps a skeleton of existing terms; ALS refits from scratch.
result = reduce(doubled, ReductionConfig(epsilon=1e-8, norm="frobenius",
                                         algorithm="id"))
err = np.linalg.norm(to_dense(result.ctd) - to_dense(doubled))
print(f"reduced back to rank {result.ctd.rank}, "
      f"dense error {err:.2e}, tolerance met: {result.tolerance_met}")

# A single nonzero entry is a rank-1 tensor; useful for planting known
# maxima in synthetic studies.
spike = spike_ctd([4, 5, 6], (2, 0, 5), 7.5)
print(f"\nspike rank {spike.rank}, entry {eval_entry(spike, (2, 0, 5))}")

# CTDs round-trip through JSON with 17 significant digits, enough to
# reproduce every double exactly.
text = to_json(U)
U2 = from_json(text)
print(f"JSON round trip exact: {np.array_equal(to_dense(U), to_dense(U2))}")
