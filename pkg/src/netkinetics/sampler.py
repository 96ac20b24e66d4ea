"""Dynamic sampling of nodes proportionally to a degree-dependent weight.

All nodes of the same degree share one weight ``A_k``, so the structure is
two-level: a Fenwick (binary indexed) tree over degree classes holding
``w_k = A_k * N_k``, and a member array in which every degree class occupies
one contiguous block.  Blocks are laid out by *descending* degree, so the
block of degree ``k + 1`` sits directly before the block of degree ``k``.
Promoting a node by one degree is then a single swap with the first member
of its block followed by moving the block boundary::

    order:  [ k=3 | k=2 k=2 | k=1 k=1 k=1 ]
    bound:     b3   b2        b1            b0 = size

Drawing a node costs one Fenwick descent plus one uniform pick inside a
block, O(log K) where K is the class capacity (kept at the next power of two
above the largest degree seen).

The low-level kernels below are numba-compiled free functions over plain
arrays; the growth loops in :mod:`netkinetics.gn` call them directly and
:class:`DegreeClassIndex` wraps them for standalone use.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .exceptions import ConsistencyError, StateError, UsageError

__all__ = ["DegreeClassIndex", "REBUILD_EVERY"]

#: Running totals are recomputed exactly after this many weight updates.
REBUILD_EVERY = 1 << 20

# slots of the int64 ``counters`` array
C_UPDATES = 0  # weight updates since the last exact rebuild
C_OPS = 1  # Fenwick node visits (instrumentation)
C_MAXCLASS = 2  # largest occupied class seen


@njit(cache=True)
def fw_add(tree, i, delta, counters):
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)
        counters[C_OPS] += 1


@njit(cache=True)
def fw_find(tree, target, counters):
    """Smallest index whose prefix sum exceeds ``target`` (capacity must be 2**m)."""
    n = tree.shape[0] - 1
    pos = 0
    step = n
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step >>= 1
        counters[C_OPS] += 1
    return pos + 1


@njit(cache=True)
def fw_build(tree, values):
    """Rebuild ``tree`` in O(n) from 1-based ``values``."""
    n = tree.shape[0] - 1
    for i in range(n + 1):
        tree[i] = values[i]
    tree[0] = 0.0
    for i in range(1, n + 1):
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]


@njit(cache=True)
def _rebuild(tree, cw, cnt, rate, total, counters):
    cap = cw.shape[0] - 1
    s = 0.0
    comp = 0.0
    for k in range(1, cap + 1):
        cw[k] = rate[k] * cnt[k]
        # Kahan summation for the exact total
        y = cw[k] - comp
        tt = s + y
        comp = (tt - s) - y
        s = tt
    fw_build(tree, cw)
    total[0] = s
    counters[C_UPDATES] = 0


@njit(cache=True)
def _reweight(k, tree, cw, cnt, rate, total, counters):
    new = rate[k] * cnt[k]
    delta = new - cw[k]
    if delta != 0.0:
        cw[k] = new
        fw_add(tree, k, delta, counters)
        total[0] += delta
    counters[C_UPDATES] += 1
    if counters[C_UPDATES] >= REBUILD_EVERY:
        _rebuild(tree, cw, cnt, rate, total, counters)


@njit(cache=True)
def _move_up_one(node, k, bound, order, pos):
    first = bound[k]
    other = order[first]
    p = pos[node]
    order[p] = other
    pos[other] = p
    order[first] = node
    pos[node] = first
    bound[k] = first + 1


@njit(cache=True)
def insert_one(node, tree, cw, cnt, rate, bound, order, pos, node_class, total, counters):
    """Insert ``node`` with degree 1 (the only birth degree in the GN)."""
    n = bound[0]
    order[n] = node
    pos[node] = n
    bound[0] = n + 1
    node_class[node] = 1
    cnt[1] += 1
    if counters[C_MAXCLASS] < 1:
        counters[C_MAXCLASS] = 1
    _reweight(1, tree, cw, cnt, rate, total, counters)


@njit(cache=True)
def insert_at(node, k, tree, cw, cnt, rate, bound, order, pos, node_class, total, counters):
    n = bound[0]
    order[n] = node
    pos[node] = n
    bound[0] = n + 1
    for j in range(1, k):
        _move_up_one(node, j, bound, order, pos)
    node_class[node] = k
    cnt[k] += 1
    if counters[C_MAXCLASS] < k:
        counters[C_MAXCLASS] = k
    _reweight(k, tree, cw, cnt, rate, total, counters)


@njit(cache=True)
def promote(node, k_old, k_new, tree, cw, cnt, rate, bound, order, pos, node_class, total, counters):
    """Move ``node`` from class ``k_old`` to ``k_new > k_old``; returns False on mismatch."""
    if node_class[node] != k_old or k_new <= k_old:
        return False
    for j in range(k_old, k_new):
        _move_up_one(node, j, bound, order, pos)
    node_class[node] = k_new
    cnt[k_old] -= 1
    cnt[k_new] += 1
    if counters[C_MAXCLASS] < k_new:
        counters[C_MAXCLASS] = k_new
    _reweight(k_old, tree, cw, cnt, rate, total, counters)
    _reweight(k_new, tree, cw, cnt, rate, total, counters)
    return True


@njit(cache=True)
def sample_node(u1, u2, tree, cnt, bound, order, counters):
    cap = tree.shape[0] - 1
    k = fw_find(tree, u1 * tree[cap], counters)
    if k > cap or cnt[k] == 0:
        # rounding pushed the descent onto an empty class: take the nearest occupied one
        k = min(k, cap)
        while k > 1 and cnt[k] == 0:
            k -= 1
        while k <= cap and cnt[k] == 0:
            k += 1
    c = cnt[k]
    j = int(u2 * c)
    if j >= c:
        j = c - 1
    return order[bound[k] + j]


def _next_pow2(n: int) -> int:
    return 1 << max(1, int(n - 1).bit_length())


class DegreeClassIndex:
    """Nodes grouped by degree, sampled with probability ``A_k / sum_j A_j N_j``.

    Parameters
    ----------
    kernel : KernelSpec
        Homogeneous attachment kernel giving the per-class weight ``A_k``.
    capacity : int
        Initial number of degree classes; grows automatically.
    node_capacity : int
        Initial size of the node arrays; grows automatically.  Node ids must
        be non-negative integers.
    """

    def __init__(self, kernel, capacity: int = 16, node_capacity: int = 16):
        if kernel.kind == "attractive":
            raise UsageError("degree classes require a homogeneous kernel")
        self.kernel = kernel
        cap = _next_pow2(max(2, capacity))
        self.tree = np.zeros(cap + 1)
        self.cw = np.zeros(cap + 1)
        self.cnt = np.zeros(cap + 1, dtype=np.int64)
        self.rate = np.zeros(cap + 1)
        self.rate[1:] = kernel.rate(np.arange(1, cap + 1))
        self.bound = np.zeros(cap + 2, dtype=np.int64)
        ncap = max(1, node_capacity)
        self.order = np.zeros(ncap, dtype=np.int64)
        self.pos = np.zeros(ncap, dtype=np.int64)
        self.node_class = np.full(ncap, -1, dtype=np.int64)
        self.total = np.zeros(1)
        self.counters = np.zeros(3, dtype=np.int64)

    # -- capacity management -------------------------------------------------
    @property
    def capacity(self) -> int:
        return self.tree.shape[0] - 1

    def ensure_capacity(self, k_max: int, node_max: int | None = None) -> None:
        """Make room for degree classes up to ``k_max`` and node ids below ``node_max``."""
        if k_max >= self.capacity:
            old = self.capacity
            cap = _next_pow2(k_max + 1)
            for name in ("cw", "rate"):
                arr = np.zeros(cap + 1)
                arr[: old + 1] = getattr(self, name)
                setattr(self, name, arr)
            self.rate[old + 1 :] = self.kernel.rate(np.arange(old + 1, cap + 1))
            cnt = np.zeros(cap + 1, dtype=np.int64)
            cnt[: old + 1] = self.cnt
            self.cnt = cnt
            bound = np.zeros(cap + 2, dtype=np.int64)
            bound[: old + 2] = self.bound
            self.bound = bound
            self.tree = np.zeros(cap + 1)
            _rebuild(self.tree, self.cw, self.cnt, self.rate, self.total, self.counters)
        if node_max is not None and node_max > self.order.shape[0]:
            n = max(node_max, 2 * self.order.shape[0])
            for name, fill in (("order", 0), ("pos", 0), ("node_class", -1)):
                arr = np.full(n, fill, dtype=np.int64)
                old = getattr(self, name)
                arr[: old.shape[0]] = old
                setattr(self, name, arr)

    # -- public operations ---------------------------------------------------
    def __len__(self) -> int:
        return int(self.bound[0])

    def __contains__(self, node) -> bool:
        return 0 <= node < self.node_class.shape[0] and self.node_class[node] > 0

    @property
    def total_weight(self) -> float:
        return float(self.total[0])

    @property
    def ops(self) -> int:
        """Cumulative Fenwick node visits, for cost instrumentation."""
        return int(self.counters[C_OPS])

    def class_weight(self, k: int) -> float:
        return float(self.cw[k]) if 0 < k <= self.capacity else 0.0

    def class_count(self, k: int) -> int:
        return int(self.cnt[k]) if 0 < k <= self.capacity else 0

    def members(self, k: int) -> np.ndarray:
        if not 0 < k <= self.capacity:
            return np.empty(0, dtype=np.int64)
        return self.order[self.bound[k] : self.bound[k - 1]].copy()

    def degree_of(self, node: int) -> int:
        if node not in self:
            raise ConsistencyError(f"node {node} is not indexed")
        return int(self.node_class[node])

    def insert(self, node: int, k: int) -> None:
        if k < 1:
            raise UsageError("degree classes start at k = 1")
        if node < 0:
            raise UsageError("node ids must be non-negative")
        if node in self:
            raise UsageError(f"node {node} already present")
        self.ensure_capacity(k, node + 1)
        insert_at(node, k, self.tree, self.cw, self.cnt, self.rate, self.bound, self.order,
                  self.pos, self.node_class, self.total, self.counters)

    def promote(self, node: int, k_old: int, k_new: int | None = None) -> None:
        k_new = k_old + 1 if k_new is None else k_new
        if node not in self:
            raise ConsistencyError(f"node {node} is not indexed")
        self.ensure_capacity(k_new)
        ok = promote(node, k_old, k_new, self.tree, self.cw, self.cnt, self.rate, self.bound,
                     self.order, self.pos, self.node_class, self.total, self.counters)
        if not ok:
            raise ConsistencyError(
                f"node {node} is in class {self.node_class[node]}, not {k_old} (or k_new <= k_old)"
            )

    def sample(self, rng: np.random.Generator) -> int:
        if len(self) == 0 or not self.tree[self.capacity] > 0:
            raise StateError("cannot sample from an empty index")
        u1, u2 = rng.random(2)
        return int(sample_node(u1, u2, self.tree, self.cnt, self.bound, self.order, self.counters))

    def class_probabilities(self) -> dict[int, float]:
        tot = self.cw[1:].sum()
        return {int(k): float(self.cw[k] / tot) for k in np.flatnonzero(self.cnt) if k > 0}

    def recompute_total(self) -> float:
        """Exact sum of class weights, independent of the running total."""
        ks = np.flatnonzero(self.cnt)
        return float(np.sum(self.kernel.rate(ks) * self.cnt[ks])) if ks.size else 0.0

    def rebuild(self) -> None:
        _rebuild(self.tree, self.cw, self.cnt, self.rate, self.total, self.counters)

    def check(self) -> None:
        """Verify every structural invariant; raises :class:`ConsistencyError`."""
        n = len(self)
        if self.bound[0] != self.cnt.sum():
            raise ConsistencyError("member count does not match class counts")
        for k in range(1, self.capacity + 1):
            lo, hi = self.bound[k], self.bound[k - 1]
            if hi - lo != self.cnt[k]:
                raise ConsistencyError(f"block {k} has {hi - lo} slots for {self.cnt[k]} members")
            if np.any(self.node_class[self.order[lo:hi]] != k):
                raise ConsistencyError(f"block {k} holds nodes of another degree")
            if self.cw[k] != self.rate[k] * self.cnt[k]:
                raise ConsistencyError(f"class weight {k} out of sync")
        members = self.order[:n]
        if not np.array_equal(self.pos[members], np.arange(n)):
            raise ConsistencyError("position index corrupted")
        exact = self.recompute_total()
        if abs(self.total[0] - exact) > 1e-9 * max(1.0, abs(exact)):
            raise ConsistencyError("running total drifted")
