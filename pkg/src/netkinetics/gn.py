"""Undirected Growing Network (GN) simulator.

Each step adds one node and joins it by a single link to an existing node
chosen with probability proportional to the attachment kernel ``A_k`` of
that node's degree.  The run starts from two nodes joined by one link.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from . import _rng
from .exceptions import ConsistencyError, UsageError
from .kernels import KernelSpec
from .measure import DistTable
from .sampler import (
    REBUILD_EVERY,
    DegreeClassIndex,
    fw_add,
    fw_build,
    fw_find,
    insert_one,
    promote,
    sample_node,
)

__all__ = [
    "AgeSlices",
    "GenealogyView",
    "GnState",
    "GrowingNetwork",
    "age_degree_slice",
    "ancestor_correlation",
    "degree_distribution",
    "genealogy",
    "grow",
    "max_degree_share",
]

ROOT = -1
DEBUG_EVERY = 1 << 16


@dataclass
class GnState:
    """Final state of a GN run.

    Node ids are 0-based insertion order.  ``ancestor`` is ``-1`` for seed
    nodes; ``birth_step`` is 0 for seeds and ``s`` for the node added at
    step ``s``; ``eta`` is 1.0 for homogeneous kernels.
    """

    degree: np.ndarray
    ancestor: np.ndarray
    birth_step: np.ndarray
    eta: np.ndarray
    n_seed: int
    seed_links: int
    step: int
    kernel: KernelSpec | None = None

    @property
    def node_count(self) -> int:
        return int(self.degree.shape[0])

    @property
    def link_count(self) -> int:
        return self.seed_links + self.step

    @classmethod
    def from_ancestors(cls, ancestors, seed_links: int = 0) -> "GnState":
        """Build a state from an ancestor list (``-1`` marks seed nodes, which come first).

        ``seed_links=1`` joins the first two seed nodes by a link.
        """
        anc = np.asarray(ancestors, dtype=np.int64)
        roots = np.flatnonzero(anc == ROOT)
        n_seed = roots.size
        if n_seed == 0 or not np.array_equal(roots, np.arange(n_seed)):
            raise UsageError("seed nodes (ancestor -1) must come first")
        child = np.arange(n_seed, anc.size)
        if np.any(anc[child] >= child) or np.any(anc[child] < 0):
            raise UsageError("every node must attach to an earlier node")
        if seed_links not in (0, 1) or (seed_links == 1 and n_seed < 2):
            raise UsageError("seed_links must be 0, or 1 with at least two seeds")
        degree = np.bincount(anc[child], minlength=anc.size).astype(np.int64)
        degree[child] += 1
        if seed_links:
            degree[:2] += 1
        birth = np.zeros(anc.size, dtype=np.int64)
        birth[child] = np.arange(1, child.size + 1)
        return cls(degree, anc, birth, np.ones(anc.size), n_seed, seed_links, int(child.size))

    def check(self) -> None:
        """Assert the structural invariants of a grown network."""
        n = self.node_count
        if n != self.n_seed + self.step:
            raise ConsistencyError("node count != seeds + steps")
        if int(self.degree.sum()) != 2 * self.link_count:
            raise ConsistencyError("degree sum != 2 * links")
        child = np.arange(self.n_seed, n)
        if np.any(self.ancestor[: self.n_seed] != ROOT):
            raise ConsistencyError("seed nodes must have no ancestor")
        if np.any(self.birth_step[self.ancestor[child]] >= self.birth_step[child]):
            raise ConsistencyError("an ancestor is not older than its child")

    def to_edge_list(self, path=None) -> str:
        """Lines ``child_id ancestor_id birth_step`` (ancestor ``-1`` for seeds)."""
        lines = [f"{i} {a} {b}" for i, (a, b) in enumerate(zip(self.ancestor.tolist(), self.birth_step.tolist()))]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


# -- growth kernels ------------------------------------------------------------


@njit(cache=True)
def _grow_classes(n0, steps, u, degree, ancestor, birth, step0,
                  tree, cw, cnt, rate, bound, order, pos, node_class, total, counters):
    for s in range(steps):
        target = sample_node(u[2 * s], u[2 * s + 1], tree, cnt, bound, order, counters)
        k = degree[target]
        if not promote(target, k, k + 1, tree, cw, cnt, rate, bound, order, pos, node_class, total, counters):
            return target
        degree[target] = k + 1
        new = n0 + s
        degree[new] = 1
        ancestor[new] = target
        birth[new] = step0 + s + 1
        insert_one(new, tree, cw, cnt, rate, bound, order, pos, node_class, total, counters)
    return -1


@njit(cache=True)
def _grow_endpoints(n0, m0, steps, u, w, degree, ancestor, birth, step0, ends):
    # A_k = k + w: with prob wN/(M1 + wN) a uniform node, otherwise a uniform link endpoint
    n = n0
    m = m0
    for s in range(steps):
        if w > 0.0 and u[2 * s] * (m + w * n) < w * n:
            target = int(u[2 * s + 1] * n)
            if target >= n:
                target = n - 1
        else:
            j = int(u[2 * s + 1] * m)
            if j >= m:
                j = m - 1
            target = ends[j]
        degree[target] += 1
        degree[n] = 1
        ancestor[n] = target
        birth[n] = step0 + s + 1
        ends[m] = target
        ends[m + 1] = n
        m += 2
        n += 1


@njit(cache=True)
def _grow_nodes(n0, steps, u, degree, ancestor, birth, step0, eta, tree, weights, counters):
    # per-node weights eta_i * k_i in a Fenwick tree indexed by node id + 1
    cap = tree.shape[0] - 1
    n = n0
    for s in range(steps):
        target = fw_find(tree, u[2 * s] * tree[cap], counters) - 1
        if target >= n:
            target = n - 1
        while weights[target + 1] <= 0.0 and target > 0:
            target -= 1
        degree[target] += 1
        weights[target + 1] += eta[target]
        fw_add(tree, target + 1, eta[target], counters)
        degree[n] = 1
        ancestor[n] = target
        birth[n] = step0 + s + 1
        weights[n + 1] = eta[n]
        fw_add(tree, n + 1, eta[n], counters)
        n += 1
        counters[0] += 2
        if counters[0] >= REBUILD_EVERY:
            for i in range(n):
                weights[i + 1] = eta[i] * degree[i]
            fw_build(tree, weights)
            counters[0] = 0


def _resolve_method(kernel: KernelSpec, method: str) -> str:
    if method not in ("auto", "classes", "endpoints", "nodes"):
        raise UsageError(f"unknown sampling method {method!r}")
    if kernel.kind == "attractive":
        if method not in ("auto", "nodes"):
            raise UsageError("attractive kernels are sampled per node")
        return "nodes"
    if method == "nodes":
        raise UsageError("per-node sampling is reserved for attractive kernels")
    if method == "endpoints":
        if not kernel.is_linear_family or kernel.shift < 0:
            raise UsageError("endpoint sampling needs A_k = k + w with w >= 0")
        return method
    if method == "auto":
        return "endpoints" if kernel.is_linear_family and kernel.shift >= 0 else "classes"
    return method


def grow(kernel: KernelSpec, steps: int, seed, *, method: str = "auto", debug: bool = False) -> GnState:
    """Grow a GN for ``steps`` steps from a linked seed pair.

    ``method`` selects the sampler: ``"classes"`` (degree-class tree, any
    homogeneous kernel), ``"endpoints"`` (uniform link endpoint, linear family
    with ``w >= 0``), ``"nodes"`` (per-node tree, attractive kernels) or
    ``"auto"``.  With ``debug=True`` the degree-sum conservation law is
    checked every 65536 steps.
    """
    steps = int(steps)
    if steps < 0:
        raise UsageError("steps must be non-negative")
    method = _resolve_method(kernel, method)
    rng = _rng.make_rng(seed)
    n_seed = 2
    n = n_seed + steps
    degree = np.zeros(n, dtype=np.int64)
    ancestor = np.full(n, ROOT, dtype=np.int64)
    birth = np.zeros(n, dtype=np.int64)
    degree[:n_seed] = 1
    if kernel.kind == "attractive":
        eta = kernel.eta_dist.sample(rng, n)
    else:
        eta = np.ones(n)

    def conservation(done):
        if debug and int(degree[: n_seed + done].sum()) != 2 * (1 + done):
            raise ConsistencyError(f"degree sum broken after {done} steps")

    if method == "classes":
        idx = DegreeClassIndex(kernel, capacity=64, node_capacity=n)
        for i in range(n_seed):
            idx.insert(i, 1)
        for off, cnt, u in _rng.blocks(rng, steps, 2):
            idx.ensure_capacity(int(idx.counters[2]) + cnt + 1)
            bad = _grow_classes(n_seed + off, cnt, u, degree, ancestor, birth, off,
                                idx.tree, idx.cw, idx.cnt, idx.rate, idx.bound, idx.order, idx.pos,
                                idx.node_class, idx.total, idx.counters)
            if bad >= 0:
                raise ConsistencyError(f"degree class of node {bad} out of sync")
            if (off + cnt) % DEBUG_EVERY == 0 or off + cnt == steps:
                conservation(off + cnt)
    elif method == "endpoints":
        ends = np.zeros(2 * (steps + 1), dtype=np.int64)
        ends[:2] = (0, 1)
        w = float(kernel.shift)
        for off, cnt, u in _rng.blocks(rng, steps, 2):
            _grow_endpoints(n_seed + off, 2 * (1 + off), cnt, u, w, degree, ancestor, birth, off, ends)
            conservation(off + cnt)
    else:
        cap = 1 << max(1, int(n).bit_length())
        weights = np.zeros(cap + 1)
        weights[1 : n_seed + 1] = eta[:n_seed]
        tree = np.zeros(cap + 1)
        fw_build(tree, weights)
        counters = np.zeros(2, dtype=np.int64)
        for off, cnt, u in _rng.blocks(rng, steps, 2):
            _grow_nodes(n_seed + off, cnt, u, degree, ancestor, birth, off, eta, tree, weights, counters)
            conservation(off + cnt)
    return GnState(degree, ancestor, birth, eta, n_seed, 1, steps, kernel)


class GrowingNetwork(BaseEstimator):
    """Estimator-style front end to :func:`grow`.

    ``fit`` ignores its arguments and grows the network; the final state is
    exposed as ``state_``.

    Parameters
    ----------
    kernel : KernelSpec or dict, default linear
    n_steps : int
    random_state : int
    method : {"auto", "classes", "endpoints", "nodes"}
    debug : bool
    """

    def __init__(self, kernel=None, n_steps: int = 1000, random_state=0, method: str = "auto", debug: bool = False):
        self.kernel = kernel
        self.n_steps = n_steps
        self.random_state = random_state
        self.method = method
        self.debug = debug

    def _kernel(self) -> KernelSpec:
        if self.kernel is None:
            return KernelSpec.linear()
        if isinstance(self.kernel, dict):
            return KernelSpec.from_dict(self.kernel)
        return self.kernel

    def fit(self, X=None, y=None):
        check_scalar(self.n_steps, "n_steps", (int, np.integer), min_val=0)
        self.state_ = grow(self._kernel(), self.n_steps, self.random_state, method=self.method, debug=self.debug)
        return self

    def degree_distribution(self) -> DistTable:
        check_is_fitted(self)
        return degree_distribution(self.state_)


# -- measurements --------------------------------------------------------------


def degree_distribution(state: GnState) -> DistTable:
    """``density(k) = N_k / node_count``."""
    return DistTable.from_values(state.degree, total=state.node_count)


@dataclass
class AgeSlices:
    """Degree distributions conditioned on the scaled birth time ``x = birth_step / t``."""

    edges: np.ndarray
    rows: list
    occupancy: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def matrix(self, k_max: int) -> np.ndarray:
        """Rows of conditional densities for ``k = 1..k_max``; absent bins are NaN rows."""
        out = np.full((len(self.rows), k_max), np.nan)
        ks = np.arange(1, k_max + 1)
        for i, row in enumerate(self.rows):
            if row is not None:
                out[i] = row.at(ks)
        return out

    def mean_degree(self) -> np.ndarray:
        return np.array([np.nan if r is None else r.mean() for r in self.rows])

    def geometric_ratio(self) -> np.ndarray:
        """Maximum-likelihood ratio ``r`` of a geometric law ``(1 - r) r**(k-1)`` per bin."""
        return 1.0 - 1.0 / self.mean_degree()


def age_degree_slice(state: GnState, x_bins=20) -> AgeSlices:
    """Conditional degree distribution per bin of ``x = 1 - a/t`` with age ``a = t - birth_step``.

    ``x_bins`` is a bin count over ``[0, 1]`` or an array of edges.  Bins are
    half-open except the last, which includes its right edge.  Empty bins
    give ``None`` rows.
    """
    t = state.step
    if t < 1:
        raise UsageError("age slices need at least one growth step")
    edges = np.linspace(0.0, 1.0, int(x_bins) + 1) if np.ndim(x_bins) == 0 else np.asarray(x_bins, dtype=float)
    x = state.birth_step / t
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[x == edges[-1]] = edges.size - 2
    rows, occ = [], np.zeros(edges.size - 1, dtype=np.int64)
    for b in range(edges.size - 1):
        sel = state.degree[idx == b]
        occ[b] = sel.size
        rows.append(DistTable.from_values(sel) if sel.size else None)
    return AgeSlices(edges, rows, occ)


def ancestor_correlation(state: GnState, k_max: int, l_max: int, *, normalize: bool = True) -> np.ndarray:
    """Estimate of ``c_kl``: nodes of degree ``k`` whose ancestor has degree ``l``, over ``t``.

    Returns an array of shape ``(k_max + 1, l_max + 1)`` indexed directly by
    ``[k, l]`` (row and column 0 are zero).  Seed nodes have no ancestor and
    are not counted.  With ``normalize=False`` raw counts are returned.
    """
    child = np.arange(state.n_seed, state.node_count)
    k = state.degree[child]
    l = state.degree[state.ancestor[child]]
    keep = (k <= k_max) & (l <= l_max)
    out = np.zeros((k_max + 1, l_max + 1))
    np.add.at(out, (k[keep], l[keep]), 1.0)
    if normalize:
        out /= max(state.step, 1)
    return out


@dataclass
class GenealogyView:
    """Generation (distance to a seed) and subtree size of every node.

    The out-component of a node has ``generation + 1`` nodes and its
    in-component has ``subtree_size`` nodes.
    """

    generation: np.ndarray
    subtree_size: np.ndarray

    def generation_sizes(self) -> np.ndarray:
        """``L_g`` for ``g = 0..max``."""
        return np.bincount(self.generation)

    @property
    def max_generation(self) -> int:
        return int(self.generation.max())

    def in_component_table(self, total: float | None = None) -> DistTable:
        return DistTable.from_values(self.subtree_size, total=total)

    def out_component_table(self, total: float | None = None) -> DistTable:
        return DistTable.from_values(self.generation + 1, total=total)


@njit(cache=True)
def _genealogy(ancestor, n_seed):
    n = ancestor.shape[0]
    gen = np.zeros(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    for i in range(n_seed, n):
        gen[i] = gen[ancestor[i]] + 1
    for i in range(n - 1, n_seed - 1, -1):
        size[ancestor[i]] += size[i]
    return gen, size


def genealogy(state: GnState) -> GenealogyView:
    gen, size = _genealogy(state.ancestor, state.n_seed)
    return GenealogyView(gen, size)


def max_degree_share(state: GnState) -> float:
    """Largest degree divided by the number of links.

    A star (every link incident to one node) gives 1.
    """
    return float(state.degree.max()) / state.link_count if state.link_count else math.nan
