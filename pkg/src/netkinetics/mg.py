"""Multicomponent Graph (MG) simulator.

Each step either (probability ``p``) adds an isolated node, or (probability
``q``) adds a link from a source chosen proportionally to ``j + lambda_out``
to an independently chosen target proportional to ``i + lambda_in``.
Connected components are tracked with a union-by-size disjoint-set forest.
Links whose endpoints already share a component are kept and counted.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from . import _rng
from .exceptions import ConfigError, ConsistencyError
from .measure import DistTable
from .wg import DirectedState, mixture_pick

__all__ = [
    "ClusterState",
    "MultiComponentGraph",
    "cluster_size_distribution",
    "grow_mg",
    "largest_cluster",
    "validate_mg_params",
]


@dataclass
class ClusterState(DirectedState):
    """MG state: directed degrees plus the component forest.

    ``cluster_links[r]`` counts links inside the component rooted at ``r``.
    """

    parent: np.ndarray = None
    size: np.ndarray = None
    cluster_links: np.ndarray = None
    n_clusters: int = 0
    self_link_count: int = 0
    merge_count: int = 0

    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == np.arange(self.N))

    def component_labels(self) -> np.ndarray:
        return _labels(self.parent)

    def check(self) -> None:
        super().check()
        roots = self.roots()
        if roots.size != self.n_clusters:
            raise ConsistencyError("cluster count does not match the forest")
        if int(self.size[roots].sum()) != self.N:
            raise ConsistencyError("cluster sizes do not add up to the node count")
        if self.N - self.n_clusters != self.merge_count:
            raise ConsistencyError("each merge must remove exactly one cluster")
        if int(self.cluster_links[roots].sum()) != self.links:
            raise ConsistencyError("per-cluster link counts do not add up")

    def census_csv(self, path=None, header_comment: str | None = None) -> str:
        """Write the cluster census as ``size,count`` rows."""
        sizes, counts = np.unique(self.size[self.roots()], return_counts=True)
        buf = io.StringIO()
        if header_comment:
            for line in header_comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", "count"])
        w.writerows(zip(sizes.tolist(), counts.tolist()))
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def validate_mg_params(p, lambda_in, lambda_out):
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if not (lambda_in > 0 and lambda_out > 0):
        raise ConfigError("the MG needs lambda_in > 0 and lambda_out > 0")


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _labels(parent):
    out = np.empty(parent.shape[0], dtype=np.int64)
    par = parent.copy()
    for i in range(parent.shape[0]):
        out[i] = _find(par, i)
    return out


@njit(cache=True)
def _grow_mg(steps, u, p, lin, lout, n, links, in_deg, out_deg, heads, tails,
             parent, size, clinks, counts, record, rec_src, rec_dst, rec_ev, step0):
    # counts = [n_clusters, self_links, merges]
    for s in range(steps):
        b = 5 * s
        if u[b] < p:
            parent[n] = n
            size[n] = 1
            clinks[n] = 0
            n += 1
            counts[0] += 1
            if record:
                rec_src[step0 + s] = n - 1
                rec_dst[step0 + s] = n - 1
                rec_ev[step0 + s] = 0
            continue
        target = mixture_pick(u[b + 1], u[b + 2], heads, links, n, lin)
        src = mixture_pick(u[b + 3], u[b + 4], tails, links, n, lout)
        out_deg[src] += 1
        in_deg[target] += 1
        heads[links] = target
        tails[links] = src
        links += 1
        ra = _find(parent, src)
        rb = _find(parent, target)
        if ra == rb:
            counts[1] += 1
            clinks[ra] += 1
        else:
            if size[ra] < size[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
            clinks[ra] += clinks[rb] + 1
            counts[0] -= 1
            counts[2] += 1
        if record:
            rec_src[step0 + s] = src
            rec_dst[step0 + s] = target
            rec_ev[step0 + s] = 1
    return n, links


def grow_mg(p: float, lambda_in: float, lambda_out: float, steps: int, seed, *,
            record_edges: bool = False) -> ClusterState:
    """Grow a multicomponent graph from one isolated node."""
    validate_mg_params(p, lambda_in, lambda_out)
    steps = int(steps)
    rng = _rng.make_rng(seed)
    cap = steps + 1
    in_deg = np.zeros(cap, dtype=np.int64)
    out_deg = np.zeros(cap, dtype=np.int64)
    heads = np.zeros(max(steps, 1), dtype=np.int64)
    tails = np.zeros(max(steps, 1), dtype=np.int64)
    parent = np.arange(cap, dtype=np.int64)
    size = np.ones(cap, dtype=np.int64)
    clinks = np.zeros(cap, dtype=np.int64)
    counts = np.array([1, 0, 0], dtype=np.int64)
    n, links = 1, 0
    rec = [np.zeros(steps if record_edges else 0, dtype=np.int64) for _ in range(3)]
    for off, cnt, u in _rng.blocks(rng, steps, 5):
        n, links = _grow_mg(cnt, u, float(p), float(lambda_in), float(lambda_out), n, links, in_deg, out_deg,
                            heads, tails, parent, size, clinks, counts, record_edges, rec[0], rec[1], rec[2], off)
    edges = None
    if record_edges:
        edges = {"src": rec[0], "dst": rec[1], "step": np.arange(1, steps + 1), "event": rec[2]}
    return ClusterState(
        in_deg[:n].copy(), out_deg[:n].copy(), float(p), float(lambda_in), float(lambda_out), steps, "mg", 0, edges,
        parent=parent[:n].copy(), size=size[:n].copy(), cluster_links=clinks[:n].copy(),
        n_clusters=int(counts[0]), self_link_count=int(counts[1]), merge_count=int(counts[2]),
    )


class MultiComponentGraph(BaseEstimator):
    """Estimator-style front end to :func:`grow_mg`; the result is ``state_``."""

    def __init__(self, p: float = 0.95, lambda_in: float = 1.0, lambda_out: float = 1.0,
                 n_steps: int = 1000, random_state=0, record_edges: bool = False):
        self.p = p
        self.lambda_in = lambda_in
        self.lambda_out = lambda_out
        self.n_steps = n_steps
        self.random_state = random_state
        self.record_edges = record_edges

    def fit(self, X=None, y=None):
        check_scalar(self.n_steps, "n_steps", (int, np.integer), min_val=0)
        self.state_ = grow_mg(self.p, self.lambda_in, self.lambda_out, self.n_steps, self.random_state,
                              record_edges=self.record_edges)
        return self

    def cluster_size_distribution(self) -> DistTable:
        check_is_fitted(self)
        return cluster_size_distribution(self.state_)


def cluster_size_distribution(state: ClusterState) -> DistTable:
    """``c_k = #(clusters of size k) / t``."""
    return DistTable.from_values(state.size[state.roots()], total=max(state.step, 1))


def largest_cluster(state: ClusterState) -> tuple[int, float]:
    """Size of the largest component and its share of all nodes."""
    k = int(state.size[state.roots()].max())
    return k, k / state.N
