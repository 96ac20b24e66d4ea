"""Directed Web Graph (WG) simulator.

Each step either (probability ``p``) adds a node that links to a target
chosen proportionally to ``i + lambda_in``, or (probability ``q = 1 - p``)
adds a link from a source chosen proportionally to ``j + lambda_out`` to an
independently chosen target.  The run starts from one node with a self-loop.

Weighted choices are exact two-way mixtures.  A target is a uniform link
head with probability ``I / (I + lambda_in N)`` and a uniform node
otherwise.  A source is a uniform tail among links created by link events
(a node of out-degree ``j`` owns ``j - 1`` of those) with probability
``(J - N) / (J + lambda_out N)`` and a uniform node otherwise; this stays
valid for ``-1 < lambda_out < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from . import _rng
from .exceptions import ConfigError, ConsistencyError
from .measure import DistTable

__all__ = [
    "DirectedState",
    "WebGraph",
    "grow_wg",
    "inout_distributions",
    "joint_inout",
    "mixture_pick",
    "sample_targets",
    "validate_wg_params",
]

EVENT_NODE = 0
EVENT_LINK = 1


@dataclass
class DirectedState:
    """Final state of a directed growth run (WG or MG)."""

    in_deg: np.ndarray
    out_deg: np.ndarray
    p: float
    lambda_in: float
    lambda_out: float
    step: int
    model: str = "wg"
    seed_links: int = 1
    edges: dict | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return int(self.in_deg.shape[0])

    @property
    def I(self) -> int:
        return int(self.in_deg.sum())

    @property
    def J(self) -> int:
        return int(self.out_deg.sum())

    @property
    def links(self) -> int:
        return self.I

    def check(self) -> None:
        if self.I != self.J:
            raise ConsistencyError("total in-degree != total out-degree")
        if self.model == "wg":
            if self.I != self.seed_links + self.step:
                raise ConsistencyError("WG adds exactly one link per step")
            if np.any(self.out_deg < 1):
                raise ConsistencyError("every WG node has out-degree >= 1")

    def to_edge_list(self, path=None) -> str:
        """Lines ``src dst step event_type`` with ``event_type`` in {node, link}."""
        if self.edges is None:
            raise ConsistencyError("run was grown without record_edges=True")
        e = self.edges
        names = ("node", "link")
        lines = [f"{a} {b} {s} {names[v]}" for a, b, s, v in zip(e["src"].tolist(), e["dst"].tolist(),
                                                                  e["step"].tolist(), e["event"].tolist())]
        text = "\n".join(lines) + ("\n" if lines else "")
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def validate_wg_params(p, lambda_in, lambda_out):
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if not lambda_in > 0:
        raise ConfigError(f"lambda_in must be > 0, got {lambda_in}")
    if not lambda_out > -1:
        raise ConfigError(f"lambda_out must be > -1, got {lambda_out}")


@njit(cache=True)
def mixture_pick(u1, u2, ends, n_ends, n, extra_weight):
    """Index drawn with weight ``m_x + extra_weight`` per node, where ``m_x`` counts
    the occurrences of ``x`` among ``ends[:n_ends]``."""
    if u1 * (n_ends + extra_weight * n) < n_ends:
        return ends[min(int(u2 * n_ends), n_ends - 1)]
    return min(int(u2 * n), n - 1)


@njit(cache=True)
def _grow_wg(steps, u, p, lin, lout, n, links, n_extra, in_deg, out_deg, heads, extra,
             record, rec_src, rec_dst, rec_ev, step0):
    for s in range(steps):
        b = 5 * s
        target = mixture_pick(u[b + 1], u[b + 2], heads, links, n, lin)
        if u[b] < p:
            src = n
            out_deg[n] = 1
            n += 1
            ev = 0
        else:
            # every node owns one tail from its birth link, so its weight beyond the extra tails is 1 + lout
            src = mixture_pick(u[b + 3], u[b + 4], extra, n_extra, n, 1.0 + lout)
            out_deg[src] += 1
            extra[n_extra] = src
            n_extra += 1
            ev = 1
        in_deg[target] += 1
        heads[links] = target
        links += 1
        if record:
            rec_src[step0 + s] = src
            rec_dst[step0 + s] = target
            rec_ev[step0 + s] = ev
    return n, links, n_extra


def grow_wg(p: float, lambda_in: float, lambda_out: float, steps: int, seed, *,
            record_edges: bool = False) -> DirectedState:
    """Grow a web graph for ``steps`` steps."""
    validate_wg_params(p, lambda_in, lambda_out)
    steps = int(steps)
    rng = _rng.make_rng(seed)
    cap = steps + 1
    in_deg = np.zeros(cap, dtype=np.int64)
    out_deg = np.zeros(cap, dtype=np.int64)
    heads = np.zeros(cap, dtype=np.int64)
    extra = np.zeros(max(steps, 1), dtype=np.int64)
    in_deg[0] = out_deg[0] = 1
    heads[0] = 0
    n, links, n_extra = 1, 1, 0
    rec = [np.zeros(steps if record_edges else 0, dtype=np.int64) for _ in range(3)]
    for off, cnt, u in _rng.blocks(rng, steps, 5):
        n, links, n_extra = _grow_wg(cnt, u, float(p), float(lambda_in), float(lambda_out), n, links, n_extra,
                                     in_deg, out_deg, heads, extra, record_edges, rec[0], rec[1], rec[2], off)
    edges = None
    if record_edges:
        edges = {"src": rec[0], "dst": rec[1], "step": np.arange(1, steps + 1), "event": rec[2]}
    return DirectedState(in_deg[:n].copy(), out_deg[:n].copy(), float(p), float(lambda_in), float(lambda_out),
                         steps, "wg", 1, edges)


class WebGraph(BaseEstimator):
    """Estimator-style front end to :func:`grow_wg`; the result is ``state_``."""

    def __init__(self, p: float = 0.5, lambda_in: float = 1.0, lambda_out: float = 1.0,
                 n_steps: int = 1000, random_state=0, record_edges: bool = False):
        self.p = p
        self.lambda_in = lambda_in
        self.lambda_out = lambda_out
        self.n_steps = n_steps
        self.random_state = random_state
        self.record_edges = record_edges

    def fit(self, X=None, y=None):
        check_scalar(self.n_steps, "n_steps", (int, np.integer), min_val=0)
        self.state_ = grow_wg(self.p, self.lambda_in, self.lambda_out, self.n_steps, self.random_state,
                              record_edges=self.record_edges)
        return self

    def inout_distributions(self):
        check_is_fitted(self)
        return inout_distributions(self.state_)


def inout_distributions(state: DirectedState) -> tuple[DistTable, DistTable]:
    """In- and out-degree tables normalized by the node count."""
    return (DistTable.from_values(state.in_deg, total=state.N),
            DistTable.from_values(state.out_deg, total=state.N))


def sample_targets(state: DirectedState, size: int, seed) -> np.ndarray:
    """Draw ``size`` link targets from a frozen state with the growth rule's mixture sampler.

    Each draw picks node ``x`` with probability ``(i_x + lambda_in)/(I + lambda_in N)``.
    """
    rng = _rng.make_rng(seed)
    heads = np.repeat(np.arange(state.N, dtype=np.int64), state.in_deg)
    u = rng.random((int(size), 2))
    return _sample_many(u, heads, heads.size, state.N, float(state.lambda_in))


@njit(cache=True)
def _sample_many(u, ends, n_ends, n, extra_weight):
    out = np.empty(u.shape[0], dtype=np.int64)
    for r in range(u.shape[0]):
        out[r] = mixture_pick(u[r, 0], u[r, 1], ends, n_ends, n, extra_weight)
    return out


def joint_inout(state: DirectedState, i_max: int, j_max: int) -> np.ndarray:
    """``n_ij = #(nodes with in-degree i, out-degree j) / t`` as an ``(i_max+1, j_max+1)`` array."""
    keep = (state.in_deg <= i_max) & (state.out_deg <= j_max)
    out = np.zeros((i_max + 1, j_max + 1))
    np.add.at(out, (state.in_deg[keep], state.out_deg[keep]), 1.0)
    return out / max(state.step, 1)
