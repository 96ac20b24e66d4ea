"""Cluster-size statistics of the multicomponent graph at ``lambda = 1``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import zeta

from ..exceptions import ConfigError, DomainError
from ..measure import DistTable

__all__ = ["ClusterTheory", "MgCriticality", "P_CRITICAL", "mg_cluster_dist", "mg_criticality"]

P_CRITICAL = (2.0 + math.sqrt(3.0)) / 4.0


@dataclass(frozen=True)
class MgCriticality:
    """Closed-form cluster statistics at node-birth probability ``p``.

    ``m2``, ``tau_cluster`` and ``kmax_exp`` are ``None`` when
    ``1 - 16pq < 0`` (no real solution).  They are real but describe no
    finite-cluster steady state when ``supercritical`` is false.
    """

    p: float
    pc: float
    m2: float | None
    tau_cluster: float | None
    kmax_exp: float | None
    supercritical: bool

    def to_dict(self) -> dict:
        return {"p": self.p, "pc": self.pc, "m2": self.m2, "tau": self.tau_cluster,
                "kmax_exp": self.kmax_exp, "supercritical": self.supercritical}


def mg_criticality(p: float) -> MgCriticality:
    """``M2 = (1 + 8pq - sqrt(1-16pq))/(16q)``, ``tau = 1 + 2/(1 - sqrt(1-16pq))``,
    ``k_max ~ N**((1 - sqrt(1-16pq))/2)``."""
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    q = 1.0 - p
    disc = 1.0 - 16.0 * p * q
    if -1e-14 < disc < 0:
        disc = 0.0
    sup = p > P_CRITICAL
    if disc < 0:
        return MgCriticality(p, P_CRITICAL, None, None, None, sup)
    r = math.sqrt(disc)
    if q == 0:
        return MgCriticality(p, P_CRITICAL, 1.0, math.inf, 0.0, sup)
    # 1 - r loses digits for small pq; 16pq/(1 + r) is the same number
    one_minus_r = 16.0 * p * q / (1.0 + r)
    m2 = (8.0 * p * q + one_minus_r) / (16.0 * q)
    return MgCriticality(p, P_CRITICAL, m2, 1.0 + 2.0 / one_minus_r, one_minus_r / 2.0, sup)


@njit(cache=True)
def _clusters(p, k_max):
    q = 1.0 - p
    c = np.zeros(k_max + 1)
    d = np.zeros(k_max + 1)
    c[1] = p / (1.0 + 2.0 * q)
    d[1] = c[1]
    for k in range(2, k_max + 1):
        s = 0.0
        h = k // 2
        for k1 in range(1, (k + 1) // 2):
            s += d[k1] * d[k - k1]
        s *= 2.0
        if k % 2 == 0:
            s += d[h] * d[h]
        c[k] = q * s / (1.0 + 2.0 * q * (2 * k - 1))
        d[k] = (2 * k - 1) * c[k]
    return c


@dataclass
class ClusterTheory:
    """Cluster density ``c_k`` per unit time for ``k = 1..k_max``."""

    p: float
    c: DistTable
    crit: MgCriticality

    @property
    def k_max(self) -> int:
        return int(self.c.support[-1])

    def tail_amplitude(self, window: int = 20) -> float | None:
        """``B`` in ``c_k ~ B k**-tau`` from the last ``window`` entries."""
        tau = self.crit.tau_cluster
        if not self.crit.supercritical or tau is None or not math.isfinite(tau):
            return None
        k = self.c.support[-window:].astype(float)
        return float(np.mean(self.c.density[-window:] * k ** tau))

    def moment(self, n: int, tail: bool = True) -> float:
        """``M_n = sum_k k**n c_k``; past ``k_max`` the power-law tail is summed with Hurwitz zeta."""
        k = self.c.support.astype(float)
        s = math.fsum(k ** n * self.c.density)
        b = self.tail_amplitude() if tail else None
        if b is not None:
            tau = self.crit.tau_cluster
            if tau - n <= 1:
                return math.inf
            s += b * float(zeta(tau - n, self.k_max + 1))
        return s


def mg_cluster_dist(p: float, k_max: int) -> ClusterTheory:
    """Iterate ``c_k (1 + 2q(2k-1)) = q sum_{k1+k2=k} (2k1-1)(2k2-1) c_k1 c_k2``, ``c_1 = p/(1+2q)``.

    Cost is ``O(k_max**2)``; ``k_max = 10**4`` takes well under a second.
    """
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    c = _clusters(float(p), int(k_max))[1:]
    table = DistTable.from_density(np.arange(1, int(k_max) + 1), c, 1.0, source="theory")
    return ClusterTheory(float(p), table, mg_criticality(p))
