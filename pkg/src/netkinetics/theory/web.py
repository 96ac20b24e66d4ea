"""Degree statistics of the directed models (WG and MG).

Densities are per unit time, so ``sum_i I_i = p`` (the node birth rate).
``DirectedTheory.in_dist``/``out_dist`` renormalize them per node, which is
how the simulators report their histograms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..exceptions import ConfigError, RegimeError
from ..measure import DistTable
from ._special import lgamma_ratio

__all__ = [
    "DirectedTheory",
    "MgExponents",
    "mg_exponents",
    "mg_inout",
    "mg_inout_recursion",
    "mg_joint",
    "mg_joint_asymptote",
    "mg_joint_recursion",
    "wg_closed_form",
    "wg_exponents",
    "wg_joint",
    "wg_recursion",
    "wg_shorthand",
]


@dataclass
class DirectedTheory:
    """In-degree law ``I_i`` (i >= 0) and out-degree law ``O_j`` per unit time."""

    p: float
    I: np.ndarray
    O: np.ndarray
    o_start: int
    nu_in: float
    nu_out: float
    meta: dict = field(default_factory=dict)

    @property
    def in_dist(self) -> DistTable:
        return DistTable.from_density(np.arange(self.I.size), self.I / self.p, 1.0, source="theory")

    @property
    def out_dist(self) -> DistTable:
        j = np.arange(self.o_start, self.o_start + self.O.size)
        return DistTable.from_density(j, self.O / self.p, 1.0, source="theory")


def _check_wg(p, lambda_in, lambda_out):
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if not lambda_in > 0:
        raise ConfigError("lambda_in must be > 0")
    if not lambda_out > -1:
        raise ConfigError("lambda_out must be > -1")


def wg_shorthand(p: float, lambda_in: float, lambda_out: float) -> tuple[float, float]:
    """``a = q(1 + p lambda_in)/(1 + p lambda_out)`` and ``b = 1 + (1+p) lambda_in``."""
    q = 1.0 - p
    return q * (1.0 + p * lambda_in) / (1.0 + p * lambda_out), 1.0 + (1.0 + p) * lambda_in


def wg_exponents(p: float, lambda_in: float, lambda_out: float) -> tuple[float, float]:
    """``nu_in = 2 + p lambda_in`` and ``nu_out = 1 + (1 + p lambda_out)/q``."""
    _check_wg(p, lambda_in, lambda_out)
    q = 1.0 - p
    nu_out = math.inf if q == 0 else 1.0 + 1.0 / q + lambda_out * p / q
    return 2.0 + p * lambda_in, nu_out


def wg_closed_form(p: float, lambda_in: float, lambda_out: float, k_max: int) -> DirectedTheory:
    """Gamma-ratio forms of ``I_i`` (``i = 0..k_max``) and ``O_j`` (``j = 1..k_max``).

    At ``q = 0`` every node keeps out-degree 1 and ``O`` is a point mass.
    """
    _check_wg(p, lambda_in, lambda_out)
    q = 1.0 - p
    lin, lout = lambda_in, lambda_out
    _, b = wg_shorthand(p, lin, lout)
    i = np.arange(int(k_max) + 1, dtype=float)
    i0 = p * (1.0 + p * lin) / b
    # Gamma(i+lin)/Gamma(i+b+1) * Gamma(b+1)/Gamma(lin), shift b + 1 - lin
    I = i0 * np.exp(lgamma_ratio(lin, b + 1.0 - lin) - lgamma_ratio(i + lin, b + 1.0 - lin))
    j = np.arange(1, int(k_max) + 1, dtype=float)
    if q == 0:
        O = np.where(j == 1, p, 0.0)
    else:
        o1 = p * (1.0 + p * lout) / (1.0 + q + lout)
        c = 1.0 + (1.0 + lout) / q
        # Gamma(j+lout)/Gamma(j+c) * Gamma(1+c)/Gamma(1+lout), shift c - lout
        O = o1 * np.exp(lgamma_ratio(1.0 + lout, c - lout) - lgamma_ratio(j + lout, c - lout))
    nu_in, nu_out = wg_exponents(p, lin, lout)
    return DirectedTheory(p, I, O, 1, nu_in, nu_out, {"model": "wg", "form": "closed"})


def wg_recursion(p: float, lambda_in: float, lambda_out: float, k_max: int) -> DirectedTheory:
    """Iterate the first-order recursions for ``I_i`` and ``O_j``."""
    _check_wg(p, lambda_in, lambda_out)
    q = 1.0 - p
    lin, lout = lambda_in, lambda_out
    _, b = wg_shorthand(p, lin, lout)
    n = int(k_max)
    I = np.empty(n + 1)
    I[0] = p * (1.0 + p * lin) / b
    for i in range(1, n + 1):
        I[i] = (i - 1 + lin) * I[i - 1] / (i + b)
    O = np.zeros(n)
    if q == 0:
        O[0] = p
    else:
        c = (1.0 + lout) / q
        O[0] = p * (1.0 + p * lout) / q / (1.0 + c)
        for j in range(2, n + 1):
            O[j - 1] = (j - 1 + lout) * O[j - 2] / (j + c)
    nu_in, nu_out = wg_exponents(p, lin, lout)
    return DirectedTheory(p, I, O, 1, nu_in, nu_out, {"model": "wg", "form": "recursion"})


@njit(cache=True)
def _wg_joint(i_max, j_max, p, lin, lout, a, b):
    n = np.zeros((i_max + 1, j_max + 1))
    src = p * (1.0 + p * lin)
    for i in range(i_max + 1):
        for j in range(1, j_max + 1):
            rhs = 0.0
            if i > 0:
                rhs += (i - 1 + lin) * n[i - 1, j]
            if j > 1:
                rhs += a * (j - 1 + lout) * n[i, j - 1]
            if i == 0 and j == 1:
                rhs += src
            n[i, j] = rhs / (i + a * (j + lout) + b)
    return n


def wg_joint(p: float, lambda_in: float, lambda_out: float, i_max: int, j_max: int) -> np.ndarray:
    """Joint law ``n_ij`` per unit time, indexed ``[i, j]`` (column 0 is empty)."""
    _check_wg(p, lambda_in, lambda_out)
    a, b = wg_shorthand(p, lambda_in, lambda_out)
    return _wg_joint(int(i_max), int(j_max), float(p), float(lambda_in), float(lambda_out), a, b)


# --------------------------------------------------------------- MG

def _check_mg(p, lambda_in, lambda_out):
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    if not (lambda_in > 0 and lambda_out > 0):
        raise ConfigError("the MG needs lambda_in > 0 and lambda_out > 0")
    if p == 1:
        raise RegimeError("q = 0: no links are ever created")


@dataclass(frozen=True)
class MgExponents:
    nu_in: float
    nu_out: float
    xi_in: float
    xi_out: float
    mean_degree: float


def mg_exponents(p: float, lambda_in: float, lambda_out: float) -> MgExponents:
    """``nu = 2(1 + lambda/D)`` with ``D = 2q/p``, and the joint-law exponents ``xi``."""
    _check_mg(p, lambda_in, lambda_out)
    d = 2.0 * (1.0 - p) / p
    ni = 2.0 * (1.0 + lambda_in / d)
    no = 2.0 * (1.0 + lambda_out / d)
    xi_in = ni + d / 2.0 * (ni - 1.0) * (no - 2.0) / (no - 1.0)
    xi_out = no + d / 2.0 * (no - 1.0) * (ni - 2.0) / (ni - 1.0)
    return MgExponents(ni, no, xi_in, xi_out, d)


def _mg_marginal(p, lam, k_max):
    q = 1.0 - p
    c = 1.0 + lam / q
    i = np.arange(int(k_max) + 1, dtype=float)
    i0 = p * (1.0 + lam * p / q) / c
    return i0 * np.exp(lgamma_ratio(lam, c + 1.0 - lam) - lgamma_ratio(i + lam, c + 1.0 - lam))


def mg_inout(p: float, lambda_in: float, lambda_out: float, k_max: int) -> DirectedTheory:
    """MG in- and out-degree laws, both starting at degree 0.

    ``(i + 1 + lambda/q) I_i = (i - 1 + lambda) I_{i-1} + p(1 + lambda p/q) [i = 0]``,
    and the same with ``lambda_out`` for ``O_j``.
    """
    _check_mg(p, lambda_in, lambda_out)
    e = mg_exponents(p, lambda_in, lambda_out)
    return DirectedTheory(p, _mg_marginal(p, lambda_in, k_max), _mg_marginal(p, lambda_out, k_max), 0,
                          e.nu_in, e.nu_out, {"model": "mg", "form": "closed"})


def mg_inout_recursion(p: float, lambda_in: float, lambda_out: float, k_max: int) -> DirectedTheory:
    _check_mg(p, lambda_in, lambda_out)
    q = 1.0 - p

    def rec(lam):
        out = np.empty(int(k_max) + 1)
        c = 1.0 + lam / q
        out[0] = p * (1.0 + lam * p / q) / c
        for i in range(1, out.size):
            out[i] = (i - 1 + lam) * out[i - 1] / (i + c)
        return out

    e = mg_exponents(p, lambda_in, lambda_out)
    return DirectedTheory(p, rec(lambda_in), rec(lambda_out), 0, e.nu_in, e.nu_out,
                          {"model": "mg", "form": "recursion"})


def _mg_joint_params(p, lam):
    q = 1.0 - p
    d = 2.0 * q / p
    c = p * (1.0 + 2.0 * lam / d)
    s = 1.0 + lam + lam / q
    return q, c, s


def mg_joint(p: float, lam: float, i_max: int, j_max: int) -> np.ndarray:
    """Closed-form joint law for ``lambda_in = lambda_out = lam``.

    ``n_ij = mu Gamma(i+lam) Gamma(j+lam) Gamma(i+j+1)
    / (Gamma(i+1) Gamma(j+1) Gamma(i+j+2+lam+lam/q))``
    with ``mu = c Gamma(1+lam+lam/q)/Gamma(lam)**2``.
    """
    _check_mg(p, lam, lam)
    q, c, s = _mg_joint_params(p, lam)
    i = np.arange(int(i_max) + 1, dtype=float)[:, None]
    j = np.arange(int(j_max) + 1, dtype=float)[None, :]
    log_amp = math.log(c) + math.lgamma(s) - 2.0 * math.lgamma(lam)
    log_n = (log_amp + lgamma_ratio(i + 1.0, lam - 1.0) + lgamma_ratio(j + 1.0, lam - 1.0)
             - lgamma_ratio(i + j + 1.0, s))
    return np.exp(log_n)


def mg_joint_asymptote(p: float, lam: float, i, j):
    """Large-(i, j) form ``mu (ij)**(lam-1) / (i+j)**(1+lam+lam/q)``."""
    q, c, s = _mg_joint_params(p, lam)
    log_mu = math.log(c) + math.lgamma(s) - 2.0 * math.lgamma(lam)
    i = np.asarray(i, dtype=float)
    j = np.asarray(j, dtype=float)
    return np.exp(log_mu + (lam - 1.0) * np.log(i * j) - s * np.log(i + j))


@njit(cache=True)
def _mg_joint_rec(i_max, j_max, lam, c, s):
    n = np.zeros((i_max + 1, j_max + 1))
    for i in range(i_max + 1):
        for j in range(j_max + 1):
            rhs = 0.0
            if i > 0:
                rhs += (i - 1 + lam) * n[i - 1, j]
            if j > 0:
                rhs += (j - 1 + lam) * n[i, j - 1]
            if i == 0 and j == 0:
                rhs += c
            n[i, j] = rhs / (i + j + s)
    return n


def mg_joint_recursion(p: float, lam: float, i_max: int, j_max: int) -> np.ndarray:
    """Iterate ``(i+j+1+lam+lam/q) n_ij = (i-1+lam) n_{i-1,j} + (j-1+lam) n_{i,j-1} + c [i=j=0]``."""
    _check_mg(p, lam, lam)
    q, c, s = _mg_joint_params(p, lam)
    return _mg_joint_rec(int(i_max), int(j_max), float(lam), c, s)
