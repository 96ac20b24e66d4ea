"""Rate-equation predictions for the growing network (GN)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate, optimize, stats
from scipy.special import beta, betainc, gammaln

from ..exceptions import ConsistencyError, DomainError, RegimeError, UsageError
from ..kernels import AttractivenessDist, KernelSpec
from ..measure import DistTable
from ._special import kahan_cumsum, lgamma_ratio, refined_quad

__all__ = [
    "CORR_PEAK_Y",
    "GnTheory",
    "HeteroTheory",
    "StretchedFit",
    "age_degree",
    "age_degree_bin",
    "corr_closed",
    "corr_limits",
    "corr_recursion",
    "corr_scaled",
    "diameter_estimate",
    "gn_degree_dist",
    "gn_hetero_dist",
    "hetero_mu",
    "in_component_dist",
    "linear_nk",
    "mean_degree_at_age",
    "mean_degree_bin",
    "out_component_dist",
    "solve_mu",
    "stretched_exp_fit",
    "stretched_exp_shape",
    "tau_time",
]

SERIES_CUTOFF = 1e-16
SERIES_MAX_TERMS = 10_000_000
CORR_PEAK_Y = (math.sqrt(33.0) - 5.0) / 2.0


# --------------------------------------------------------------- amplitude mu

@njit(cache=True)
def _power_series(mu, gamma, cutoff, max_terms):
    # sum_k prod_{j<=k} (1 + mu / j**gamma)**-1, stopped early once it exceeds 2
    s = 0.0
    c = 0.0
    logp = 0.0
    k = 0
    while k < max_terms:
        k += 1
        a = 1.0 if gamma == 0.0 else k ** gamma
        logp -= math.log1p(mu / a)
        term = math.exp(logp)
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
        if term < cutoff * s or s > 2.0:
            break
    return s, logp, k


def _power_tail(mu, gamma, logp, k):
    """Integral estimate of the series remainder past term ``k``."""
    if logp < math.log(SERIES_CUTOFF):
        return 0.0
    g1 = 1.0 - gamma
    k0 = k ** g1
    f = lambda y: math.exp(-mu * ((k + y) ** g1 - k0) / g1)
    return math.exp(logp) * integrate.quad(f, 0, np.inf, limit=200)[0]


def _check_solvable(kernel: KernelSpec):
    if kernel.kind == "attractive":
        return
    if kernel.exponent > 1:
        raise RegimeError(
            f"gamma = {kernel.exponent} > 1 has no linear-growth solution; the network condenses "
            "onto a dominant node (see gn.max_degree_share)"
        )


def _bracket_root(f, lo, hi, tol):
    while f(hi) > 0:
        hi *= 10.0
        if hi > 1e300:
            raise RegimeError("no root found for the amplitude equation")
    root = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(root)) > tol:
        raise ConsistencyError(f"amplitude equation residual {f(root):.3e} exceeds {tol:.1e}")
    return root


def solve_mu(kernel: KernelSpec, tol: float = 1e-12) -> float:
    """Amplitude ``mu`` of ``A(t) = mu t`` from ``sum_k prod_j (1 + mu/A_j)**-1 = 1``.

    Linear-family kernels ``A_k = k + w`` use the exact series value
    ``(1 + w)/(mu - 1)``; other kernels sum the series until the running
    product drops below ``1e-16`` and add an integral estimate of the rest.
    Attractive kernels are delegated to :func:`hetero_mu`.
    """
    _check_solvable(kernel)
    if kernel.kind == "attractive":
        return hetero_mu(kernel.eta_dist, tol=tol)
    if kernel.is_linear_family:
        w = kernel.shift
        f = lambda mu: (1.0 + w) / (mu - 1.0) - 1.0 if mu > 1.0 else np.inf
        return _bracket_root(f, 1.0 + 1e-12, 1e3, tol)

    gamma = kernel.exponent

    def f(mu):
        s, logp, k = _power_series(mu, gamma, SERIES_CUTOFF, SERIES_MAX_TERMS)
        if s > 2.0:
            return s - 1.0
        return s + _power_tail(mu, gamma, logp, k) - 1.0

    return _bracket_root(f, 1e-9, 1e3, tol)


# --------------------------------------------------------------- degree tables

@dataclass
class GnTheory:
    """Stationary degree law ``n_k`` of the GN.

    ``tail_mass`` is the exact density beyond the table, ``sum_{k > k_max} n_k``.
    """

    mu: float
    nk: DistTable
    nu: float | None
    kernel: KernelSpec
    tail_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def mean_degree(self) -> float:
        """``sum_k k n_k`` including the tail (exact for linear-family kernels)."""
        k = self.nk.support.astype(float)
        s = math.fsum(k * self.nk.density)
        if self.kernel.is_linear_family:
            s += _linear_tail_first_moment(self.kernel.shift, int(self.nk.support[-1]) + 1)
        return s


def linear_nk(k, w: float = 0.0):
    """``n_k = (2+w) Gamma(3+2w)/Gamma(1+w) * Gamma(k+w)/Gamma(k+3+2w)``."""
    k = np.asarray(k, dtype=float)
    lg = math.log(2.0 + w) + lgamma_ratio(1.0 + w, 2.0 + w) - lgamma_ratio(k + w, 3.0 + w)
    return np.exp(lg)


def _linear_tail_mass(w, k0):
    # sum_{k >= k0} n_k
    return math.exp(lgamma_ratio(1.0 + w, 2.0 + w) - lgamma_ratio(k0 + w, 2.0 + w))


def _linear_tail_first_moment(w, k0):
    # sum_{k >= k0} k n_k, splitting k = (k + w) - w and summing each gamma ratio exactly
    amp = math.log(2.0 + w) + lgamma_ratio(1.0 + w, 2.0 + w)
    t1 = math.exp(amp - lgamma_ratio(k0 + 1.0 + w, 1.0 + w)) / (1.0 + w)
    t2 = math.exp(amp - lgamma_ratio(k0 + w, 2.0 + w)) / (2.0 + w)
    return t1 - w * t2


def gn_degree_dist(kernel: KernelSpec, k_max: int) -> GnTheory:
    """``n_k = (mu/A_k) prod_{j<=k} (1 + mu/A_j)**-1`` for ``k = 1..k_max``.

    For ``A_k = k + w`` the product is cross-checked against the gamma-ratio
    form to 1e-12 relative and a mismatch raises :class:`ConsistencyError`.
    """
    k_max = int(k_max)
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    if kernel.kind == "attractive":
        het = gn_hetero_dist(kernel.eta_dist, k_max)
        return GnTheory(het.mu, het.nk, het.nu_max, kernel, het.tail_mass, {"hetero": het})
    mu = solve_mu(kernel)
    k = np.arange(1, k_max + 1)
    a = kernel.rate(k)
    logp = kahan_cumsum(-np.log1p(mu / a))
    nk = mu / a * np.exp(logp)
    tail = float(np.exp(logp[-1]))
    nu = None
    meta = {}
    if kernel.is_linear_family:
        w = kernel.shift
        gamma_form = linear_nk(k, w)
        rel = float(np.max(np.abs(nk / gamma_form - 1.0)))
        if rel > 1e-12:
            raise ConsistencyError(f"product and gamma-ratio forms differ by {rel:.2e}")
        meta["max_rel_diff"] = rel
        nu = 1.0 + mu
        tail = _linear_tail_mass(w, k_max + 1)
    return GnTheory(mu, DistTable.from_density(k, nk, 1.0, source="theory"), nu, kernel, tail, meta)


# --------------------------------------------------------------- heterogeneous

def _hetero_F(dist: AttractivenessDist, mu: float, rtol: float = 1e-12) -> float:
    """``int p0(eta) eta / (mu - eta) d eta``."""
    if dist.kind == "point":
        return dist.eta / (mu - dist.eta)
    lo, hi = dist.support
    delta = mu - hi
    if dist.kind == "uniform":
        span = hi - lo
        return refined_quad(lambda x: (hi - x) / (delta + x) / span, span, delta, rtol)
    om = dist.omega
    d = delta / hi

    def g(r):
        s = r ** (1.0 / om)
        return (1.0 - s) / (d + s)

    return refined_quad(g, 1.0, d ** om, rtol)


def hetero_mu(dist: AttractivenessDist, tol: float = 1e-12) -> float:
    """Solve ``1 = int p0(eta) (mu/eta - 1)**-1 d eta`` for ``mu > eta_max``.

    Raises :class:`RegimeError` when the integral stays below 1 as
    ``mu -> eta_max`` (the most attractive nodes then take a finite share
    of all links).
    """
    if dist.kind == "point":
        return 2.0 * dist.eta
    hi = dist.support[1]
    if dist.kind == "powercutoff" and dist.omega >= 2.0:
        raise RegimeError(
            f"omega = {dist.omega} >= 2: the amplitude integral is at most 1/(omega - 1) <= 1, "
            "so no mu > eta_max exists"
        )
    f = lambda mu: _hetero_F(dist, mu) - 1.0
    lo = None
    for e in range(1, 300):
        cand = hi * (1.0 + 10.0 ** (-e))
        if cand == hi:
            break
        if f(cand) > 0:
            lo = cand
            break
    if lo is None:
        raise RegimeError("amplitude integral never reaches 1 above eta_max")
    mu = optimize.brentq(f, lo, 3.0 * hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    if abs(f(mu)) > max(tol, 1e-10):
        raise ConsistencyError(f"amplitude residual {f(mu):.3e}")
    return mu


def _cond_nk(k, eta, mu):
    """Conditional law ``n_k(eta)/p0(eta)``, broadcast over ``k`` and ``eta``."""
    x = mu / eta
    return x * np.exp(gammaln(1.0 + x) - lgamma_ratio(k, 1.0 + x))


@dataclass
class HeteroTheory:
    """Degree law for the kernel ``A_k(eta) = eta k``.

    ``per_eta[k - 1, m]`` is ``n_k(eta)/p0(eta)`` at ``eta_nodes[m]``.
    """

    mu: float
    nk: DistTable
    eta_nodes: np.ndarray
    per_eta: np.ndarray
    eta_max: float
    tail_mass: float

    @property
    def nu_max(self) -> float:
        return 1.0 + self.mu / self.eta_max

    def nu(self, eta):
        return 1.0 + self.mu / np.asarray(eta, dtype=float)


def gn_hetero_dist(dist: AttractivenessDist, k_max: int, n_eta: int = 33) -> HeteroTheory:
    """Total and per-attractiveness degree laws for ``A_k(eta) = eta k``."""
    mu = hetero_mu(dist)
    k = np.arange(1, int(k_max) + 1, dtype=float)
    lo, hi = dist.support
    if dist.kind == "point":
        nk = _cond_nk(k, dist.eta, mu)
        nodes = np.array([dist.eta])
        per = nk[:, None]
    else:
        kk = k[:, None, None]
        if dist.kind == "uniform":
            span = hi - lo
            nk = refined_quad(lambda x: _cond_nk(kk, hi - x, mu) / span, span, span / 100.0)
        else:
            om = dist.omega
            nk = refined_quad(lambda r: _cond_nk(kk, hi * (1.0 - r ** (1.0 / om)), mu), 1.0, 1e-2)
        q = np.linspace(0.0, 1.0, n_eta + 2)[1:-1]
        nodes = dist.ppf(q)
        per = _cond_nk(k[:, None], nodes[None, :], mu)
    tail = max(0.0, 1.0 - math.fsum(nk))
    table = DistTable.from_density(k.astype(np.int64), nk, 1.0, source="theory")
    return HeteroTheory(mu, table, nodes, per, hi, tail)


# --------------------------------------------------------------- stretched exponential

def stretched_exp_shape(k, gamma: float, mu: float):
    """Predicted ``ln n_k`` up to an additive constant for ``0 <= gamma < 1``.

    ``ln n_k + gamma ln k`` is linear in ``k**(1-gamma)`` with slope ``-mu/(1-gamma)``.
    """
    if not 0 <= gamma < 1:
        raise DomainError("the stretched-exponential form needs 0 <= gamma < 1")
    k = np.asarray(k, dtype=float)
    g1 = 1.0 - gamma
    return -gamma * np.log(k) - mu * (k ** g1 - 2.0 ** g1) / g1


@dataclass
class StretchedFit:
    slope: float
    intercept: float
    r2: float
    n_points: int


def stretched_exp_fit(k, nk, gamma: float) -> StretchedFit:
    """Least-squares line of ``ln(n_k k**gamma)`` against ``k**(1-gamma)``."""
    k = np.asarray(k, dtype=float)
    nk = np.asarray(nk, dtype=float)
    keep = nk > 0
    if keep.sum() < 3:
        raise UsageError("need at least three positive points")
    x = k[keep] ** (1.0 - gamma)
    y = np.log(nk[keep]) + gamma * np.log(k[keep])
    res = stats.linregress(x, y)
    return StretchedFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2), int(keep.sum()))


# --------------------------------------------------------------- age

def age_degree(x, k):
    """``c_k(x) = sqrt(x) (1 - sqrt(x))**(k-1)`` with ``x = birth / t`` in ``(0, 1]``."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(k)
    if np.any(x <= 0) or np.any(x > 1):
        raise DomainError("x must lie in (0, 1]")
    if np.any(k < 1):
        raise DomainError("degree k must be >= 1")
    r = np.sqrt(x)
    out = r * np.power(1.0 - r, k - 1.0)
    return float(out) if out.ndim == 0 else out


def age_degree_bin(x_lo: float, x_hi: float, k):
    """Average of :func:`age_degree` over ``x`` in ``[x_lo, x_hi]``.

    With ``r = sqrt(x)`` the integral is ``2 B(3, k) [I_r(3, k)]`` between the
    bin edges, ``I`` being the regularized incomplete beta function.
    """
    if not 0 <= x_lo < x_hi <= 1:
        raise DomainError("need 0 <= x_lo < x_hi <= 1")
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise DomainError("degree k must be >= 1")
    r_lo, r_hi = math.sqrt(x_lo), math.sqrt(x_hi)
    mass = 2.0 * beta(3.0, k) * (betainc(3.0, k, r_hi) - betainc(3.0, k, r_lo))
    return mass / (x_hi - x_lo)


def mean_degree_bin(x_lo: float, x_hi: float) -> float:
    """Average of ``x**-1/2`` over ``[x_lo, x_hi]``."""
    return 2.0 * (math.sqrt(x_hi) - math.sqrt(x_lo)) / (x_hi - x_lo)


def mean_degree_at_age(x):
    """``<k>(x) = x**-1/2``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x > 1):
        raise DomainError("x must lie in (0, 1]")
    return 1.0 / np.sqrt(x)


# --------------------------------------------------------------- correlations

def corr_closed(k, l):
    """Joint density of (node degree ``k``, ancestor degree ``l``), linear kernel.

    Indices outside ``k >= 1, l >= 2`` return 0.
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    ok = (k >= 1) & (l >= 2)
    kc = np.where(ok, k, 1.0)
    lc = np.where(ok, l, 2.0)
    s = kc + lc
    val = 4.0 * (lc - 1.0) / (kc * s * (s + 1.0) * (s + 2.0)) * (1.0 / (kc + 1.0) + 3.0 / (s - 1.0))
    out = np.where(ok, val, 0.0)
    return float(out) if out.ndim == 0 else out


@njit(cache=True)
def _corr_rec(k_max, l_max):
    c = np.zeros((k_max + 1, l_max + 1))
    for k in range(1, k_max + 1):
        for l in range(1, l_max + 1):
            rhs = (k - 1) * c[k - 1, l] + (l - 1) * c[k, l - 1]
            if k == 1 and l >= 2:
                m = l - 1
                rhs += (l - 1) * 4.0 / (m * (m + 1.0) * (m + 2.0))
            c[k, l] = rhs / (k + l + 2.0)
    return c


def corr_recursion(k_max: int, l_max: int) -> np.ndarray:
    """Iterate ``(k+l+2) c_kl = (k-1) c_{k-1,l} + (l-1) c_{k,l-1} + (l-1) n_{l-1} [k=1]``.

    Returns an array indexed ``[k, l]`` with zero row and column 0.
    """
    if k_max < 1 or l_max < 1:
        raise DomainError("k_max and l_max must be >= 1")
    return _corr_rec(int(k_max), int(l_max))


def corr_scaled(y):
    """Scaling function ``F(y) = 4y(y+4)/(1+y)**4``; ``c_kl ~ k**-4 F(l/k)``."""
    y = np.asarray(y, dtype=float)
    return 4.0 * y * (y + 4.0) / (1.0 + y) ** 4


def corr_limits(k, l):
    """Asymptotes ``(16 l/k**5, 4/(k l)**2)`` for ``l << k`` and ``l >> k``."""
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    return 16.0 * l / k ** 5, 4.0 / (k * l) ** 2


# --------------------------------------------------------------- components

def in_component_dist(s):
    """``i_s = 1/(s(s+1))`` (constant kernel)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 1):
        raise DomainError("component size s must be >= 1")
    return 1.0 / (s * (s + 1.0))


def tau_time(t):
    """Logarithmic time ``ln(1 + t)`` of the genealogy."""
    return np.log1p(np.asarray(t, dtype=float))


def out_component_dist(s, t):
    """``O_s = tau**(s-1)/(s-1)!`` with ``tau = ln(1+t)`` (constant kernel)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 1):
        raise DomainError("component size s must be >= 1")
    tau = float(tau_time(t))
    if tau == 0.0:
        return np.where(s == 1, 1.0, 0.0)
    return np.exp((s - 1.0) * math.log(tau) - gammaln(s))


def diameter_estimate(n_nodes) -> float:
    """``2 e ln N``."""
    return 2.0 * math.e * math.log(n_nodes)
