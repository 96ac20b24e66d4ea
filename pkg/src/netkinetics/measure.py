"""Histograms, tail fits and theory-vs-simulation comparisons."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import optimize, special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from .exceptions import DomainError, UsageError

__all__ = [
    "BinnedTable",
    "CompareReport",
    "DistTable",
    "TailExponentEstimator",
    "TailFit",
    "compare",
    "fit_shifted_tail",
    "fit_tail_exponent",
    "log_bin",
    "merge",
]

MIN_TAIL_SAMPLES = 100
MIN_EXPECTED = 10.0


@dataclass
class DistTable:
    """Counts on an integer support together with their normalizer.

    ``density = count / total``.  Empirical tables carry integer counts;
    theory tables carry ``count = density * total`` as floats.
    """

    support: np.ndarray
    count: np.ndarray
    total: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.int64)
        self.count = np.asarray(self.count)
        if self.support.shape != self.count.shape:
            raise UsageError("support and count must have the same shape")
        if self.support.size and np.any(np.diff(self.support) <= 0):
            order = np.argsort(self.support, kind="stable")
            self.support, self.count = self.support[order], self.count[order]
            if np.any(np.diff(self.support) == 0):
                raise UsageError("support contains duplicates")
        self.total = float(self.total)

    @classmethod
    def from_values(cls, values, total: float | None = None, *, drop_zero: bool = True) -> "DistTable":
        """Histogram non-negative integer samples."""
        values = np.asarray(values, dtype=np.int64)
        if values.size and values.min() < 0:
            raise DomainError("values must be non-negative integers")
        counts = np.bincount(values) if values.size else np.zeros(0, dtype=np.int64)
        support = np.arange(counts.size)
        if drop_zero:
            keep = counts > 0
            support, counts = support[keep], counts[keep]
        return cls(support, counts, values.size if total is None else total)

    @classmethod
    def from_density(cls, support, density, total: float = 1.0, **meta) -> "DistTable":
        density = np.asarray(density, dtype=float)
        return cls(support, density * total, total, dict(meta))

    @property
    def density(self) -> np.ndarray:
        return self.count / self.total if self.total else np.zeros(self.count.shape)

    def at(self, k) -> np.ndarray | float:
        """Density at ``k`` (zero where ``k`` is off the support)."""
        k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
        idx = np.searchsorted(self.support, k_arr)
        idx_c = np.minimum(idx, max(self.support.size - 1, 0))
        hit = (idx < self.support.size) & (self.support[idx_c] == k_arr) if self.support.size else np.zeros(k_arr.shape, bool)
        out = np.where(hit, self.density[idx_c] if self.support.size else 0.0, 0.0)
        return float(out[0]) if np.ndim(k) == 0 else out

    def counts_at(self, k) -> np.ndarray:
        return np.asarray(self.at(k)) * self.total

    def restrict(self, lo: int, hi: int) -> "DistTable":
        keep = (self.support >= lo) & (self.support <= hi)
        return DistTable(self.support[keep], self.count[keep], self.total, dict(self.meta))

    def mean(self) -> float:
        return float(np.sum(self.support * self.count) / np.sum(self.count))

    def moment(self, n: int) -> float:
        """``sum_k k**n * density_k``."""
        return float(np.sum(self.support.astype(float) ** n * self.density))

    def __add__(self, other: "DistTable") -> "DistTable":
        return merge([self, other])

    def to_rows(self, theory: "DistTable | None" = None) -> list[tuple]:
        rows = []
        th = theory.at(self.support) if theory is not None else None
        z = _zscores(self.count, self.total, th) if theory is not None else None
        for i, k in enumerate(self.support):
            row = [int(k), _fmt_count(self.count[i]), repr(float(self.density[i]))]
            if theory is not None:
                row += [repr(float(th[i])), repr(float(z[i]))]
            rows.append(tuple(row))
        return rows

    def to_csv(self, path=None, theory: "DistTable | None" = None, header_comment: str | None = None) -> str:
        """Write ``k,count,density[,theory_density,z]``; returns the text."""
        buf = io.StringIO()
        if header_comment:
            for line in header_comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = ["k", "count", "density"] + (["theory_density", "z"] if theory is not None else [])
        w.writerow(cols)
        w.writerows(self.to_rows(theory))
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def read_csv(cls, path, column: str = "count") -> "DistTable":
        """Read a table written by :meth:`to_csv` (or any ``k,...`` CSV).

        ``column`` selects the count column; with ``column="theory_density"``
        or ``"density"`` a unit-total density table is returned.
        """
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        ks, vals, dens = [], [], []
        for row in reader:
            ks.append(int(row["k"]))
            vals.append(float(row[column]))
            if "density" in row and column == "count":
                dens.append(float(row["density"]))
        if column != "count":
            return cls.from_density(ks, vals)
        counts = np.asarray(vals)
        total = counts.sum()
        if dens:
            nz = np.asarray(dens) > 0
            if nz.any():
                total = float(np.median(counts[nz] / np.asarray(dens)[nz]))
        if np.all(counts == np.round(counts)):
            counts = counts.astype(np.int64)
        return cls(ks, counts, total)


def _fmt_count(c):
    c = float(c)
    return str(int(c)) if c == int(c) and abs(c) < 2**53 else repr(c)


def merge(tables: Iterable[DistTable]) -> DistTable:
    """Associative merge: counts and totals add over the union of supports."""
    tables = list(tables)
    if not tables:
        raise UsageError("nothing to merge")
    support = np.unique(np.concatenate([t.support for t in tables]))
    is_int = all(np.issubdtype(t.count.dtype, np.integer) for t in tables)
    count = np.zeros(support.size, dtype=np.int64 if is_int else float)
    for t in tables:
        count[np.searchsorted(support, t.support)] += t.count
    return DistTable(support, count, sum(t.total for t in tables))


def _zscores(count, total, p):
    count = np.asarray(count, dtype=float)
    p = np.asarray(p, dtype=float)
    expected = total * p
    var = total * p * (1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (count - expected) / np.sqrt(var)
    z = np.where(var > 0, z, np.where(count == expected, 0.0, np.inf))
    return z


# -- tail exponents ------------------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    exponent: float
    stderr: float
    n_tail: float
    k_min: int
    available: bool
    curvature: float | None = None
    shift: float | None = None

    @property
    def power_law_like(self) -> bool | None:
        """False when the log-log CCDF bends strongly downward (exponential-type tail)."""
        if self.curvature is None or not math.isfinite(self.curvature):
            return None
        return self.curvature < 0.5


def _tail_curvature(support, count, k_min) -> float | None:
    """Relative change of the log-log CCDF slope between the lower and upper half of the tail."""
    keep = support >= k_min
    k, c = support[keep].astype(float), np.asarray(count, dtype=float)[keep]
    if k.size < 4:
        return None
    ccdf = np.cumsum(c[::-1])[::-1]
    ok = ccdf >= MIN_EXPECTED
    k, ccdf = k[ok], ccdf[ok]
    if k.size < 4:
        return None
    lk, lc = np.log(k), np.log(ccdf)
    mid = 0.5 * (lk[0] + lk[-1])
    lo, hi = lk <= mid, lk >= mid
    if lo.sum() < 2 or hi.sum() < 2:
        return None
    s_lo = np.polyfit(lk[lo], lc[lo], 1)[0]
    s_hi = np.polyfit(lk[hi], lc[hi], 1)[0]
    if s_lo >= 0:
        return None
    return float(s_hi / s_lo - 1.0)


def fit_tail_exponent(table: DistTable, k_min: int) -> TailFit:
    """Discrete maximum-likelihood (Hill-type) tail exponent.

    ``nu = 1 + n / sum_i ln(k_i / (k_min - 1/2))`` over the ``n`` samples with
    ``k_i >= k_min``; the asymptotic standard error is ``(nu - 1) / sqrt(n)``.
    Fewer than 100 tail samples gives ``available=False``.
    """
    if k_min < 1:
        raise DomainError("k_min must be >= 1")
    keep = table.support >= k_min
    k = table.support[keep].astype(float)
    c = np.asarray(table.count, dtype=float)[keep]
    n = float(c.sum())
    curv = _tail_curvature(table.support, table.count, k_min)
    if n < MIN_TAIL_SAMPLES:
        return TailFit(math.nan, math.nan, n, k_min, False, curv)
    s = float(np.sum(c * np.log(k / (k_min - 0.5))))
    nu = 1.0 + n / s
    return TailFit(nu, (nu - 1.0) / math.sqrt(n), n, k_min, True, curv)


def _shifted_negll(theta, k, c, n, k_min):
    nu, s = theta
    return (nu * float(np.sum(c * np.log(k + s))) + n * math.log(float(special.zeta(nu, k_min + s)))) / n


def fit_shifted_tail(table: DistTable, k_min: int) -> TailFit:
    """Maximum-likelihood fit of ``P(k) ~ (k + s)**-nu`` for ``k >= k_min``.

    The fitted offset ``s`` absorbs the leading ``1/k`` correction that makes
    plain power-law fits drift with ``k_min`` when the law is a gamma-function
    ratio.  ``stderr`` comes from the observed information matrix, so it
    includes the cost of estimating ``s``.
    """
    if k_min < 1:
        raise DomainError("k_min must be >= 1")
    keep = table.support >= k_min
    k = table.support[keep].astype(float)
    c = np.asarray(table.count, dtype=float)[keep]
    n = float(c.sum())
    curv = _tail_curvature(table.support, table.count, k_min)
    if n < MIN_TAIL_SAMPLES:
        return TailFit(math.nan, math.nan, n, k_min, False, curv)
    start = fit_tail_exponent(table, k_min).exponent
    bounds = [(1.0 + 1e-6, 50.0), (0.5 - k_min, 20.0 * k_min + 20.0)]
    res = optimize.minimize(_shifted_negll, [min(start, 49.0), 0.0], args=(k, c, n, k_min),
                            method="L-BFGS-B", bounds=bounds)
    res = optimize.minimize(_shifted_negll, res.x, args=(k, c, n, k_min), method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-15, "maxiter": 4000})
    nu, sh = (float(v) for v in res.x)
    # observed information by central differences
    h = np.array([1e-4 * max(1.0, nu), 1e-4 * max(1.0, abs(sh + k_min))])
    f = lambda t: _shifted_negll(t, k, c, n, k_min)
    H = np.empty((2, 2))
    x0 = np.array([nu, sh])
    for i in range(2):
        for j in range(2):
            ei, ej = np.eye(2)[i] * h[i], np.eye(2)[j] * h[j]
            H[i, j] = (f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)) / (4 * h[i] * h[j])
    try:
        var = np.linalg.inv(H)[0, 0] / n
        err = math.sqrt(var) if var > 0 else math.nan
    except np.linalg.LinAlgError:
        err = math.nan
    return TailFit(nu, err, n, k_min, True, curv, sh)


class TailExponentEstimator(BaseEstimator):
    """Estimator wrapper around :func:`fit_tail_exponent`.

    ``fit`` accepts either a 1-d array of integer samples or a
    :class:`DistTable`.  ``method="shifted"`` uses :func:`fit_shifted_tail`.
    After fitting, ``exponent_``, ``stderr_``, ``n_tail_``, ``curvature_``
    and ``shift_`` (``None`` for the plain fit) are available.
    """

    def __init__(self, k_min: int = 10, method: str = "hill"):
        self.k_min = k_min
        self.method = method

    def fit(self, X, y=None):
        check_scalar(self.k_min, "k_min", (int, np.integer), min_val=1)
        if self.method not in ("hill", "shifted"):
            raise ValueError(f"method must be 'hill' or 'shifted', got {self.method!r}")
        table = X if isinstance(X, DistTable) else DistTable.from_values(np.ravel(X))
        fit = fit_tail_exponent if self.method == "hill" else fit_shifted_tail
        res = fit(table, int(self.k_min))
        if not res.available:
            raise ValueError(f"only {res.n_tail:g} samples at or above k_min={self.k_min}")
        self.exponent_ = res.exponent
        self.stderr_ = res.stderr
        self.n_tail_ = res.n_tail
        self.curvature_ = res.curvature
        self.shift_ = res.shift
        return self

    def confidence_interval(self, z: float = 1.96) -> tuple[float, float]:
        check_is_fitted(self)
        return (self.exponent_ - z * self.stderr_, self.exponent_ + z * self.stderr_)


# -- comparisons -----------------------------------------------------------------


@dataclass
class CompareReport:
    range: tuple[int, int]
    support: np.ndarray
    z: np.ndarray
    max_abs_z: float
    worst_k: int | None
    z_tol: float
    skipped: list[int]
    tail: TailFit | None = None
    tail_expected: float | None = None
    tail_tol: float | None = None

    @property
    def tail_ok(self) -> bool:
        if self.tail_expected is None:
            return True
        if self.tail is None or not self.tail.available:
            return False
        return abs(self.tail.exponent - self.tail_expected) <= self.tail_tol

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_z < self.z_tol and self.tail_ok)

    def to_dict(self) -> dict:
        d = {
            "range": [int(self.range[0]), int(self.range[1])],
            "max_abs_z": float(self.max_abs_z),
            "worst_k": None if self.worst_k is None else int(self.worst_k),
            "z_tol": self.z_tol,
            "skipped": [int(k) for k in self.skipped],
            "pass": self.passed,
        }
        if self.tail is not None:
            d["tail_exponent_hat"] = self.tail.exponent
            d["tail_stderr"] = self.tail.stderr
            d["tail_k_min"] = self.tail.k_min
            d["tail_expected"] = self.tail_expected
            d["tail_tol"] = self.tail_tol
        return d


def compare(
    empirical: DistTable,
    theory: DistTable,
    k_range: tuple[int, int],
    z_tol: float = 4.0,
    *,
    tail_k_min: int | None = None,
    tail_expected: float | None = None,
    tail_tol: float | None = None,
    tail_method: str = "hill",
) -> CompareReport:
    """Per-bin multinomial z-scores of ``empirical`` against ``theory``.

    ``z_k = (count_k - total p_k) / sqrt(total p_k (1 - p_k))`` for ``k`` in
    ``k_range``.  Bins with expected count below 10 are skipped (listed in
    ``skipped``).  Optionally a tail exponent is fitted from ``tail_k_min``
    and checked against ``tail_expected +- tail_tol``; ``tail_method`` is
    ``"hill"`` (:func:`fit_tail_exponent`) or ``"shifted"`` (:func:`fit_shifted_tail`).
    """
    lo, hi = k_range
    ks = np.arange(lo, hi + 1)
    in_theory = np.isin(ks, theory.support)
    if not in_theory.any():
        raise UsageError("empirical and theory tables do not overlap on the requested range")
    ks = ks[in_theory]
    p = np.asarray(theory.at(ks), dtype=float)
    counts = empirical.counts_at(ks)
    expected = empirical.total * p
    tested = expected >= MIN_EXPECTED
    skipped = [int(k) for k in ks[~tested]]
    z = _zscores(counts, empirical.total, p)
    zt = np.abs(z[tested])
    if zt.size:
        i = int(np.argmax(zt))
        max_abs, worst = float(zt[i]), int(ks[tested][i])
    else:
        max_abs, worst = 0.0, None
    tail = None
    if tail_k_min is not None:
        if tail_method not in ("hill", "shifted"):
            raise UsageError(f"unknown tail method {tail_method!r}")
        fit = fit_tail_exponent if tail_method == "hill" else fit_shifted_tail
        tail = fit(empirical, tail_k_min)
    return CompareReport((lo, hi), ks, z, max_abs, worst, z_tol, skipped, tail, tail_expected, tail_tol)


# -- logarithmic binning -----------------------------------------------------------


@dataclass
class BinnedTable:
    """Geometric bins ``[edges[i], edges[i+1])`` over integers."""

    edges: np.ndarray
    counts: np.ndarray
    total: float

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges).astype(float)

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.widths * self.total)

    @property
    def centers(self) -> np.ndarray:
        lo = self.edges[:-1].astype(float)
        hi = self.edges[1:].astype(float) - 1.0
        return np.sqrt(np.maximum(lo, 0.0) * hi)

    def loglog_slope(self, min_count: float = MIN_EXPECTED, k_lo: float = 1.0) -> float:
        ok = (self.counts >= min_count) & (self.edges[:-1] >= k_lo) & (self.centers > 0)
        if ok.sum() < 2:
            raise ValueError("fewer than two usable bins")
        return float(np.polyfit(np.log(self.centers[ok]), np.log(self.density[ok]), 1)[0])


def log_bin(table: DistTable, ratio: float = 1.3) -> BinnedTable:
    """Aggregate a table into geometric bins with edge ratio ``ratio``.

    Bin density is ``sum(counts) / (width * total)`` so that
    ``sum(density * width)`` equals the table's total mass.
    """
    if not ratio > 1:
        raise DomainError("ratio must exceed 1")
    if table.support.size == 0:
        return BinnedTable(np.array([0, 1]), np.zeros(1), table.total)
    kmin, kmax = int(table.support[0]), int(table.support[-1])
    edges = []
    e = kmin
    if e == 0:
        edges.append(0)
        e = 1
    while e <= kmax:
        edges.append(e)
        e = max(e + 1, int(math.ceil(e * ratio)))
    edges.append(e)
    edges = np.asarray(edges, dtype=np.int64)
    idx = np.searchsorted(edges, table.support, side="right") - 1
    counts = np.zeros(edges.size - 1, dtype=table.count.dtype)
    np.add.at(counts, idx, table.count)
    return BinnedTable(edges, counts, table.total)
