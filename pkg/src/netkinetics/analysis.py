"""Per-seed summaries of simulation runs and the checks run against theory.

Each simulator run is reduced to a small picklable summary (tables and a few
scalars), so seeds can run in worker processes and be merged afterwards.
Checks follow one policy: per-bin z-tests run seed by seed and tolerate
``n_seeds // 10`` failing seeds; exponent fits and ratios use pooled seeds.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from . import gn, mg, theory, wg
from .exceptions import RegimeError
from .kernels import KernelSpec
from .measure import MIN_EXPECTED, DistTable, _zscores, compare, fit_shifted_tail, merge

__all__ = [
    "AGE_EDGES",
    "Check",
    "GnSummary",
    "MgSummary",
    "WgSummary",
    "allowed_failures",
    "age_checks",
    "component_checks",
    "corr_checks",
    "gn_degree_checks",
    "mg_checks",
    "pooled_tail_check",
    "seedwise_compare",
    "share_check",
    "stretched_check",
    "summarize_gn",
    "summarize_mg",
    "summarize_wg",
    "wg_checks",
]

AGE_CENTERS = (0.04, 0.25, 0.64)
AGE_HALF_WIDTH = 0.01
AGE_EDGES = tuple(sorted({round(c + s * AGE_HALF_WIDTH, 10) for c in AGE_CENTERS for s in (-1, 1)}))


@dataclass
class Check:
    name: str
    passed: bool
    value: Any
    target: str
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {_fmt(self.value)} (target {self.target})"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = _jsonable(self.value)
        d["detail"] = _jsonable(self.detail)
        return d


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def allowed_failures(n_seeds: int) -> int:
    """Seed-level z-test failures tolerated: one in ten."""
    return n_seeds // 10


# -- summaries -------------------------------------------------------------------


@dataclass
class GnSummary:
    seed: int
    steps: int
    n_nodes: int
    degree: DistTable
    share: float
    age_edges: np.ndarray | None = None
    age_rows: list | None = None
    corr_counts: np.ndarray | None = None
    in_component: DistTable | None = None
    generation_sizes: np.ndarray | None = None
    runtime: float = 0.0


@dataclass
class WgSummary:
    seed: int
    steps: int
    n_nodes: int
    in_deg: DistTable
    out_deg: DistTable
    runtime: float = 0.0


@dataclass
class MgSummary:
    seed: int
    steps: int
    n_nodes: int
    in_deg: DistTable
    out_deg: DistTable
    clusters: DistTable
    n_clusters: int
    largest: int
    self_links: int
    runtime: float = 0.0


def summarize_gn(state: gn.GnState, seed: int, analyses: Sequence[str] = ("degree",), *,
                 age_edges=AGE_EDGES, corr_max: int = 20) -> GnSummary:
    s = GnSummary(seed, state.step, state.node_count, gn.degree_distribution(state), gn.max_degree_share(state))
    if "age" in analyses:
        sl = gn.age_degree_slice(state, np.asarray(age_edges, dtype=float))
        s.age_edges, s.age_rows = sl.edges, sl.rows
    if "corr" in analyses:
        s.corr_counts = gn.ancestor_correlation(state, corr_max, corr_max, normalize=False)
    if "components" in analyses:
        g = gn.genealogy(state)
        s.in_component = g.in_component_table(total=state.node_count)
        s.generation_sizes = g.generation_sizes()
    return s


def summarize_wg(state: wg.DirectedState, seed: int) -> WgSummary:
    i, o = wg.inout_distributions(state)
    return WgSummary(seed, state.step, state.N, i, o)


def summarize_mg(state: mg.ClusterState, seed: int) -> MgSummary:
    i, o = wg.inout_distributions(state)
    return MgSummary(seed, state.step, state.N, i, o, mg.cluster_size_distribution(state), state.n_clusters,
                     mg.largest_cluster(state)[0], state.self_link_count)


# -- generic checks ----------------------------------------------------------------


def seedwise_compare(name: str, tables: Sequence[DistTable], theory_table: DistTable, k_range, z_tol: float = 4.0) -> Check:
    reports = [compare(t, theory_table, k_range, z_tol) for t in tables]
    fails = [i for i, r in enumerate(reports) if not r.passed]
    worst = max(r.max_abs_z for r in reports)
    ok = len(fails) <= allowed_failures(len(tables))
    return Check(name, ok, worst, f"|z| < {z_tol} on k in {list(k_range)}, <= {allowed_failures(len(tables))} failing seeds",
                 {"failing_seeds": fails, "per_seed_max_abs_z": [r.max_abs_z for r in reports],
                  "worst_k": [r.worst_k for r in reports], "skipped": reports[0].skipped})


def pooled_tail_check(name: str, tables: Sequence[DistTable], k_min: int, expected: float, tol: float) -> Check:
    fit = fit_shifted_tail(merge(tables), k_min)
    ok = fit.available and abs(fit.exponent - expected) <= tol
    return Check(name, bool(ok), fit.exponent, f"{expected:.4g} +- {tol}",
                 {"stderr": fit.stderr, "shift": fit.shift, "k_min": k_min, "n_tail": fit.n_tail})


# -- GN ----------------------------------------------------------------------------


def gn_degree_checks(summaries: Sequence[GnSummary], kernel: KernelSpec, k_range=(1, 20), z_tol: float = 4.0,
                     tail_k_min: int = 10, tail_tol: float = 0.15) -> list[Check]:
    tables = [s.degree for s in summaries]
    k_top = max(int(t.support.max()) for t in tables)
    try:
        th = theory.gn_degree_dist(kernel, max(k_top, k_range[1]))
    except RegimeError:
        return []
    out = [seedwise_compare("degree z-test", tables, th.nk, k_range, z_tol)]
    if th.nu is not None and kernel.kind != "attractive":
        out.append(pooled_tail_check("degree tail exponent", tables, tail_k_min, th.nu, tail_tol))
    return out


def stretched_check(summaries: Sequence[GnSummary], gamma: float, k_range=(5, 60), r2_min: float = 0.99) -> Check:
    pooled = merge([s.degree for s in summaries])
    sel = (pooled.support >= k_range[0]) & (pooled.support <= k_range[1]) & (pooled.count >= MIN_EXPECTED)
    fit = theory.stretched_exp_fit(pooled.support[sel], pooled.density[sel], gamma)
    ok = fit.r2 > r2_min and fit.slope < 0
    return Check("stretched-exponential shape", bool(ok), fit.r2, f"R^2 > {r2_min}, slope < 0",
                 {"slope": fit.slope, "n_points": fit.n_points,
                  "k_used": [int(pooled.support[sel].min()), int(pooled.support[sel].max())]})


def share_check(summaries: Sequence[GnSummary], threshold: float = 0.99, min_fraction: float = 0.9) -> Check:
    shares = [s.share for s in summaries]
    frac = float(np.mean([x >= threshold for x in shares]))
    return Check("max degree share", frac >= min_fraction, frac,
                 f"share >= {threshold} in >= {min_fraction:.0%} of seeds", {"shares": shares})


def age_checks(summaries: Sequence[GnSummary], centers=AGE_CENTERS, half_width: float = AGE_HALF_WIDTH,
               tol: float = 0.05) -> list[Check]:
    edges = summaries[0].age_edges
    ratio_ok, mean_ok, ratios, means = True, True, {}, {}
    for c in centers:
        b = int(np.flatnonzero(np.isclose(edges, c - half_width))[0])
        pooled = merge([s.age_rows[b] for s in summaries if s.age_rows[b] is not None])
        mean = pooled.mean()
        r_hat, r_th = 1.0 - 1.0 / mean, 1.0 - math.sqrt(c)
        m_hat = mean * math.sqrt(c)
        ratios[c], means[c] = (r_hat, r_th), m_hat
        ratio_ok &= abs(r_hat / r_th - 1.0) <= tol
        mean_ok &= abs(m_hat - 1.0) <= tol
    return [
        Check("age geometric ratio", bool(ratio_ok), [v[0] for v in ratios.values()],
              f"1 - sqrt(x) within {tol:.0%} at x = {list(centers)}", {"theory": [v[1] for v in ratios.values()]}),
        Check("age mean degree", bool(mean_ok), list(means.values()), f"<k> sqrt(x) = 1 +- {tol}"),
    ]


def age_theory_rows(edges, k_max: int = 20):
    """Bin-averaged theory ``[(b, k, density)]`` for every finite-width bin."""
    rows = []
    k = np.arange(1, k_max + 1)
    for b in range(len(edges) - 1):
        lo, hi = float(edges[b]), float(edges[b + 1])
        if hi <= lo or lo < 0 or hi > 1:
            continue
        rows.append((b, k, theory.age_degree_bin(max(lo, 0.0), hi, k)))
    return rows


def corr_checks(summaries: Sequence[GnSummary], k_max: int = 8, l_max: int = 8, z_tol: float = 4.0,
                sigma: float = 3.0) -> list[Check]:
    k = np.arange(1, k_max + 1)[:, None]
    l = np.arange(1, l_max + 1)[None, :]
    p = theory.corr_closed(k, l)
    fails, worst, per_seed = [], 0.0, []
    for i, s in enumerate(summaries):
        counts = s.corr_counts[1:k_max + 1, 1:l_max + 1]
        z = _zscores(counts, s.steps, p)
        tested = s.steps * p >= MIN_EXPECTED
        m = float(np.max(np.abs(z[tested])))
        per_seed.append(m)
        worst = max(worst, m)
        if m >= z_tol:
            fails.append(i)
    z_check = Check("correlation z-test", len(fails) <= allowed_failures(len(summaries)), worst,
                    f"|z| < {z_tol} on k,l <= {k_max}", {"failing_seeds": fails, "per_seed_max_abs_z": per_seed})
    ratios = []
    for s in summaries:
        n5 = s.degree.at(5) * s.degree.total / s.steps
        ratios.append(s.corr_counts[5, 5] / s.steps / n5 ** 2)
    ratios = np.asarray(ratios)
    sem = float(ratios.std(ddof=1) / math.sqrt(ratios.size)) if ratios.size > 1 else math.inf
    dev = abs(float(ratios.mean()) - 1.0)
    fac = Check("correlation non-factorization", bool(dev > sigma * sem), float(ratios.mean()),
                f"c55/(n5 n5) differs from 1 by > {sigma} sigma",
                {"sem": sem, "theory": float(theory.corr_closed(5, 5) / theory.linear_nk(5) ** 2)})
    return [z_check, fac]


def component_checks(summaries: Sequence[GnSummary], s_max: int = 50, z_tol: float = 4.0,
                     peak_tol: float = 2.0, band=(0.7, 1.3)) -> list[Check]:
    th = DistTable.from_density(np.arange(1, s_max + 1), theory.in_component_dist(np.arange(1, s_max + 1)))
    out = [seedwise_compare("in-component z-test", [s.in_component for s in summaries], th, (1, s_max), z_tol)]
    peaks, taus, ratios = [], [], []
    for s in summaries:
        g = s.generation_sizes
        peaks.append(int(np.argmax(g)))
        taus.append(float(theory.tau_time(s.steps)))
        ratios.append((g.size - 1) / math.log(s.n_nodes))
    peak_ok = all(abs(pk - tau) <= peak_tol for pk, tau in zip(peaks, taus))
    out.append(Check("generation peak", peak_ok, peaks, f"ln(1+t) +- {peak_tol} = {taus[0]:.3f}"))
    lo, hi = band[0] * math.e, band[1] * math.e
    out.append(Check("max generation / ln N", all(lo <= r <= hi for r in ratios), ratios, f"[{lo:.3f}, {hi:.3f}]"))
    return out


# -- WG / MG -----------------------------------------------------------------------


def wg_checks(summaries: Sequence[WgSummary], p: float, lambda_in: float, lambda_out: float, k_max: int = 50,
              z_tol: float = 4.0, tail_k_min: int = 10, tol_in: float = 0.1, tol_out: float = 0.15) -> list[Check]:
    top = max(int(s.in_deg.support.max()) for s in summaries)
    th = theory.wg_closed_form(p, lambda_in, lambda_out, max(k_max, top))
    return [
        seedwise_compare("in-degree z-test", [s.in_deg for s in summaries], th.in_dist, (0, k_max), z_tol),
        seedwise_compare("out-degree z-test", [s.out_deg for s in summaries], th.out_dist, (1, k_max), z_tol),
        pooled_tail_check("in-degree exponent", [s.in_deg for s in summaries], tail_k_min, th.nu_in, tol_in),
        pooled_tail_check("out-degree exponent", [s.out_deg for s in summaries], tail_k_min, th.nu_out, tol_out),
    ]


def mg_checks(summaries: Sequence[MgSummary], p: float, k_max: int = 30, z_tol: float = 4.0, m2_tol: float = 0.03,
              tau_k_min: int = 3, tau_tol: float = 0.3, kmax_tol: float = 0.05) -> list[Check]:
    """Cluster checks; valid for ``lambda_in = lambda_out = 1``."""
    q = 1.0 - p
    crit = theory.mg_criticality(p)
    ct = theory.mg_cluster_dist(p, 2000)
    t = np.array([s.steps for s in summaries], dtype=float)
    m0 = np.array([s.n_clusters for s in summaries]) / t
    m0_hat = float(m0.mean())
    sigma = 2.0 * math.sqrt(p * q / t.sum())
    out = [Check("cluster count / t", abs(m0_hat - (p - q)) <= 3 * sigma, m0_hat, f"{p - q:.6g} +- 3 sigma ({3 * sigma:.2g})")]
    pooled = merge([s.clusters for s in summaries])
    m2 = pooled.moment(2)
    if crit.m2 is not None:
        out.append(Check("cluster second moment", abs(m2 / crit.m2 - 1.0) <= m2_tol, m2, f"{crit.m2:.6g} +- {m2_tol:.0%}"))
    out.append(seedwise_compare("cluster density z-test", [s.clusters for s in summaries], ct.c, (1, k_max), z_tol))
    if crit.tau_cluster is not None and crit.supercritical:
        fit = fit_shifted_tail(pooled, tau_k_min)
        out.append(Check("cluster tail exponent", bool(fit.available and abs(fit.exponent - crit.tau_cluster) <= tau_tol),
                         fit.exponent, f"{crit.tau_cluster:.4g} +- {tau_tol}",
                         {"stderr": fit.stderr, "shift": fit.shift, "k_min": tau_k_min}))
        r = float(np.mean([math.log(s.largest) / math.log(s.n_nodes) for s in summaries]))
        out.append(Check("log k_max / log N", abs(r - crit.kmax_exp) <= kmax_tol, r, f"{crit.kmax_exp:.4g} +- {kmax_tol}"))
    return out


def largest_fraction_check(summaries: Sequence[MgSummary], above: float | None = None, below: float | None = None) -> Check:
    fr = [s.largest / s.n_nodes for s in summaries]
    if above is not None:
        return Check("largest cluster fraction", all(f > above for f in fr), fr, f"> {above} in every seed")
    return Check("largest cluster fraction", all(f < below for f in fr), fr, f"< {below} in every seed")
