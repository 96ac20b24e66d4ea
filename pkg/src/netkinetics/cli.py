"""Command-line harness: ``netkinetics {gn,wg,mg,theory,compare,replay}``.

Exit status is 0 on success, 1 when ``--check`` is set and a check fails
(or a replay differs), and 2 on configuration errors or missing files.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _rng, analysis, gn, mg, theory, wg
from .exceptions import ConfigError, DomainError, NetKineticsError, RegimeError, UsageError
from .kernels import AttractivenessDist, KernelSpec
from .measure import DistTable, compare, merge

log = logging.getLogger("netkinetics")

MODELS = ("gn", "wg", "mg")
GN_ANALYSES = ("degree", "age", "corr", "components")
KERNELS = ("constant", "power", "shifted", "attractive", "linear")
DIST_FILES = {
    "gn": {"degree": "degree", "age": "age_slices", "corr": "corr", "components": "components"},
    "wg": {"degree": "in_degree"},
    "mg": {"degree": "in_degree", "clusters": "clusters"},
}


# -- configuration -------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    model: str
    steps: int = 100_000
    seeds: list = field(default_factory=lambda: [0])
    seed_base: int = 0
    kernel: dict | None = None
    p: float | None = None
    lambda_in: float | None = None
    lambda_out: float | None = None
    analyses: list = field(default_factory=lambda: ["degree"])
    format: str = "csv"
    out_dir: str = "."
    check: bool = False
    z_tol: float = 4.0
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 1:
            raise ConfigError("steps must be a positive integer")
        if not self.seeds or any(not isinstance(s, (int, np.integer)) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.model == "gn":
            self.kernel_spec()
            bad = set(self.analyses) - set(GN_ANALYSES)
            if bad:
                raise ConfigError(f"unknown GN analyses {sorted(bad)}")
        else:
            if self.p is None:
                raise ConfigError(f"{self.model} needs --p")
            # lambda = 1 is the symmetric case the cluster theory covers
            self.lambda_in = 1.0 if self.lambda_in is None else self.lambda_in
            self.lambda_out = 1.0 if self.lambda_out is None else self.lambda_out
            check = wg.validate_wg_params if self.model == "wg" else mg.validate_mg_params
            check(self.p, self.lambda_in, self.lambda_out)
        return self

    def kernel_spec(self) -> KernelSpec:
        if not self.kernel:
            raise ConfigError("gn needs --kernel")
        try:
            return KernelSpec.from_dict(self.kernel)
        except (KeyError, TypeError, DomainError) as exc:
            raise ConfigError(f"bad kernel {self.kernel}: {exc}") from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def config_hash(self) -> str:
        """Hash of everything that determines the outputs (not the output path or job count)."""
        d = self.to_dict()
        for k in ("out_dir", "jobs", "check"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _kernel_from_args(args) -> dict | None:
    if args.kernel is None:
        return None
    kind = args.kernel
    if kind == "linear":
        return {"kind": "linear"}
    if kind == "constant":
        return {"kind": "constant"}
    if kind == "power":
        if args.gamma is None:
            raise ConfigError("--kernel power needs --gamma")
        return {"kind": "power", "gamma": args.gamma}
    if kind == "shifted":
        if args.shift is None:
            raise ConfigError("--kernel shifted needs --shift")
        return {"kind": "shifted", "w": args.shift}
    if args.eta_dist is None:
        raise ConfigError("--kernel attractive needs --eta-dist")
    return {"kind": "attractive", "eta_dist": AttractivenessDist.parse(args.eta_dist).to_dict()}


def build_config(args) -> ExperimentConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    base: dict = {"model": args.command}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"config file {path} not found")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if loaded.get("model", args.command) != args.command:
            raise ConfigError(f"config is for model {loaded['model']!r}, not {args.command!r}")
        base.update(loaded)
    flags = {
        "steps": args.steps, "seed_base": args.seed_base, "format": args.format,
        "out_dir": args.out, "jobs": args.jobs, "z_tol": args.z_tol,
    }
    if args.command == "gn":
        flags["kernel"] = _kernel_from_args(args)
        if args.analyze:
            flags["analyses"] = [a.strip() for a in args.analyze.split(",") if a.strip()]
    else:
        flags.update(p=args.p, lambda_in=args.lambda_in, lambda_out=args.lambda_out)
    base.update({k: v for k, v in flags.items() if v is not None})
    if args.check:
        base["check"] = True
    if args.seeds is not None or args.seed_base is not None or "seeds" not in base:
        n = args.seeds if args.seeds is not None else len(base.get("seeds", [0]))
        start = base.get("seed_base", 0)
        base["seeds"] = list(range(start, start + n))
    return ExperimentConfig.from_dict(base).validate()


# -- running -------------------------------------------------------------------------


def _run_seed(cfg_dict: dict, seed: int):
    cfg = ExperimentConfig.from_dict(cfg_dict)
    t0 = time.perf_counter()
    if cfg.model == "gn":
        state = gn.grow(cfg.kernel_spec(), cfg.steps, seed)
        s = analysis.summarize_gn(state, seed, cfg.analyses)
    elif cfg.model == "wg":
        s = analysis.summarize_wg(wg.grow_wg(cfg.p, cfg.lambda_in, cfg.lambda_out, cfg.steps, seed), seed)
    else:
        s = analysis.summarize_mg(mg.grow_mg(cfg.p, cfg.lambda_in, cfg.lambda_out, cfg.steps, seed), seed)
    s.runtime = time.perf_counter() - t0
    return s


def run_seeds(cfg: ExperimentConfig) -> list:
    d = cfg.to_dict()
    if cfg.jobs == 1 or len(cfg.seeds) == 1:
        return [_run_seed(d, s) for s in cfg.seeds]
    with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(cfg.seeds))) as ex:
        return list(ex.map(_run_seed, [d] * len(cfg.seeds), cfg.seeds))


class Writer:
    """Writes every artifact with a ``config_hash`` header and records its digest."""

    def __init__(self, root: Path, cfg_hash: str, fmt: str):
        self.root, self.hash, self.fmt = root, cfg_hash, fmt
        self.files: dict[str, str] = {}

    def _record(self, rel: str, text: str):
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.files[rel] = hashlib.sha256(text.encode()).hexdigest()

    def table(self, rel: str, header: list[str], rows: list[tuple]):
        if self.fmt == "json":
            doc = {"config_hash": self.hash, "columns": header, "rows": [list(r) for r in rows]}
            self._record(rel + ".json", json.dumps(doc, indent=1) + "\n")
            return
        lines = [f"# config_hash={self.hash}", ",".join(header)]
        lines += [",".join(_cell(v) for v in r) for r in rows]
        self._record(rel + ".csv", "\n".join(lines) + "\n")

    def dist(self, rel: str, table: DistTable, theory_table: DistTable | None = None):
        rows = table.to_rows(theory_table)
        header = ["k", "count", "density"] + (["theory_density", "z"] if theory_table is not None else [])
        self.table(rel, header, rows)

    def json(self, rel: str, doc: dict):
        doc = {"config_hash": self.hash, **doc}
        self._record(rel, json.dumps(analysis._jsonable(doc), indent=2, sort_keys=True) + "\n")


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _gn_outputs(cfg: ExperimentConfig, sums: list, w: Writer, checks: list):
    kernel = cfg.kernel_spec()
    pooled = merge([s.degree for s in sums])
    try:
        th = theory.gn_degree_dist(kernel, int(pooled.support.max())).nk
    except RegimeError:
        th = None
    for s in sums:
        w.dist(f"seeds/seed_{s.seed}/degree", s.degree, th)
    w.dist("degree", pooled, th)
    if th is not None:
        w.dist("theory/degree", th)
    linear = kernel.kind == "power" and kernel.gamma == 1.0
    checks += analysis.gn_degree_checks(sums, kernel, z_tol=cfg.z_tol, tail_tol=0.1 if linear else 0.15)
    if kernel.kind == "power" and kernel.gamma > 2:
        checks.append(analysis.share_check(sums))
    if kernel.kind == "power" and 0 < kernel.gamma < 1:
        try:
            checks.append(analysis.stretched_check(sums, kernel.gamma))
        except UsageError as exc:
            log.warning("stretched-exponential check skipped: %s", exc)
    if "age" in cfg.analyses:
        edges = sums[0].age_edges
        th_rows = {b: (k, d) for b, k, d in analysis.age_theory_rows(edges)} if linear else {}
        rows = []
        for b in range(len(edges) - 1):
            parts = [s.age_rows[b] for s in sums if s.age_rows[b] is not None]
            if not parts:
                continue
            tab = merge(parts)
            for k, c, dens in zip(tab.support, tab.count, tab.density):
                tdens = ""
                if b in th_rows and k <= th_rows[b][0][-1]:
                    tdens = repr(float(th_rows[b][1][k - 1]))
                rows.append((repr(float(edges[b])), repr(float(edges[b + 1])), int(k), int(c), repr(float(dens)), tdens))
        w.table("age_slices", ["x_lo", "x_hi", "k", "count", "density", "theory_density"], rows)
        if linear:
            checks += analysis.age_checks(sums)
    if "corr" in cfg.analyses:
        counts = sum(s.corr_counts for s in sums)
        t = sum(s.steps for s in sums)
        rows = []
        for k in range(1, counts.shape[0]):
            for l in range(1, counts.shape[1]):
                th_c = repr(float(theory.corr_closed(k, l))) if linear else ""
                rows.append((k, l, int(counts[k, l]), repr(counts[k, l] / t), th_c))
        w.table("corr", ["k", "l", "count", "density", "theory_density"], rows)
        if linear:
            checks += analysis.corr_checks(sums, z_tol=cfg.z_tol)
    if "components" in cfg.analyses:
        tab = merge([s.in_component for s in sums])
        s_th = None
        if kernel.kind == "constant":
            s_th = DistTable.from_density(tab.support, theory.in_component_dist(tab.support))
        w.dist("components", tab, s_th)
        if s_th is not None:
            w.dist("theory/components", s_th)
        gmax = max(s.generation_sizes.size for s in sums)
        gen = np.zeros(gmax, dtype=np.int64)
        for s in sums:
            gen[: s.generation_sizes.size] += s.generation_sizes
        rows = [(g, int(c)) for g, c in enumerate(gen)]
        w.table("generations", ["generation", "count"], rows)
        if kernel.kind == "constant":
            checks += analysis.component_checks(sums, z_tol=cfg.z_tol)


def _wg_outputs(cfg, sums, w, checks):
    k_top = max(int(s.in_deg.support.max()) for s in sums)
    th = theory.wg_closed_form(cfg.p, cfg.lambda_in, cfg.lambda_out, max(k_top, 50))
    for s in sums:
        w.dist(f"seeds/seed_{s.seed}/in_degree", s.in_deg, th.in_dist)
        w.dist(f"seeds/seed_{s.seed}/out_degree", s.out_deg, th.out_dist)
    w.dist("in_degree", merge([s.in_deg for s in sums]), th.in_dist)
    w.dist("out_degree", merge([s.out_deg for s in sums]), th.out_dist)
    w.dist("theory/in_degree", th.in_dist)
    w.dist("theory/out_degree", th.out_dist)
    checks += analysis.wg_checks(sums, cfg.p, cfg.lambda_in, cfg.lambda_out, z_tol=cfg.z_tol)


def _mg_outputs(cfg, sums, w, checks):
    k_top = max(int(s.in_deg.support.max()) for s in sums)
    th = theory.mg_inout(cfg.p, cfg.lambda_in, cfg.lambda_out, max(k_top, 50))
    pooled_c = merge([s.clusters for s in sums])
    ct = None
    unit = cfg.lambda_in == 1.0 and cfg.lambda_out == 1.0
    if unit:
        ct = theory.mg_cluster_dist(cfg.p, max(int(pooled_c.support.max()), 30)).c
    for s in sums:
        w.dist(f"seeds/seed_{s.seed}/in_degree", s.in_deg, th.in_dist)
        w.dist(f"seeds/seed_{s.seed}/out_degree", s.out_deg, th.out_dist)
        w.table(f"seeds/seed_{s.seed}/census", ["size", "count"],
                [(int(k), int(c)) for k, c in zip(s.clusters.support, s.clusters.count)])
    w.dist("in_degree", merge([s.in_deg for s in sums]), th.in_dist)
    w.dist("out_degree", merge([s.out_deg for s in sums]), th.out_dist)
    w.dist("clusters", pooled_c, ct)
    w.dist("theory/in_degree", th.in_dist)
    w.dist("theory/out_degree", th.out_dist)
    if ct is not None:
        w.dist("theory/clusters", ct)
    checks += [
        analysis.seedwise_compare("in-degree z-test", [s.in_deg for s in sums], th.in_dist, (0, 50), cfg.z_tol),
        analysis.seedwise_compare("out-degree z-test", [s.out_deg for s in sums], th.out_dist, (0, 50), cfg.z_tol),
    ]
    if unit and cfg.p < 1:
        checks += analysis.mg_checks(sums, cfg.p, z_tol=cfg.z_tol)


def run(cfg: ExperimentConfig, out_dir: Path | None = None, *, quiet: bool = False) -> tuple[int, list]:
    """Run the experiment, write artifacts, and return ``(exit status, checks)``."""
    root = Path(out_dir or cfg.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    h = cfg.config_hash()
    t0 = time.perf_counter()
    sums = run_seeds(cfg)
    w = Writer(root, h, cfg.format)
    checks: list = []
    {"gn": _gn_outputs, "wg": _wg_outputs, "mg": _mg_outputs}[cfg.model](cfg, sums, w, checks)
    report = {
        "model": cfg.model,
        "steps": cfg.steps,
        "seeds": cfg.seeds,
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    if cfg.model == "wg":
        fits = {c.name: c.value for c in checks if "exponent" in c.name}
        report["fitted_exponents"] = fits
    w.json("report.json", report)
    manifest = {
        "config": cfg.to_dict(),
        "config_hash": h,
        "seeds": cfg.seeds,
        "seed_base": cfg.seed_base,
        "rng": {"algorithm": _rng.RNG_ALGORITHM, "numpy": _rng.RNG_VERSION},
        "versions": {"netkinetics": __version__, "python": platform.python_version(), "numpy": np.__version__},
        "runtimes": {str(s.seed): s.runtime for s in sums},
        "total_runtime": time.perf_counter() - t0,
        "files": dict(sorted(w.files.items())),
    }
    (root / "manifest.json").write_text(json.dumps(analysis._jsonable(manifest), indent=2, sort_keys=True) + "\n")
    if not quiet:
        for c in checks:
            print(c.line())
    failed = cfg.check and not report["passed"]
    return (1 if failed else 0), checks


# -- theory / compare / replay --------------------------------------------------------


def _theory(args) -> int:
    if args.what == "mg-criticality":
        if args.p is None:
            raise ConfigError("mg-criticality needs --p")
        c = theory.mg_criticality(args.p)
        if c.m2 is None:
            print(f"pc={c.pc:.7f} m2=nan tau=nan")
        else:
            print(f"pc={c.pc:.7f} m2={c.m2:.5f} tau={c.tau_cluster:.5f}")
        return 0
    if args.what == "gn-degree":
        th = theory.gn_degree_dist(KernelSpec.from_dict(_kernel_from_args(args) or {"kind": "linear"}), args.k_max).nk
    elif args.what == "wg-degree":
        t = theory.wg_closed_form(args.p, args.lambda_in, args.lambda_out, args.k_max)
        th = t.out_dist if args.side == "out" else t.in_dist
    elif args.what == "mg-degree":
        t = theory.mg_inout(args.p, args.lambda_in, args.lambda_out, args.k_max)
        th = t.out_dist if args.side == "out" else t.in_dist
    else:
        th = theory.mg_cluster_dist(args.p, args.k_max).c
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "verbose", "command")}
    h = hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()[:16]
    text = th.to_csv(header_comment=f"config_hash={h}")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _compare(args) -> int:
    for p in (args.empirical, args.theory):
        if not Path(p).is_file():
            raise FileNotFoundError(f"{p} not found")
    emp = DistTable.read_csv(args.empirical)
    th = DistTable.read_csv(args.theory, column=args.theory_column)
    lo, hi = (int(x) for x in args.range.split(","))
    rep = compare(emp, th, (lo, hi), args.z_tol)
    print(json.dumps(rep.to_dict(), indent=2))
    return 0 if rep.passed or not args.check else 1


def _replay(args) -> int:
    mpath = Path(args.manifest)
    if mpath.is_dir():
        mpath = mpath / "manifest.json"
    if not mpath.is_file():
        raise FileNotFoundError(f"manifest {mpath} not found")
    man = json.loads(mpath.read_text())
    root = mpath.parent
    cfg = ExperimentConfig.from_dict(man["config"])
    if args.seed_base is not None:
        n = len(cfg.seeds)
        cfg.seed_base = args.seed_base
        cfg.seeds = list(range(args.seed_base, args.seed_base + n))
    cfg.jobs = args.jobs or cfg.jobs
    strict = man.get("rng", {}).get("numpy") == _rng.RNG_VERSION
    if not strict:
        log.warning("numpy %s differs from the recorded %s; comparing numerically",
                    _rng.RNG_VERSION, man.get("rng", {}).get("numpy"))
    missing = [f for f in man["files"] if not (root / f).is_file()]
    if missing:
        raise FileNotFoundError(f"files listed in the manifest are missing: {missing}")
    with tempfile.TemporaryDirectory() as tmp:
        run(cfg, Path(tmp), quiet=True)
        differ = []
        for rel in man["files"]:
            if rel.endswith("report.json"):
                continue
            old = (root / rel).read_bytes()
            new_path = Path(tmp) / rel
            new = new_path.read_bytes() if new_path.is_file() else b""
            if old != new and (strict or not _numeric_equal(old, new)):
                differ.append(rel)
    if differ:
        for rel in differ:
            print(f"DIFFERS {rel}")
        return 1
    print(f"identical: {len(man['files'])} files")
    return 0


def _numeric_equal(a: bytes, b: bytes, rtol: float = 1e-12) -> bool:
    la, lb = a.decode().splitlines(), b.decode().splitlines()
    if len(la) != len(lb):
        return False
    for x, y in zip(la, lb):
        if x == y:
            continue
        for u, v in zip(x.split(","), y.split(",")):
            try:
                if not math.isclose(float(u), float(v), rel_tol=rtol):
                    return False
            except ValueError:
                if u != v:
                    return False
    return True


# -- argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--steps", type=int)
    p.add_argument("--seeds", type=int, help="number of seeds; expands to seed-base .. seed-base+N-1")
    p.add_argument("--seed-base", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--check", action="store_true", help="exit 1 if any comparison fails")
    p.add_argument("--config", help="JSON config; explicit flags override it")
    p.add_argument("--z-tol", type=float)


def _kernel_flags(p: argparse.ArgumentParser):
    p.add_argument("--kernel", choices=KERNELS)
    p.add_argument("--gamma", type=float)
    p.add_argument("--shift", type=float)
    p.add_argument("--eta-dist", help="e.g. point:1, uniform:0.5,1, powercutoff:1,0.5")


def _directed_flags(p: argparse.ArgumentParser):
    p.add_argument("--p", type=float)
    p.add_argument("--lambda-in", type=float)
    p.add_argument("--lambda-out", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netkinetics", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gn", help="growing network")
    _common(g)
    _kernel_flags(g)
    g.add_argument("--analyze", help=f"comma list from {','.join(GN_ANALYSES)}")
    for name, text in (("wg", "web graph"), ("mg", "multicomponent graph")):
        s = sub.add_parser(name, help=text)
        _common(s)
        _directed_flags(s)
    t = sub.add_parser("theory", help="print or write theory tables")
    t.add_argument("what", choices=("mg-criticality", "gn-degree", "wg-degree", "mg-degree", "mg-clusters"))
    _kernel_flags(t)
    _directed_flags(t)
    t.add_argument("--k-max", type=int, default=100)
    t.add_argument("--side", choices=("in", "out"), default="in")
    t.add_argument("--out")
    c = sub.add_parser("compare", help="z-test an empirical CSV against a theory CSV")
    c.add_argument("empirical")
    c.add_argument("theory")
    c.add_argument("--range", default="1,20")
    c.add_argument("--z-tol", type=float, default=4.0)
    c.add_argument("--theory-column", default="density")
    c.add_argument("--check", action="store_true")
    r = sub.add_parser("replay", help="re-run a manifest and compare outputs byte for byte")
    r.add_argument("manifest")
    r.add_argument("--seed-base", type=int)
    r.add_argument("--jobs", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command in MODELS:
            return run(build_config(args))[0]
        if args.command == "theory":
            return _theory(args)
        if args.command == "compare":
            return _compare(args)
        return _replay(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, DomainError, UsageError, RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NetKineticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
