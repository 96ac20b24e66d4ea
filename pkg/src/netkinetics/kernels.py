"""Attachment kernels A_k and their asymptotic regimes.

A kernel gives the rate at which an existing node of degree ``k`` receives
the link of a newly added node.  Four families are supported::

    KernelSpec.constant()            A_k = 1
    KernelSpec.power(gamma)          A_k = k**gamma
    KernelSpec.shifted_linear(w)     A_k = k + w          (w > -1)
    KernelSpec.attractive(dist)      A_k(eta) = eta * k   (eta drawn per node)

Kernels serialize to small dicts such as ``{"kind": "power", "gamma": 0.5}``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .exceptions import DomainError, UsageError

__all__ = [
    "AttractivenessDist",
    "KernelSpec",
    "Regime",
    "classify",
    "evaluate",
]


class Regime(str, enum.Enum):
    SUBLINEAR = "SubLinear"
    LINEAR = "Linear"
    BEST_SELLER = "BestSeller"
    BIBLE = "Bible"
    ANTI_PREFERENTIAL = "AntiPreferential"
    WORM = "Worm"


@dataclass(frozen=True)
class AttractivenessDist:
    """Distribution of the intrinsic attractiveness ``eta > 0``.

    ``point``        all nodes share ``eta``
    ``uniform``      uniform on ``[eta_min, eta_max]``
    ``powercutoff``  density ``omega * (eta_max - eta)**(omega - 1) / eta_max**omega``
                     on ``(0, eta_max)``
    """

    kind: str
    eta: float | None = None
    eta_min: float | None = None
    eta_max: float | None = None
    omega: float | None = None

    def __post_init__(self):
        if self.kind == "point":
            if self.eta is None or not self.eta > 0:
                raise DomainError("point mass needs eta > 0")
        elif self.kind == "uniform":
            if self.eta_min is None or self.eta_max is None:
                raise DomainError("uniform needs eta_min and eta_max")
            if not 0 < self.eta_min < self.eta_max:
                raise DomainError("uniform needs 0 < eta_min < eta_max")
        elif self.kind == "powercutoff":
            if self.eta_max is None or self.omega is None:
                raise DomainError("powercutoff needs eta_max and omega")
            if not (self.eta_max > 0 and self.omega > 0):
                raise DomainError("powercutoff needs eta_max > 0 and omega > 0")
        else:
            raise DomainError(f"unknown attractiveness distribution {self.kind!r}")

    @classmethod
    def point_mass(cls, eta: float) -> "AttractivenessDist":
        return cls("point", eta=float(eta))

    @classmethod
    def uniform(cls, eta_min: float, eta_max: float) -> "AttractivenessDist":
        return cls("uniform", eta_min=float(eta_min), eta_max=float(eta_max))

    @classmethod
    def power_cutoff(cls, eta_max: float, omega: float) -> "AttractivenessDist":
        return cls("powercutoff", eta_max=float(eta_max), omega=float(omega))

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "point":
            return (self.eta, self.eta)
        if self.kind == "uniform":
            return (self.eta_min, self.eta_max)
        return (0.0, self.eta_max)

    def pdf(self, eta):
        """Density on the support (point masses have no density)."""
        if self.kind == "point":
            raise UsageError("a point mass has no density")
        eta = np.asarray(eta, dtype=float)
        lo, hi = self.support
        inside = (eta > lo) & (eta < hi) if self.kind == "powercutoff" else (eta >= lo) & (eta <= hi)
        if self.kind == "uniform":
            val = np.full(eta.shape, 1.0 / (hi - lo))
        else:
            w = self.omega
            with np.errstate(divide="ignore", invalid="ignore"):
                val = w * np.power(hi - eta, w - 1.0) / hi**w
        return np.where(inside, val, 0.0)

    def cdf(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind == "point":
            return (eta >= self.eta).astype(float)
        lo, hi = self.support
        x = np.clip(eta, lo, hi)
        if self.kind == "uniform":
            return (x - lo) / (hi - lo)
        return 1.0 - np.power((hi - x) / hi, self.omega)

    def ppf(self, u):
        """Inverse CDF."""
        u = np.asarray(u, dtype=float)
        if self.kind == "point":
            return np.full(u.shape, self.eta)
        lo, hi = self.support
        if self.kind == "uniform":
            return lo + (hi - lo) * u
        # 1 - (1-u)**(1/omega) loses digits for small u; expm1/log1p keeps them
        return -hi * np.expm1(np.log1p(-u) / self.omega)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.ppf(rng.random(size))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        for name in ("eta", "eta_min", "eta_max", "omega"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AttractivenessDist":
        d = dict(d)
        return cls(d.pop("kind"), **{k: float(v) for k, v in d.items()})

    @classmethod
    def parse(cls, text: str) -> "AttractivenessDist":
        """Parse the CLI form ``point:1``, ``uniform:0.5,1`` or ``powercutoff:1,2``."""
        kind, _, args = text.partition(":")
        vals = [float(v) for v in args.split(",") if v.strip()]
        kind = kind.strip().lower()
        try:
            if kind == "point":
                return cls.point_mass(*vals)
            if kind == "uniform":
                return cls.uniform(*vals)
            if kind in ("powercutoff", "power-cutoff", "power_cutoff"):
                return cls.power_cutoff(*vals)
        except TypeError as exc:
            raise DomainError(f"bad attractiveness spec {text!r}") from exc
        raise DomainError(f"unknown attractiveness distribution {text!r}")


@dataclass(frozen=True)
class KernelSpec:
    """Declarative attachment kernel."""

    kind: str
    gamma: float = 0.0
    w: float = 0.0
    eta_dist: AttractivenessDist | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "power", "shifted", "attractive"):
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if not math.isfinite(self.gamma):
            raise DomainError("gamma must be finite")
        if self.kind == "shifted" and not self.w > -1:
            raise DomainError(f"shifted-linear kernel needs w > -1, got {self.w}")
        if self.kind == "attractive" and self.eta_dist is None:
            raise DomainError("attractive kernel needs an attractiveness distribution")

    @classmethod
    def constant(cls) -> "KernelSpec":
        return cls("constant")

    @classmethod
    def power(cls, gamma: float) -> "KernelSpec":
        return cls("power", gamma=float(gamma))

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("power", gamma=1.0)

    @classmethod
    def shifted_linear(cls, w: float) -> "KernelSpec":
        return cls("shifted", w=float(w))

    @classmethod
    def attractive(cls, dist: AttractivenessDist) -> "KernelSpec":
        return cls("attractive", eta_dist=dist)

    @property
    def exponent(self) -> float:
        """Growth exponent gamma of ``A_k ~ k**gamma``."""
        if self.kind == "constant":
            return 0.0
        if self.kind == "power":
            return self.gamma
        return 1.0

    @property
    def is_linear_family(self) -> bool:
        """True when ``A_k = k + w`` exactly (strictly linear included)."""
        return self.kind == "shifted" or (self.kind == "power" and self.gamma == 1.0)

    @property
    def shift(self) -> float:
        if not self.is_linear_family:
            raise UsageError("shift is defined only for linear-family kernels")
        return self.w if self.kind == "shifted" else 0.0

    def rate(self, k, eta=None):
        """Evaluate ``A_k`` (or ``eta * k``) for scalar or array ``k >= 1``."""
        return evaluate(self, k, eta)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant"}
        if self.kind == "power":
            return {"kind": "power", "gamma": self.gamma}
        if self.kind == "shifted":
            return {"kind": "shifted", "w": self.w}
        return {"kind": "attractive", "eta_dist": self.eta_dist.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "KernelSpec":
        kind = str(d.get("kind", "")).lower()
        if kind == "constant":
            return cls.constant()
        if kind == "linear":
            return cls.linear()
        if kind == "power":
            return cls.power(float(d["gamma"]))
        if kind in ("shifted", "shifted_linear", "shiftedlinear"):
            return cls.shifted_linear(float(d["w"]))
        if kind == "attractive":
            dist = d["eta_dist"]
            dist = AttractivenessDist.parse(dist) if isinstance(dist, str) else AttractivenessDist.from_dict(dist)
            return cls.attractive(dist)
        raise DomainError(f"unknown kernel kind {d.get('kind')!r}")


def evaluate(kernel: KernelSpec, k, eta=None):
    """Attachment rate of a node with degree ``k`` (and attractiveness ``eta``).

    Raises
    ------
    DomainError
        If any ``k < 1``; ``A_0`` is not defined.
    UsageError
        If ``eta`` is given for a homogeneous kernel or missing for an
        attractive one.
    """
    scalar = np.ndim(k) == 0
    karr = np.asarray(k)
    if np.any(karr < 1):
        raise DomainError("attachment rate is defined only for degree k >= 1")
    karr = karr.astype(float)
    if kernel.kind == "attractive":
        if eta is None:
            raise UsageError("attractive kernel needs eta")
        out = np.asarray(eta, dtype=float) * karr
    else:
        if eta is not None:
            raise UsageError("eta applies only to attractive kernels")
        if kernel.kind == "constant":
            out = np.ones_like(karr)
        elif kernel.kind == "power":
            out = karr if kernel.gamma == 1.0 else np.power(karr, kernel.gamma)
        else:
            out = karr + kernel.w
    return float(out) if scalar and np.ndim(out) == 0 else out


def classify(kernel: KernelSpec) -> Regime:
    """Asymptotic regime of a homogeneous kernel.

    Breakpoints in gamma: ``< -2`` worm-capable, ``[-2, 0)`` anti-preferential,
    ``[0, 1)`` sub-linear, ``1`` linear, ``(1, 2]`` best seller, ``> 2`` bible.
    """
    if kernel.kind == "attractive":
        raise UsageError("heterogeneous kernels are classified per attractiveness value")
    if kernel.kind == "shifted":
        return Regime.LINEAR
    g = kernel.exponent
    if g < -2:
        return Regime.WORM
    if g < 0:
        return Regime.ANTI_PREFERENTIAL
    if g < 1:
        return Regime.SUBLINEAR
    if g == 1:
        return Regime.LINEAR
    if g <= 2:
        return Regime.BEST_SELLER
    return Regime.BIBLE
