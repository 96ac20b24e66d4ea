import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netkinetics import AttractivenessDist, KernelSpec, Regime, classify, evaluate
from netkinetics.exceptions import DomainError, UsageError


def test_eval_examples():
    assert evaluate(KernelSpec.power(1.0), 3) == 3
    assert evaluate(KernelSpec.shifted_linear(0.5), 2) == 2.5
    assert evaluate(KernelSpec.power(0.5), 4) == 2
    assert evaluate(KernelSpec.constant(), 7) == 1
    assert evaluate(KernelSpec.attractive(AttractivenessDist.point_mass(2.0)), 3, eta=2.0) == 6


def test_eval_rejects_k0_and_eta_misuse():
    with pytest.raises(DomainError):
        evaluate(KernelSpec.linear(), 0)
    with pytest.raises(DomainError):
        evaluate(KernelSpec.linear(), np.array([1, 0]))
    with pytest.raises(UsageError):
        evaluate(KernelSpec.attractive(AttractivenessDist.uniform(0.5, 1)), 2)
    with pytest.raises(UsageError):
        evaluate(KernelSpec.linear(), 2, eta=1.0)


def test_shifted_requires_w_above_minus_one():
    with pytest.raises(DomainError):
        KernelSpec.shifted_linear(-1.0)
    KernelSpec.shifted_linear(-0.999)


def test_classify_examples():
    assert classify(KernelSpec.power(0.5)) is Regime.SUBLINEAR
    assert classify(KernelSpec.power(2.5)) is Regime.BIBLE
    assert classify(KernelSpec.shifted_linear(1.0)) is Regime.LINEAR
    assert classify(KernelSpec.constant()) is Regime.SUBLINEAR
    with pytest.raises(UsageError):
        classify(KernelSpec.attractive(AttractivenessDist.point_mass(1.0)))


@pytest.mark.parametrize("gamma,regime", [
    (-3.0, Regime.WORM), (-2.0, Regime.ANTI_PREFERENTIAL), (-0.1, Regime.ANTI_PREFERENTIAL),
    (0.0, Regime.SUBLINEAR), (0.99, Regime.SUBLINEAR), (1.0, Regime.LINEAR),
    (1.01, Regime.BEST_SELLER), (2.0, Regime.BEST_SELLER), (2.01, Regime.BIBLE),
])
def test_classify_breakpoints(gamma, regime):
    assert classify(KernelSpec.power(gamma)) is regime


def _regime_oracle(g):
    if g == 1.0:
        return Regime.LINEAR
    if g < -2:
        return Regime.WORM
    if g < 0:
        return Regime.ANTI_PREFERENTIAL
    if g < 1:
        return Regime.SUBLINEAR
    return Regime.BEST_SELLER if g <= 2 else Regime.BIBLE


@given(st.floats(-10, 10, allow_nan=False))
def test_classify_piecewise_constant(gamma):
    assert classify(KernelSpec.power(gamma)) is _regime_oracle(gamma)


def test_shifted_zero_matches_linear():
    k = np.arange(1, 10_001)
    assert np.array_equal(evaluate(KernelSpec.shifted_linear(0.0), k), evaluate(KernelSpec.power(1.0), k))


@given(st.integers(1, 10**6), st.floats(-5, 5, allow_nan=False), st.floats(-0.99, 50, allow_nan=False))
def test_rates_positive_and_pure(k, gamma, w):
    for kern in (KernelSpec.power(gamma), KernelSpec.shifted_linear(w), KernelSpec.constant()):
        a = evaluate(kern, k)
        assert a > 0
        assert evaluate(kern, k) == a


@pytest.mark.parametrize("d", [
    {"kind": "constant"}, {"kind": "power", "gamma": 0.5}, {"kind": "shifted", "w": 1.0},
    {"kind": "attractive", "eta_dist": {"kind": "uniform", "eta_min": 0.5, "eta_max": 1.0}},
])
def test_kernel_roundtrip(d):
    k = KernelSpec.from_dict(d)
    assert KernelSpec.from_dict(k.to_dict()) == k
    assert k.to_dict() == d


def test_linear_alias():
    assert KernelSpec.from_dict({"kind": "linear"}) == KernelSpec.linear()


@pytest.mark.parametrize("dist", [
    AttractivenessDist.uniform(0.5, 1.0),
    AttractivenessDist.power_cutoff(1.0, 0.5),
    AttractivenessDist.power_cutoff(2.0, 1.7),
])
def test_attractiveness_density_normalized(dist):
    from scipy import integrate

    lo, hi = dist.support
    mass, _ = integrate.quad(lambda e: float(dist.pdf(e)), lo, hi, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-9)
    u = np.linspace(0.001, 0.999, 50)
    assert np.allclose(dist.cdf(dist.ppf(u)), u, atol=1e-12)


def test_powercutoff_ppf_small_u_keeps_digits():
    d = AttractivenessDist.power_cutoff(1.0, 0.5)
    u = 1e-17
    # cdf(eta) = 1 - (1 - eta)**omega  =>  eta ~ u/omega for small u
    assert d.ppf(np.array([u]))[0] == pytest.approx(u / 0.5, rel=1e-12, abs=0)


def test_attractiveness_parse_and_errors():
    assert AttractivenessDist.parse("uniform:0.5,1") == AttractivenessDist.uniform(0.5, 1.0)
    assert AttractivenessDist.parse("point:2") == AttractivenessDist.point_mass(2.0)
    assert AttractivenessDist.parse("powercutoff:1,0.5") == AttractivenessDist.power_cutoff(1.0, 0.5)
    for bad in ("uniform:1,0.5", "point:-1", "gauss:1", "uniform:1"):
        with pytest.raises(DomainError):
            AttractivenessDist.parse(bad)


def test_point_mass_has_no_density():
    with pytest.raises(UsageError):
        AttractivenessDist.point_mass(1.0).pdf(1.0)


@given(st.floats(0.01, 10), st.floats(0.05, 5), st.floats(0, 1, exclude_max=True))
def test_powercutoff_sample_in_support(eta_max, omega, u):
    d = AttractivenessDist.power_cutoff(eta_max, omega)
    x = float(d.ppf(np.array([u]))[0])
    assert 0.0 <= x < eta_max or math.isclose(x, eta_max)
