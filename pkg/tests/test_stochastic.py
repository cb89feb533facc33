import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_secrecy.errors import ConfigurationError, DomainError
from ris_secrecy.stochastic import (PhaseErrorSpec, RicianSpec, draw_channel_batch, draw_channels, rho_kappa,
                                    sample_rician, sample_von_mises)


def bessel_series(v, x, terms=40):
    return sum((x / 2) ** (2 * m + v) / (math.factorial(m) * math.gamma(m + v + 1)) for m in range(terms))


def test_rho_kappa_zero():
    assert rho_kappa(0.0) == 0.0


def test_rho_kappa_large():
    # 1 - 1/(2k) - 1/(8k^2) - 1/(8k^3); the value sits just below 0.999
    k = 500.0
    assert rho_kappa(k) == pytest.approx(1 - 1 / (2 * k) - 1 / (8 * k**2) - 1 / (8 * k**3), abs=1e-10)
    assert rho_kappa(1e4) > 0.9999
    assert rho_kappa(math.inf) == 1.0


def test_rho_kappa_series_oracle():
    assert rho_kappa(2.0) == pytest.approx(0.697775, abs=1e-5)
    assert rho_kappa(2.0) == pytest.approx(bessel_series(1, 2.0) / bessel_series(0, 2.0), abs=1e-13)


def test_rho_kappa_switchover_region():
    # 80-term series at kappa=15
    assert rho_kappa(15.0) == pytest.approx(0.9660695639865081, abs=1e-12)


def test_rho_kappa_monotone_grid():
    vals = rho_kappa(np.arange(0.0, 10.01, 0.5))
    assert np.all(np.diff(vals) > 0)
    assert np.all((vals >= 0) & (vals < 1))


def test_rho_kappa_negative():
    with pytest.raises(DomainError):
        rho_kappa(-1.0)


def test_von_mises_uniform_at_zero():
    x = sample_von_mises(PhaseErrorSpec(0.0), np.random.default_rng(1), 1_000_000)
    assert abs(np.mean(np.exp(1j * x))) < 0.004


@pytest.mark.parametrize("kappa", [0.5, 2.0, 8.0])
def test_von_mises_characteristic_function(kappa):
    x = sample_von_mises(PhaseErrorSpec(kappa), np.random.default_rng(2), 1_000_000)
    c = np.cos(x)
    assert abs(c.mean() - rho_kappa(kappa)) < 3 * c.std() / math.sqrt(c.size)
    assert np.all((x > -math.pi - 1e-12) & (x <= math.pi + 1e-12))


def test_von_mises_concentrated():
    x = sample_von_mises(PhaseErrorSpec(50.0), np.random.default_rng(3), 200_000)
    assert 1 - abs(np.mean(np.exp(1j * x))) < 0.03


def test_von_mises_infinite_kappa_is_zero():
    assert np.all(sample_von_mises(PhaseErrorSpec(math.inf), np.random.default_rng(0), 10) == 0)


def test_rician_pure_rayleigh():
    h = sample_rician(RicianSpec(0.0, np.ones(3, complex)), np.random.default_rng(4), 100_000)
    n = h.shape[0]
    assert np.all(np.abs(h.mean(axis=0)) < 3 * math.sqrt(1 / n) * 1.5)
    p = np.abs(h) ** 2
    assert np.all(np.abs(p.mean(axis=0) - 1) < 3 * p.std(axis=0) / math.sqrt(n))


def test_rician_strong_los_limit():
    los = np.exp(1j * np.arange(4))
    h = sample_rician(RicianSpec(1e9, los), np.random.default_rng(0), 10)
    assert np.max(np.abs(h - los)) < 1e-4


def test_rician_unit_power():
    M = 5
    los = np.exp(1j * np.linspace(0, 3, M))
    h = sample_rician(RicianSpec(0.5, los), np.random.default_rng(7), 100_000)
    p = np.sum(np.abs(h) ** 2, axis=1)
    assert abs(p.mean() - M) < 3 * p.std() / math.sqrt(p.size)
    mean_target = math.sqrt(0.5 / 1.5) * los
    np.testing.assert_allclose(h.mean(axis=0), mean_target, atol=0.02)


def test_rician_shape_mismatch():
    with pytest.raises(ConfigurationError):
        sample_rician(RicianSpec(1.0, np.ones(3)), np.random.default_rng(0), dims=(4,))


def test_draw_shapes(default):
    d = draw_channels(default, default.angles(), np.random.default_rng(0))
    assert d.G.shape == (10, 5)
    assert d.h_rk.shape == (4, 5)
    assert d.h_ejr.shape == (4, 5)
    assert d.h_ejk.shape == (4, 4)
    assert d.phase_errors.shape == (5,)


def test_strong_los_ris_bs_rank_one(default):
    sc = default.replace(rho_b=1e12)
    d = draw_channels(sc, sc.angles(), np.random.default_rng(0))
    s = np.linalg.svd(d.G, compute_uv=False)
    assert s[1] / s[0] < 1e-5


def test_frobenius_moment(default):
    d = draw_channel_batch(default, default.angles(), np.random.default_rng(9), 100_000)
    f = np.sum(np.abs(d.G) ** 2, axis=(1, 2))
    assert abs(f.mean() - 50) < 3 * f.std() / math.sqrt(f.size)


def test_draws_deterministic(default):
    a = draw_channel_batch(default, default.angles(), np.random.default_rng(11), 50)
    b = draw_channel_batch(default, default.angles(), np.random.default_rng(11), 50)
    assert np.array_equal(a.G, b.G) and np.array_equal(a.phase_errors, b.phase_errors)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_rho_kappa_monotone_property(a, b):
    lo, hi = sorted([a, b])
    assert rho_kappa(lo) <= rho_kappa(hi) + 1e-15
