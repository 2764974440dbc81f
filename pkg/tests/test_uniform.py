import math

import mpmath
import numpy as np
import pytest

from hilfer_diffusion.errors import DomainError, ModelError
from hilfer_diffusion.mlf import EULER_GAMMA
from hilfer_diffusion.uniform import (
    PATCH_RADIUS,
    TauberianInput,
    UniformModel,
    msd_laplace,
    msd_long_asymptote,
    msd_short_asymptote,
    msd_time,
    tauberian_map,
    w_fourier_laplace_uniform,
)


def test_model_invariants():
    with pytest.raises(ModelError):
        UniformModel(lam=0.0)
    with pytest.raises(ModelError):
        UniformModel(D=-1.0)
    with pytest.raises(ModelError):
        TauberianInput(rho=-1.0)


def test_transform_examples():
    assert w_fourier_laplace_uniform(UniformModel(1.0, 1.0), 0.0, 2.0) == pytest.approx(0.5, rel=1e-15)
    m = UniformModel(0.3, 0.7)
    for s in (1 - 1e-8, 1 + 1e-8):
        assert w_fourier_laplace_uniform(m, 0.0, s) == pytest.approx(1.0, rel=1e-7)


def test_transform_extended_precision():
    m = UniformModel(0.5, 1.0)
    with mpmath.workdps(40):
        s = mpmath.mpf(3)
        want = complex((1 - s**-0.5) / mpmath.log(s) / ((s - 1) / mpmath.log(s) + 1) / 0.5)
    assert w_fourier_laplace_uniform(m, 1.0, 3.0) == pytest.approx(want, rel=1e-14)


def test_msd_laplace_values():
    m = UniformModel(1.0, 0.5)
    s = 2.5
    assert msd_laplace(m, s) == pytest.approx(2 * 0.5 * math.log(s) / (s * (s - 1)), rel=1e-14)
    assert msd_laplace(m, 1.0) == pytest.approx(1.0, rel=1e-15)


def test_msd_is_second_k_derivative():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = UniformModel(rng.uniform(0.1, 1.0), 0.5)
        s = complex(rng.uniform(0.2, 5.0), rng.uniform(-2.0, 2.0))
        d = lambda h: (2 * w_fourier_laplace_uniform(m, 0.0, s) - w_fourier_laplace_uniform(m, h, s) - w_fourier_laplace_uniform(m, -h, s)) / (h * h)
        h = 1e-4
        rich = (4 * d(h / 2) - d(h)) / 3
        assert rich == pytest.approx(msd_laplace(m, s), rel=1e-6)


def test_patch_continuity():
    m = UniformModel(0.5, 0.5)
    for phase in np.linspace(0, 2 * np.pi, 9):
        edge = 1 + PATCH_RADIUS * np.exp(1j * phase)
        inside, outside = msd_laplace(m, edge * (1 - 1e-12)), msd_laplace(m, edge * (1 + 1e-12))
        assert abs(inside - outside) < 1e-9


def test_msd_time_short_example():
    m = UniformModel(1.0, 0.5)
    t = 1e-3
    assert msd_time(m, t) == pytest.approx(2 * 0.5 * t * (1 - EULER_GAMMA - math.log(t)), rel=0.02)


def test_msd_time_long_examples():
    m = UniformModel(0.5, 0.5)
    assert 0.9 <= msd_time(m, 1e4) / msd_long_asymptote(m, 1e4) <= 1.1
    m = UniformModel(0.9, 0.5)
    assert 0.95 <= msd_time(m, 1e6) / msd_long_asymptote(m, 1e6) <= 1.05


def test_msd_time_monotone():
    m = UniformModel(1.0, 0.5)
    v = [msd_time(m, t) for t in np.geomspace(1e-3, 1e4, 15)]
    assert np.all(np.diff(v) > 0)


def test_short_asymptote():
    m = UniformModel(1.0, 0.5)
    assert msd_short_asymptote(m, 0.01) == pytest.approx(0.01 * (1 - 0.577216 + 4.60517), rel=1e-6)
    assert msd_short_asymptote(m, 0.99 * math.exp(1 - EULER_GAMMA)) > 0
    t = 1e-200
    assert msd_short_asymptote(m, t) / (t * math.log(1 / t)) == pytest.approx(1.0, rel=1e-2)
    with pytest.raises(DomainError):
        msd_short_asymptote(m, 0.0)


def test_long_asymptote():
    m = UniformModel(1.0, 0.5)
    assert msd_long_asymptote(m, 100.0) == pytest.approx(math.log(100.0) + EULER_GAMMA, rel=1e-14)
    m = UniformModel(0.5, 0.5)
    ts = np.geomspace(1e2, 1e8, 13)
    assert np.all(np.diff([msd_long_asymptote(m, t) for t in ts]) < 0)
    with pytest.raises(DomainError):
        msd_long_asymptote(m, 0.5)


def test_tauberian_map():
    assert tauberian_map(TauberianInput(1.0), 3.0) == pytest.approx(1.0)
    assert tauberian_map(TauberianInput(2.0), 3.0) == pytest.approx(3.0)
    lam, t = 0.5, 1e5
    lead = tauberian_map(TauberianInput(lam, math.log), t) * 2 * 0.5 / lam
    assert lead / msd_long_asymptote(UniformModel(lam, 0.5), t) == pytest.approx(1.0, rel=0.15)
    with pytest.raises(DomainError):
        tauberian_map(TauberianInput(0.0), 1.0)
