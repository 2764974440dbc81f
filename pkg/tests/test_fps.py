import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from hilfer_diffusion import (
    HarmonicModel,
    ModeSpec,
    ModeTruncationWarning,
    TwoTermModel,
    first_moment,
    first_moment_laplace,
    first_moment_residual,
    pdf_harmonic,
    relax_long,
    relax_mode,
    relax_short,
    second_moment,
    second_moment_harmonic,
    second_moment_laplace,
    zeroth_moment,
)
from hilfer_diffusion.errors import DomainError, ModelError
from hilfer_diffusion.mlf import ml2
from hilfer_diffusion.oracle import talbot_invert


def relax_transform(m, lam):
    return lambda s: (m.a * s ** (m.nu1 * (m.mu1 - 1)) + m.b * s ** (m.nu2 * (m.mu2 - 1))) / (
        m.a * s**m.mu1 + m.b * s**m.mu2 + lam
    )


def test_model_invariants(fig1):
    with pytest.raises(ModelError):
        HarmonicModel(fig1, mass=0.0)
    with pytest.raises(ModelError):
        HarmonicModel(TwoTermModel.figure1(0, alpha=1.5))


def test_einstein_builder(fig1):
    h = HarmonicModel.einstein(fig1, mass=2.0, omega=1.5, eta=0.5, x0=1.0)
    assert h.kBT == pytest.approx(2.0 * 0.5 * fig1.D)
    assert h.einstein_consistent
    assert not HarmonicModel(fig1, kBT=3.0).einstein_consistent


def test_mode_spec(caputo_trap):
    spec = ModeSpec.of(caputo_trap, 3)
    assert spec.eigenvalue == pytest.approx(3 * caputo_trap.omega**2 / caputo_trap.eta)
    spec.check(caputo_trap)
    with pytest.raises(ModelError):
        ModeSpec(3, 1.0).check(caputo_trap)
    with pytest.raises(ModelError):
        ModeSpec(-1, 0.0)


def test_relax_zero_eigenvalue(fig1):
    for t in np.geomspace(1e-3, 1e3, 7):
        assert relax_mode(fig1, 0.0, t) == pytest.approx(zeroth_moment(fig1, t), rel=1e-10)


def test_relax_single_term():
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.8, mu2=0.5, nu1=1.0, nu2=1.0)
    assert relax_mode(m, 1.3, 2.0) == pytest.approx(ml2(0.8, 1.0, -1.3 * 2.0**0.8), rel=1e-12)


def test_relax_talbot(fig1):
    want = talbot_invert(relax_transform(fig1, 1.0), 1.0)
    assert relax_mode(fig1, 1.0, 1.0) == pytest.approx(want, rel=1e-6)
    assert relax_mode(fig1, 1.0, 1.0, method="contour") == pytest.approx(want, rel=1e-6)


def test_relax_limits(fig1):
    # the two-term short law is only reached once (b/a) t^(mu1-mu2) is small
    assert relax_mode(fig1, 1.0, 1e-12) / relax_short(fig1, 1.0, 1e-12) == pytest.approx(1.0, abs=0.05)
    assert relax_mode(fig1, 1.0, 1e5) / relax_long(fig1, 1.0, 1e5) == pytest.approx(1.0, abs=0.05)
    with pytest.raises(DomainError):
        relax_long(TwoTermModel(a=1.0, b=0.0), 1.0, 10.0)


def test_relax_caputo_monotone(caputo):
    v = [relax_mode(caputo, 0.7, t) for t in np.geomspace(1e-3, 1e3, 13)]
    assert np.all(np.diff(v) < 0)


def test_exact_zero_term_in_outer_series():
    # one inner function of this series vanishes exactly at t = 1
    m = TwoTermModel(mu1=1.0, mu2=0.5, nu1=1.0, nu2=1.0)
    assert relax_mode(m, 1.0, 1.0) == pytest.approx(relax_mode(m, 1.0, 1.0, method="contour"), rel=1e-10)


def test_first_moment(fig1):
    h = HarmonicModel(fig1, omega=1.0, eta=1.0, x0=1.7)
    assert first_moment(h, 2.0) == pytest.approx(1.7 * relax_mode(fig1, 1.0, 2.0), rel=1e-15)
    want = talbot_invert(lambda s: first_moment_laplace(h, s), 1.0)
    assert first_moment(h, 1.0) == pytest.approx(want, rel=1e-6)
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.8, mu2=0.5, nu1=1.0, nu2=1.0)
    h = HarmonicModel(m, omega=2.0, eta=2.0, x0=0.5)
    assert first_moment(h, 1.5) == pytest.approx(0.5 * ml2(0.8, 1.0, -2.0 * 1.5**0.8), rel=1e-12)


def test_first_moment_residual(fig1):
    h = HarmonicModel(fig1, omega=1.3, eta=0.7, x0=2.0)
    for s in (0.1, 1.0, 3.0 + 2.0j, 20.0):
        assert abs(first_moment_residual(h, s)) < 1e-8


def test_pdf_harmonic_ground_mode(fig1):
    h = HarmonicModel(fig1, mass=1.0, omega=1.2, eta=1.0, kBT=0.8)
    k = h.mass * h.omega**2 / h.kBT
    x, t = 0.4, 2.0
    want = math.sqrt(k / (2 * math.pi)) * math.exp(-k * x * x / 2) * zeroth_moment(fig1, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModeTruncationWarning)
        assert pdf_harmonic(h, x, t, n_modes=1) == pytest.approx(want, rel=1e-12)


def test_pdf_harmonic_stationary(caputo_trap):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModeTruncationWarning)
        got = pdf_harmonic(caputo_trap, 0.0, 1e8, n_modes=1)
    assert got == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-10)


def test_pdf_harmonic_even_and_normalized(fig1):
    h = HarmonicModel(fig1, kBT=0.5)
    x = np.linspace(-8, 8, 801)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModeTruncationWarning)
        w = pdf_harmonic(h, x, 1.0, n_modes=6)
        ground = pdf_harmonic(h, x, 1.0, n_modes=1)
    # odd Hermite modes carry unit weights, so only the ground mode is even
    np.testing.assert_allclose(ground, ground[::-1], rtol=1e-12, atol=1e-300)
    assert integrate.simpson(w, x=x) == pytest.approx(zeroth_moment(fig1, 1.0), rel=1e-4)


def test_pdf_harmonic_truncation_warning(fig1):
    h = HarmonicModel(fig1)
    with pytest.warns(ModeTruncationWarning):
        pdf_harmonic(h, 0.3, 1e-4, n_modes=2)


def test_second_moment_harmonic_plateau(caputo_trap):
    assert second_moment_harmonic(caputo_trap, 1e8) == pytest.approx(caputo_trap.x_th2, rel=0.02)


def test_second_moment_harmonic_free_limit(fig1):
    h = HarmonicModel(fig1, omega=1e-6, eta=1.0, x0=0.8)
    t = 2.0
    want = second_moment(fig1, t) + 0.64 * zeroth_moment(fig1, t)
    assert second_moment_harmonic(h, t) == pytest.approx(want, rel=1e-5)


def test_second_moment_harmonic_talbot(fig1):
    h = HarmonicModel(fig1, omega=math.sqrt(0.5), eta=1.0, x0=0.0)
    want = talbot_invert(lambda s: second_moment_laplace(h, s), 1.0)
    assert second_moment_harmonic(h, 1.0) == pytest.approx(want, rel=1e-5)


def test_second_moment_harmonic_series_route(fig1):
    h = HarmonicModel(fig1, omega=math.sqrt(0.5), eta=1.0, x0=0.5)
    a = second_moment_harmonic(h, 1.0, grid=128, method="series")
    b = second_moment_harmonic(h, 1.0, grid=128)
    assert a == pytest.approx(b, rel=1e-6)
