import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from hilfer_diffusion import (
    EOperatorParams,
    SourceSpec,
    TwoTermModel,
    e_operator,
    fractional_moment,
    nonnegativity_check,
    pdf,
    pdf_hseries,
    second_moment,
    w_fourier_laplace,
    w_fourier_time,
    zeroth_moment,
)
from hilfer_diffusion.errors import (
    AsymmetricUnsupported,
    ModelError,
    MomentDoesNotExist,
    NumericalBreakdown,
    RequiresAlpha2,
    SingularEndpoint,
)
from hilfer_diffusion.mlf import MLParams, ml2, ml3
from hilfer_diffusion.oracle import talbot_invert
from hilfer_diffusion.twoterm import FIG1_NU_PAIRS, riesz_feller_symbol


# ------------------------------------------------------------------- model


def test_normalization_enforced():
    with pytest.raises(ModelError) as err:
        TwoTermModel(a=0.5, b=0.6)
    assert any(f == "b" for f, _ in err.value.violations)


def test_order_and_compatibility_enforced():
    with pytest.raises(ModelError):
        TwoTermModel(mu1=0.5, mu2=0.6)
    with pytest.raises(ModelError):
        TwoTermModel(nu1=0.3, nu2=0.5)
    with pytest.raises(ModelError):
        TwoTermModel(alpha=1.5, theta=0.8)
    with pytest.raises(ModelError):
        TwoTermModel(mu2=-0.1)


@pytest.mark.parametrize("pair, value", [(0, 0.1875), (1, 0.15625), (2, 0.125)])
def test_reference_pairs_compatible(pair, value):
    m = TwoTermModel.figure1(pair)
    assert (1 - m.nu1) * (1 - m.mu1) == pytest.approx(value, abs=1e-15)
    assert (1 - m.nu2) * (1 - m.mu2) == pytest.approx(value, abs=1e-12)
    assert len(FIG1_NU_PAIRS) == 3


def test_source_must_be_even():
    SourceSpec(lambda k, t: math.exp(-k * k - t))
    with pytest.raises(ModelError):
        SourceSpec(lambda k, t: k * t)


# -------------------------------------------------------------- transforms


def test_riesz_feller_symbol():
    assert riesz_feller_symbol(2, 0, 3.0) == pytest.approx(9.0)
    assert riesz_feller_symbol(1, 0, -2.0) == pytest.approx(2.0)
    assert riesz_feller_symbol(1.5, 0.5, 1.0) == pytest.approx(cmath.exp(1j * math.pi / 4))


def test_fourier_laplace_reductions(fig1):
    s = 2.0
    want = (0.5 * s ** (0.25 * -0.25) + 0.5 * s ** (0.5 * -0.375)) / (0.5 * s**0.75 + 0.5 * s**0.625)
    assert w_fourier_laplace(fig1, 0.0, s) == pytest.approx(want, rel=1e-14)
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.8, mu2=0.5, nu1=1.0, nu2=1.0, D=1.3)
    assert w_fourier_laplace(m, 1.5, s) == pytest.approx(s ** -0.2 / (s**0.8 + 1.3 * 2.25), rel=1e-14)


def test_fourier_laplace_by_quadrature(fig1):
    # numerical Laplace transform of the time-domain series
    f = lambda t: w_fourier_time(fig1, 1.0, t) * math.exp(-2.0 * t) if t > 0 else 0.0
    got = integrate.quad(f, 0, 1, limit=200, points=[1e-6, 1e-3])[0] + integrate.quad(f, 1, 40, limit=200)[0]
    assert got == pytest.approx(w_fourier_laplace(fig1, 1.0, 2.0).real, rel=1e-6)


def test_fourier_time_examples(fig1):
    for t in (0.1, 1.0, 10.0):
        assert w_fourier_time(fig1, 0.0, t) == pytest.approx(zeroth_moment(fig1, t), rel=1e-12)
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.7, mu2=0.5, nu1=1.0, nu2=1.0, D=1.0)
    assert w_fourier_time(m, 1.2, 2.0) == pytest.approx(ml2(0.7, 1.0, -1.44 * 2.0**0.7), rel=1e-12)
    ref = talbot_invert(lambda s: w_fourier_laplace(fig1, 1.0, s, continued=True), 1.0)
    assert w_fourier_time(fig1, 1.0, 1.0) == pytest.approx(ref, rel=1e-6)


def test_fourier_time_series_and_contour_agree(fig1):
    ks = np.array([0.1, 1.0, 5.0])
    for t in (0.01, 1.0, 100.0):
        a = w_fourier_time(fig1, ks, t, method="series")
        b = w_fourier_time(fig1, ks, t, method="contour")
        np.testing.assert_allclose(a, b, rtol=1e-9)


def test_source_term_series_matches_summed_kernel(fig1):
    src = SourceSpec(lambda k, t: math.exp(-k * k) * t)
    a = w_fourier_time(fig1, 0.8, 1.0, src=src, method="series", grid=64)
    b = w_fourier_time(fig1, 0.8, 1.0, src=src, method="contour", grid=64)
    assert a == pytest.approx(b, rel=1e-6)
    base = w_fourier_time(fig1, 0.8, 1.0)
    # tau * exp(-k^2) convolved against the kernel: Laplace image exp(-k^2)/s^2
    ref = talbot_invert(
        lambda s: w_fourier_laplace(fig1, 0.8, s, src_value=math.exp(-0.64) / s**2, continued=True), 1.0
    )
    assert b == pytest.approx(ref, rel=1e-4)
    assert b > base


# -------------------------------------------------------------------- pdf


def test_pdf_symmetric(fig1):
    x = np.array([0.2, 0.9, 2.5])
    np.testing.assert_allclose(pdf(fig1, x, 1.0), pdf(fig1, -x, 1.0), rtol=1e-12)


def test_pdf_heat_kernel(heat):
    want = math.exp(-1 / 4) / math.sqrt(4 * math.pi)
    assert pdf(heat, 1.0, 1.0) == pytest.approx(want, abs=1e-6)
    assert pdf_hseries(heat, 1.0, 1.0) == pytest.approx(want, rel=1e-10)


def test_pdf_hseries_crosscheck(fig1):
    assert pdf_hseries(fig1, 0.5, 1.0) == pytest.approx(pdf(fig1, 0.5, 1.0), abs=1e-4)


def test_pdf_levy_hseries():
    m = TwoTermModel.figure1(0, alpha=1.5)
    for x in (0.5, 2.0):
        assert pdf_hseries(m, x, 1.0) == pytest.approx(pdf(m, x, 1.0), abs=1e-6)


def test_pdf_asymmetric_rejected():
    m = TwoTermModel(alpha=1.5, theta=0.3)
    with pytest.raises(AsymmetricUnsupported):
        pdf(m, 0.5, 1.0)


def test_pdf_nonnegative(fig1):
    x = np.linspace(-6, 6, 49)
    assert np.all(pdf(fig1, x, 1.0) >= -1e-6)


# ----------------------------------------------------------------- moments


def test_zeroth_moment_caputo(caputo):
    for t in (0.01, 1.0, 100.0):
        assert zeroth_moment(caputo, t) == pytest.approx(1.0, abs=1e-10)


def test_zeroth_moment_single_term():
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.75, mu2=0.625, nu1=0.25, nu2=0.5)
    c = (1 - 0.25) * (1 - 0.75)
    for t in (0.1, 2.0):
        assert zeroth_moment(m, t) == pytest.approx(t**-c / math.gamma(1 - c), rel=1e-13)


def test_zeroth_moment_talbot(fig1):
    F = lambda s: w_fourier_laplace(fig1, 0.0, s, continued=True)
    assert zeroth_moment(fig1, 1.0) == pytest.approx(talbot_invert(F, 1.0), rel=1e-7)


def test_zeroth_moment_decays(fig1):
    v = [zeroth_moment(fig1, t) for t in np.geomspace(1e-3, 1e3, 13)]
    assert np.all(np.diff(v) < 0)


def test_nonnegativity_check(fig1):
    report = nonnegativity_check(fig1)
    assert report.passed and len(report.checks) == 4
    assert nonnegativity_check(TwoTermModel(nu1=1.0, nu2=1.0)).passed


def test_second_moment_single_term_exact():
    m = TwoTermModel(a=1.0, b=0.0, mu1=0.75, mu2=0.625, nu1=0.25, nu2=0.5, D=1.5)
    e = 0.75 - (1 - 0.25) * (1 - 0.75)
    for t in (0.01, 1.0, 50.0):
        assert second_moment(m, t) == pytest.approx(2 * 1.5 * t**e / math.gamma(1 + e), rel=1e-12)


def test_second_moment_caputo(caputo):
    t = 3.0
    want = 2 / 0.5 * t**0.75 * ml3(MLParams(0.125, 1.75, 1), -(t**0.125))
    assert second_moment(caputo, t) == pytest.approx(want, rel=1e-12)


def test_second_moment_needs_gaussian_case():
    with pytest.raises(RequiresAlpha2):
        second_moment(TwoTermModel.figure1(0, alpha=1.5), 1.0)


def test_second_moment_matches_pdf_quadrature(fig1):
    x = np.linspace(0.0, 40.0, 8001)
    w = pdf(fig1, x, 1.0)
    got = 2 * integrate.simpson(x * x * w, x=x)
    assert got == pytest.approx(second_moment(fig1, 1.0), rel=1e-4)


def test_fractional_moment_limits(fig1):
    assert fractional_moment(fig1, 1e-6, 2.0) == pytest.approx(zeroth_moment(fig1, 2.0), rel=1e-5)
    assert fractional_moment(fig1, 2.0, 2.0) == pytest.approx(second_moment(fig1, 2.0), rel=1e-12)


def test_fractional_moment_quadrature(fig1):
    x = np.linspace(0.0, 40.0, 8001)
    got = 2 * integrate.simpson(x * pdf(fig1, x, 2.0), x=x)
    assert got == pytest.approx(fractional_moment(fig1, 1.0, 2.0), rel=1e-4)


def test_fractional_moment_levy():
    m = TwoTermModel.figure1(0, alpha=1.5)
    with pytest.raises(MomentDoesNotExist):
        fractional_moment(m, 1.5, 1.0)
    # E|x| = (2/pi) int (W~(0) - W~(k)) / k^2 dk for the unnormalized solution
    w0 = w_fourier_time(m, 0.0, 1.0)
    f = lambda k: (w0 - w_fourier_time(m, k, 1.0)) / (k * k)
    got = 2 / math.pi * (integrate.quad(f, 0, 1, limit=200)[0] + integrate.quad(f, 1, np.inf, limit=200)[0])
    assert got == pytest.approx(fractional_moment(m, 1.0, 1.0), rel=1e-6)
    with pytest.raises(NumericalBreakdown):
        pdf(m, 1e6, 1.0)


# -------------------------------------------------------------- E-operator


def test_e_operator_riemann_liouville():
    for beta in (0.5, 1.0, 1.7):
        p = EOperatorParams(0.75, beta, 2.3, 0.0)
        assert e_operator(p, lambda tau: np.ones_like(tau), 2.0) == pytest.approx(2.0**beta / math.gamma(beta + 1), rel=1e-8)
    p = EOperatorParams(0.75, 1.0, 1.0, 0.0)
    assert e_operator(p, lambda tau: tau, 3.0) == pytest.approx(4.5, rel=1e-8)


def test_e_operator_integration_identity():
    p = EOperatorParams(0.75, 0.75, 1.0, -1.0)
    want = 1 - ml2(0.75, 1.0, -1.0)
    assert e_operator(p, lambda tau: np.ones_like(tau), 1.0) == pytest.approx(want, rel=1e-8)
    assert e_operator(p, lambda tau: np.ones_like(tau), 1.0, grid=10240) == pytest.approx(want, rel=1e-8)


def test_e_operator_singular_source():
    p = EOperatorParams(1.0, 1.0, 1.0, 0.0)
    # integral of tau^-1/2 on (0, 1); the graded grid keeps close to second order
    errs = [abs(e_operator(p, lambda tau: tau**-0.5, 1.0, grid=n) - 2.0) for n in (256, 1024)]
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] > 4**1.8


def test_e_operator_endpoint():
    with pytest.raises(SingularEndpoint):
        e_operator(EOperatorParams(0.5, 0.0), lambda tau: tau, 1.0)
