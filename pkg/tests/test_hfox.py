import math

import numpy as np
import pytest
from scipy import integrate

from hilfer_diffusion.errors import DomainError, PoleCollision, StripViolation
from hilfer_diffusion.hfox import (
    HFunctionSpec,
    exponential_spec,
    gaussian_family_spec,
    h_contour,
    h_eval,
    h_mellin_moment,
    h_residue,
    ml_spec,
)
from hilfer_diffusion.mlf import MLParams, SeriesPolicy, ml3


def test_spec_invariants():
    with pytest.raises(DomainError):
        HFunctionSpec(3, 0, (), ((0, 1), (0, 1), (0, 1)))
    with pytest.raises(DomainError):
        HFunctionSpec(1, 0, (), ((0, -1.0),))


def test_ml_identity_example():
    assert h_eval(ml_spec(0.8, 1.0, 1.0), 0.5) == pytest.approx(ml3(MLParams(0.8, 1.0, 1.0), -0.5), rel=1e-12)


def test_exponential():
    assert h_eval(exponential_spec(), 1.0) == pytest.approx(math.exp(-1), rel=1e-13)


def test_gaussian_family_heat_kernel():
    # n = 0, mu1 = 1, beta = 1: H(z)/(2x) is the heat kernel with z = x/sqrt(Dt)
    spec = gaussian_family_spec(1.0, 1.0, 0)
    for x in (0.5, 1.0, 2.0):
        want = math.exp(-x * x / 4) / math.sqrt(4 * math.pi)
        assert h_eval(spec, x) / (2 * x) == pytest.approx(want, rel=1e-12)


def test_ml_identity_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        alpha, beta, delta = rng.uniform(0.3, 1.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 3.0)
        p = MLParams(alpha, beta, delta)
        for z in (0.1, 1.0, 5.0):
            want = math.gamma(delta) * ml3(p, -z)
            assert h_eval(ml_spec(alpha, beta, delta), z) == pytest.approx(want, rel=1e-6, abs=1e-12)


def test_residue_and_contour_agree():
    spec = ml_spec(0.7, 1.2, 1.5)
    pol = SeriesPolicy(rel_tol=1e-10)
    for z in (0.3, 1.0, 3.0):
        assert h_contour(spec, z, pol) == pytest.approx(h_residue(spec, z, pol), rel=1e-6, abs=1e-14)


def test_pole_collision_falls_back():
    spec = HFunctionSpec(2, 0, (), ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(PoleCollision):
        h_residue(spec, 1.0)
    # H^{2,0}_{0,2}[z | (0,1),(0,1)] = 2 K_0(2 sqrt z)
    from scipy.special import k0

    assert h_eval(spec, 1.0) == pytest.approx(2 * k0(2.0), rel=1e-6)


def test_mellin_moment():
    assert h_mellin_moment(exponential_spec(), 1.0) == pytest.approx(1.0)
    assert h_mellin_moment(exponential_spec(), 3.0) == pytest.approx(2.0)
    with pytest.raises(StripViolation):
        h_mellin_moment(exponential_spec(), -0.5)


def test_mellin_moment_by_quadrature():
    spec = gaussian_family_spec(0.75 - 0.1875 + 0.25, 0.75, 0)
    want = h_mellin_moment(spec, 3.0)
    got, _ = integrate.quad(lambda x: x**2 * h_eval(spec, x), 0, np.inf, limit=200)
    assert got == pytest.approx(want, rel=1e-4)
