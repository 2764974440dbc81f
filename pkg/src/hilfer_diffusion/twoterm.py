r"""Diffusion with two Hilfer-composite time derivatives.

The model is

.. math::

    a\,{}_tD^{\mu_1,\nu_1}W + b\,{}_tD^{\mu_2,\nu_2}W
        = D\,\partial^\alpha_{|x|} W + \varphi,\qquad a+b=1,

with Riesz-Feller space derivative of order :math:`\alpha` and skewness
:math:`\theta`.  In Fourier-Laplace space the solution is

.. math::

    \tilde{\hat W}(k,s) = \frac{a s^{p_1} + b s^{p_2} + \tilde{\hat\varphi}(k,s)}
                               {a s^{\mu_1} + b s^{\mu_2} + D\psi^\theta_\alpha(k)},
    \qquad p_i = \nu_i(\mu_i-1).

Throughout, :math:`\Delta=\mu_1-\mu_2`, :math:`\beta_i=\mu_1-p_i` and
:math:`X=(b/a)t^\Delta`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .engine import Kernel, has_roots, kernel_inverse, kernel_inverse_times, series_inverse
from .errors import (
    AsymmetricUnsupported,
    DomainError,
    ModelError,
    MomentDoesNotExist,
    NonConvergence,
    RequiresAlpha2,
    SingularEndpoint,
)
from .hfox import gaussian_family_spec, h_eval, levy_family_spec
from .mlf import DEFAULT_POLICY, MLParams, SeriesPolicy, ml3, ml3_array
from .oracle import CosineQuadConfig, inverse_cosine_transform

#: The three ``(nu1, nu2)`` pairs of the reference figure (a=b=1/2, mu1=3/4, mu2=5/8).
FIG1_NU_PAIRS = ((0.25, 0.5), (0.375, 7.0 / 12.0), (0.5, 2.0 / 3.0))
_COMPAT_TOL = 1e-12
_ATOL_SCALE = 1e-10
_KERNEL_RTOL = 1e-11
_MAX_GRADING = 6.0
_NARROW_CELL = 1e-3


@dataclass(frozen=True)
class TwoTermModel:
    """Parameters of the two-term equation."""

    #: Weight of the ``mu1`` derivative.
    a: float = 0.5
    #: Weight of the ``mu2`` derivative; ``a + b = 1``.
    b: float = 0.5
    #: Larger time order.
    mu1: float = 0.75
    #: Smaller time order.
    mu2: float = 0.625
    #: Hilfer type of the ``mu1`` derivative (0 gives Riemann-Liouville, 1 Caputo).
    nu1: float = 0.25
    #: Hilfer type of the ``mu2`` derivative.
    nu2: float = 0.5
    #: Generalised diffusivity.
    D: float = 1.0
    #: Space order.
    alpha: float = 2.0
    #: Skewness of the Riesz-Feller symbol.
    theta: float = 0.0

    def __post_init__(self) -> None:
        bad = []
        if not (self.a > 0 and self.b >= 0):
            bad.append(("a", "need a > 0 and b >= 0"))
        if abs(self.a + self.b - 1.0) > _COMPAT_TOL:
            bad.append(("b", f"a + b must equal 1, got {self.a + self.b!r}"))
        if not 0 < self.mu2 < self.mu1 <= 1:
            bad.append(("mu1", f"need 0 < mu2 < mu1 <= 1, got mu1={self.mu1}, mu2={self.mu2}"))
        for name in ("nu1", "nu2"):
            if not 0 <= getattr(self, name) <= 1:
                bad.append((name, f"must lie in [0, 1], got {getattr(self, name)}"))
        lhs = (1 - self.nu1) * (1 - self.mu1)
        rhs = (1 - self.nu2) * (1 - self.mu2)
        if abs(lhs - rhs) > _COMPAT_TOL:
            bad.append(("nu2", f"(1-nu1)(1-mu1)={lhs:.6g} differs from (1-nu2)(1-mu2)={rhs:.6g}"))
        if not 0 < self.alpha <= 2:
            bad.append(("alpha", f"must lie in (0, 2], got {self.alpha}"))
        if abs(self.theta) > min(self.alpha, 2 - self.alpha) + 1e-15:
            bad.append(("theta", f"|theta| must not exceed min(alpha, 2-alpha), got {self.theta}"))
        if not self.D > 0:
            bad.append(("D", f"must be > 0, got {self.D}"))
        if bad:
            raise ModelError(bad)

    @classmethod
    def figure1(cls, pair: int = 0, alpha: float = 2.0) -> "TwoTermModel":
        """One of the reference parameter sets (``pair`` in 0, 1, 2)."""
        nu1, nu2 = FIG1_NU_PAIRS[pair]
        return cls(0.5, 0.5, 0.75, 0.625, nu1, nu2, 1.0, alpha, 0.0)

    @property
    def delta(self) -> float:
        return self.mu1 - self.mu2

    @property
    def p1(self) -> float:
        return self.nu1 * (self.mu1 - 1.0)

    @property
    def p2(self) -> float:
        return self.nu2 * (self.mu2 - 1.0)

    @property
    def beta1(self) -> float:
        return self.mu1 - self.p1

    @property
    def beta2(self) -> float:
        return self.mu1 - self.p2

    @property
    def kernel(self) -> Kernel:
        return Kernel(self.a, self.b, self.mu1, self.mu2)

    @property
    def caputo(self) -> bool:
        return self.nu1 == 1 and self.nu2 == 1

    def x_ratio(self, t: float) -> float:
        return self.b / self.a * t**self.delta

    def branches(self):
        """``(weight, beta_i)`` of the two series; the second is dropped when ``b = 0``."""
        out = [(1.0, self.beta1)]
        if self.b > 0:
            out.append((self.b / self.a, self.beta2))
        return out


@dataclass(frozen=True)
class SourceSpec:
    """Fourier image of a source term, ``phi~(k, t)``."""

    #: Callable ``(k, t) -> float``; must be even in ``k``.
    fourier_source: Callable[[float, float], float]

    def __post_init__(self) -> None:
        for k in (0.37, 1.9):
            for t in (0.3, 2.1):
                lhs, rhs = self.fourier_source(k, t), self.fourier_source(-k, t)
                if not np.isclose(lhs, rhs, rtol=1e-12, atol=1e-300):
                    raise ModelError([("fourier_source", f"not even in k at k={k}, t={t}")])


@dataclass(frozen=True)
class EOperatorParams:
    """Kernel ``(t-tau)^(beta-1) E^delta_{alpha,beta}(omega (t-tau)^alpha)``."""

    alpha: float
    beta: float
    delta: float = 1.0
    #: Coefficient of the Mittag-Leffler argument (1/time^alpha).
    omega: float = 0.0

    def __post_init__(self) -> None:
        bad = []
        if not self.alpha > 0:
            bad.append(("alpha", f"must be > 0, got {self.alpha}"))
        if not self.delta > 0:
            bad.append(("delta", f"must be > 0, got {self.delta}"))
        if bad:
            raise ModelError(bad)


@dataclass(frozen=True)
class NonnegativityReport:
    """Outcome of the four sign conditions on the zeroth moment."""

    #: ``(label, lhs, rhs, holds)`` for each inequality ``lhs <= rhs``.
    checks: tuple
    passed: bool


def riesz_feller_symbol(alpha: float, theta: float, k):
    r"""Symbol :math:`|k|^\alpha e^{i\,\mathrm{sgn}(k)\theta\pi/2}` of the Riesz-Feller derivative."""
    k = np.asarray(k, dtype=float)
    out = np.abs(k) ** alpha * np.exp(1j * np.sign(k) * theta * math.pi / 2.0)
    return out if out.ndim else complex(out)


def _rate(m: TwoTermModel, k):
    lam = m.D * riesz_feller_symbol(m.alpha, m.theta, k)
    if m.theta == 0:
        lam = np.real(lam)
    return lam


def w_fourier_laplace(m: TwoTermModel, k, s, src_value=None, continued: bool = False):
    """Fourier-Laplace solution at ``(k, s)``, ``Re s > 0``.

    ``src_value`` is the transformed source ``phi^~(k, s)``, if any.
    ``continued=True`` admits the principal-branch continuation to the cut
    plane, as needed by contour inversion.
    """
    s = np.asarray(s, dtype=complex)
    if not continued and np.any(s.real <= 0):
        raise DomainError("need Re(s) > 0")
    num = m.a * s**m.p1 + m.b * s**m.p2
    if src_value is not None:
        num = num + src_value
    out = num / (m.a * s**m.mu1 + m.b * s**m.mu2 + m.D * riesz_feller_symbol(m.alpha, m.theta, k))
    return out if out.ndim else complex(out)


def _homogeneous(m: TwoTermModel, lam, t: float, pol: SeriesPolicy, method: str):
    ker = m.kernel
    lam = np.asarray(lam)
    use_series = method == "series" or (method == "auto" and np.any(has_roots(ker, lam)))
    if not use_series:
        # values far below the k = 0 scale only need absolute accuracy
        out = 0.0
        for w, p in ((m.a, m.p1), (m.b, m.p2)):
            if w > 0:
                atol = _ATOL_SCALE * abs(kernel_inverse(ker, p, 0.0, t))
                out = out + w * kernel_inverse(ker, p, lam, t, atol=atol)
        return out
    flat = lam.ravel()
    vals = []
    for li in flat:
        v = m.a * series_inverse(ker, m.p1, li, t, pol)[0]
        if m.b > 0:
            v = v + m.b * series_inverse(ker, m.p2, li, t, pol)[0]
        vals.append(v)
    out = np.array(vals).reshape(lam.shape)
    return out if out.ndim else out[()]


def w_fourier_time(
    m: TwoTermModel,
    k,
    t: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    src: SourceSpec | None = None,
    method: str = "auto",
    grid: int = 1024,
):
    r"""Characteristic function :math:`\tilde W(k, t)`.

    Parameters
    ----------
    m : TwoTermModel
    k : float or array_like
        Wavenumbers.
    t : float
        Time, ``t > 0``.
    pol : SeriesPolicy
        Truncation rule of the outer and inner series.
    src : SourceSpec, optional
        Adds the source convolution.
    method : {"auto", "series", "contour"}
        ``"series"`` sums the two outer Mittag-Leffler series term by term.
        ``"contour"`` uses the vectorised kernel inversion of
        :mod:`hilfer_diffusion.engine`.  ``"auto"`` takes the contour
        unless the skewness puts a zero of the denominator off the cut.
    grid : int
        Product-integration grid of the source term.

    Returns
    -------
    float, complex or ndarray
        Complex when ``theta != 0``.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if method not in ("auto", "series", "contour"):
        raise DomainError(f"unknown method {method!r}")
    lam = _rate(m, k)
    out = _homogeneous(m, lam, t, pol, method)
    if src is not None:
        out = out + _source_term(m, k, lam, t, src, pol, method, grid)
    return out


def _source_term(m, k, lam, t, src, pol, method, grid):
    lam_arr = np.atleast_1d(lam)
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    vals = []
    for ki, li in zip(k_arr, lam_arr):
        def f(tau, ki=ki):
            return src.fourier_source(ki, tau)

        if method == "series" or has_roots(m.kernel, li):
            # literal outer sum of E-operators
            def term(n, li=li, f=f):
                p = EOperatorParams(m.mu1, m.delta * n + m.mu1, n + 1.0, -li / m.a)
                return (-m.b / m.a) ** n / m.a * e_operator(p, f, t, grid, pol)

            vals.append(_stopped_sum(term, pol))
        else:
            vals.append(kernel_convolution(m.kernel, li, f, t, grid))
    out = np.array(vals)
    return out.reshape(np.shape(lam)) if np.ndim(lam) else out[0]


def kernel_convolution(ker: Kernel, lam, f: Callable, t: float, grid: int = 1024):
    r"""``int_0^t G_0(lam, t-tau) f(tau) dtau`` with the summed kernel.

    :math:`G_0=\mathcal{L}^{-1}[1/(a s^{\mu_1}+b s^{\mu_2}+\lambda)]` is the
    whole outer series of E-operator kernels; its cell moments come from
    :math:`G_{-1}` and :math:`G_{-2}`.
    """
    # G_0 values far below the mean kernel K1(t)/t do not affect the sum
    atol = _ATOL_SCALE * abs(kernel_inverse(ker, -1.0, lam, t)) / t

    def K1(u):
        return kernel_inverse_times(ker, -1.0, lam, u)

    def K2(u):
        return u * K1(u) - kernel_inverse_times(ker, -2.0, lam, u)

    def kern(u):
        return kernel_inverse_times(ker, 0.0, lam, u, atol=atol)

    return _product_integrate(K1, K2, f, t, grid, kern)


def _stopped_sum(term: Callable[[int], complex], pol: SeriesPolicy):
    """Outer series with compensated summation and the shared stop rule."""
    terms = []
    streak = 0
    for n in range(pol.max_terms):
        tn = term(n)
        terms.append(tn)
        partial = math.fsum(np.real(terms)) + 1j * math.fsum(np.imag(terms))
        if abs(tn) <= pol.rel_tol * abs(partial):
            streak += 1
            if streak >= pol.consecutive_small and n >= 2:
                return partial if np.iscomplexobj(terms) else partial.real
        else:
            streak = 0
    raise NonConvergence(f"outer series did not settle within {pol.max_terms} terms")


# ---------------------------------------------------------------- real space


def _length_scale(m: TwoTermModel, t: float) -> float:
    scales = [(m.D * t**m.mu1 / m.a) ** (1.0 / m.alpha)]
    if m.b > 0:
        scales.append((m.D * t**m.mu2 / m.b) ** (1.0 / m.alpha))
    return min(scales)


def pdf(
    m: TwoTermModel,
    x,
    t: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    method: str = "transform",
    cfg: CosineQuadConfig | None = None,
):
    """Real-space solution ``W(x, t)``.

    Parameters
    ----------
    method : {"transform", "hseries"}
        ``"transform"`` inverts the characteristic function by cosine
        quadrature.  ``"hseries"`` sums the Fox H-function series and needs
        ``x != 0``.
    cfg : CosineQuadConfig, optional
        Defaults to ``k_max = 200 / L`` with ``L`` the diffusion length.

    Raises
    ------
    AsymmetricUnsupported
        If ``theta != 0``.
    """
    if m.theta != 0:
        raise AsymmetricUnsupported("real-space solution needs theta = 0")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if method == "hseries":
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([pdf_hseries(m, xi, t, pol) for xi in xs])
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])
    if method != "transform":
        raise DomainError(f"unknown method {method!r}")
    if cfg is None:
        cfg = CosineQuadConfig(k_max=200.0 / _length_scale(m, t))

    def G(k):
        return np.asarray(w_fourier_time(m, k, t, pol, method="contour"), dtype=float)

    return inverse_cosine_transform(G, x, cfg)


def pdf_hseries(m: TwoTermModel, x: float, t: float, pol: SeriesPolicy = DEFAULT_POLICY, h_method: str = "auto") -> float:
    """Fox H-function series of the real-space solution at ``x != 0``."""
    if m.theta != 0:
        raise AsymmetricUnsupported("real-space solution needs theta = 0")
    x = abs(float(x))
    if x == 0:
        raise DomainError("the H-function series carries 1/|x| and needs x != 0")
    z = x / (m.D * t**m.mu1 / m.a) ** (1.0 / m.alpha)
    ratio = -m.b / m.a
    total = 0.0
    for weight, beta in m.branches():

        def term(n, beta=beta):
            first = m.delta * n + beta
            if m.alpha == 2:
                spec = gaussian_family_spec(first, m.mu1, n)
            else:
                spec = levy_family_spec(first, m.mu1, m.alpha, n)
            h = h_eval(spec, z, pol, method=h_method)
            coef = ratio**n / math.factorial(n) if n < 170 else 0.0
            return coef * t ** (first - 1.0) / (m.alpha * x) * h

        if m.b == 0:
            total += weight * term(0)
        else:
            total += weight * _stopped_sum(term, pol)
    return float(total)


# ------------------------------------------------------------------ moments


def zeroth_moment(m: TwoTermModel, t: float) -> float:
    """Norm ``int W dx``; equal to 1 in the Caputo case."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    X = m.x_ratio(t)
    return float(
        sum(w * t ** (beta - 1.0) * ml3(MLParams(m.delta, beta), -X) for w, beta in m.branches())
    )


def second_moment(m: TwoTermModel, t: float) -> float:
    """Mean squared displacement for ``alpha = 2``."""
    if m.alpha != 2:
        raise RequiresAlpha2("the second moment is finite only for alpha = 2")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    X = m.x_ratio(t)
    total = 0.0
    for w, beta in m.branches():
        total += w * t ** (beta + m.mu1 - 1.0) * ml3(MLParams(m.delta, beta + m.mu1, 2.0), -X)
    return float(2.0 * m.D / m.a * total)


def fractional_moment(m: TwoTermModel, q: float, t: float, pol: SeriesPolicy = DEFAULT_POLICY) -> float:
    r"""Absolute moment :math:`\langle|x|^q\rangle`.

    The outer Gamma-ratio series is resummed into
    :math:`\Gamma(1+q/\alpha)E^{1+q/\alpha}_{\Delta,\beta_i+\mu_1q/\alpha}(-X)`.

    Raises
    ------
    MomentDoesNotExist
        If ``q >= alpha`` for ``alpha < 2``.
    """
    if m.theta != 0:
        raise AsymmetricUnsupported("absolute moments are implemented for theta = 0")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not q > 0:
        raise DomainError(f"q must be > 0, got {q}")
    if m.alpha < 2 and q >= m.alpha:
        raise MomentDoesNotExist(f"moment of order {q} diverges for alpha = {m.alpha}")
    if m.alpha == 2 and q > 2:
        raise MomentDoesNotExist(f"q must not exceed 2, got {q}")
    r = q / m.alpha
    if m.alpha == 2:
        pref = math.gamma(1.0 + q)
    else:
        pref = (
            2.0 / m.alpha * math.gamma(1.0 + q) * math.gamma(1.0 + r) * math.gamma(-r)
            / (math.gamma(-q / 2.0) * math.gamma(1.0 + q / 2.0))
        )
    X = m.x_ratio(t)
    total = 0.0
    for w, beta in m.branches():
        total += w * t ** (beta - 1.0) * ml3(MLParams(m.delta, beta + m.mu1 * r, 1.0 + r), -X, pol)
    return float(pref * (m.D * t**m.mu1 / m.a) ** r * total)


def nonnegativity_check(m: TwoTermModel) -> NonnegativityReport:
    """Sign conditions under which the zeroth moment stays non-negative."""
    checks = []
    for i, (mu, nu) in enumerate(((m.mu1, m.nu1), (m.mu2, m.nu2)), start=1):
        lift = nu * (1.0 - mu)
        checks.append((f"mu1-mu2 <= mu1+nu{i}(1-mu{i})", m.delta, m.mu1 + lift, m.delta <= m.mu1 + lift))
        checks.append((f"0 <= mu2+nu{i}(1-mu{i})", 0.0, m.mu2 + lift, 0.0 <= m.mu2 + lift))
    return NonnegativityReport(tuple(checks), all(c[3] for c in checks))


# ------------------------------------------------------------- E-operator


def _graded_grid(t: float, grid: int, grading: float = 2.0) -> np.ndarray:
    return t * (np.arange(grid + 1) / grid) ** grading


def _point(f, x: float):
    try:
        return f(x)
    except (ZeroDivisionError, OverflowError):
        return math.inf


def _eval_f(f, tau: np.ndarray) -> np.ndarray:
    """``f`` on a grid; scalar-only callables are looped, a pole gives ``inf``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        try:
            fv = np.asarray(f(tau))
        except (TypeError, ValueError, ZeroDivisionError, OverflowError):
            fv = None
        if fv is None or fv.shape != tau.shape:
            fv = np.array([_point(f, float(x)) for x in tau])
    return fv


def _product_integrate(K1, K2, f, t: float, grid: int, k=None):
    r"""``int_0^t k(t-tau) f(tau) dtau`` with ``f`` piecewise linear.

    ``K1(u) = int_0^u k`` and ``K2(u) = int_0^u v k(v) dv`` are exact; on
    cells much narrower than ``t - tau`` their differences cancel, and the
    kernel ``k`` itself is integrated by two-point Gauss instead.  An
    infinite ``f(0)`` is treated as a power law ``tau^-g`` on the first cell,
    and the grid grading is raised to ``2/(1-g)`` so the linear pieces keep
    second-order accuracy.
    """
    grading = 2.0
    probe = _eval_f(f, np.array([0.0, 1e-6 * t, 1e-3 * t]))
    if not np.isfinite(probe[0]):
        g = -math.log(abs(probe[2] / probe[1])) / math.log(1e3)
        if not g < 1:
            raise SingularEndpoint(f"f is not integrable at 0 (local exponent {-g:.3g})")
        grading = min(_MAX_GRADING, max(2.0, 2.0 / (1.0 - g)))
    tau = _graded_grid(t, grid, grading)
    u = t - tau
    k1, k2 = np.asarray(K1(u)), np.asarray(K2(u))
    fv = _eval_f(f, tau)
    h = np.diff(tau)
    A = k1[:-1] - k1[1:]
    B = u[:-1] * A - (k2[:-1] - k2[1:])
    if k is not None:
        narrow = np.flatnonzero(h < _NARROW_CELL * u[1:])
        if narrow.size:
            lo, hn = tau[narrow], h[narrow]
            A[narrow] = 0.0
            B[narrow] = 0.0
            for node in (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)):
                kv = np.asarray(k(t - (lo + node * hn)))
                A[narrow] += 0.5 * hn * kv
                B[narrow] += 0.5 * hn * kv * node * hn
    start = 0
    head = 0.0
    if not np.isfinite(fv[0]):
        # f ~ f1 (tau/tau1)^(-g) on the first cell
        g = -math.log(abs(fv[2] / fv[1])) / math.log(tau[2] / tau[1])
        if not g < 1:
            raise SingularEndpoint(f"f is not integrable at 0 (local exponent {-g:.3g})")
        head = A[0] / h[0] * fv[1] * tau[1] / (1.0 - g)
        start = 1
    body = fv[start:-1] * A[start:] + (fv[start + 1 :] - fv[start:-1]) / h[start:] * B[start:]
    parts = np.concatenate(([head], body))
    if np.iscomplexobj(parts):
        return complex(math.fsum(parts.real), math.fsum(parts.imag))
    return math.fsum(parts)


def e_operator(
    p: EOperatorParams,
    f: Callable,
    t: float,
    grid: int = 1024,
    pol: SeriesPolicy = DEFAULT_POLICY,
):
    r"""Generalised integral operator with a Mittag-Leffler kernel.

    .. math::

        \int_0^t (t-\tau)^{\beta-1}E^\delta_{\alpha,\beta}(\omega(t-\tau)^\alpha)f(\tau)\,d\tau

    by product integration on a grid graded towards ``tau = 0``.  The kernel
    moments over each cell come from
    :math:`\int_0^u v^{\beta-1}E^\delta_{\alpha,\beta}(\omega v^\alpha)dv = u^\beta E^\delta_{\alpha,\beta+1}(\omega u^\alpha)`
    and its first-moment analogue.

    Raises
    ------
    SingularEndpoint
        If ``beta <= 0``.
    """
    if not p.beta > 0:
        raise SingularEndpoint(f"beta must be > 0, got {p.beta}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if grid < 4:
        raise DomainError(f"grid must be >= 4, got {grid}")
    # kernel values need far less than the default accuracy; the cell
    # differences lose more digits than this anyway
    kpol = SeriesPolicy(max(pol.rel_tol, _KERNEL_RTOL), pol.max_terms, pol.consecutive_small)
    e1 = MLParams(p.alpha, p.beta + 1.0, p.delta)
    e2 = MLParams(p.alpha, p.beta + 2.0, p.delta)

    def ml_pair(u):
        z = p.omega * u**p.alpha
        if p.omega == 0:
            return np.full(u.shape, special.rgamma(p.beta + 1.0)), np.full(u.shape, special.rgamma(p.beta + 2.0))
        return (
            ml3_array(e1, z, kpol),
            ml3_array(e2, z, kpol),
        )

    cache = {}

    def pair(u):
        key = id(u)
        if key not in cache:
            cache[key] = ml_pair(u)
        return cache[key]

    def K1(u):
        return u**p.beta * pair(u)[0]

    def K2(u):
        v1, v2 = pair(u)
        return u ** (p.beta + 1.0) * (v1 - v2)

    def kern(u):
        return u ** (p.beta - 1.0) * ml3_array(MLParams(p.alpha, p.beta, p.delta), p.omega * u**p.alpha, kpol)

    return _product_integrate(K1, K2, f, t, grid, kern)
