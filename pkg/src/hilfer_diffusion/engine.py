r"""Time-domain inversion of the two-term relaxation kernel.

Every time-domain quantity of the two-term model is a combination of

.. math::

    G_p(\lambda, t) = \mathcal{L}^{-1}\left[
        \frac{s^p}{a s^{\mu_1} + b s^{\mu_2} + \lambda}\right](t),

with :math:`\lambda = D\psi(k)` for the Fourier-space solution and
:math:`\lambda = \lambda_n` for the mode relaxation.  With
:math:`\Delta = \mu_1-\mu_2`, :math:`X = (b/a)t^\Delta`,
:math:`Y = \lambda t^{\mu_1}/a` and :math:`U = \lambda t^{\mu_2}/b`:

* :func:`series_inverse` sums the outer series of three-parameter
  Mittag-Leffler terms, convergent in :math:`X` for short times,

  .. math::

      G = \frac{t^{\mu_1-p-1}}{a}\sum_n (-X)^n
          E^{n+1}_{\mu_1,\Delta n+\mu_1-p}(-Y),

  and asymptotic in :math:`1/X` for long times,

  .. math::

      G = \frac{t^{\mu_2-p-1}}{b}\sum_j (-1/X)^j
          E^{j+1}_{\mu_2,\mu_2-p-\Delta j}(-U);

* :func:`kernel_inverse` is the vectorised evaluator used on large
  wavenumber grids.  It integrates along a hyperbolic Hankel contour and
  switches to the expansion in :math:`1/\lambda` where that is more
  accurate.

The outer series lose about :math:`e^{T_X}\epsilon` to cancellation, with
:math:`T_X = X^{1/\Delta}`, and the long-time series cannot do better than
about :math:`e^{-T_X}`; :data:`LONG_TIME_SWITCH` sits where the two meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, NonConvergence, NumericalBreakdown
from .mlf import DEFAULT_POLICY, MLParams, SeriesPolicy, _log_abs_rgamma, _log_rgamma_envelope, ml3

_EPS = np.finfo(float).eps
#: ``T_X = X^(1/Delta)`` above which the long-time series replaces the short one.
LONG_TIME_SWITCH = 15.0
#: Estimated relative error above which evaluation fails.
FAIL_TOL = 1e-6
#: Relative accuracy assumed for each log-domain term (gammaln, exp).
_TERM_RTOL = 1e-15
#: Hyperbolic contour ``s = mu (1 + sin(iu - phi))`` with ``mu = _HYP_MU N / t``, step ``_HYP_H / N``.
_HYP_MU, _HYP_H, _HYP_PHI = 4.4921, 1.0818, 1.1721
#: Node counts of the contour rule and of its check.
_HYP_NODES = (16, 20)
# lambdas per vectorised contour batch
_CHUNK = 16384
# contour error below which the 1/lambda expansion is not tried
_CONTOUR_GOOD = 1e-9


@dataclass(frozen=True)
class Kernel:
    """Denominator ``a s^mu1 + b s^mu2`` of the relaxation kernel."""

    a: float
    b: float
    mu1: float
    mu2: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b >= 0):
            raise DomainError("kernel needs a > 0 and b >= 0")
        if not (0 < self.mu2 < self.mu1):
            raise DomainError("kernel needs 0 < mu2 < mu1")

    @property
    def delta(self) -> float:
        return self.mu1 - self.mu2

    def x_ratio(self, t: float) -> float:
        return self.b / self.a * t**self.delta

    def t_x(self, t: float) -> float:
        """``X^(1/Delta) = (b/a)^(1/Delta) t``: the natural crossover clock."""
        if self.b == 0:
            return 0.0
        return (self.b / self.a) ** (1.0 / self.delta) * t

    def laplace(self, s, p: float, lam=0.0):
        """``s^p / (a s^mu1 + b s^mu2 + lam)`` with principal branches."""
        s = np.asarray(s, dtype=complex)
        return s**p / (self.a * s**self.mu1 + self.b * s**self.mu2 + lam)


def _log_binom(n, k):
    return special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)


@lru_cache(maxsize=512)
def _large_lambda_coeffs(ker: Kernel, p: float, t: float, M: int):
    """Scaled coefficients ``e_m``, their log scales and log envelopes."""
    A = ker.a * t ** (-ker.mu1)
    B = ker.b * t ** (-ker.mu2)
    m = np.arange(M, dtype=float)[:, None]
    i = np.arange(M, dtype=float)[None, :]
    valid = i <= m
    r = np.where(valid, m - i, 0.0)
    arg = -p - ker.mu1 * i - ker.mu2 * r
    lrg, sgn = _log_abs_rgamma(arg)
    with np.errstate(divide="ignore"):
        lb = _log_binom(m, np.where(valid, i, 0.0)) + i * math.log(A) + (r * math.log(B) if B > 0 else np.where(r > 0, -np.inf, 0.0))
    logabs = np.where(valid, lb + lrg, -np.inf)
    env_rows = np.where(valid, lb + _log_rgamma_envelope(arg), -np.inf)
    shift = np.max(np.where(np.isfinite(env_rows), env_rows, -np.inf), axis=1)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    with np.errstate(under="ignore"):
        terms = np.where(valid, sgn * np.exp(logabs - shift[:, None]), 0.0)
        env = np.log(np.sum(np.exp(env_rows - shift[:, None]), axis=1)) + shift
    # e_m = e_scaled * exp(shift), kept apart to avoid overflow
    e_scaled = np.array([math.fsum(row) for row in terms.tolist()])
    for arr in (e_scaled, shift, env):
        arr.flags.writeable = False
    return e_scaled, shift, env


def _eval_large_lambda(ker: Kernel, p: float, t: float, lam: np.ndarray):
    e_m, e_shift, env = _large_lambda_coeffs(ker, float(p), float(t), 400)
    lk = np.log(np.abs(lam))
    mvec = np.arange(len(e_m))
    log_env = env[None, :] - mvec[None, :] * lk[:, None]
    cut = np.argmin(log_env, axis=1)
    width = int(np.max(cut)) + 1
    mvec, log_env_w = mvec[:width], log_env[:, :width]
    use = mvec[None, :] < cut[:, None]
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        if np.all(lam.imag == 0) and np.all(lam.real > 0):
            # (-1/lam)^m in real arithmetic
            sign = np.where(mvec % 2 == 0, 1.0, -1.0)
            powers = sign[None, :] * np.exp(e_shift[None, :width] - mvec[None, :] * lk[:, None])
        else:
            powers = np.exp(e_shift[None, :width] + mvec[None, :] * np.log(-1.0 / lam)[:, None])
        terms = np.where(use, e_m[None, :width] * powers, 0.0)
        rounding = _TERM_RTOL * np.sum(np.where(use, np.exp(log_env_w), 0.0), axis=1)
    total = terms.sum(axis=1)
    trunc = np.exp(log_env[np.arange(len(cut)), cut])
    rel = (trunc + rounding) / np.maximum(np.abs(total), 1e-300)
    return t ** (-p - 1.0) / lam * total, rel


def _hyperbola(t: float, n: int):
    u = np.arange(-n, n + 1) * (_HYP_H / n)
    mu = _HYP_MU * n / t
    s = mu * (1.0 + np.sin(1j * u - _HYP_PHI))
    w = np.exp(s * t) * mu * np.cos(1j * u - _HYP_PHI) * (_HYP_H / n) / (2.0 * math.pi)
    return s, w


def _eval_contour(ker: Kernel, p: float, t: float, lam: np.ndarray):
    values = []
    for n in _HYP_NODES:
        s, w = _hyperbola(t, n)
        num = w * s**p
        den = (ker.a * s**ker.mu1 + ker.b * s**ker.mu2)[None, :] + lam[:, None]
        terms = num[None, :] / den
        values.append(terms.sum(axis=1))
        mag = np.abs(terms).sum(axis=1)
    v = values[-1]
    if not np.iscomplexobj(lam) or np.all(lam.imag == 0):
        v = v.real
    err = np.abs(values[-1] - values[0]) + 100.0 * _EPS * mag
    return v, err / np.maximum(np.abs(v), 1e-300)


def has_roots(ker: Kernel, lam) -> np.ndarray:
    """True where ``a s^mu1 + b s^mu2 + lam`` may vanish on the principal sheet."""
    lam = np.asarray(lam, dtype=complex)
    # a root needs mu1 |arg s| >= |arg(-lam)| with |arg s| < pi
    return (lam != 0) & (np.abs(np.angle(-lam)) < ker.mu1 * math.pi)


def kernel_inverse(ker: Kernel, p: float, lam, t: float, return_error: bool = False, atol: float = 0.0):
    """Evaluate :math:`G_p(\\lambda, t)` for an array of ``lam`` at one time.

    Parameters
    ----------
    ker : Kernel
        Denominator parameters.
    p : float
        Power of ``s`` in the numerator, ``p < mu1``.
    lam : array_like
        Values of ``lambda``; complex values must leave the denominator
        free of zeros on the principal sheet (see :func:`has_roots`).
    t : float
        Time, ``t > 0``.
    return_error : bool
        Also return the estimated relative error of every value.
    atol : float
        Absolute error accepted on top of the relative one; lets values
        that underflow against a known scale pass.

    Raises
    ------
    DomainError
        If some ``lam`` puts a zero of the denominator off the cut.
    NumericalBreakdown
        If no representation reaches a relative error of :data:`FAIL_TOL`.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    lam_in = np.asarray(lam)
    lamv = np.atleast_1d(lam_in).ravel()
    if np.any(has_roots(ker, lamv)):
        raise DomainError("lambda puts a zero of the kernel denominator off the cut; use series_inverse")
    lam_c = lamv.astype(complex) if np.iscomplexobj(lamv) else lamv.astype(float)
    parts = [_eval_contour(ker, p, t, lam_c[i : i + _CHUNK]) for i in range(0, len(lam_c), _CHUNK)]
    value = np.concatenate([v for v, _ in parts])
    error = np.concatenate([e for _, e in parts])
    # the expansion in 1/lambda only where the contour is not already good
    big = (np.abs(lamv) > 0) & (error > _CONTOUR_GOOD)
    if np.any(big):
        lb = lamv[big].astype(complex)
        parts = [_eval_large_lambda(ker, p, t, lb[i : i + _CHUNK // 8]) for i in range(0, len(lb), _CHUNK // 8)]
        v = np.concatenate([v for v, _ in parts])
        e = np.concatenate([e for _, e in parts])
        idx = np.flatnonzero(big)
        better = np.isfinite(v) & (e < error[idx])
        value = value.astype(v.dtype) if np.iscomplexobj(value) else value
        value[idx[better]] = v[better].real if not np.iscomplexobj(value) else v[better]
        error[idx[better]] = e[better]
    failed = error * np.abs(value) > FAIL_TOL * np.abs(value) + atol
    if np.any(failed):
        bad = int(np.argmax(np.where(failed, error, -1.0)))
        raise NumericalBreakdown(
            f"kernel inversion at t={t:g}, lambda={lamv[bad]:.6g} reached only {error[bad]:.2g} relative"
        )
    out = value.reshape(lam_in.shape) if lam_in.ndim else value[0]
    if return_error:
        err = error.reshape(lam_in.shape) if lam_in.ndim else error[0]
        return out, err
    return out


def kernel_inverse_times(ker: Kernel, p: float, lam: float, ts, atol: float = 0.0) -> np.ndarray:
    """:func:`kernel_inverse` for one ``lam`` over many times.

    The contour sum is vectorised over ``ts``; points it cannot resolve
    fall back to :func:`kernel_inverse`.  ``t = 0`` is allowed for
    ``p < 0`` and gives 0.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(has_roots(ker, np.asarray([lam]))):
        raise DomainError("lambda puts a zero of the kernel denominator off the cut; use series_inverse")
    if np.any(ts < 0) or (p >= 0 and np.any(ts == 0)):
        raise DomainError("times must be > 0 (or >= 0 for p < 0)")
    out = np.zeros(ts.shape, dtype=complex if np.iscomplexobj(lam) else float)
    pos = np.flatnonzero(ts > 0)
    if pos.size == 0:
        return out
    tp = ts[pos]
    values = []
    for n in _HYP_NODES:
        u = np.arange(-n, n + 1) * (_HYP_H / n)
        mu = (_HYP_MU * n / tp)[:, None]
        s = mu * (1.0 + np.sin(1j * u - _HYP_PHI))[None, :]
        w = np.exp(s * tp[:, None]) * mu * np.cos(1j * u - _HYP_PHI)[None, :] * (_HYP_H / n) / (2.0 * math.pi)
        terms = w * s**p / (ker.a * s**ker.mu1 + ker.b * s**ker.mu2 + lam)
        values.append(terms.sum(axis=1))
        mag = np.abs(terms).sum(axis=1)
    v = values[-1] if np.iscomplexobj(out) else values[-1].real
    err = np.abs(values[-1] - values[0]) + 100.0 * _EPS * mag
    out[pos] = v
    for i in np.flatnonzero(err > FAIL_TOL * np.abs(v) + atol):
        out[pos[i]] = kernel_inverse(ker, p, lam, tp[i], atol=atol)
    return out


def _outer_sum(term, pol: SeriesPolicy, asymptotic: bool):
    """Sum ``term(0), term(1), ...`` with the shared stop rule.

    For an asymptotic series the sum is cut before the smallest term once
    the terms start to grow again.  Returns the value and an absolute error
    estimate.
    """
    terms: list[complex] = []
    small = 0
    best = (math.inf, 0)
    for n in range(pol.max_terms):
        tn = complex(term(n))
        terms.append(tn)
        partial = math.fsum(x.real for x in terms) + 1j * math.fsum(x.imag for x in terms)
        mag = abs(tn)
        if mag <= pol.rel_tol * abs(partial):
            small += 1
            if small >= pol.consecutive_small and n >= 3:
                return partial, pol.rel_tol * abs(partial)
        else:
            small = 0
        if asymptotic and mag > 0:
            if mag < best[0]:
                best = (mag, n)
            elif n > best[1] + 8 and mag > 1e3 * best[0]:
                break
    else:
        if not asymptotic:
            raise NonConvergence(f"outer series did not settle within {pol.max_terms} terms")
    if not asymptotic:
        raise NonConvergence("outer series stopped without convergence")
    kept = terms[: best[1]]
    partial = math.fsum(x.real for x in kept) + 1j * math.fsum(x.imag for x in kept)
    return partial, best[0]


def series_inverse(
    ker: Kernel,
    p: float,
    lam,
    t: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    form: str = "auto",
):
    """Evaluate :math:`G_p(\\lambda, t)` by the outer Mittag-Leffler series.

    Parameters
    ----------
    ker : Kernel
        Denominator parameters.
    p : float
        Power of ``s`` in the numerator.
    lam : float or complex
        Single value of ``lambda``.
    t : float
        Time, ``t > 0``.
    pol : SeriesPolicy
        Truncation rule for the outer and inner series.
    form : {"auto", "short", "long"}
        ``"auto"`` takes the short-time series while ``T_X`` is below
        :data:`LONG_TIME_SWITCH`.

    Returns
    -------
    value : float or complex
    error : float
        Estimated absolute error.

    Raises
    ------
    NonConvergence
        If the short-time series does not settle.
    NumericalBreakdown
        If the long-time series cannot reach :data:`FAIL_TOL`.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if form not in ("auto", "short", "long"):
        raise DomainError(f"unknown form {form!r}")
    if form == "auto":
        form = "short" if ker.t_x(t) <= LONG_TIME_SWITCH else "long"
    if form == "long" and ker.b == 0:
        raise DomainError("the long-time series needs b > 0")
    lam_c = complex(lam)
    if form == "short":
        X = ker.x_ratio(t)
        Y = lam_c * t**ker.mu1 / ker.a

        def term(n):
            e = ml3(MLParams(ker.mu1, ker.delta * n + ker.mu1 - p, n + 1.0), -Y, pol)
            return (-X) ** n * e

        total, err = _outer_sum(term, pol, asymptotic=False)
        scale = t ** (ker.mu1 - p - 1.0) / ker.a
    else:
        X = ker.x_ratio(t)
        U = lam_c * t**ker.mu2 / ker.b

        def term(j):
            e = ml3(MLParams(ker.mu2, ker.mu2 - p - ker.delta * j, j + 1.0), -U, pol)
            return (-1.0 / X) ** j * e

        total, err = _outer_sum(term, pol, asymptotic=True)
        if err > FAIL_TOL * abs(total):
            raise NumericalBreakdown(
                f"long-time series at t={t:g} reaches only {err / abs(total):.2g} relative"
            )
        scale = t ** (ker.mu2 - p - 1.0) / ker.b
    value = scale * total
    if isinstance(lam, complex) or np.iscomplexobj(lam):
        return value, abs(scale) * err
    return value.real, abs(scale) * err


