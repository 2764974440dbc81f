r"""Mittag-Leffler functions and gamma-function helpers.

The three-parameter (Prabhakar) function is

.. math::

    E^\delta_{\alpha,\beta}(z) = \sum_{k\ge0}
        \frac{(\delta)_k\, z^k}{\Gamma(\alpha k+\beta)\, k!}.

Two evaluation branches are provided: the power series (summed in the log
domain with compensated summation, escalated to :mod:`mpmath` when the
alternating cancellation exceeds double precision) and the algebraic
expansion for large negative arguments, truncated at its smallest term.
:func:`ml3` picks whichever branch certifies the requested tolerance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .errors import AsymptoticUnreliable, DomainError, NonConvergence

EULER_GAMMA = 0.57721566490153286061
"""Euler-Mascheroni constant."""

_EPS = np.finfo(float).eps
_ARRAY_SERIES_REACH = 25.0
_LOG_PI = math.log(math.pi)
#: Largest working precision (decimal digits) the extended series may use.
MAX_DPS = 2000
#: Digits below the largest term at which an unresolved sum counts as zero.
_ZERO_DIGITS = 340
#: Arguments with ``|z|`` at or below this are never given to the asymptotic branch.
ASYMPTOTIC_RADIUS = 1.0


@dataclass(frozen=True)
class MLParams:
    """Parameters ``(alpha, beta, delta)`` of the three-parameter function."""

    #: First (order) parameter, strictly positive.
    alpha: float
    #: Second parameter, any real.
    beta: float = 1.0
    #: Third parameter, strictly positive.
    delta: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError(f"delta must be > 0, got {self.delta}")


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule shared by every series in the package."""

    #: Relative tolerance for dropping terms.
    rel_tol: float = 1e-13
    #: Hard cap on the number of terms.
    max_terms: int = 20000
    #: Number of successive negligible terms required before stopping.
    consecutive_small: int = 3

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.consecutive_small < 1:
            raise DomainError(
                f"consecutive_small must be >= 1, got {self.consecutive_small}"
            )


DEFAULT_POLICY = SeriesPolicy()


def reciprocal_gamma(z):
    """Return ``1/Gamma(z)``, exactly zero at the poles of Gamma."""
    return special.rgamma(z)


def digamma(z):
    """Return the logarithmic derivative of Gamma."""
    return special.digamma(z)


def _is_pole(x: np.ndarray) -> np.ndarray:
    return (x <= 0) & (x == np.round(x))


def _log_abs_rgamma(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``log|1/Gamma(x)|`` and its sign; poles give ``-inf`` and 0."""
    x = np.asarray(x, dtype=float)
    pole = _is_pole(x)
    xs = np.where(pole, 0.5, x)
    logmag = np.where(pole, -np.inf, -special.gammaln(xs))
    sign = np.where(pole, 0.0, special.gammasgn(xs))
    return logmag, sign


def _log_rgamma_envelope(x: np.ndarray) -> np.ndarray:
    """Smooth upper envelope of ``log|1/Gamma(x)|`` that ignores the zeros."""
    x = np.asarray(x, dtype=float)
    # reflection: |1/Gamma(x)| = |Gamma(1-x) sin(pi x)|/pi <= Gamma(1-x)/pi
    neg = x < 0.5
    return np.where(
        neg,
        special.gammaln(np.where(neg, 1.0 - x, 1.0)) - _LOG_PI,
        -special.gammaln(np.where(neg, 1.0, x)),
    )


def _as_output(value: complex, z) -> complex | float:
    if isinstance(z, complex) or np.iscomplexobj(z):
        return complex(value)
    return float(value.real)


def _stop_index(
    logabs: np.ndarray, envelope: np.ndarray, partial: np.ndarray, pol: SeriesPolicy
) -> int | None:
    """First index at which the stop rule is met, or ``None``.

    A term counts as negligible when it is below ``rel_tol`` times the running
    sum and the smooth envelope is already decreasing.  Exact zeros from Gamma
    poles are skipped: they neither count nor reset the streak.
    """
    n = len(logabs)
    if n < 2:
        return None
    decreasing = np.empty(n, dtype=bool)
    decreasing[0] = False
    decreasing[1:] = np.diff(envelope) < 0
    # only after the last increase of the envelope
    inc = np.flatnonzero(~decreasing)
    start = int(inc[-1]) + 1 if inc.size else 0
    log_tol = math.log(pol.rel_tol)
    with np.errstate(divide="ignore"):
        log_partial = np.log(np.abs(partial))
    small = logabs <= log_tol + log_partial
    streak = 0
    for k in range(start, n):
        if not np.isfinite(logabs[k]):
            continue
        if small[k]:
            streak += 1
            if streak >= pol.consecutive_small:
                return k
        else:
            streak = 0
    return None


def _series_terms(p: MLParams, z: complex, n: int):
    k = np.arange(n, dtype=float)
    arg = p.alpha * k + p.beta
    lrg, sgn = _log_abs_rgamma(arg)
    lpoch = special.gammaln(p.delta + k) - special.gammaln(p.delta) - special.gammaln(k + 1)
    logz = math.log(abs(z))
    logabs = lpoch + lrg + k * logz
    envelope = lpoch + _log_rgamma_envelope(arg) + k * logz
    phase = np.exp(1j * k * cmath.phase(z))
    # scale so the largest term is O(1) when it would overflow
    shift = max(0.0, float(np.max(logabs)) - 600.0)
    with np.errstate(under="ignore"):
        terms = sgn * np.exp(logabs - shift) * phase
    return terms, logabs - shift, envelope - shift, shift


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def _series_mp(p: MLParams, z: complex, pol: SeriesPolicy, dps: int, k_min: int) -> complex:
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z)
        alpha, beta, delta = mpmath.mpf(p.alpha), mpmath.mpf(p.beta), mpmath.mpf(p.delta)
        coef = mpmath.mpf(1)
        total = mpmath.mpc(0)
        tol = mpmath.mpf(pol.rel_tol)
        floor = mpmath.mpf(10) ** (-dps)
        biggest = mpmath.mpf(0)
        streak = 0
        for k in range(pol.max_terms):
            term = coef * mpmath.rgamma(alpha * k + beta)
            total += term
            biggest = max(biggest, abs(term))
            if k >= k_min and term != 0:
                # the floor covers sums that cancel to zero at this precision
                if abs(term) <= max(tol * abs(total), floor * biggest):
                    streak += 1
                    if streak >= pol.consecutive_small:
                        return complex(total)
                else:
                    streak = 0
            coef = coef * (delta + k) * zz / (k + 1)
    raise NonConvergence(f"extended-precision series hit max_terms={pol.max_terms}")


def ml3_series(p: MLParams, z, pol: SeriesPolicy = DEFAULT_POLICY):
    """Power series of the three-parameter function.

    Parameters
    ----------
    p : MLParams
        Function parameters.
    z : complex or float
        Argument.
    pol : SeriesPolicy
        Truncation rule.

    Returns
    -------
    complex or float
        Same kind as ``z``.

    Raises
    ------
    NonConvergence
        If the stop rule is not met within ``pol.max_terms`` terms, or the
        cancellation would require more than :data:`MAX_DPS` digits.
    """
    zc = complex(z)
    if zc == 0:
        return _as_output(complex(reciprocal_gamma(p.beta)), z)
    n = min(64, pol.max_terms)
    while True:
        terms, logabs, envelope, shift = _series_terms(p, zc, n)
        partial = np.cumsum(terms)
        stop = _stop_index(logabs, envelope, partial, pol)
        if stop is not None:
            break
        if n >= pol.max_terms:
            raise NonConvergence(f"series did not converge in {pol.max_terms} terms")
        n = min(2 * n, pol.max_terms)
    used = terms[: stop + 1]
    total = _fsum_complex(used)
    log_max = float(np.max(logabs[: stop + 1]))
    # rounding of the largest term against the size of the result
    log_cond = log_max - math.log(abs(total)) if total != 0 else math.inf
    if log_cond + math.log(64 * _EPS) <= math.log(pol.rel_tol):
        return _as_output(total, z)
    log_max += shift
    digits = -math.log10(pol.rel_tol)
    log10_max = log_max / math.log(10)
    # the double-precision sum is unusable here; start from |E| ~ 1
    dps = int(max(30, log10_max + digits + 10))
    zero_dps = math.ceil(max(log10_max + _ZERO_DIGITS, 30))
    while dps <= MAX_DPS:
        value = _series_mp(p, zc, pol, dps, k_min=stop)
        if value != 0 and math.isfinite(abs(value)):
            needed = log10_max - math.log10(abs(value)) + digits + 10
            if needed <= dps:
                return _as_output(value, z)
        if dps >= zero_dps:
            # absolute error below the double range: the value is zero to working precision
            return _as_output(value, z)
        grow = max(needed + 10, 1.5 * dps) if value != 0 and math.isfinite(abs(value)) else 2 * dps
        dps = int(min(grow, zero_dps))
    raise NonConvergence(f"series cancellation needs more than {MAX_DPS} digits")


def _asymptotic_sum(p: MLParams, zc: complex, rel_tol: float, max_terms: int):
    """Optimally truncated expansion and its absolute error estimate."""
    w = -zc
    logw, argw = math.log(abs(w)), cmath.phase(w)
    n = np.arange(max_terms, dtype=float)
    arg = p.beta - p.alpha * (p.delta + n)
    lrg, sgn = _log_abs_rgamma(arg)
    lpoch = special.gammaln(p.delta + n) - special.gammaln(p.delta) - special.gammaln(n + 1)
    logabs = lpoch + lrg - (p.delta + n) * logw
    envelope = lpoch + _log_rgamma_envelope(arg) - (p.delta + n) * logw
    # smallest term of the envelope; terms beyond it are not summed
    n_opt = int(np.argmin(envelope))
    phase = np.exp(-1j * (p.delta + n[:n_opt]) * argw) * (-1.0) ** n[:n_opt]
    with np.errstate(under="ignore"):
        terms = sgn[:n_opt] * np.exp(logabs[:n_opt]) * phase
    n_cut = n_opt
    if n_opt > 1:
        # stop early once the envelope is negligible against the running sum
        with np.errstate(divide="ignore"):
            log_partial = np.log(np.abs(np.cumsum(terms)))
        negligible = np.flatnonzero(
            envelope[1:n_opt] < math.log(1e-3 * rel_tol) + log_partial[:-1]
        )
        if negligible.size:
            n_cut = int(negligible[0]) + 1
    total = _fsum_complex(terms[:n_cut])
    trunc = math.exp(envelope[n_cut])
    T = abs(w) ** (1.0 / p.alpha)
    phi = min(abs(cmath.phase(zc)), p.alpha * math.pi)
    log_stokes = (
        T * math.cos(phi / p.alpha)
        + (p.delta + abs(1.0 - p.beta)) * math.log(max(T, 1.0))
        - math.log(p.alpha)
    )
    return total, trunc + math.exp(min(log_stokes, 700.0))


def ml3_asymptotic(
    p: MLParams,
    z,
    rel_tol: float = DEFAULT_POLICY.rel_tol,
    radius: float = ASYMPTOTIC_RADIUS,
    max_terms: int = 4096,
):
    r"""Algebraic large-argument expansion, optimally truncated.

    .. math::

        E^\delta_{\alpha,\beta}(-w) \sim \frac{1}{\Gamma(\delta)}
        \sum_{n\ge0} \frac{\Gamma(\delta+n)}{\Gamma(\beta-\alpha(\delta+n))}
        \frac{(-1)^n w^{-\delta-n}}{n!}

    The error estimate adds the smallest omitted term and the size of the
    exponentially small contribution that the expansion omits.

    Raises
    ------
    AsymptoticUnreliable
        If ``|z| <= radius`` or the error estimate exceeds ``rel_tol`` times
        the result.  The estimate is attached to the exception.
    """
    zc = complex(z)
    if abs(zc) <= radius:
        raise AsymptoticUnreliable(f"|z|={abs(zc):g} is inside the radius {radius:g}")
    total, estimate = _asymptotic_sum(p, zc, rel_tol, max_terms)
    if not estimate <= rel_tol * abs(total):
        raise AsymptoticUnreliable(
            f"asymptotic error estimate {estimate:.3g} exceeds tolerance at z={zc}",
            estimate=estimate,
        )
    return _as_output(total, z)


def ml3(p: MLParams, z, pol: SeriesPolicy = DEFAULT_POLICY):
    """Three-parameter Mittag-Leffler function with automatic branch choice.

    The asymptotic branch is used for ``|z| > 1`` whenever its own error
    estimate meets ``pol.rel_tol``; otherwise the series is summed, in
    extended precision if necessary.  When even that is infeasible, the
    asymptotic value is returned provided its absolute error estimate is
    below ``pol.rel_tol``.
    """
    zc = complex(z)
    if zc == 0:
        return _as_output(complex(reciprocal_gamma(p.beta)), z)
    if abs(zc) > ASYMPTOTIC_RADIUS:
        total, estimate = _asymptotic_sum(p, zc, pol.rel_tol, 4096)
        if estimate <= pol.rel_tol * abs(total):
            return _as_output(total, z)
    else:
        estimate = math.inf
    try:
        return ml3_series(p, z, pol)
    except NonConvergence:
        if estimate <= pol.rel_tol:
            return _as_output(total, z)
        raise


def _horner(c: np.ndarray, zs: np.ndarray, rel_tol: float, eps: float):
    total = np.zeros_like(zs)
    bound = np.zeros_like(zs)
    for ck in c[::-1]:
        total = total * zs + ck
        bound = bound * np.abs(zs) + abs(ck)
    return total, 64 * eps * bound <= rel_tol * np.abs(total)


def ml3_array(p: MLParams, z, pol: SeriesPolicy = DEFAULT_POLICY) -> np.ndarray:
    """:func:`ml3` over an array of real arguments.

    Arguments of modest size share one power series, summed in double
    precision and, where that cancels too much, in multiprecision with a
    single coefficient table.  Large arguments go through :func:`ml3`.
    """
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.empty(flat.shape)
    # the series sum is bounded by E(|z|) ~ exp(|z|^(1/alpha))
    small = np.abs(flat) ** (1.0 / p.alpha) <= _ARRAY_SERIES_REACH
    if np.any(small):
        r = max(float(np.max(np.abs(flat[small]))), 1e-300)
        # number of terms for the envelope to drop below rel_tol
        n = 64
        while True:
            k = np.arange(n, dtype=float)
            lrg, sgn = _log_abs_rgamma(p.alpha * k + p.beta)
            lc = special.gammaln(p.delta + k) - special.gammaln(p.delta) - special.gammaln(k + 1) + lrg
            env = lc + k * math.log(r)
            if env[-1] < math.log(pol.rel_tol) + float(np.max(env)) - 5 or n >= pol.max_terms:
                break
            n *= 2
        zs = flat[small]
        idx = np.flatnonzero(small)
        total, good = _horner(sgn * np.exp(lc), zs, pol.rel_tol, _EPS)
        out[idx[good]] = total[good]
        dps = 30
        while not np.all(good) and dps <= 240:
            # the same series in multiprecision, one coefficient table for all points
            with mpmath.workdps(dps):
                c_mp = [
                    mpmath.rf(p.delta, kk) * mpmath.rgamma(p.alpha * kk + p.beta) / mpmath.factorial(kk)
                    for kk in range(n - 1, -1, -1)
                ]
                b_mp = [abs(c) for c in c_mp]
                for i in np.flatnonzero(~good):
                    zi = mpmath.mpf(float(zs[i]))
                    val = mpmath.polyval(c_mp, zi)
                    bnd = mpmath.polyval(b_mp, abs(zi))
                    if 64 * mpmath.eps * bnd <= pol.rel_tol * abs(val):
                        out[idx[i]] = float(val)
                        good[i] = True
            dps *= 2
        small[idx[~good]] = False
    for i in np.flatnonzero(~small):
        out[i] = ml3(p, flat[i], pol)
    return out.reshape(z.shape)


def ml2(alpha: float, beta: float, z, pol: SeriesPolicy = DEFAULT_POLICY):
    """Two-parameter function ``E_{alpha,beta}(z)``."""
    return ml3(MLParams(alpha, beta, 1.0), z, pol)


def ml_laplace_pair(p: MLParams, a: float, s, sign: int = -1, continued: bool = False):
    r"""Laplace image of :math:`t^{\beta-1}E^\delta_{\alpha,\beta}(\pm a t^\alpha)`.

    Returns :math:`s^{\alpha\delta-\beta}/(s^\alpha \mp a)^\delta` with
    principal branches.

    Parameters
    ----------
    sign : {-1, +1}
        Sign of the argument in the time domain.
    continued : bool
        Allow ``s`` off the half-plane of convergence of the Laplace integral
        (the analytic continuation used on inversion contours).

    Raises
    ------
    DomainError
        If ``continued`` is false and ``Re(s) <= |a|**(1/alpha)``.
    """
    if sign not in (-1, 1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    s = np.asarray(s, dtype=complex)
    if not continued:
        bound = abs(a) ** (1.0 / p.alpha)
        if np.any(s.real <= bound):
            raise DomainError(f"Re(s) must exceed |a|^(1/alpha) = {bound:g}")
    out = s ** (p.alpha * p.delta - p.beta) / (s**p.alpha - sign * a) ** p.delta
    return out[()] if out.ndim == 0 else out


def ml2_negative_alpha(alpha: float, beta: float, z, pol: SeriesPolicy = DEFAULT_POLICY):
    """Reflected function ``E_{-alpha,beta}(z) = -E_{alpha,alpha+beta}(1/z)/z``."""
    if alpha <= 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    zc = complex(z)
    if zc == 0:
        raise DomainError("reflection is undefined at z = 0")
    inner = ml3(MLParams(alpha, alpha + beta, 1.0), 1.0 / zc, pol)
    return _as_output(-complex(inner) / zc, z)


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence."""
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev[()] if h_prev.ndim == 0 else h_prev
    h = 2.0 * x
    for j in range(1, int(n)):
        h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    return h[()] if h.ndim == 0 else h
