r"""Fox H-functions for the parameter families used by the solution series.

.. math::

    H^{m,n}_{p,q}(z) = \frac{1}{2\pi i}\int_\Omega \theta(s) z^{-s}\,ds,\qquad
    \theta(s) = \frac{\prod_{j\le m}\Gamma(b_j+B_js)\prod_{i\le n}\Gamma(1-a_i-A_is)}
                     {\prod_{j>m}\Gamma(1-b_j-B_js)\prod_{i>n}\Gamma(a_i+A_is)}.

Two evaluation paths are implemented.  The residue path sums the simple
poles of :math:`\Gamma(b_j+B_js)`, :math:`j\le m`, to the left of the contour.
The contour path integrates along :math:`\Re s = c` with Gauss-Legendre
panels.  Coinciding poles are not resolved; they raise :class:`PoleCollision`
and :func:`h_eval` falls back to the contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError, NonConvergence, PoleCollision, StripViolation
from .mlf import DEFAULT_POLICY, SeriesPolicy, _log_abs_rgamma, _log_rgamma_envelope

_EPS = np.finfo(float).eps
_COLLISION_TOL = 1e-8

Pair = tuple[float, float]


@dataclass(frozen=True)
class HFunctionSpec:
    """Orders and parameter pairs of :math:`H^{m,n}_{p,q}`."""

    m: int
    n: int
    #: Upper pairs ``(a_j, A_j)``; ``p = len(upper)``.
    upper: tuple[Pair, ...]
    #: Lower pairs ``(b_j, B_j)``; ``q = len(lower)``.
    lower: tuple[Pair, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple((float(a), float(A)) for a, A in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(B)) for b, B in self.lower))
        p, q = self.p, self.q
        if not (0 <= self.n <= p and 1 <= self.m <= q):
            raise DomainError(f"orders must satisfy 0<=n<=p, 1<=m<=q; got m={self.m}, n={self.n}, p={p}, q={q}")
        if self.m > 2 or self.n > 1 or p > 3 or q > 3:
            raise DomainError("only m<=2, n<=1, p<=3, q<=3 are supported")
        if any(A <= 0 for _, A in self.upper) or any(B <= 0 for _, B in self.lower):
            raise DomainError("all A_j and B_j must be > 0")
        if not self.strip[0] + _COLLISION_TOL < self.strip[1]:
            raise DomainError("left and right pole sequences are not separable")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @property
    def strip(self) -> tuple[float, float]:
        """Open interval of ``Re s`` between the left and right poles."""
        left = max(-b / B for b, B in self.lower[: self.m])
        right = min(((1.0 - a) / A for a, A in self.upper[: self.n]), default=math.inf)
        return left, right

    @property
    def a_star(self) -> float:
        """Aperture: the integrand decays like ``exp(-a_star pi |Im s| / 2)``."""
        return (
            sum(B for _, B in self.lower[: self.m])
            - sum(B for _, B in self.lower[self.m :])
            + sum(A for _, A in self.upper[: self.n])
            - sum(A for _, A in self.upper[self.n :])
        )

    @property
    def mu(self) -> float:
        """``sum B - sum A``; the residue series is convergent when positive."""
        return sum(B for _, B in self.lower) - sum(A for _, A in self.upper)

    def theta(self, s):
        """Mellin kernel ``theta(s)`` (complex, vectorised)."""
        return np.exp(self.log_theta(s))

    def log_theta(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for j, (b, B) in enumerate(self.lower):
            out += special.loggamma(b + B * s) if j < self.m else -special.loggamma(1.0 - b - B * s)
        for i, (a, A) in enumerate(self.upper):
            out += special.loggamma(1.0 - a - A * s) if i < self.n else -special.loggamma(a + A * s)
        return out


def _numerator_args(spec: HFunctionSpec, s: np.ndarray):
    """Arguments of every Gamma factor, split into numerator and reciprocal groups."""
    num = [b + B * s for b, B in spec.lower[: spec.m]]
    num += [1.0 - a - A * s for a, A in spec.upper[: spec.n]]
    den = [1.0 - b - B * s for b, B in spec.lower[spec.m :]]
    den += [a + A * s for a, A in spec.upper[spec.n :]]
    return num, den


def _near_pole(x: np.ndarray) -> np.ndarray:
    return (x < _COLLISION_TOL) & (np.abs(x - np.round(x)) < _COLLISION_TOL)


def _residue_terms(spec: HFunctionSpec, z: float, count: int):
    """Residues at the first ``count`` poles of each left sequence, sorted right to left."""
    poles, owner, index = [], [], []
    for j, (b, B) in enumerate(spec.lower[: spec.m]):
        l = np.arange(count, dtype=float)
        poles.append(-(b + l) / B)
        owner.append(np.full(count, j))
        index.append(l)
    s0 = np.concatenate(poles)
    own = np.concatenate(owner)
    idx = np.concatenate(index)
    order = np.argsort(-s0, kind="stable")
    s0, own, idx = s0[order], own[order], idx[order]
    gaps = np.abs(np.diff(s0))
    if np.any(gaps < _COLLISION_TOL * np.maximum(1.0, np.abs(s0[1:]))):
        k = int(np.argmin(gaps))
        raise PoleCollision(f"poles coincide near s={s0[k]:.10g}")
    logabs = np.zeros_like(s0)
    sign = np.ones_like(s0)
    num, den = _numerator_args(spec, s0)
    for j, x in enumerate(num):
        residue_here = own == j if j < spec.m else np.zeros_like(own, dtype=bool)
        other = np.where(residue_here, 0.5, x)
        if np.any(_near_pole(other) & ~residue_here):
            raise PoleCollision("a numerator Gamma is singular at a residue pole")
        logabs += np.where(residue_here, 0.0, special.gammaln(other))
        sign *= np.where(residue_here, 1.0, special.gammasgn(other))
    for x in den:
        lr, sg = _log_abs_rgamma(x)
        logabs += lr
        sign *= sg
    B_own = np.array([spec.lower[j][1] for j in own])
    # Res Gamma(b + B s) at b + B s = -l is (-1)^l / (l! B)
    logabs += -special.gammaln(idx + 1.0) - np.log(B_own) - s0 * math.log(z)
    sign *= (-1.0) ** idx
    # smooth envelope for the stop rule, ignoring zeros of 1/Gamma
    env = -special.gammaln(idx + 1.0) - np.log(B_own) - s0 * math.log(z)
    for j, x in enumerate(num):
        residue_here = own == j if j < spec.m else np.zeros_like(own, dtype=bool)
        env += np.where(residue_here, 0.0, special.gammaln(np.where(residue_here, 0.5, x)))
    for x in den:
        env += _log_rgamma_envelope(x)
    return s0, sign, logabs, env


def h_residue(spec: HFunctionSpec, z: float, pol: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Residue-series evaluation.

    Raises
    ------
    PoleCollision
        If two poles coincide within 1e-8.
    NonConvergence
        If the stop rule is not met, the series is divergent (``mu <= 0``),
        or cancellation leaves fewer digits than ``pol.rel_tol`` demands.
    """
    if not z > 0:
        raise DomainError(f"z must be > 0, got {z}")
    if spec.mu <= 0:
        raise NonConvergence("residue series diverges for mu <= 0")
    count = 32
    while True:
        s0, sign, logabs, env = _residue_terms(spec, z, count)
        # only poles to the right of the last generated pole of every sequence are complete
        limit = max(-(b + count - 1) / B for b, B in spec.lower[: spec.m])
        keep = s0 >= limit
        s0, sign, logabs, env = s0[keep], sign[keep], logabs[keep], env[keep]
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            terms = sign * np.exp(logabs)
            partial = np.cumsum(terms)
        rising = np.flatnonzero(np.diff(env) >= 0)
        start = int(rising[-1]) + 2 if rising.size else 1
        streak, stop = 0, None
        tol = pol.rel_tol
        for k in range(start, len(terms)):
            if terms[k] == 0.0:
                continue
            if abs(terms[k]) <= tol * abs(partial[k]):
                streak += 1
                if streak >= pol.consecutive_small:
                    stop = k
                    break
            else:
                streak = 0
        if stop is not None:
            break
        if count >= pol.max_terms:
            raise NonConvergence("residue series did not converge")
        count = min(4 * count, pol.max_terms)
    used = terms[: stop + 1]
    if not np.all(np.isfinite(used)):
        raise NonConvergence("residue terms overflow")
    total = math.fsum(used.tolist())
    biggest = float(np.max(np.abs(used)))
    if biggest * 64 * _EPS > pol.rel_tol * abs(total):
        raise NonConvergence("residue series loses too many digits to cancellation")
    return total


def _log_envelope_real(spec: HFunctionSpec, c: float, logz: float) -> float:
    num, den = _numerator_args(spec, np.array([c]))
    val = sum(float(special.gammaln(x)[0]) for x in num)
    val += sum(float(_log_rgamma_envelope(x)[0]) for x in den)
    return val - c * logz


def contour_abscissa(spec: HFunctionSpec, z: float) -> float:
    """Abscissa of the vertical contour.

    The saddle of ``|theta(c) z^-c|`` inside the fundamental strip, kept a
    tenth of the strip width (or 0.1 when the strip is unbounded) away from
    the nearest poles.  This limits cancellation along the contour.
    """
    left, right = spec.strip
    width = min(right - left, 1.0)
    lo = left + 0.1 * width
    hi = right - 0.1 * width if math.isfinite(right) else left + 60.0
    logz = math.log(z)
    res = optimize.minimize_scalar(
        lambda c: _log_envelope_real(spec, c, logz), bounds=(lo, hi), method="bounded"
    )
    return float(res.x)


def h_contour(
    spec: HFunctionSpec,
    z: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    c: float | None = None,
    order: int = 16,
) -> float:
    """Direct quadrature of the Mellin-Barnes integral along ``Re s = c``."""
    if not z > 0:
        raise DomainError(f"z must be > 0, got {z}")
    if spec.a_star <= 0:
        raise NonConvergence("contour integral requires a positive aperture")
    if c is None:
        c = contour_abscissa(spec, z)
    logz = math.log(z)
    # a few nodes per oscillation of z^{-i tau}
    h = min(1.0, math.pi / (2.0 * abs(logz) + 1e-300))
    xg, wg = np.polynomial.legendre.leggauss(order)
    chunk = 64
    parts: list[float] = []
    running_max, streak = 0.0, 0
    panel0 = 0
    max_panels = max(pol.max_terms, 64)
    while panel0 < max_panels:
        lo = (panel0 + np.arange(chunk))[:, None] * h
        tau = lo + 0.5 * h * (xg + 1.0)
        s = c + 1j * tau
        vals = np.real(np.exp(spec.log_theta(s) - s * logz))
        panel_vals = (vals * (0.5 * h * wg)).sum(axis=1)
        panel_mag = np.max(np.abs(vals), axis=1)
        for k in range(chunk):
            parts.append(float(panel_vals[k]))
            running_max = max(running_max, float(panel_mag[k]))
            if panel_mag[k] <= pol.rel_tol * running_max:
                streak += 1
                if streak >= 3:
                    return math.fsum(parts) / math.pi
            else:
                streak = 0
        panel0 += chunk
    raise NonConvergence("contour integrand did not decay")


def h_eval(
    spec: HFunctionSpec,
    z: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    method: str = "auto",
) -> float:
    """Evaluate the H-function at ``z > 0``.

    Parameters
    ----------
    method : {"auto", "residue", "contour"}
        ``auto`` tries the residue series and falls back to the contour on
        :class:`PoleCollision` or :class:`NonConvergence`.
    """
    if method == "residue":
        return h_residue(spec, z, pol)
    if method == "contour":
        return h_contour(spec, z, pol)
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    try:
        return h_residue(spec, z, pol)
    except (PoleCollision, NonConvergence):
        return h_contour(spec, z, pol)


def h_mellin_moment(spec: HFunctionSpec, xi: float, a: float = 1.0) -> float:
    r"""Closed-form Mellin transform :math:`\int_0^\infty x^{\xi-1}H(ax)\,dx = a^{-\xi}\theta(\xi)`.

    Raises
    ------
    StripViolation
        If ``xi`` lies outside the strip between the pole sequences, or at a
        pole of ``theta``.
    """
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    left, right = spec.strip
    if not (left < xi < right):
        raise StripViolation(f"xi={xi} outside the strip ({left:g}, {right:g})")
    num, den = _numerator_args(spec, np.array([float(xi)]))
    if any(_near_pole(x)[0] for x in num):
        raise StripViolation(f"xi={xi} is a pole of theta")
    val = a ** (-xi)
    for x in num:
        val *= float(special.gamma(x[0]))
    for x in den:
        val *= float(special.rgamma(x[0]))
    return val


def ml_spec(alpha: float, beta: float, delta: float = 1.0) -> HFunctionSpec:
    r"""Spec with :math:`H(z) = \Gamma(\delta)E^\delta_{\alpha,\beta}(-z)`."""
    return HFunctionSpec(1, 1, ((1.0 - delta, 1.0),), ((0.0, 1.0), (1.0 - beta, alpha)))


def exponential_spec() -> HFunctionSpec:
    """``H^{1,0}_{0,1}[z | (0,1)] = exp(-z)``."""
    return HFunctionSpec(1, 0, (), ((0.0, 1.0),))


def gaussian_family_spec(first: float, mu1: float, n: int) -> HFunctionSpec:
    """The ``H^{2,0}_{2,2}`` kernel of the ``alpha = 2`` series, outer index ``n``.

    ``first`` is the upper parameter ``(mu1 - mu2) n + beta_i``.
    """
    return HFunctionSpec(2, 0, ((first, mu1 / 2.0), (1.0, 0.5)), ((1.0, 1.0), (n + 1.0, 0.5)))


def levy_family_spec(first: float, mu1: float, alpha: float, n: int) -> HFunctionSpec:
    """The ``H^{2,1}_{3,3}`` kernel of the ``alpha < 2`` series, outer index ``n``."""
    return HFunctionSpec(
        2,
        1,
        ((1.0, 1.0 / alpha), (first, mu1 / alpha), (1.0, 0.5)),
        ((1.0, 1.0), (n + 1.0, 1.0 / alpha), (1.0, 0.5)),
    )
