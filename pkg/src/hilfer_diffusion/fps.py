r"""Fokker-Planck-Smoluchowski layer.

Separating :math:`W(x,t)=X(x)T(t)` in the confined two-term equation gives
mode relaxation laws

.. math::

    \frac{T_n(t)}{T_n(0)} = \mathcal{L}^{-1}\left[\frac{a s^{p_1} + b s^{p_2}}
        {a s^{\mu_1} + b s^{\mu_2} + \lambda_n}\right](t),

which are the characteristic function of :mod:`hilfer_diffusion.twoterm`
with :math:`D\psi(k)` replaced by :math:`\lambda_n`.  For the harmonic
potential :math:`V=m\omega^2x^2/2` the spatial modes are Hermite functions
with :math:`\lambda_n=n\omega^2/\eta`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .engine import kernel_inverse_times
from .errors import DomainError, ModelError, ModeTruncationWarning
from .mlf import DEFAULT_POLICY, SeriesPolicy, hermite, ml2
from .twoterm import (
    EOperatorParams,
    TwoTermModel,
    _homogeneous,
    _stopped_sum,
    e_operator,
    kernel_convolution,
)

#: Default number of Hermite modes in :func:`pdf_harmonic`.
DEFAULT_MODES = 16


@dataclass(frozen=True)
class HarmonicModel:
    """Two-term model confined by ``V(x) = m omega^2 x^2 / 2``.

    The stationary Gaussian of the mode expansion and the thermal plateau of
    the second moment coincide only under the Einstein relation
    ``D = kBT / (m eta)``; :meth:`einstein` builds such a model.
    """

    base: TwoTermModel
    #: Particle mass.
    mass: float = 1.0
    #: Trap frequency.
    omega: float = 1.0
    #: Friction coefficient.
    eta: float = 1.0
    #: Thermal energy.
    kBT: float = 1.0
    #: Initial position.
    x0: float = 0.0

    def __post_init__(self) -> None:
        bad = [(f, "must be > 0") for f in ("mass", "omega", "eta", "kBT") if not getattr(self, f) > 0]
        if self.base.alpha != 2:
            bad.append(("base.alpha", f"the harmonic layer needs alpha = 2, got {self.base.alpha}"))
        if bad:
            raise ModelError(bad)

    @classmethod
    def einstein(cls, base: TwoTermModel, mass=1.0, omega=1.0, eta=1.0, x0=0.0) -> "HarmonicModel":
        """Model with ``kBT = m eta D`` taken from ``base``."""
        return cls(base, mass, omega, eta, mass * eta * base.D, x0)

    @property
    def rate(self) -> float:
        """Mode spacing ``omega^2 / eta``."""
        return self.omega**2 / self.eta

    @property
    def x_th2(self) -> float:
        """Thermal plateau ``kBT / (m omega^2)``."""
        return self.kBT / (self.mass * self.omega**2)

    @property
    def einstein_consistent(self) -> bool:
        return math.isclose(self.base.D, self.kBT / (self.mass * self.eta), rel_tol=1e-12)

    def eigenvalue(self, n: int) -> float:
        return n * self.rate


@dataclass(frozen=True)
class ModeSpec:
    """One eigenmode of the harmonic problem."""

    index: int
    eigenvalue: float

    def __post_init__(self) -> None:
        if self.index < 0 or int(self.index) != self.index:
            raise ModelError([("index", f"must be a non-negative integer, got {self.index}")])

    @classmethod
    def of(cls, h: HarmonicModel, n: int) -> "ModeSpec":
        return cls(n, h.eigenvalue(n))

    def check(self, h: HarmonicModel) -> None:
        """Raise :class:`ModelError` unless the eigenvalue is ``n omega^2 / eta``."""
        want = h.eigenvalue(self.index)
        if not math.isclose(self.eigenvalue, want, rel_tol=1e-12, abs_tol=1e-300):
            raise ModelError([("eigenvalue", f"expected {want!r} for mode {self.index}, got {self.eigenvalue!r}")])


# --------------------------------------------------------------- relaxation


def relax_mode(m: TwoTermModel, lam: float, t: float, pol: SeriesPolicy = DEFAULT_POLICY, method: str = "series") -> float:
    """Relaxation ratio ``T_n(t) / T_n(0)`` of a mode with eigenvalue ``lam``.

    ``method="series"`` sums the two outer Mittag-Leffler series (switching
    to their long-time form for large ``(b/a) t^Delta``); ``"contour"``
    inverts the Laplace image directly.
    """
    if not lam >= 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    if method not in ("series", "contour", "auto"):
        raise DomainError(f"unknown method {method!r}")
    return float(_homogeneous(m, float(lam), t, pol, "series" if method == "series" else "contour"))


def relax_short(m: TwoTermModel, lam: float, t: float) -> float:
    """Leading small-``t`` terms of :func:`relax_mode` (independent of ``lam``)."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    return sum(w * t ** (beta - 1.0) / math.gamma(beta) for w, beta in m.branches())


def relax_long(m: TwoTermModel, lam: float, t: float, pol: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Large-``t`` form of :func:`relax_mode`, governed by the smaller order."""
    if not m.b > 0:
        raise DomainError("the long-time form carries 1/b and needs b > 0")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    z = -lam / m.b * t**m.mu2
    out = 0.0
    for w, p in ((m.a / m.b, m.p1), (1.0, m.p2)):
        beta = m.mu2 - p
        out += w * t ** (beta - 1.0) * ml2(m.mu2, beta, z, pol)
    return float(out)


def first_moment(h: HarmonicModel, t: float, pol: SeriesPolicy = DEFAULT_POLICY, method: str = "series") -> float:
    """Mean position, ``x0`` times the relaxation of the ``omega^2/eta`` mode."""
    return h.x0 * relax_mode(h.base, h.rate, t, pol, method)


def first_moment_laplace(h: HarmonicModel, s):
    """Laplace image of :func:`first_moment`."""
    m = h.base
    s = np.asarray(s, dtype=complex)
    out = h.x0 * (m.a * s**m.p1 + m.b * s**m.p2) / (m.a * s**m.mu1 + m.b * s**m.mu2 + h.rate)
    return out if out.ndim else complex(out)


def first_moment_residual(h: HarmonicModel, s, transform=None):
    """Laplace-domain residual of the first-moment equation.

    ``transform`` is the image of the mean position to test; the closed
    form of :func:`first_moment_laplace` is used when omitted.
    """
    m = h.base
    s = np.asarray(s, dtype=complex)
    img = first_moment_laplace(h, s) if transform is None else transform(s)
    out = (m.a * s**m.mu1 + m.b * s**m.mu2 + h.rate) * img - h.x0 * (m.a * s**m.p1 + m.b * s**m.p2)
    return out if out.ndim else complex(out)


# -------------------------------------------------------------------- pdf


def pdf_harmonic(
    h: HarmonicModel,
    x,
    t: float,
    n_modes: int = DEFAULT_MODES,
    pol: SeriesPolicy = DEFAULT_POLICY,
    method: str = "contour",
):
    """Hermite-mode expansion of the confined density.

    Warns with :class:`ModeTruncationWarning` when the last mode still
    contributes more than ``pol.rel_tol`` of the sum, and at times so short
    that the expansion is not expected to have converged.
    """
    if n_modes < 1:
        raise DomainError(f"n_modes must be >= 1, got {n_modes}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    xs = np.asarray(x, dtype=float)
    c = h.mass * h.omega**2 / (2.0 * h.kBT)
    y = math.sqrt(c) * xs
    gauss = math.sqrt(c / math.pi) * np.exp(-c * xs**2)
    total = np.zeros(xs.shape)
    last = np.zeros(xs.shape)
    log_norm = 0.0
    for n in range(n_modes):
        if n:
            log_norm += math.log(2.0 * n)
        relax = relax_mode(h.base, h.eigenvalue(n), t, pol, method)
        last = np.exp(-log_norm) * hermite(n, y) * gauss * relax
        total = total + last
    if np.any(np.abs(last) > pol.rel_tol * np.maximum(np.abs(total), 1e-300)):
        warnings.warn(f"mode {n_modes - 1} still contributes {float(np.max(np.abs(last))):.2g}", ModeTruncationWarning, stacklevel=2)
    if t < 0.01 * (1.0 / h.rate) ** (1.0 / h.base.mu1):
        warnings.warn(f"t={t:g} is too short for a truncated mode sum", ModeTruncationWarning, stacklevel=2)
    return total if total.ndim else float(total)


# ----------------------------------------------------------- second moment


def _zeroth_moment_grid(m: TwoTermModel, tau: np.ndarray) -> np.ndarray:
    """Norm of the two-term solution on a grid; its limit at ``tau = 0``.

    Evaluated as the ``lambda = 0`` relaxation, which stays fast where the
    small-order Mittag-Leffler series of the closed form cancels badly.
    """
    out = np.zeros(tau.shape)
    pos = tau > 0
    ker = m.kernel
    for w, p in ((m.a, m.p1), (m.b, m.p2)):
        if w > 0:
            out[pos] += w * kernel_inverse_times(ker, p, 0.0, tau[pos])
    beta1 = m.beta1
    out[~pos] = math.inf if beta1 < 1 else (1.0 if beta1 == 1 else 0.0)
    return out


def second_moment_harmonic(
    h: HarmonicModel,
    t: float,
    pol: SeriesPolicy = DEFAULT_POLICY,
    grid: int = 1024,
    method: str = "auto",
) -> float:
    r"""Mean squared position in the trap.

    The ``x0^2`` part is the relaxation of the ``2 omega^2/eta`` mode.  The
    thermal part convolves the zeroth moment with the kernel
    :math:`\mathcal{L}^{-1}[2D/(a s^{\mu_1}+b s^{\mu_2}+2\omega^2/\eta)]`.

    ``method="series"`` expands that kernel into the outer series of
    E-operators, one :func:`~hilfer_diffusion.twoterm.e_operator` per term.
    ``"auto"`` integrates the summed kernel directly against the zeroth
    moment.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    m = h.base
    lam2 = 2.0 * h.rate
    out = 0.0
    if h.x0 != 0:
        out += h.x0**2 * relax_mode(m, lam2, t, pol, "series" if method == "series" else "contour")

    def f(tau):
        return _zeroth_moment_grid(m, np.atleast_1d(np.asarray(tau, dtype=float)))

    if method == "series":

        def term(j):
            p = EOperatorParams(m.mu1, m.delta * j + m.mu1, j + 1.0, -lam2 / m.a)
            return (-m.b / m.a) ** j * e_operator(p, f, t, grid, pol)

        thermal = 2.0 * m.D / m.a * _stopped_sum(term, pol)
    elif method == "auto":
        thermal = 2.0 * m.D * kernel_convolution(m.kernel, lam2, f, t, grid)
    else:
        raise DomainError(f"unknown method {method!r}")
    return float(out + thermal)


def second_moment_laplace(h: HarmonicModel, s):
    """Laplace image of :func:`second_moment_harmonic` (principal branches)."""
    m = h.base
    s = np.asarray(s, dtype=complex)
    den = m.a * s**m.mu1 + m.b * s**m.mu2 + 2.0 * h.rate
    num = m.a * s**m.p1 + m.b * s**m.p2
    norm = num / (m.a * s**m.mu1 + m.b * s**m.mu2)
    out = (h.x0**2 * num + 2.0 * m.D * norm) / den
    return out if out.ndim else complex(out)
