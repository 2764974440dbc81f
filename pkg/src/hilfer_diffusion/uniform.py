r"""Uniformly distributed-order model.

With weight :math:`p(\mu,\nu)=\delta(\nu-\lambda)` uniform in :math:`\mu\in(0,1)`
the Fourier-Laplace solution is

.. math::

    \tilde{\hat W}(k,s) = \frac{1}{\lambda}\,
        \frac{(1-s^{-\lambda})/\log s}{(s-1)/\log s + Dk^2}

and the mean squared displacement grows ultraslowly.  Both ratios have a
removable singularity at :math:`s=1`, patched by Taylor expansions in
:math:`\varepsilon=\log s`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ModelError
from .mlf import EULER_GAMMA, digamma, reciprocal_gamma
from .oracle import TalbotConfig, talbot_invert

#: Half-width of the Taylor patch around ``s = 1``.
PATCH_RADIUS = 1e-3


@dataclass(frozen=True)
class UniformModel:
    """Hilfer type and diffusivity of the uniform model."""

    #: Hilfer type ``lambda`` in ``(0, 1]``.
    lam: float = 0.5
    #: Diffusivity.
    D: float = 0.5

    def __post_init__(self) -> None:
        bad = []
        if not 0 < self.lam <= 1:
            bad.append(("lam", f"must lie in (0, 1], got {self.lam}"))
        if not self.D > 0:
            bad.append(("D", f"must be > 0, got {self.D}"))
        if bad:
            raise ModelError(bad)


@dataclass(frozen=True)
class TauberianInput:
    """Transform ``s^-rho L(1/s)`` with ``L`` slowly varying at infinity."""

    rho: float
    slowly_varying: Callable[[float], float] = lambda t: 1.0

    def __post_init__(self) -> None:
        if not self.rho >= 0:
            raise ModelError([("rho", f"must be >= 0, got {self.rho}")])


def _ratios(lam: float, s):
    """``(1 - s^-lam)/log s`` and ``(s - 1)/log s`` with the patch near 1."""
    s = np.asarray(s, dtype=complex)
    eps = np.log(s)
    near = np.abs(s - 1.0) < PATCH_RADIUS
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = (1.0 - s ** (-lam)) / eps
        g2 = (s - 1.0) / eps
    g1 = np.where(near, lam - lam**2 * eps / 2 + lam**3 * eps**2 / 6 - lam**4 * eps**3 / 24, g1)
    g2 = np.where(near, 1.0 + eps / 2 + eps**2 / 6 + eps**3 / 24, g2)
    return g1, g2


def _out(v, s):
    return v if np.ndim(s) else complex(v)


def w_fourier_laplace_uniform(m: UniformModel, k: float, s):
    """Fourier-Laplace solution at ``(k, s)`` (principal branches)."""
    g1, g2 = _ratios(m.lam, s)
    return _out(g1 / (m.lam * (g2 + m.D * k * k)), s)


def msd_laplace(m: UniformModel, s):
    """Laplace image of the mean squared displacement; equals ``2D`` at ``s = 1``."""
    g1, g2 = _ratios(m.lam, s)
    return _out(2.0 * m.D / m.lam * g1 / g2**2, s)


def msd_time(m: UniformModel, t: float, cfg: TalbotConfig = TalbotConfig()) -> float:
    """Mean squared displacement by Talbot inversion."""
    return talbot_invert(lambda s: msd_laplace(m, s), t, cfg)


def msd_short_asymptote(m: UniformModel, t: float) -> float:
    """Small-``t`` law ``(2D/lam) t (1 - gamma - log t)``."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    return 2.0 * m.D / m.lam * t * (1.0 - EULER_GAMMA - math.log(t))


def msd_long_asymptote(m: UniformModel, t: float) -> float:
    """Large-``t`` law ``(2D/lam) t^(lam-1) (log t - psi(lam)) / Gamma(lam)``."""
    if not t > 1:
        raise DomainError(f"t must be > 1, got {t}")
    return (
        2.0 * m.D / m.lam * t ** (m.lam - 1.0) * (math.log(t) - float(digamma(m.lam))) * float(reciprocal_gamma(m.lam))
    )


def tauberian_map(inp: TauberianInput, t: float) -> float:
    """Time-domain image ``t^(rho-1) L(t) / Gamma(rho)`` of ``s^-rho L(1/s)``."""
    if inp.rho == 0:
        raise DomainError("rho = 0 has no power-law image")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    return t ** (inp.rho - 1.0) * inp.slowly_varying(t) * float(reciprocal_gamma(inp.rho))
