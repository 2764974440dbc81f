r"""Numerical transform inversion used as an independent check.

Two inversions are provided:

* :func:`talbot_invert` evaluates the Bromwich integral on a Talbot-type
  contour that wraps the branch cut on the negative real axis
  (Weideman & Trefethen, Math. Comp. 76, 2007, optimised parameters);
* :func:`inverse_cosine_transform` evaluates
  :math:`\frac{1}{\pi}\int_0^\infty G(k)\cos(kx)\,dk` by Gauss-Legendre panels
  plus a fitted algebraic tail.

Both repeat the computation at a second resolution and refuse to return a
value when the two disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, NonConvergence, NumericalBreakdown, TailEstimateFailed

_EPS = np.finfo(float).eps
# largest cosine matrix built at once
_CHUNK = 2_000_000
#: Largest quadrature grid in wavenumber; wider position ranges are refused.
MAX_NODES = 4_000_000

# contour s(theta) = (M/t)(_C0 + _C1 theta cot(_C2 theta) + i _C3 theta)
_C0, _C1, _C2, _C3 = -0.6122, 0.5017, 0.6407, 0.2645


@dataclass(frozen=True)
class TalbotConfig:
    """Settings of the Talbot-contour inversion."""

    #: Number of contour nodes ``M``; the check run uses ``2M``.
    node_count: int = 24
    #: Multiplier of the contour size ``M/t``.
    scale: float = 1.0
    #: Abscissa shift ``sigma``: the contour is moved right past singularities at ``Re s > 0``.
    shift: float = 0.0
    #: Relative agreement required between the ``M`` and ``2M`` results.
    check_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.node_count < 16 or self.node_count % 2:
            raise DomainError(f"node_count must be even and >= 16, got {self.node_count}")
        if not self.scale > 0:
            raise DomainError(f"scale must be > 0, got {self.scale}")
        if not self.check_tol > 0:
            raise DomainError(f"check_tol must be > 0, got {self.check_tol}")


@dataclass(frozen=True)
class CosineQuadConfig:
    """Settings of the inverse cosine transform."""

    #: Upper end of the panel quadrature; the tail beyond is fitted.
    k_max: float = 200.0
    #: Number of graded panels on ``[0, k_max]`` (more are added for oscillation).
    panels: int = 48
    #: Relative agreement required between the two resolutions.
    rel_tol: float = 1e-8
    #: Gauss-Legendre nodes per panel.
    order: int = 16

    def __post_init__(self) -> None:
        if not self.k_max > 0:
            raise DomainError(f"k_max must be > 0, got {self.k_max}")
        if self.panels < 8:
            raise DomainError(f"panels must be >= 8, got {self.panels}")
        if not 0 < self.rel_tol < 1:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


def talbot_nodes(t: float, node_count: int, scale: float = 1.0):
    """Contour nodes ``s_j`` and weights ``w_j`` with ``f(t) ~ Re sum w_j F(s_j)``."""
    theta = -np.pi + (np.arange(node_count) + 0.5) * (2.0 * np.pi / node_count)
    rho = scale * node_count / t
    c2t = _C2 * theta
    s = rho * (_C0 + _C1 * theta / np.tan(c2t) + 1j * _C3 * theta)
    ds = rho * (_C1 / np.tan(c2t) - _C1 * c2t / np.sin(c2t) ** 2 + 1j * _C3)
    w = np.exp(s * t) * ds / (1j * node_count)
    return s, w


def _talbot_once(F, t, m, scale, shift):
    s, w = talbot_nodes(t, m, scale)
    with np.errstate(over="raise", invalid="raise"):
        try:
            values = np.asarray(F(s + shift), dtype=complex)
            if values.shape != s.shape:
                values = np.broadcast_to(values, s.shape)
            terms = w * values
        except FloatingPointError as exc:
            raise NumericalBreakdown(f"overflow on the Talbot contour at t={t:g}") from exc
    if not np.all(np.isfinite(terms)):
        raise NumericalBreakdown(f"non-finite contour terms at t={t:g}")
    value = math.fsum(terms.real.tolist())
    return value, float(np.sum(np.abs(terms)))


def talbot_invert(
    F: Callable[[np.ndarray], np.ndarray],
    t: float,
    cfg: TalbotConfig = TalbotConfig(),
    check: bool = True,
) -> float:
    """Invert a Laplace transform at a single time.

    Parameters
    ----------
    F : callable
        Transform, called once per resolution with an array of complex
        abscissae.  Must use principal branches.
    t : float
        Time, ``t > 0``.
    cfg : TalbotConfig
        Contour settings.
    check : bool
        Repeat with ``2M`` nodes and require agreement to ``cfg.check_tol``
        relative (plus a floor from rounding of the contour sum).

    Returns
    -------
    float

    Raises
    ------
    NumericalBreakdown
        On overflow or failed resolution check.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    growth = math.exp(cfg.shift * t)
    f1, mag1 = _talbot_once(F, t, cfg.node_count, cfg.scale, cfg.shift)
    if not check:
        return growth * f1
    f2, mag2 = _talbot_once(F, t, 2 * cfg.node_count, cfg.scale, cfg.shift)
    floor = 1e3 * _EPS * max(mag1, mag2)
    if abs(f1 - f2) > cfg.check_tol * abs(f2) + floor:
        raise NumericalBreakdown(
            f"Talbot resolution check failed at t={t:g}: {f1!r} vs {f2!r}"
        )
    return growth * f2


def _panel_edges(k_max: float, panels: int, x_max: float) -> np.ndarray:
    # geometric grading towards k = 0 for cusps such as |k|^alpha
    graded = np.concatenate(([0.0], np.geomspace(k_max * 1e-9, k_max, panels)))
    if x_max > 0:
        # at most a quarter period of cos(k x) per panel
        n_osc = int(math.ceil(k_max * x_max / (0.5 * math.pi)))
        if n_osc > 1:
            graded = np.union1d(graded, np.linspace(0.0, k_max, n_osc + 1))
    return graded


def _panel_quadrature(edges: np.ndarray, order: int):
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (xg + 1.0)).ravel()
    weights = (half * wg).ravel()
    return nodes, weights


def _fit_tail(G, k_max: float, x: np.ndarray, scale: float, rel_tol: float) -> np.ndarray:
    """Integral of a fitted ``C k^-p`` over ``[k_max, inf)`` against ``cos(kx)/pi``."""
    ks = np.geomspace(k_max / 10.0, k_max, 9)
    gs = np.asarray(G(ks), dtype=float)
    g_end = abs(gs[-1])
    if g_end * k_max <= 1e-3 * rel_tol * scale:
        local = math.log(abs(gs[-3]) / g_end) / math.log(ks[-1] / ks[-3]) if g_end > 0 else math.inf
        if local >= 2.0:
            return np.zeros_like(x)
    if not (np.all(gs > 0) or np.all(gs < 0)):
        raise TailEstimateFailed("integrand changes sign in the last decade of k")
    sign = float(np.sign(gs[-1]))
    # local exponent from the top of the decade, where the power law is best
    lk, lg = np.log(ks[-4:]), np.log(np.abs(gs[-4:]))
    slope, intercept = np.polyfit(lk, lg, 1)
    p = -slope
    resid = np.max(np.abs(lg - (intercept + slope * lk)))
    if resid > 0.01 or p <= 0:
        raise TailEstimateFailed(
            f"no algebraic tail in the last decade (exponent {p:.3g}, misfit {resid:.2g})"
        )
    amp = sign * math.exp(intercept)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        if xi == 0.0:
            if p <= 1:
                raise TailEstimateFailed(f"tail exponent {p:.3g} <= 1 is not integrable at x=0")
            out[i] = amp * k_max ** (1.0 - p) / (p - 1.0)
        else:
            val, _ = integrate.quad(
                lambda k: k ** (-p), k_max, np.inf, weight="cos", wvar=abs(xi)
            )
            out[i] = amp * val
    return out / math.pi


def inverse_cosine_transform(
    G: Callable[[np.ndarray], np.ndarray],
    x,
    cfg: CosineQuadConfig = CosineQuadConfig(),
    max_refine: int = 4,
):
    r"""Evaluate :math:`\frac{1}{\pi}\int_0^\infty G(k)\cos(kx)\,dk`.

    Parameters
    ----------
    G : callable
        Even, real transform; called with arrays of non-negative ``k``.
    x : float or array_like
        Positions.
    cfg : CosineQuadConfig
        Quadrature settings.
    max_refine : int
        Number of panel bisections allowed to reach agreement.

    Returns
    -------
    float or ndarray
        Same shape as ``x``.

    Raises
    ------
    TailEstimateFailed
        If the tail beyond ``k_max`` cannot be fitted by a power law.
    NonConvergence
        If successive resolutions never agree to ``cfg.rel_tol``.
    NumericalBreakdown
        If the oscillation of ``cos(kx)`` would need more than
        :data:`MAX_NODES` nodes, or ``G`` is not finite on the grid.
    """
    x_arr = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    edges = _panel_edges(cfg.k_max, cfg.panels, float(np.max(x_arr)))

    def body(e):
        if (len(e) - 1) * cfg.order > MAX_NODES:
            raise NumericalBreakdown(
                f"|x| up to {np.max(x_arr):g} needs more than {MAX_NODES} nodes below k_max={cfg.k_max:g}"
            )
        nodes, weights = _panel_quadrature(e, cfg.order)
        g = np.asarray(G(nodes), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NumericalBreakdown("non-finite transform values on the quadrature grid")
        wg = weights * g
        vals = np.empty(x_arr.shape)
        step = max(1, _CHUNK // len(nodes))
        for i in range(0, len(x_arr), step):
            vals[i : i + step] = np.cos(np.outer(x_arr[i : i + step], nodes)) @ wg / math.pi
        return vals, float(np.max(np.abs(g)))

    coarse, gmax = body(edges)
    for _ in range(max_refine):
        edges = np.sort(np.concatenate((edges, 0.5 * (edges[:-1] + edges[1:]))))
        fine, gmax = body(edges)
        scale = max(float(np.max(np.abs(fine))), gmax * 1e-12)
        if np.all(np.abs(fine - coarse) <= cfg.rel_tol * np.maximum(np.abs(fine), scale)):
            break
        coarse = fine
    else:
        raise NonConvergence("inverse cosine transform did not reach the requested agreement")
    result = fine + _fit_tail(G, cfg.k_max, x_arr, gmax, cfg.rel_tol)
    return result[0] if np.ndim(x) == 0 else result.reshape(np.shape(x))
