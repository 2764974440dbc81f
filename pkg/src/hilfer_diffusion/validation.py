"""Oracle-equivalence suite behind the ``validate`` command.

Each check compares a closed-form or series result with an independent
numerical route and reports the measured discrepancy against a fixed
tolerance.  Checks never raise: a numerical failure is a failed check.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .errors import HilferDiffusionError
from .fps import HarmonicModel, first_moment_residual, second_moment_harmonic
from .mlf import DEFAULT_POLICY, MLParams, SeriesPolicy, hermite, ml3, ml_laplace_pair
from .oracle import CosineQuadConfig, TalbotConfig, talbot_invert
from .twoterm import (
    EOperatorParams,
    TwoTermModel,
    e_operator,
    pdf,
    pdf_hseries,
    second_moment,
    w_fourier_laplace,
    w_fourier_time,
    zeroth_moment,
)
from .uniform import UniformModel, msd_long_asymptote, msd_short_asymptote, msd_time

#: Seed of the random parameter draws.
SEED = 20160401


@dataclass
class CheckResult:
    """Outcome of one suite."""

    #: Suite number, 1 to 9.
    number: int
    name: str
    passed: bool
    #: Worst measured discrepancy (or ratio deviation).
    measured: float
    tolerance: float
    seconds: float = 0.0
    #: Runtime budget of the suite in seconds.
    budget: float = math.inf
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.number}. {self.name}: measured {self.measured:.3g} "
            f"vs tolerance {self.tolerance:.3g} ({self.seconds:.1f} s / {self.budget:g} s)"
            + (f" {self.detail}" if self.detail else "")
        )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Tolerances:
    """Numerical settings the suites run with."""

    series: SeriesPolicy = DEFAULT_POLICY
    talbot: TalbotConfig = TalbotConfig()
    cosine: CosineQuadConfig | None = None

    def degraded(self) -> list[str]:
        """Settings looser than the defaults."""
        out = []
        if self.series.rel_tol > DEFAULT_POLICY.rel_tol:
            out.append(f"series.rel_tol={self.series.rel_tol:g}")
        ref = TalbotConfig()
        if self.talbot.node_count < ref.node_count or self.talbot.scale != ref.scale or self.talbot.check_tol > ref.check_tol:
            out.append(f"talbot={self.talbot}")
        if self.cosine is not None:
            refc = CosineQuadConfig()
            if self.cosine.rel_tol > refc.rel_tol or self.cosine.panels < refc.panels or self.cosine.order < refc.order:
                out.append(f"cosine={self.cosine}")
        return out


def _run(number, name, tol, budget, body):
    start = time.perf_counter()
    try:
        measured, detail, extra = body()
        passed = measured <= tol
    except HilferDiffusionError as exc:
        measured, detail, extra, passed = math.inf, f"{type(exc).__name__}: {exc}", {}, False
    seconds = time.perf_counter() - start
    if seconds > budget:
        passed = False
        detail = (detail + f" over budget").strip()
    return CheckResult(number, name, passed, float(measured), tol, seconds, budget, detail, extra)


def _rel(a, b):
    return abs(a - b) / abs(b)


# ------------------------------------------------------------------ suites


def laplace_pair_round_trip(tol: Tolerances = Tolerances()) -> CheckResult:
    """Contour inversion of the Mittag-Leffler Laplace pair."""

    def body():
        rng = np.random.default_rng(SEED)
        worst = 0.0
        ts = np.geomspace(0.1, 10.0, 7)
        for _ in range(20):
            alpha = rng.uniform(0.05, 0.999)
            beta = rng.uniform(alpha, 2.0)
            delta = float(rng.integers(1, 4))
            a = rng.uniform(0.01, 2.0)
            p = MLParams(alpha, beta, delta)
            for t in ts:
                ref = t ** (beta - 1.0) * ml3(p, -a * t**alpha, tol.series)
                got = talbot_invert(lambda s: ml_laplace_pair(p, a, s, continued=True), t, tol.talbot)
                worst = max(worst, _rel(got, ref))
        return worst, "", {}

    return _run(1, "Mittag-Leffler Laplace pair round trip", 1e-6, 10.0, body)


CAPUTO_MODELS = (
    TwoTermModel(0.5, 0.5, 0.75, 0.625, 1.0, 1.0, 1.0, 2.0, 0.0),
    TwoTermModel(0.3, 0.7, 0.9, 0.4, 1.0, 1.0, 0.8, 2.0, 0.0),
)


def _pdf_mass(m: TwoTermModel, t: float, cfg) -> float:
    """Gauss-Legendre quadrature of the density on panels graded towards 0."""
    scale = (m.D * t**m.mu1 / m.a) ** (1.0 / m.alpha)
    if m.b > 0:
        scale = max(scale, (m.D * t**m.mu2 / m.b) ** (1.0 / m.alpha))
    edges = np.concatenate(([0.0], np.geomspace(1e-4 * scale, 30.0 * scale, 30)))
    xg, wg = np.polynomial.legendre.leggauss(8)
    lo, hi = edges[:-1, None], edges[1:, None]
    xs = (lo + 0.5 * (hi - lo) * (xg + 1.0)).ravel()
    ws = (0.5 * (hi - lo) * wg).ravel()
    return 2.0 * float(np.dot(ws, pdf(m, xs, t, cfg=cfg)))


def caputo_normalization(tol: Tolerances = Tolerances()) -> CheckResult:
    """Zeroth moment and density mass of Caputo models."""

    def body():
        norm = max(abs(zeroth_moment(m, t) - 1.0) for m in CAPUTO_MODELS for t in (0.01, 1.0, 100.0))
        mass = max(abs(_pdf_mass(m, t, tol.cosine) - 1.0) for m in CAPUTO_MODELS for t in (0.1, 1.0, 10.0))
        # scale the norm error onto the mass tolerance so one number decides
        measured = max(norm * 1e6, mass)
        return measured, f"|norm-1|={norm:.2g}, |mass-1|={mass:.2g}", {"norm": norm, "mass": mass}

    return _run(2, "Caputo normalization", 1e-4, 30.0, body)


def msd_slope(m: TwoTermModel, lo: float, hi: float, n: int = 11) -> float:
    """Least-squares log-log slope of the second moment on ``[lo, hi]``."""
    ts = np.geomspace(lo, hi, n)
    msd = np.array([second_moment(m, t) for t in ts])
    return float(np.polyfit(np.log(ts), np.log(msd), 1)[0])


def figure1_slopes(tol: Tolerances = Tolerances()) -> CheckResult:
    """Decelerating subdiffusion of the reference figure."""

    def body():
        worst = 0.0
        notes = []
        extra = {}
        for i in range(3):
            m = TwoTermModel.figure1(i)
            ts = np.geomspace(1e-4, 1e4, 81)
            msd = np.array([second_moment(m, t) for t in ts])
            if not (np.all(msd > 0) and np.all(np.diff(msd) > 0)):
                return math.inf, f"pair {i} not positive and increasing", {}
            short = msd_slope(m, 1e-4, 1e-3)
            long = msd_slope(m, 1e3, 1e4)
            want_s = m.mu1 - (1 - m.nu1) * (1 - m.mu1)
            want_l = m.mu2 - (1 - m.nu2) * (1 - m.mu2)
            worst = max(worst, abs(short - want_s), abs(long - want_l))
            notes.append(f"pair {i}: {short:.4f}/{want_s:.4f} -> {long:.4f}/{want_l:.4f}")
            extra[f"pair{i}"] = {"short": short, "long": long, "short_ref": want_s, "long_ref": want_l}
        return worst, "; ".join(notes), extra

    return _run(3, "Reference-figure second-moment slopes", 0.02, 60.0, body)


def random_models(count: int, rng: np.random.Generator) -> list[TwoTermModel]:
    """Valid symmetric models drawn uniformly over the parameter box."""
    out = []
    while len(out) < count:
        a = rng.uniform(0.2, 0.8)
        mu1 = rng.uniform(0.3, 0.99)
        mu2 = rng.uniform(0.1, mu1 - 0.05)
        if mu2 <= 0.05:
            continue
        nu1 = rng.uniform(0.0, 1.0)
        nu2 = 1.0 - (1.0 - nu1) * (1.0 - mu1) / (1.0 - mu2)
        out.append(TwoTermModel(a, 1.0 - a, mu1, mu2, nu1, nu2, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), 0.0))
    return out


def transform_consistency(tol: Tolerances = Tolerances()) -> CheckResult:
    """Characteristic function against contour inversion of its Laplace image."""

    def body():
        rng = np.random.default_rng(SEED + 4)
        worst = 0.0
        ks = np.geomspace(0.1, 10.0, 5)
        ts = np.geomspace(0.01, 100.0, 5)
        per_method = {"contour": 0.0, "series": 0.0}
        for m in random_models(5, rng):
            for t in ts:
                refs = [talbot_invert(lambda s: w_fourier_laplace(m, k, s, continued=True), t, tol.talbot) for k in ks]
                for method in per_method:
                    got = w_fourier_time(m, ks, t, tol.series, method=method)
                    err = max(_rel(g, r) for g, r in zip(got, refs))
                    per_method[method] = max(per_method[method], err)
        worst = max(per_method.values())
        detail = ", ".join(f"{k} {v:.2g}" for k, v in per_method.items())
        return worst, detail, per_method

    return _run(4, "Transform consistency", 1e-6, 60.0, body)


def h_series_crosscheck(tol: Tolerances = Tolerances()) -> CheckResult:
    """Fox H-function series against the cosine-transform density."""

    def body():
        m = TwoTermModel.figure1(0)
        worst = 0.0
        for t in (0.5, 2.0):
            xs = np.array([0.25, 0.5, 1.0, 2.0, 3.0])
            ref = pdf(m, xs, t, tol.series, cfg=tol.cosine)
            for x, r in zip(xs, ref):
                worst = max(worst, abs(pdf_hseries(m, x, t, tol.series) - r))
        return worst, "", {}

    return _run(5, "H-series against transform density", 1e-4, 120.0, body)


def uniform_asymptotes(tol: Tolerances = Tolerances()) -> CheckResult:
    """Short- and long-time laws of the uniform model (2D = 1)."""

    def body():
        worst = 0.0
        notes = []
        extra = {}
        for lam in (0.1, 0.5, 0.9):
            m = UniformModel(lam, 0.5)
            rs = msd_time(m, 1e-6, tol.talbot) / msd_short_asymptote(m, 1e-6)
            rl = msd_time(m, 1e6, tol.talbot) / msd_long_asymptote(m, 1e6)
            worst = max(worst, abs(rs - 1.0), abs(rl - 1.0))
            notes.append(f"lambda={lam}: {rs:.4f}, {rl:.4f}")
            extra[f"lambda={lam}"] = {"short_ratio": rs, "long_ratio": rl}
        return worst, "; ".join(notes), extra

    return _run(6, "Uniform-model asymptotes", 0.05, 30.0, body)


def single_term_second_moment(tol: Tolerances = Tolerances()) -> CheckResult:
    """``b = 0`` second moment against its power law."""

    def body():
        mu1, mu2, nu1 = 0.7, 0.3, 0.4
        nu2 = 1.0 - (1.0 - nu1) * (1.0 - mu1) / (1.0 - mu2)
        worst = 0.0
        for D in (0.5, 1.0, 3.0):
            m = TwoTermModel(1.0, 0.0, mu1, mu2, nu1, nu2, D, 2.0, 0.0)
            e = mu1 - (1 - nu1) * (1 - mu1)
            for t in (1e-3, 0.5, 1.0, 7.0, 1e3):
                ref = 2.0 * D * t**e / math.gamma(1.0 + e)
                worst = max(worst, _rel(second_moment(m, t), ref))
        return worst, "", {}

    return _run(7, "Single-term second moment", 1e-12, 1.0, body)


def harmonic_stationarity(tol: Tolerances = Tolerances()) -> CheckResult:
    """Thermal plateau of the Caputo harmonic model and the mean-position residual."""

    def body():
        base = CAPUTO_MODELS[0]
        h = HarmonicModel.einstein(base, mass=1.0, omega=1.0, eta=1.0, x0=0.0)
        plateau = abs(second_moment_harmonic(h, 1e8, tol.series) / h.x_th2 - 1.0)
        hx = HarmonicModel.einstein(TwoTermModel.figure1(0), x0=1.3)
        s = np.array([0.3, 1.0, 4.0, 2.0 + 3.0j, 0.5 - 0.2j])
        resid = float(np.max(np.abs(first_moment_residual(hx, s))))
        # the residual bound is 1e-8, the plateau bound 2%
        measured = max(plateau / 0.02, resid / 1e-8)
        return measured, f"(fraction of bound) plateau deviation {plateau:.2g}, residual {resid:.2g}", {"plateau": plateau, "residual": resid}

    return _run(8, "Harmonic stationarity", 1.0, 30.0, body)


def hermite_and_e_operator(tol: Tolerances = Tolerances()) -> CheckResult:
    """Hermite orthogonality and Riemann-Liouville limits of the E-operator."""

    def body():
        x, w = np.polynomial.hermite.hermgauss(24)
        orth = 0.0
        for i in range(9):
            for j in range(9):
                val = float(np.sum(w * hermite(i, x) * hermite(j, x)))
                ref = math.sqrt(math.pi) * 2.0**i * math.factorial(i) if i == j else 0.0
                orth = max(orth, abs(val - ref) / (math.sqrt(math.pi) * 2.0**max(i, j) * math.factorial(max(i, j))))
        eop = 0.0
        for beta in (0.5, 1.0, 1.7):
            p = EOperatorParams(0.6, beta, 2.0, 0.0)
            for t in (0.5, 2.0):
                one = e_operator(p, lambda s: np.ones_like(s), t, 1024, tol.series)
                ramp = e_operator(p, lambda s: s, t, 1024, tol.series)
                eop = max(eop, _rel(one, t**beta / math.gamma(beta + 1.0)), _rel(ramp, t ** (beta + 1.0) / math.gamma(beta + 2.0)))
        return max(orth, eop), f"orthogonality {orth:.2g}, E-operator {eop:.2g}", {}

    return _run(9, "Hermite orthogonality and E-operator limits", 1e-8, 5.0, body)


SUITES = (
    laplace_pair_round_trip,
    caputo_normalization,
    figure1_slopes,
    transform_consistency,
    h_series_crosscheck,
    uniform_asymptotes,
    single_term_second_moment,
    harmonic_stationarity,
    hermite_and_e_operator,
)


def run_suite(tol: Tolerances = Tolerances(), only=None) -> list[CheckResult]:
    """Run suites 1 to 9 (or the numbers in ``only``)."""
    return [suite(tol) for i, suite in enumerate(SUITES, start=1) if only is None or i in only]
