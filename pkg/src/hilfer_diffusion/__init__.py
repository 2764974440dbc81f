"""Distributed-order Hilfer diffusion with two fractional terms.

Mittag-Leffler and Fox H evaluation, Laplace and Fourier inversion
oracles, the two-term and uniform diffusion models and the harmonic
Fokker-Planck extension.
"""

from .errors import (
    AsymmetricUnsupported,
    AsymptoticUnreliable,
    DomainError,
    HilferDiffusionError,
    ModeTruncationWarning,
    ModelError,
    MomentDoesNotExist,
    NonConvergence,
    NumericalBreakdown,
    NumericalError,
    PoleCollision,
    RequiresAlpha2,
    SingularEndpoint,
    StripViolation,
    TailEstimateFailed,
)
from .fps import (
    HarmonicModel,
    ModeSpec,
    first_moment,
    first_moment_laplace,
    first_moment_residual,
    pdf_harmonic,
    relax_long,
    relax_mode,
    relax_short,
    second_moment_harmonic,
    second_moment_laplace,
)
from .hfox import HFunctionSpec, h_contour, h_eval, h_mellin_moment, h_residue
from .mlf import DEFAULT_POLICY, MLParams, SeriesPolicy, ml2, ml3, ml3_array, ml_laplace_pair
from .oracle import CosineQuadConfig, TalbotConfig, inverse_cosine_transform, talbot_invert
from .twoterm import (
    EOperatorParams,
    NonnegativityReport,
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
from .uniform import (
    TauberianInput,
    UniformModel,
    msd_laplace,
    msd_long_asymptote,
    msd_short_asymptote,
    msd_time,
    tauberian_map,
    w_fourier_laplace_uniform,
)

__version__ = "0.1.0"
