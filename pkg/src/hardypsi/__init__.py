"""Operators on the Hardy space of the upper half-plane generated by Toeplitz
operators and multipliers of the Laplace-side variable.

Modules
-------
symbols       Cayley transform, circle/line/multiplier symbols, winding numbers.
finite_model  Truncated matrices in the Laguerre basis.
algebra       Elements, Gelfand symbol, essential spectrum, index, spectrum.
composition   Quasi-parabolic composition operators as series elements.
cli           JSON-driven batch front end.
"""
__version__ = "0.1.0"

from .algebra import (
    EssentialSpectrum,
    GelfandSymbol,
    PsiElement,
    SpectrumReport,
    Verdict,
    corollary4_equivalence,
    essential_spectrum,
    fredholm_index,
    gelfand_symbol,
    homotopy,
    homotopy_trace,
    is_invertible,
    limit_toeplitz_symbol,
    spectrum,
)
from .composition import (
    QuasiParabolicMap,
    disc_matrix_direct,
    series_element,
    series_expansion,
    verify_sigma_equals_sigma_e,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    HardyPsiError,
    NotFredholmError,
    ParameterError,
    ResolutionError,
    SymbolClassError,
)
from .finite_model import (
    OperatorMatrix,
    TruncationConfig,
    eigenvalues,
    multiplier_matrix,
    psi_element_matrix,
    shift_matrix,
    shift_product_matrix,
    sigma_min,
    singular_values,
    toeplitz_matrix,
)
from .symbols import (
    CircleSymbol,
    LineSymbol,
    MultiplierSymbol,
    cayley,
    complex_exp,
    constant_multiplier,
    exp_decay,
    fourier_coefficients,
    inverse_cayley,
    piecewise_linear,
    pullback_line_symbol,
    sup_norm,
    trig_polynomial,
    winding_number,
)
