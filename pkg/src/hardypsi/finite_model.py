"""Dense N x N truncations in the unified Hardy-space basis.

Basis vector ``e_n`` is ``z**n`` on the disc, ``(x - i)**n / (sqrt(pi) (x + i)**(n+1))``
on the line, and (up to one global unimodular constant) the Laguerre function
``l_n(t) = sqrt(2) exp(-t) L_n(2t)`` on the Fourier side.  Toeplitz matrices are
therefore exact; multipliers and shifts are Gauss-Laguerre quadratures.
"""
from __future__ import annotations

import functools
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import toeplitz

from .errors import ConsistencyError, ParameterError, ResolutionError
from .laguerre import (
    composite_rule,
    gauss_laguerre,
    laguerre_functions,
    laguerre_line_functions,
    laguerre_table,
)
from .symbols import CircleSymbol, LineSymbol, MultiplierSymbol, fourier_coefficients

__all__ = [
    "BASIS_TAG",
    "OperatorMatrix",
    "TruncationConfig",
    "eigenvalues",
    "fourier_coefficients",
    "multiplier_matrix",
    "phase_constants",
    "psi_element_matrix",
    "shift_matrix",
    "shift_product_matrix",
    "sigma_min",
    "singular_values",
    "toeplitz_matrix",
]

log = logging.getLogger(__name__)

BASIS_TAG = "hardy-unified:z^n<->e_n<->l_n"
DRIFT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class TruncationConfig:
    """Truncation size and quadrature settings.

    ``quadrature_order`` defaults to ``4 N``; every multiplier/shift matrix is
    recomputed at twice that order and rejected if any entry drifts by more
    than ``drift_tolerance``.
    """

    N: int
    quadrature_order: int | None = None
    phase_check_tolerance: float = 1e-6
    drift_tolerance: float = DRIFT_TOLERANCE
    check_drift: bool = True

    def __post_init__(self):
        if int(self.N) < 1:
            raise ParameterError("N must be positive")
        object.__setattr__(self, "N", int(self.N))
        Q = 4 * self.N if self.quadrature_order is None else int(self.quadrature_order)
        if Q < self.N:
            raise ParameterError(f"quadrature_order {Q} must be >= N = {self.N}")
        object.__setattr__(self, "quadrature_order", Q)

    def resized(self, N):
        scale = self.quadrature_order / self.N
        return TruncationConfig(N, int(np.ceil(scale * N)), self.phase_check_tolerance,
                                self.drift_tolerance, self.check_drift)


@dataclass
class OperatorMatrix:
    entries: np.ndarray
    basis_tag: str = BASIS_TAG
    provenance: str = ""
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ResolutionError(f"non-finite entries in {self.provenance or 'matrix'}")
        self.entries = a

    @property
    def N(self):
        return self.entries.shape[0]

    def leading(self, n):
        return self.entries[:n, :n]

    def __add__(self, other):
        other_e = other.entries if isinstance(other, OperatorMatrix) else other
        return OperatorMatrix(self.entries + other_e, self.basis_tag,
                              f"({self.provenance}) + (...)")

    def __sub__(self, other):
        other_e = other.entries if isinstance(other, OperatorMatrix) else other
        return OperatorMatrix(self.entries - other_e, self.basis_tag,
                              f"({self.provenance}) - (...)")

    def __matmul__(self, other):
        return OperatorMatrix(self.entries @ other.entries, self.basis_tag,
                              f"({self.provenance}) @ ({other.provenance})")

    def to_csv(self):
        """Row-major CSV, each entry written as two columns ``re,im``."""
        buf = io.StringIO()
        N = self.N
        header = ",".join(f"re_{k},im_{k}" for k in range(N))
        buf.write(f"# basis={self.basis_tag}; provenance={self.provenance}\n")
        buf.write(header + "\n")
        for row in self.entries:
            buf.write(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        rows = [np.array(ln.split(","), dtype=float) for ln in lines[1:]]
        data = np.array(rows)
        return cls(data[:, 0::2] + 1j * data[:, 1::2], provenance="csv")


# ---------------------------------------------------------------------------
# phase constants of the Fourier images of e_n


def _e_n(n, x):
    return (x - 1j) ** n / (np.sqrt(np.pi) * (x + 1j) ** (n + 1))


def _fourier_of_e_n(n, t):
    """``(1/sqrt(2pi)) int e^{-itx} e_n(x) dx`` by oscillatory (QAWF) quadrature."""
    even = lambda x: _e_n(n, x) + _e_n(n, -x)  # noqa: E731
    odd = lambda x: _e_n(n, x) - _e_n(n, -x)  # noqa: E731
    parts = []
    for f, weight in ((even, "cos"), (odd, "sin")):
        re = integrate.quad(lambda x: f(x).real, 0, np.inf, weight=weight, wvar=t, limlst=200)[0]
        im = integrate.quad(lambda x: f(x).imag, 0, np.inf, weight=weight, wvar=t, limlst=200)[0]
        parts.append(re + 1j * im)
    return (parts[0] - 1j * parts[1]) / np.sqrt(2 * np.pi)


@functools.lru_cache(maxsize=8)
def phase_constants(n_max=8, tolerance=1e-6):
    """Fit ``kappa_n`` in ``F e_n = kappa_n l_n`` for ``n <= n_max`` and check it is constant.

    Returns the array of fitted constants; raises ConsistencyError when any
    ``|kappa_n - kappa_0|`` or ``||kappa_n| - 1|`` exceeds ``tolerance``.
    """
    t = np.array([0.15, 0.4, 0.9, 1.7, 2.6])
    ell = laguerre_line_functions(n_max + 1, t)
    kappa = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        fe = np.array([_fourier_of_e_n(n, tk) for tk in t])
        kappa[n] = np.vdot(ell[n], fe) / np.vdot(ell[n], ell[n])
        resid = np.max(np.abs(fe - kappa[n] * ell[n]))
        if resid > tolerance:
            raise ConsistencyError(
                f"Fourier image of e_{n} is not a multiple of l_{n} (residual {resid:.2e})",
                {"n": n, "residual": resid})
    spread = float(np.max(np.abs(kappa - kappa[0])))
    unimod = float(np.max(np.abs(np.abs(kappa) - 1)))
    if spread > tolerance or unimod > tolerance:
        raise ConsistencyError(
            f"phase constants not constant/unimodular (spread {spread:.2e}, "
            f"modulus defect {unimod:.2e})", {"kappa": kappa.tolist()})
    log.debug("phase constants verified: kappa = %s", kappa[0])
    return kappa


# ---------------------------------------------------------------------------
# matrices


def toeplitz_matrix(a, cfg):
    """``entries[j, k] = a_{j-k}``; exact for trigonometric polynomial symbols."""
    if isinstance(a, LineSymbol):
        a = a.circle_form
    N = cfg.N
    col = np.array([a.coefficient(j) for j in range(N)], dtype=complex)
    row = np.array([a.coefficient(-k) for k in range(N)], dtype=complex)
    return OperatorMatrix(toeplitz(col, row), provenance="toeplitz")


def _quadrature_matrix(kernel, N, Q):
    """``sum_k sw_k kernel(u_k) l_m(u_k) l_n(u_k)`` in the scaled Laguerre functions."""
    u, sw = gauss_laguerre(Q)
    F = laguerre_table(N, Q)
    vals = np.asarray(kernel(u), dtype=complex)
    return (F * (sw * vals)) @ F.T


def _checked(build, cfg, what):
    phase_constants(tolerance=cfg.phase_check_tolerance)
    Q = cfg.quadrature_order
    A = build(Q)
    drift = None
    if cfg.check_drift:
        drift = float(np.max(np.abs(build(2 * Q) - A)))
        if drift > cfg.drift_tolerance:
            raise ResolutionError(
                f"{what}: doubling quadrature order {Q} -> {2 * Q} changes entries by "
                f"{drift:.2e} > {cfg.drift_tolerance:g}")
    return A, drift


def multiplier_matrix(theta, cfg):
    """Truncation of the Fourier multiplier with symbol ``theta``.

    ``entries[m, n] = int_0^inf theta(u/2) exp(-u) L_m(u) L_n(u) du``.
    """
    if not isinstance(theta, MultiplierSymbol):
        raise TypeError("multiplier_matrix expects a MultiplierSymbol")
    N = cfg.N
    cuts = [2 * b for b in theta.breakpoints]
    if cuts:
        def build(Q):
            # kinks break the Laguerre rule's accuracy; integrate piece by piece
            x, W = composite_rule(Q, cuts)
            F = laguerre_functions(N, x)
            return (F * (W * theta(x / 2))) @ F.T
    else:
        def build(Q):
            return _quadrature_matrix(lambda u: theta(u / 2), N, Q)

    A, drift = _checked(build, cfg, f"multiplier {theta.label}")
    return OperatorMatrix(A, provenance=f"multiplier[{theta.label}]",
                          diagnostics={"quadrature_order": cfg.quadrature_order,
                                       "drift": drift})


def shift_matrix(eta, cfg):
    """Truncation of the Toeplitz operator with symbol ``exp(i eta x)``.

    On the Fourier side this is the right shift by ``eta``:
    ``entries[m, n] = int l_n(t - eta) l_m(t) dt``.
    """
    eta = float(eta)
    if eta < 0:
        raise ParameterError("shift eta must be non-negative")
    N = cfg.N

    def build(Q):
        u, sw = gauss_laguerre(Q)
        Fn = laguerre_table(N, Q)
        Fm = laguerre_functions(N, u + 2 * eta)
        # phi_n(u) phi_m(u + 2 eta) = exp(-u - eta) L_n(u) L_m(u + 2 eta)
        return (Fm * sw) @ Fn.T

    A, drift = _checked(build, cfg, f"shift({eta:g})")
    return OperatorMatrix(A.astype(complex), provenance=f"shift[{eta:g}]",
                          diagnostics={"quadrature_order": cfg.quadrature_order,
                                       "drift": drift})


def shift_product_matrix(a, b, cfg):
    """Compression of ``S_a^* S_b`` (Toeplitz symbols ``exp(-i a x) exp(i b x)``).

    Assembled from the composed kernel
    ``<S_b l_n, S_a l_m> = int_{max(a,b)}^inf l_n(t - b) l_m(t - a) dt``
    rather than as a product of two truncations: the shifted Laguerre
    functions jump at the shift point, so products of compressions converge
    only like ``N**-0.5``.
    """
    a, b = float(a), float(b)
    if a < 0 or b < 0:
        raise ParameterError("shift amounts must be non-negative")
    N = cfg.N
    top = max(a, b)

    def build(Q):
        u, sw = gauss_laguerre(Q)
        # t = top + u/2: l_n(t-b) l_m(t-a) dt = phi_n(u + 2(top-b)) phi_m(u + 2(top-a)) du
        Fn = laguerre_functions(N, u + 2 * (top - b))
        Fm = laguerre_functions(N, u + 2 * (top - a))
        return (Fm * sw) @ Fn.T

    A, drift = _checked(build, cfg, f"shift_product({a:g},{b:g})")
    return OperatorMatrix(A.astype(complex), provenance=f"shift*[{a:g}] shift[{b:g}]",
                          diagnostics={"drift": drift})


def _bandwidths(element):
    below = above = 0
    for phi, _ in element.td_terms:
        below = max(below, -phi.circle_form.kmin)
    for _, psi in element.dt_terms:
        above = max(above, psi.circle_form.kmax)
    return max(below, above, 0)


def psi_element_matrix(element, cfg):
    """Truncation of ``scalar + sum T_phi D_theta + sum D_nu T_psi``.

    Factors are assembled at size ``N + b`` (``b`` the Toeplitz bandwidth that
    couples into the leading block) before cropping, so for trigonometric
    polynomial symbols the result is the compression of the product, not the
    product of compressions.
    """
    N = cfg.N
    M = N + _bandwidths(element)
    big = cfg.resized(M) if M != N else cfg
    cache = {}

    def mult(theta):
        key = id(theta)
        if key not in cache:
            cache[key] = multiplier_matrix(theta, big).entries
        return cache[key]

    out = element.scalar * np.eye(N, dtype=complex)
    for phi, theta in element.td_terms:
        T = toeplitz_matrix(phi, big).entries
        out += T[:N, :] @ mult(theta)[:, :N]
    for nu, psi in element.dt_terms:
        T = toeplitz_matrix(psi, big).entries
        out += mult(nu)[:N, :] @ T[:, :N]
    return OperatorMatrix(out, provenance=f"psi_element[{len(element.td_terms)}TD+"
                                          f"{len(element.dt_terms)}DT]",
                          diagnostics={"assembly_size": M})


def _entries(matrix):
    return matrix.entries if isinstance(matrix, OperatorMatrix) else np.asarray(matrix)


def singular_values(matrix):
    a = _entries(matrix)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ResolutionError(f"SVD failed ({exc}); shape {a.shape}, "
                              f"max |entry| {np.max(np.abs(a)):.3e}") from exc


def sigma_min(matrix):
    return float(singular_values(matrix)[-1])


def eigenvalues(matrix):
    a = _entries(matrix)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        s = singular_values(a)
        raise ResolutionError(f"eigenvalue solver failed ({exc}); condition estimate "
                              f"{s[0] / max(s[-1], 1e-300):.3e}") from exc
