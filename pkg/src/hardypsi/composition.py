"""Quasi-parabolic composition operators ``f -> f(x + psi(x))`` on the upper half-plane.

Two independent constructions of the same operator:

* :func:`series_element` writes it as ``sum_n T_{tau**n} D_{theta_n}`` with
  ``tau = i alpha - psi`` and ``theta_n(t) = (-i t)**n exp(-alpha t) / n!``,
  truncated at ``n_max`` with a certified operator-norm tail bound;
* :func:`disc_matrix_direct` builds the disc composition matrix from Taylor
  coefficients of powers of the conjugated disc map and removes the
  analytic weight ``(x + psi(x) + i) / (x + i)`` with a triangular solve.

Supported ``psi``: ``constant + sum_k poles[k-1] / (x + i)**k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize_scalar

from .algebra import DEFAULT_RESOLUTION, PsiElement, spectrum
from .errors import ConsistencyError, ParameterError, ResolutionError, SymbolClassError
from .finite_model import OperatorMatrix, toeplitz_matrix
from .symbols import (
    CircleSymbol,
    LineSymbol,
    line_point_from_angle,
    poly_exp,
    poly_exp_sup,
    sup_norm,
)

MAX_RATIO = 0.9
DEFAULT_TAIL_TARGET = 1e-10
MAX_SERIES_ORDER = 2000


@dataclass(frozen=True)
class QuasiParabolicMap:
    """Half-plane self-map ``x -> x + psi(x)`` with ``Im psi >= epsilon > 0``.

    ``alpha`` and ``n_max`` are chosen automatically when left as None.
    ``check_admissible=False`` skips the ``Im psi`` test (builder tests only).
    """

    constant: complex
    poles: tuple = ()
    epsilon: float = 1e-3
    alpha: float | None = None
    n_max: int | None = None
    check_admissible: bool = True
    grid_size: int = 4096
    psi: LineSymbol = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "constant", complex(self.constant))
        object.__setattr__(self, "poles", tuple(complex(d) for d in self.poles))
        object.__setattr__(self, "psi", LineSymbol.rational(self.constant, self.poles))
        if self.check_admissible:
            if not self.epsilon > 0:
                raise ParameterError("epsilon must be positive")
            m = self.min_imag()
            if not m >= self.epsilon:
                raise SymbolClassError(
                    f"Im psi reaches {m:.4g} < epsilon = {self.epsilon:g}; "
                    "map is not quasi-parabolic")
        if self.alpha is not None and not self.alpha > 0:
            raise ParameterError("alpha must be positive")

    def min_imag(self):
        """Minimum of ``Im psi`` over the compactified line (dense grid + polish)."""
        theta = 2 * np.pi * np.arange(self.grid_size) / self.grid_size
        vals = self.psi.circle_form.at_angle(theta).imag
        j = int(np.argmin(vals))
        h = 2 * np.pi / self.grid_size
        res = minimize_scalar(lambda s: float(self.psi.circle_form.at_angle(s).imag),
                              bounds=(theta[j] - h, theta[j] + h), method="bounded",
                              options={"xatol": 1e-12})
        return float(min(vals[j], res.fun, self.psi.value_at_infinity.imag))

    def disc_map_samples(self, theta):
        """Boundary values of the disc self-map ``cayley o (x + psi) o cayley^-1``."""
        w = np.exp(1j * np.asarray(theta, dtype=float))
        P = self.psi.circle_form.at_point(w)
        return (2j * w + P * (1 - w)) / (2j + P * (1 - w))

    def weight_symbol(self):
        """Circle form of ``(x + psi(x) + i) / (x + i) = 1 + psi(x) (1 - w) / (2i)``."""
        one_minus_w = CircleSymbol({0: 1.0, 1: -1.0})
        return 1.0 + self.psi.circle_form * one_minus_w * (1 / 2j)


def tau_symbol(qmap, alpha):
    return LineSymbol.from_circle(1j * alpha - qmap.psi.circle_form)


def tail_ratio(qmap, alpha):
    """``||i alpha - psi||_inf / alpha``: asymptotic ratio of successive series terms."""
    return sup_norm(1j * alpha - qmap.psi.circle_form) / alpha


def choose_alpha(qmap):
    """Minimize the tail ratio over a log grid, then polish; must come out below 0.9."""
    scale = max(sup_norm(qmap.psi), 1e-3)
    grid = scale * np.geomspace(1e-2, 1e3, 121)
    ratios = np.array([tail_ratio(qmap, a) for a in grid])
    j = int(np.argmin(ratios))
    lo, hi = np.log(grid[max(j - 1, 0)]), np.log(grid[min(j + 1, grid.size - 1)])
    res = minimize_scalar(lambda la: tail_ratio(qmap, math.exp(la)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    alpha, ratio = (math.exp(res.x), float(res.fun)) if res.fun < ratios[j] else (
        float(grid[j]), float(ratios[j]))
    if not ratio < MAX_RATIO:
        raise ParameterError(
            f"best tail ratio {ratio:.3f} is not below {MAX_RATIO}; no admissible alpha")
    return alpha


def series_term_bound(tau_norm, alpha, n):
    """``||tau||**n * sup_t t**n exp(-alpha t) / n!``."""
    if n == 0:
        return 1.0
    if tau_norm == 0:
        return 0.0
    return math.exp(n * math.log(tau_norm) + math.log(poly_exp_sup(n, alpha)))


def tail_bound(tau_norm, alpha, n_max):
    """Certified bound on ``sum_{n > n_max} ||T_{tau^n} D_{theta_n}||``.

    Successive term ratios are below ``r = ||tau|| / alpha`` because
    ``(1 + 1/n)**n < e``, so the remainder after the last summed term ``a_K`` is at
    most ``a_K r / (1 - r)``.
    """
    r = tau_norm / alpha
    if r >= 1:
        return math.inf
    if tau_norm == 0:
        return 0.0
    total = 0.0
    n = n_max + 1
    while True:
        a = series_term_bound(tau_norm, alpha, n)
        total += a
        if a <= 1e-18 * max(total, 1e-300) or n > n_max + 20000:
            return total + a * r / (1 - r)
        n += 1


@dataclass
class SeriesExpansion:
    element: PsiElement
    alpha: float
    n_max: int
    tail_bound: float
    ratio: float
    tau: LineSymbol
    norm_bound: float

    def summary(self):
        return {"alpha": self.alpha, "n_max": self.n_max, "tail_bound": self.tail_bound,
                "tail_ratio": self.ratio, "norm_bound": self.norm_bound,
                "terms": len(self.element.td_terms)}


def series_expansion(qmap, n_max=None, tail_target=DEFAULT_TAIL_TARGET):
    """Truncated series representation with the alpha, n_max and tail bound used."""
    alpha = qmap.alpha if qmap.alpha is not None else choose_alpha(qmap)
    tau = tau_symbol(qmap, alpha)
    tau_norm = sup_norm(tau)
    ratio = tau_norm / alpha
    if not ratio < 1:
        a_hint = choose_alpha(qmap) if qmap.alpha is not None else None
        raise ParameterError(
            f"alpha = {alpha:g} is too small for this psi: ||i alpha - psi|| / alpha = "
            f"{ratio:.3f} >= 1" + (f"; try alpha = {a_hint:.4g}" if a_hint else ""))
    if n_max is None:
        n_max = qmap.n_max
    if n_max is None:
        n_max = 0
        while tail_bound(tau_norm, alpha, n_max) > tail_target:
            n_max += 1
            if n_max > MAX_SERIES_ORDER:
                raise ResolutionError("series needs more than "
                                      f"{MAX_SERIES_ORDER} terms for the tail target")
    n_max = int(n_max)
    tb = tail_bound(tau_norm, alpha, n_max)
    terms = []
    power = CircleSymbol.constant(1.0)
    norm = 0.0
    for n in range(n_max + 1):
        if n:
            power = power * tau.circle_form
        if n and not power.coefficients:
            break
        coeff = (-1j) ** n
        terms.append((LineSymbol.from_circle(power), poly_exp(n, alpha, coefficient=coeff)))
        norm += sup_norm(power) * poly_exp_sup(n, alpha)
    element = PsiElement(tuple(terms), (), 0.0, tb)
    return SeriesExpansion(element, alpha, n_max, tb, ratio, tau, norm + tb)


def series_element(qmap, n_max=None):
    """The composition operator as a truncated element, ``tail_bound`` recorded."""
    return series_expansion(qmap, n_max=n_max).element


def disc_matrix_direct(qmap, cfg, oversample=16):
    """N x N matrix of the half-plane composition operator in the unified basis.

    Column ``k`` of the disc-side matrix holds the Taylor coefficients of
    ``phi**k`` (phi the conjugated disc map), obtained by FFT of boundary
    samples; the result is ``T_u^{-1}`` applied to it, ``u`` the analytic weight.
    Both factors are lower triangular or exact, so this is the compression of
    the operator up to FFT aliasing.
    """
    N = cfg.N
    M = max(1024, oversample * N)
    theta = 2 * np.pi * np.arange(M) / M
    phi = qmap.disc_map_samples(theta)
    if np.max(np.abs(phi)) > 1 + 1e-12:
        raise SymbolClassError("conjugated disc map leaves the closed disc")
    A = np.empty((N, N), dtype=complex)
    power = np.ones(M, dtype=complex)
    alias = 0.0
    for k in range(N):
        c = np.fft.fft(power) / M
        A[:, k] = c[:N]
        alias = max(alias, float(np.max(np.abs(c[M // 2:]))),
                    float(np.max(np.abs(c[N + (M // 2 - N) // 2:M // 2]))))
        power = power * phi
    if alias > 1e-8:
        raise ResolutionError(f"disc composition coefficients alias at {alias:.2e}; "
                              "increase oversampling")
    L = toeplitz_matrix(qmap.weight_symbol(), cfg).entries
    diag = np.abs(np.diag(L))
    if diag.min() < 1e-12:
        raise ResolutionError("weight Toeplitz truncation is numerically singular")
    cond = float(np.linalg.cond(L))
    X = solve_triangular(L, A, lower=True)
    return OperatorMatrix(X, provenance="composition[direct]",
                          diagnostics={"weight_condition": cond, "alias_bound": alias,
                                       "fft_size": M})


@dataclass
class SigmaReport:
    expansion: SeriesExpansion
    spectrum: object
    components: list
    sigma_equals_sigma_e: bool

    def as_dict(self):
        return {"series": self.expansion.summary(),
                "components": [{"representative": [c.representative.real,
                                                   c.representative.imag],
                                "index": c.index, "cells": c.cells,
                                "unbounded": c.unbounded} for c in self.components],
                "sigma_equals_sigma_e": self.sigma_equals_sigma_e}


def verify_sigma_equals_sigma_e(qmap, resolution=256, n_max=None):
    """Flood-fill the complement of the essential spectrum and check every index is 0."""
    exp = series_expansion(qmap, n_max=n_max)
    rep = spectrum(exp.element, resolution=resolution)
    bad = [c for c in rep.components if c.index != 0]
    if bad:
        raise ConsistencyError("complement component with nonzero index for a "
                               "composition operator",
                               {"components": [(c.representative, c.index) for c in bad]})
    return SigmaReport(exp, rep, rep.components, True)


def whisker_oracle(qmap, t):
    """``exp(i psi(inf) t)``: closed-form whisker of the resummed series."""
    t = np.asarray(t, dtype=float)
    finite = np.isfinite(t)
    # Im psi(inf) > 0, so the whisker ends at 0
    return np.where(finite, np.exp(1j * qmap.psi.value_at_infinity * np.where(finite, t, 0.0)),
                    0.0)


__all__ = [
    "DEFAULT_RESOLUTION",
    "QuasiParabolicMap",
    "SeriesExpansion",
    "SigmaReport",
    "choose_alpha",
    "disc_matrix_direct",
    "line_point_from_angle",
    "series_element",
    "series_expansion",
    "tail_bound",
    "tail_ratio",
    "verify_sigma_equals_sigma_e",
    "whisker_oracle",
]
