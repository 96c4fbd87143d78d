"""Boundary symbols on the circle / compactified line and multiplier symbols on [0, inf].

Circle symbols are stored canonically as Laurent (trigonometric polynomial)
coefficients; anything given only as a sampler is converted with the DFT.
Line symbols are circle symbols read through the Cayley transform, so the
point ``w = 1`` of the circle is the point at infinity of the line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DomainError,
    NotFredholmError,
    ParameterError,
    ResolutionError,
    SymbolClassError,
)

DEFAULT_GRID_SIZE = 1024
DEFAULT_SEPARATION_TOLERANCE = 1e-8
DEFAULT_MAX_DEPTH = 20
ALIAS_TOLERANCE = 1e-10
DEFAULT_TAIL_TOLERANCE = 1e-12


def _as_complex_array(x):
    return np.asarray(x, dtype=complex)


def cayley(z):
    """Map the upper half-plane onto the unit disc, ``(z - i) / (z + i)``."""
    z = _as_complex_array(z)
    if np.any(z == -1j):
        raise DomainError("cayley transform has a pole at z = -i")
    out = (z - 1j) / (z + 1j)
    return out[()] if out.ndim == 0 else out


def inverse_cayley(w):
    """Inverse of :func:`cayley`, ``i (1 + w) / (1 - w)``."""
    w = _as_complex_array(w)
    if np.any(w == 1):
        raise DomainError("inverse cayley transform has a pole at w = 1")
    out = 1j * (1 + w) / (1 - w)
    return out[()] if out.ndim == 0 else out


def line_point_from_angle(theta):
    """Real point x with ``cayley(x) = exp(i theta)``; theta = 0 maps to +inf."""
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore"):
        x = -1.0 / np.tan(theta / 2.0)
    return np.where(np.mod(theta, 2 * np.pi) == 0.0, np.inf, x)


def fourier_coefficients(sampler, m=None, grid_size=DEFAULT_GRID_SIZE,
                         tolerance=ALIAS_TOLERANCE):
    """Laurent coefficients of a circle function from its values on a uniform grid.

    ``sampler`` takes an array of angles in [0, 2pi). When ``m`` is None the
    smallest cutoff whose discarded modes sum to at most ``tolerance`` is used.

    Returns
    -------
    coefficients : dict
        ``{k: c_k}`` for ``|k| <= m`` (exact zeros and round-off noise dropped).
    alias_bound : float
        ``sum |c_k|`` over ``m < |k| <= grid_size / 2``.
    """
    M = int(grid_size)
    if M < 2:
        raise ParameterError("grid_size must be at least 2")
    theta = 2 * np.pi * np.arange(M) / M
    values = _as_complex_array(sampler(theta))
    if values.shape != theta.shape:
        values = np.broadcast_to(values, theta.shape)
    if not np.all(np.isfinite(values)):
        raise SymbolClassError("sampler is not bounded on the grid")
    c = np.fft.fft(values) / M
    half = M // 2
    ks = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    mags = np.abs(c)
    # tail[j] = sum |c_k| over |k| > j, which bounds the uniform reconstruction error
    by_k = np.zeros(half + 1)
    np.add.at(by_k, np.minimum(np.abs(ks), half), mags)
    tail = np.zeros(half + 1)
    tail[:-1] = np.cumsum(by_k[::-1])[::-1][1:]
    if m is None:
        # the Nyquist band itself never certifies anything
        ok = np.nonzero(tail[:half] <= tolerance)[0]
        if ok.size == 0:
            raise ResolutionError(
                f"no cutoff below grid_size/2 meets alias tolerance {tolerance:g}; "
                f"increase grid_size (currently {M})")
        m = int(ok[0])
    m = int(m)
    if m < 0:
        raise ParameterError("m must be non-negative")
    alias_bound = float(tail[min(m, half - 1)]) if half else 0.0
    if alias_bound > tolerance:
        raise ResolutionError(
            f"alias bound {alias_bound:.3e} exceeds tolerance {tolerance:g} at m={m}, "
            f"grid_size={M}")
    scale = max(1.0, float(mags.max()))
    coeffs = {}
    for k in range(-min(m, half), min(m, half) + 1):
        ck = complex(c[k % M])
        if abs(ck) > 1e-15 * scale:
            coeffs[k] = ck
    return coeffs, alias_bound


@dataclass(frozen=True, eq=False)
class CircleSymbol:
    """Continuous function on the unit circle, held as Laurent coefficients.

    Parameters
    ----------
    coefficients : mapping
        ``{k: a_k}``; the function is ``sum a_k w**k`` for ``|w| = 1``.
    sampler : callable, optional
        Angle -> value. If given together with coefficients, both must agree
        on the uniform grid to 1e-10.
    grid_size : int
        Grid used for sampling, DFT conversion and sup norms.
    """

    coefficients: Mapping[int, complex]
    sampler: Callable | None = None
    grid_size: int = DEFAULT_GRID_SIZE
    _kmin: int = field(init=False, repr=False)
    _coef: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        coeffs = {int(k): complex(v) for k, v in dict(self.coefficients).items() if v != 0}
        if self.grid_size < 1:
            raise ParameterError("grid_size must be positive")
        if coeffs:
            kmin, kmax = min(coeffs), max(coeffs)
        else:
            kmin = kmax = 0
        arr = np.zeros(kmax - kmin + 1, dtype=complex)
        for k, v in coeffs.items():
            arr[k - kmin] = v
        if not np.all(np.isfinite(arr)):
            raise SymbolClassError("non-finite Laurent coefficient")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "_kmin", kmin)
        object.__setattr__(self, "_coef", arr)
        if self.sampler is not None and coeffs:
            theta = 2 * np.pi * np.arange(self.grid_size) / self.grid_size
            err = np.max(np.abs(_as_complex_array(self.sampler(theta)) - self.at_angle(theta)))
            if not err <= ALIAS_TOLERANCE:
                raise SymbolClassError(
                    f"sampler and coefficients disagree by {err:.3e} on the grid")

    @classmethod
    def from_sampler(cls, sampler, grid_size=DEFAULT_GRID_SIZE, m=None,
                     tolerance=ALIAS_TOLERANCE):
        coeffs, _ = fourier_coefficients(sampler, m=m, grid_size=grid_size,
                                         tolerance=tolerance)
        return cls(coeffs, sampler=sampler if m is None else None, grid_size=grid_size)

    @classmethod
    def constant(cls, c, grid_size=DEFAULT_GRID_SIZE):
        return cls({0: complex(c)}, grid_size=grid_size)

    @classmethod
    def monomial(cls, k, c=1.0, grid_size=DEFAULT_GRID_SIZE):
        return cls({int(k): complex(c)}, grid_size=grid_size)

    @classmethod
    def from_array(cls, kmin, coef, grid_size=DEFAULT_GRID_SIZE):
        return cls({kmin + j: v for j, v in enumerate(np.asarray(coef, dtype=complex))},
                   grid_size=grid_size)

    @property
    def kmin(self):
        return self._kmin

    @property
    def kmax(self):
        return self._kmin + len(self._coef) - 1

    @property
    def coefficient_array(self):
        return self._coef.copy()

    def coefficient(self, k):
        return self.coefficients.get(int(k), 0j)

    def at_point(self, w):
        """Evaluate ``sum a_k w**k`` (Horner in w, then the w**kmin factor)."""
        w = _as_complex_array(w)
        val = np.polyval(self._coef[::-1], w)
        if self._kmin:
            val = val * w ** self._kmin
        return val[()] if val.ndim == 0 else val

    def at_angle(self, theta):
        return self.at_point(np.exp(1j * np.asarray(theta, dtype=float)))

    def __call__(self, w):
        return self.at_point(w)

    def samples(self, grid_size=None):
        M = grid_size or self.grid_size
        return self.at_angle(2 * np.pi * np.arange(M) / M)

    def is_analytic(self):
        """True when no negative Fourier modes are present (an H-infinity polynomial)."""
        return self._kmin >= 0

    def _coerce(self, other):
        if isinstance(other, CircleSymbol):
            return other
        if isinstance(other, LineSymbol):
            return other.circle_form
        if np.isscalar(other):
            return CircleSymbol.constant(other, self.grid_size)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coefficients)
        for k, v in other.coefficients.items():
            out[k] = out.get(k, 0j) + v
        return CircleSymbol(out, grid_size=max(self.grid_size, other.grid_size))

    __radd__ = __add__

    def __neg__(self):
        return CircleSymbol({k: -v for k, v in self.coefficients.items()},
                            grid_size=self.grid_size)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return CircleSymbol({k: v * complex(other) for k, v in self.coefficients.items()},
                                grid_size=self.grid_size)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        coef = np.convolve(self._coef, other._coef)
        return CircleSymbol.from_array(self._kmin + other._kmin, coef,
                                       grid_size=max(self.grid_size, other.grid_size))

    __rmul__ = __mul__

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            raise ParameterError("only non-negative powers are supported")
        result = CircleSymbol.constant(1.0, self.grid_size)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self):
        """Complex conjugate on the circle: a_k -> conj(a_{-k})."""
        return CircleSymbol({-k: np.conj(v) for k, v in self.coefficients.items()},
                            grid_size=self.grid_size)

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return all(abs(v) <= atol for v in diff.coefficients.values())


@dataclass(frozen=True, eq=False)
class LineSymbol:
    """Continuous function on the compactified real line, stored as its Cayley pullback."""

    circle_form: CircleSymbol
    value_at_infinity: complex

    def __post_init__(self):
        object.__setattr__(self, "value_at_infinity", complex(self.value_at_infinity))
        at_one = complex(self.circle_form.at_angle(0.0))
        scale = max(1.0, float(np.sum(np.abs(self.circle_form.coefficient_array))))
        if abs(at_one - self.value_at_infinity) > 1e-10 * scale:
            raise SymbolClassError(
                f"value_at_infinity {self.value_at_infinity} does not match the circle "
                f"form at w = 1 ({at_one})")

    @classmethod
    def from_circle(cls, circle_form):
        return cls(circle_form, complex(circle_form.at_angle(0.0)))

    @classmethod
    def constant(cls, c, grid_size=DEFAULT_GRID_SIZE):
        return cls(CircleSymbol.constant(c, grid_size), complex(c))

    @classmethod
    def rational(cls, constant=0.0, poles=(), grid_size=DEFAULT_GRID_SIZE):
        """``constant + sum_k poles[k-1] / (x + i)**k``, exact in circle coordinates.

        Uses ``1 / (x + i) = (1 - w) / (2i)`` with ``w = cayley(x)``.
        """
        base = CircleSymbol({0: 1 / 2j, 1: -1 / 2j}, grid_size=grid_size)
        circle = CircleSymbol.constant(constant, grid_size)
        power = CircleSymbol.constant(1.0, grid_size)
        for d in poles:
            power = power * base
            circle = circle + power * complex(d)
        return cls.from_circle(circle)

    def __call__(self, x):
        """Evaluate on the real line; ``inf`` and ``-inf`` give the value at infinity."""
        x = np.asarray(x, dtype=float)
        finite = np.isfinite(x)
        out = np.full(x.shape, self.value_at_infinity, dtype=complex)
        if np.any(finite):
            out[finite] = self.circle_form.at_point(cayley(x[finite].astype(complex)))
        return out[()] if out.ndim == 0 else out

    def _wrap(self, circle):
        return LineSymbol.from_circle(circle)

    def __add__(self, other):
        if isinstance(other, LineSymbol):
            other = other.circle_form
        return self._wrap(self.circle_form + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, LineSymbol):
            other = other.circle_form
        return self._wrap(self.circle_form - other)

    def __neg__(self):
        return self._wrap(-self.circle_form)

    def __mul__(self, other):
        if isinstance(other, LineSymbol):
            other = other.circle_form
        return self._wrap(self.circle_form * other)

    __rmul__ = __mul__

    def __pow__(self, n):
        return self._wrap(self.circle_form ** n)


def pullback_line_symbol(func, limit, grid_size=DEFAULT_GRID_SIZE, tolerance=1e-8,
                         limit_tolerance=1e-6, probe_radius=1e8):
    """Circle form of a function on the real line with a finite limit at infinity.

    Parameters
    ----------
    func : callable
        Vectorized real x -> complex.
    limit : complex
        Declared value at infinity; ``func`` must approach it along ``+-probe_radius``.
    """
    limit = complex(limit)
    radii = probe_radius * np.array([1e-4, 1e-2, 1.0])
    probes = _as_complex_array(func(np.concatenate([-radii, radii]))).reshape(2, 3)
    devs = np.max(np.abs(probes - limit), axis=0)
    gap = float(devs[-1])
    if not gap <= limit_tolerance or devs[-1] > devs[0] + limit_tolerance:
        raise SymbolClassError(
            f"line function differs from its declared limit by {gap:.3e} at |x| = "
            f"{probe_radius:g}; not continuous on the compactified line")

    def sampler(theta):
        x = line_point_from_angle(theta)
        out = np.full(x.shape, limit, dtype=complex)
        fin = np.isfinite(x)
        out[fin] = func(x[fin])
        return out

    coeffs, _ = fourier_coefficients(sampler, grid_size=grid_size)
    circle = CircleSymbol(coeffs, grid_size=grid_size)
    # verification grid interleaved with the DFT nodes
    theta = 2 * np.pi * (np.arange(grid_size // 4) + 0.37) / (grid_size // 4)
    x = line_point_from_angle(theta)
    err = float(np.max(np.abs(circle.at_angle(theta) - _as_complex_array(func(x)))))
    if not err <= tolerance:
        raise ResolutionError(
            f"pulled-back symbol reproduces the line function only to {err:.3e}")
    # the DFT reproduces the declared limit at w = 1 up to aliasing; pin it exactly
    drift = limit - complex(circle.at_angle(0.0))
    if drift:
        circle = circle + drift
    return LineSymbol(circle, limit)


def trig_polynomial(terms, grid_size=DEFAULT_GRID_SIZE):
    """CircleSymbol from ``[(k, re, im), ...]`` rows."""
    coeffs = {}
    for k, re, im in terms:
        coeffs[int(k)] = coeffs.get(int(k), 0j) + complex(re, im)
    return CircleSymbol(coeffs, grid_size=grid_size)


# ---------------------------------------------------------------------------
# multiplier symbols


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Continuous function on [0, inf) with a declared finite limit at infinity.

    ``|evaluator(t) - limit_at_infinity| <= tail_tolerance`` must hold for every
    ``t >= tail_onset``; this is checked on a sample grid at construction.
    """

    evaluator: Callable
    limit_at_infinity: complex
    tail_onset: float
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    label: str = "multiplier"
    breakpoints: tuple = ()
    params: Mapping = field(default_factory=dict)
    validate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "limit_at_infinity", complex(self.limit_at_infinity))
        object.__setattr__(self, "tail_onset", float(self.tail_onset))
        if self.tail_onset < 0 or not math.isfinite(self.tail_onset):
            raise ParameterError("tail_onset must be a finite non-negative number")
        if self.tail_tolerance < 0:
            raise ParameterError("tail_tolerance must be non-negative")
        if self.validate:
            self._check()

    def _check(self):
        T0 = self.tail_onset
        tail_t = T0 + np.concatenate([[0.0], np.geomspace(1e-3, 1e6, 400)])
        dev = np.abs(self(tail_t) - self.limit_at_infinity)
        worst = float(np.max(dev))
        if not worst <= self.tail_tolerance * (1 + 1e-9) + 1e-15:
            raise SymbolClassError(
                f"{self.label}: deviation {worst:.3e} from the declared limit beyond "
                f"t = {T0:g} exceeds tail_tolerance {self.tail_tolerance:g}")
        head = self(self.sample_grid())
        if not np.all(np.isfinite(head)):
            raise SymbolClassError(f"{self.label}: not bounded on [0, tail_onset]")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape, dtype=complex)
        inf = np.isinf(t)
        out[inf] = self.limit_at_infinity
        if np.any(~inf):
            out[~inf] = np.broadcast_to(
                _as_complex_array(self.evaluator(t[~inf])), t[~inf].shape)
        return out[()] if out.ndim == 0 else out

    def sample_grid(self, n=2000):
        """Dense grid on [0, tail_onset]: log-spaced plus linear plus breakpoints."""
        T0 = max(self.tail_onset, 1e-12)
        pts = [np.array([0.0, T0]), np.geomspace(1e-8 * max(T0, 1.0), T0, n),
               np.linspace(0.0, T0, n)]
        if self.breakpoints:
            bp = np.asarray(self.breakpoints, dtype=float)
            pts.append(bp[(bp >= 0) & (bp <= T0)])
        return np.unique(np.concatenate(pts))

    def _combine(self, other, op, label):
        if isinstance(other, MultiplierSymbol):
            f, g = self.evaluator, other.evaluator
            if op == "add":
                ev = lambda t: _as_complex_array(f(t)) + _as_complex_array(g(t))  # noqa: E731
                lim = self.limit_at_infinity + other.limit_at_infinity
                tol = self.tail_tolerance + other.tail_tolerance
            else:
                ev = lambda t: _as_complex_array(f(t)) * _as_complex_array(g(t))  # noqa: E731
                lim = self.limit_at_infinity * other.limit_at_infinity
                tol = (sup_norm(self) * other.tail_tolerance
                       + abs(other.limit_at_infinity) * self.tail_tolerance)
            return MultiplierSymbol(ev, lim, max(self.tail_onset, other.tail_onset),
                                    tail_tolerance=tol, label=label,
                                    breakpoints=tuple(self.breakpoints) + tuple(other.breakpoints))
        c = complex(other)
        f = self.evaluator
        if op == "add":
            return MultiplierSymbol(lambda t: _as_complex_array(f(t)) + c,
                                    self.limit_at_infinity + c, self.tail_onset,
                                    self.tail_tolerance, label, self.breakpoints)
        return MultiplierSymbol(lambda t: c * _as_complex_array(f(t)),
                                c * self.limit_at_infinity, self.tail_onset,
                                abs(c) * self.tail_tolerance, label, self.breakpoints)

    def __add__(self, other):
        return self._combine(other, "add", f"({self.label})+(...)")

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, "mul", f"({self.label})*(...)")

    __rmul__ = __mul__


def constant_multiplier(c):
    c = complex(c)
    return MultiplierSymbol(lambda t: np.full(np.shape(t), c, dtype=complex), c, 0.0,
                            tail_tolerance=0.0, label=f"const({c})",
                            params={"kind": "constant", "value": c})


def exp_decay(alpha, scale=1.0, limit=0.0, tail_tolerance=DEFAULT_TAIL_TOLERANCE):
    """``limit + scale * exp(-alpha t)`` with ``alpha > 0``."""
    alpha = float(alpha)
    if not alpha > 0:
        raise SymbolClassError("exp_decay needs alpha > 0")
    scale, limit = complex(scale), complex(limit)
    onset = max(0.0, math.log(abs(scale) / tail_tolerance) / alpha) if abs(scale) > 0 else 0.0
    return MultiplierSymbol(lambda t: limit + scale * np.exp(-alpha * np.asarray(t)), limit,
                            onset, tail_tolerance, label=f"exp_decay({alpha:g})",
                            params={"kind": "exp_decay", "alpha": alpha, "scale": scale,
                                    "limit": limit})


def complex_exp(c, tail_tolerance=DEFAULT_TAIL_TOLERANCE):
    """``exp(i c t)``; requires ``Im c > 0`` so the limit at infinity is 0."""
    c = complex(c)
    if not c.imag > 0:
        raise SymbolClassError(
            "complex_exp(c) needs Im c > 0; otherwise exp(ict) has no limit at infinity")
    onset = max(0.0, math.log(1.0 / tail_tolerance) / c.imag)
    return MultiplierSymbol(lambda t: np.exp(1j * c * np.asarray(t)), 0.0, onset,
                            tail_tolerance, label=f"complex_exp({c})",
                            params={"kind": "complex_exp", "c": c})


def piecewise_linear(knots):
    """Linear interpolation through ``[(t, value), ...]``, constant outside the knots."""
    knots = sorted((float(t), complex(v)) for t, v in knots)
    if not knots or knots[0][0] < 0:
        raise SymbolClassError("piecewise_linear needs knots with t >= 0")
    ts = np.array([k[0] for k in knots])
    vs = np.array([k[1] for k in knots])

    def ev(t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, ts, vs.real) + 1j * np.interp(t, ts, vs.imag)

    return MultiplierSymbol(ev, vs[-1], ts[-1], tail_tolerance=0.0,
                            label="piecewise_linear", breakpoints=tuple(ts),
                            params={"kind": "piecewise_linear", "knots": knots})


def poly_exp(n, alpha, coefficient=1.0, tail_tolerance=DEFAULT_TAIL_TOLERANCE):
    """``coefficient * t**n * exp(-alpha t) / n!`` (limit 0)."""
    n, alpha, coefficient = int(n), float(alpha), complex(coefficient)
    if n < 0 or not alpha > 0:
        raise ParameterError("poly_exp needs n >= 0 and alpha > 0")
    log_norm = -math.lgamma(n + 1)
    amp = abs(coefficient)

    def log_mag(t):
        return (n * math.log(t) if n else 0.0) - alpha * t + log_norm + math.log(amp)

    peak = n / alpha
    if amp == 0 or log_mag(max(peak, 1e-300)) <= math.log(tail_tolerance):
        onset = 0.0
    else:
        hi = max(peak, 1.0) * 2
        while log_mag(hi) > math.log(tail_tolerance):
            hi *= 2
        onset = brentq(lambda t: log_mag(t) - math.log(tail_tolerance), max(peak, 1e-300), hi)

    def ev(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", under="ignore"):
            logs = (n * np.log(t) if n else 0.0) - alpha * t + log_norm
            out = np.exp(logs)
        if n:
            out = np.where(t == 0, 0.0, out)
        return coefficient * out

    return MultiplierSymbol(ev, 0.0, onset, tail_tolerance,
                            label=f"poly_exp({n},{alpha:g})",
                            params={"kind": "poly_exp", "n": n, "alpha": alpha,
                                    "coefficient": coefficient})


def poly_exp_sup(n, alpha):
    """Closed-form ``sup_t t**n exp(-alpha t) / n!`` = ``(n/alpha)**n e**-n / n!``."""
    if n == 0:
        return 1.0
    return math.exp(n * math.log(n / alpha) - n - math.lgamma(n + 1))


def shift_multiplier(theta, w):
    """``t -> theta(t - ln w)`` for ``0 < w <= 1``, i.e. a shift by ``-ln w >= 0``."""
    w = float(w)
    if not 0 < w <= 1:
        raise ParameterError(f"shift parameter w must lie in (0, 1], got {w}")
    if w == 1:
        return theta
    s = -math.log(w)
    f = theta.evaluator
    return MultiplierSymbol(lambda t: f(np.asarray(t, dtype=float) + s),
                            theta.limit_at_infinity, max(0.0, theta.tail_onset - s),
                            theta.tail_tolerance, label=f"{theta.label}<<{s:.6g}",
                            breakpoints=tuple(b - s for b in theta.breakpoints if b - s >= 0),
                            validate=False)


# ---------------------------------------------------------------------------
# norms and winding


def _refine_max(f, x0, h, lo, hi):
    a, b = max(lo, x0 - h), min(hi, x0 + h)
    if b <= a:
        return float(abs(f(np.array([x0]))[0]))
    res = minimize_scalar(lambda x: -float(abs(f(np.array([x]))[0])), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-13})
    return -float(res.fun)


def sup_norm(symbol):
    """Maximum modulus over a dense grid, polished by a local 1-D maximization.

    Circle symbols use ``grid_size`` angles; multipliers use a log/linear grid
    on [0, tail_onset] plus the limit (widened by the tail tolerance).
    """
    if isinstance(symbol, LineSymbol):
        symbol = symbol.circle_form
    if isinstance(symbol, CircleSymbol):
        if len(symbol.coefficients) <= 1:
            return float(max((abs(v) for v in symbol.coefficients.values()), default=0.0))
        M = max(symbol.grid_size, 8 * (symbol.kmax - symbol.kmin + 1))
        theta = 2 * np.pi * np.arange(M) / M
        vals = np.abs(symbol.at_angle(theta))
        j = int(np.argmax(vals))
        best = _refine_max(symbol.at_angle, theta[j], 2 * np.pi / M, theta[j] - np.pi,
                           theta[j] + np.pi)
        return max(float(vals[j]), best)
    if isinstance(symbol, MultiplierSymbol):
        t = symbol.sample_grid()
        vals = np.abs(symbol(t))
        j = int(np.argmax(vals))
        lo = t[j - 1] if j > 0 else 0.0
        hi = t[j + 1] if j + 1 < len(t) else t[j]
        best = _refine_max(symbol, t[j], max(t[j] - lo, hi - t[j]), 0.0, symbol.tail_onset)
        tail = abs(symbol.limit_at_infinity) + symbol.tail_tolerance
        if symbol.tail_tolerance == 0:
            tail = abs(symbol.limit_at_infinity)
        return max(float(vals[j]), best, tail)
    raise TypeError(f"sup_norm: unsupported symbol type {type(symbol).__name__}")


def _arg_steps(z, lam):
    d = z - lam
    return np.angle(d[1:] / d[:-1])


def winding_number(curve, lam, separation_tolerance=DEFAULT_SEPARATION_TOLERANCE,
                   max_depth=DEFAULT_MAX_DEPTH, samples=2048):
    """Winding number of a closed curve about ``lam``.

    ``curve`` is either an array of samples (closed implicitly: the last
    sample joins the first) or a callable ``s -> z`` on [0, 1] with
    ``curve(0) == curve(1)``; callables are bisected where consecutive
    arguments jump by pi/2 or more, to depth ``max_depth``.
    """
    lam = complex(lam)
    if callable(curve):
        s = np.linspace(0.0, 1.0, samples + 1)
        z = _as_complex_array(curve(s))
        for _ in range(max_depth + 1):
            _check_separation(z, lam, separation_tolerance)
            steps = _arg_steps(z, lam)
            bad = np.abs(steps) >= np.pi / 2
            if not np.any(bad):
                break
            mids = 0.5 * (s[:-1][bad] + s[1:][bad])
            s_new = np.sort(np.concatenate([s, mids]))
            zmap = dict(zip(s.tolist(), z.tolist()))
            zm = _as_complex_array(curve(mids))
            zmap.update(zip(mids.tolist(), zm.tolist()))
            s = s_new
            z = np.array([zmap[v] for v in s.tolist()], dtype=complex)
        else:
            raise ResolutionError(
                f"winding number: argument still jumps by >= pi/2 after {max_depth} "
                "refinements")
        total = float(np.sum(steps))
    else:
        z = _as_complex_array(curve).ravel()
        if z.size < 3:
            raise ResolutionError("winding number needs at least 3 samples")
        _check_separation(z, lam, separation_tolerance)
        zc = np.concatenate([z, z[:1]])
        steps = _arg_steps(zc, lam)
        if np.any(np.abs(steps) >= np.pi / 2):
            raise ResolutionError(
                "winding number: consecutive samples differ in argument by >= pi/2; "
                "supply a denser curve or a callable")
        total = float(np.sum(steps))
    turns = total / (2 * np.pi)
    n = round(turns)
    if abs(turns - n) > 1e-6:
        raise ResolutionError(f"winding number: non-integer total turning {turns:.8f}")
    return int(n)


def _check_separation(z, lam, tol):
    dmin = float(np.min(np.abs(z - lam)))
    if not dmin > tol:
        raise NotFredholmError(
            f"lambda = {lam} lies on the symbol curve (distance {dmin:.3e} <= {tol:g})",
            distance=dmin, threshold=tol)
