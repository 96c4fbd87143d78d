"""Elements of the Toeplitz/Fourier-multiplier algebra and their symbol calculus.

An element is ``scalar + sum T_phi D_theta + sum D_nu T_psi`` with
line symbols ``phi, psi`` (continuous on the compactified line) and
multiplier symbols ``theta, nu`` (continuous on [0, inf]).  Modulo compacts
its Gelfand symbol lives on two curves:

* the *whisker*, ``t -> scalar + sum phi(inf) theta(t) + sum nu(t) psi(inf)``
  for ``t`` in [0, inf], and
* the *circle*, ``x -> scalar + sum lam_j phi_j(x) + sum mu_j psi_j(x)`` for
  ``x`` on the compactified line, where ``lam_j, mu_j`` are the multiplier
  limits at infinity.

The two curves meet at ``(x, t) = (inf, inf)``.  The circle curve is the
symbol of the limit Toeplitz operator ``H(0)`` that every index is routed
through.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import ConsistencyError, NotFredholmError, ParameterError, ResolutionError
from .symbols import (
    DEFAULT_SEPARATION_TOLERANCE,
    CircleSymbol,
    LineSymbol,
    MultiplierSymbol,
    constant_multiplier,
    shift_multiplier,
    sup_norm,
    winding_number,
)

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1e-3
FREDHOLM_MARGIN = 1e-6
MAX_CURVE_POINTS = 400_000


def _line(sym):
    if isinstance(sym, LineSymbol):
        return sym
    if isinstance(sym, CircleSymbol):
        return LineSymbol.from_circle(sym)
    if np.isscalar(sym):
        return LineSymbol.constant(sym)
    raise TypeError(f"expected a line/circle symbol, got {type(sym).__name__}")


def _mult(sym):
    if isinstance(sym, MultiplierSymbol):
        return sym
    if np.isscalar(sym):
        return constant_multiplier(sym)
    raise TypeError(f"expected a MultiplierSymbol, got {type(sym).__name__}")


@dataclass(frozen=True, eq=False)
class PsiElement:
    """Finite formal sum ``scalar + sum T_phi D_theta + sum D_nu T_psi``.

    ``tail_bound`` is an operator-norm bound on a discarded series tail; it
    widens every essential-spectrum point into a disc of that radius.
    """

    td_terms: tuple = ()
    dt_terms: tuple = ()
    scalar: complex = 0j
    tail_bound: float = 0.0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        td = tuple((_line(p), _mult(t)) for p, t in self.td_terms)
        dt = tuple((_mult(n), _line(p)) for n, p in self.dt_terms)
        object.__setattr__(self, "td_terms", td)
        object.__setattr__(self, "dt_terms", dt)
        object.__setattr__(self, "scalar", complex(self.scalar))
        tb = float(self.tail_bound)
        if not tb >= 0:
            raise ParameterError("tail_bound must be non-negative")
        object.__setattr__(self, "tail_bound", tb)

    # -- constructors ------------------------------------------------------
    @classmethod
    def identity(cls, c=1.0):
        return cls(scalar=c)

    @classmethod
    def toeplitz(cls, phi):
        return cls(td_terms=((phi, constant_multiplier(1.0)),))

    @classmethod
    def multiplier(cls, theta):
        return cls(td_terms=((LineSymbol.constant(1.0), theta),))

    @classmethod
    def td(cls, phi, theta):
        return cls(td_terms=((phi, theta),))

    @classmethod
    def dt(cls, nu, psi):
        return cls(dt_terms=((nu, psi),))

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, PsiElement):
            return PsiElement(self.td_terms + other.td_terms, self.dt_terms + other.dt_terms,
                              self.scalar + other.scalar, self.tail_bound + other.tail_bound)
        if np.isscalar(other):
            return PsiElement(self.td_terms, self.dt_terms, self.scalar + complex(other),
                              self.tail_bound)
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        c = complex(c)
        return PsiElement(tuple((p * c, t) for p, t in self.td_terms),
                          tuple((n, p * c) for n, p in self.dt_terms),
                          self.scalar * c, abs(c) * self.tail_bound)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    # -- properties --------------------------------------------------------
    @property
    def is_pure_toeplitz(self):
        """True when every multiplier is a constant (so the element is ``T_phi``)."""
        return all(t.tail_onset == 0 and t.tail_tolerance == 0
                   for t in self.multipliers()) and not self.dt_terms

    def multipliers(self):
        return [t for _, t in self.td_terms] + [n for n, _ in self.dt_terms]

    def norm_bound(self):
        """``|scalar| + sum ||phi|| ||theta|| + sum ||nu|| ||psi|| + tail_bound``."""
        if "norm_bound" not in self._cache:
            total = abs(self.scalar) + self.tail_bound
            for p, t in self.td_terms:
                total += sup_norm(p) * sup_norm(t)
            for n, p in self.dt_terms:
                total += sup_norm(n) * sup_norm(p)
            self._cache["norm_bound"] = total
        return self._cache["norm_bound"]

    def tail_horizon(self):
        """Largest multiplier tail onset: beyond it the whisker sits at its limit."""
        return max([t.tail_onset for t in self.multipliers()] + [0.0])

    def whisker_tail_error(self):
        return (sum(abs(p.value_at_infinity) * t.tail_tolerance for p, t in self.td_terms)
                + sum(abs(p.value_at_infinity) * n.tail_tolerance for n, p in self.dt_terms))


# ---------------------------------------------------------------------------
# symbols


def limit_toeplitz_symbol(element):
    """``scalar + sum lam_j phi_j + sum mu_j psi_j``: the symbol of ``H(0)``."""
    circle = CircleSymbol.constant(element.scalar)
    for phi, theta in element.td_terms:
        circle = circle + phi.circle_form * theta.limit_at_infinity
    for nu, psi in element.dt_terms:
        circle = circle + psi.circle_form * nu.limit_at_infinity
    return LineSymbol.from_circle(circle)


def whisker_function(element):
    """``t -> scalar + sum phi(inf) theta(t) + sum nu(t) psi(inf)`` (``t = inf`` allowed)."""
    td = [(p.value_at_infinity, t) for p, t in element.td_terms]
    dt = [(p.value_at_infinity, n) for n, p in element.dt_terms]
    scalar = element.scalar

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, scalar, dtype=complex)
        for c, m in td + dt:
            if c != 0:
                out = out + c * m(t)
        return out

    return f


def circle_function(element):
    """Angle ``theta`` on the circle (``theta = 0`` is ``x = inf``) -> circle-curve value."""
    lim = limit_toeplitz_symbol(element).circle_form
    return lim.at_angle


@dataclass
class GelfandSymbol:
    """Samples of the Gelfand symbol on its two curves.

    ``t`` includes ``inf`` as its last entry; ``x`` runs over the compactified
    line via ``x = tan(theta/2)`` and contains ``inf`` at ``theta = pi``.
    """

    t: np.ndarray
    whisker: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    circle: np.ndarray

    def meeting_gap(self):
        return abs(self.whisker[-1] - self.circle[np.isinf(self.x)][0])


def default_t_grid(element, n=2048):
    """``t = -ln(1 - s)`` on a uniform ``s`` grid, extended geometrically to the tail onset."""
    s = np.linspace(0.0, 1.0, n, endpoint=False)
    t = -np.log1p(-s)
    horizon = element.tail_horizon()
    if horizon > t[-1]:
        t = np.concatenate([t, np.geomspace(t[-1], horizon, 256)[1:]])
    return t


def default_x_grid(n=2048):
    theta = np.linspace(-np.pi, np.pi, n + 1)[1:]
    with np.errstate(divide="ignore", over="ignore"):
        x = np.tan(theta / 2)
    x[-1] = np.inf
    return theta, x


def gelfand_symbol(element, t_grid=None, x_grid=None):
    """Whisker and circle samples of the Gelfand symbol.

    ``t_grid`` (finite values, ``inf`` appended) and ``x_grid`` (real values,
    ``inf`` appended) default to the compactification grids.
    """
    if t_grid is None:
        t = default_t_grid(element)
    else:
        t = np.asarray(t_grid, dtype=float)
        t = t[np.isfinite(t)]
    t = np.append(t, np.inf)
    if x_grid is None:
        theta, x = default_x_grid()
    else:
        x = np.asarray(x_grid, dtype=float)
        x = np.append(x[np.isfinite(x)], np.inf)
        theta = 2 * np.arctan(x)
    lim = limit_toeplitz_symbol(element)
    return GelfandSymbol(t=t, whisker=whisker_function(element)(t), theta=theta, x=x,
                         circle=lim(x))


# ---------------------------------------------------------------------------
# sampled essential spectrum


def _refine_curve(f, params, max_gap, max_points=MAX_CURVE_POINTS, fixed_last=False):
    """Bisect parameter intervals until consecutive samples are ``<= max_gap`` apart.

    With ``fixed_last`` the final interval (towards a point at infinity) is
    never bisected.
    """
    p = np.asarray(params, dtype=float)
    z = f(p)
    while True:
        gaps = np.abs(np.diff(z))
        bad = gaps > max_gap
        if fixed_last:
            bad[-1] = False
        nb = int(np.count_nonzero(bad))
        if nb == 0 or p.size + nb > max_points:
            break
        mids = 0.5 * (p[:-1][bad] + p[1:][bad])
        zm = f(mids)
        order = np.argsort(np.concatenate([p, mids]), kind="stable")
        p = np.concatenate([p, mids])[order]
        z = np.concatenate([z, zm])[order]
    return p, z


def _segment_distance(points, lam):
    a, b = points[:-1], points[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, np.real((lam - a) * np.conj(ab)) / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return float(np.min(np.abs(a + s * ab - lam))) if a.size else float(abs(points[0] - lam))


@dataclass
class EssentialSpectrum:
    """Sampled essential spectrum as two polylines with an honest error budget.

    ``resolution_bound`` is half the largest gap between consecutive samples
    (plus the whisker's tail error); ``tail_bound`` is the element's series
    tail.  Every point carries uncertainty radius ``tail_bound``.
    """

    whisker_params: np.ndarray
    whisker: np.ndarray
    circle_params: np.ndarray
    circle: np.ndarray
    tail_bound: float
    resolution_bound: float

    @property
    def points(self):
        return np.concatenate([self.whisker, self.circle])

    @property
    def labels(self):
        return np.array(["whisker"] * self.whisker.size + ["circle"] * self.circle.size)

    @property
    def threshold(self):
        """Distances at or below this are not resolvable from the essential spectrum."""
        return self.tail_bound + self.resolution_bound + FREDHOLM_MARGIN

    def distance(self, lam):
        lam = complex(lam)
        return min(_segment_distance(self.whisker, lam), _segment_distance(self.circle, lam))

    def distances(self, lams):
        return np.array([self.distance(v) for v in np.ravel(lams)])


def essential_spectrum(element, resolution=DEFAULT_RESOLUTION):
    """Whisker image over ``t`` in [0, inf] union circle image over the compactified line.

    Both curves are refined until neighbouring samples are at most
    ``resolution`` apart.
    """
    key = ("sigma_e", float(resolution))
    if key in element._cache:
        return element._cache[key]
    wf = whisker_function(element)
    t0 = default_t_grid(element, n=1024)
    t_par, wz = _refine_curve(wf, t0, resolution)
    t_par = np.append(t_par, np.inf)
    wz = np.append(wz, wf(np.array([np.inf])))
    cf = circle_function(element)
    th0 = np.linspace(0.0, 2 * np.pi, 1025)
    th_par, cz = _refine_curve(cf, th0, resolution)
    gaps = np.concatenate([np.abs(np.diff(wz)), np.abs(np.diff(cz))])
    res_bound = 0.5 * float(gaps.max()) if gaps.size else 0.0
    res_bound += element.whisker_tail_error()
    es = EssentialSpectrum(t_par, wz, th_par, cz, element.tail_bound, res_bound)
    if abs(wz[-1] - cz[0]) > 1e-9:
        raise ConsistencyError("whisker and circle curves do not meet at infinity",
                               {"gap": abs(wz[-1] - cz[0])})
    element._cache[key] = es
    return es


# ---------------------------------------------------------------------------
# homotopy, index, invertibility


def homotopy(element, w):
    """``H(w)``: multipliers shifted by ``-ln w``; ``H(0)`` is the limit Toeplitz operator."""
    w = float(w)
    if not 0 <= w <= 1:
        raise ParameterError(f"homotopy parameter must lie in [0, 1], got {w}")
    if w == 1:
        return element
    if w == 0:
        return PsiElement.toeplitz(limit_toeplitz_symbol(element)) + PsiElement(
            tail_bound=element.tail_bound)
    return PsiElement(tuple((p, shift_multiplier(t, w)) for p, t in element.td_terms),
                      tuple((shift_multiplier(n, w), p) for n, p in element.dt_terms),
                      element.scalar, element.tail_bound)


def _checked_distance(element, lam, resolution):
    es = essential_spectrum(element, resolution)
    d = es.distance(lam)
    return es, d


def fredholm_index(element, lam, resolution=DEFAULT_RESOLUTION,
                   separation_tolerance=DEFAULT_SEPARATION_TOLERANCE):
    """Index of ``lam - element``: minus the winding of the circle curve about ``lam``.

    Raises NotFredholmError when ``lam`` is within the tolerance band of the
    sampled essential spectrum (whisker included).
    """
    lam = complex(lam)
    es, d = _checked_distance(element, lam, resolution)
    if not d > es.threshold:
        raise NotFredholmError(
            f"lambda = {lam} is within {es.threshold:.2e} of the essential spectrum "
            f"(distance {d:.2e}); not Fredholm at this resolution", distance=d,
            threshold=es.threshold)
    lim = limit_toeplitz_symbol(element).circle_form
    w = winding_number(lambda s: lim.at_angle(2 * np.pi * s), lam,
                       separation_tolerance=separation_tolerance)
    return -w


@dataclass(frozen=True)
class Verdict:
    kind: str  # "invertible" | "not_fredholm" | "fredholm_nonzero_index"
    index: int | None
    distance: float
    threshold: float
    within_tolerance_band: bool = False

    @property
    def invertible(self):
        return self.kind == "invertible"

    def as_dict(self):
        return {"verdict": self.kind, "index": self.index, "distance": self.distance,
                "threshold": self.threshold,
                "within_tolerance_band": self.within_tolerance_band}


def is_invertible(element, lam, resolution=DEFAULT_RESOLUTION,
                  separation_tolerance=DEFAULT_SEPARATION_TOLERANCE):
    """Invertibility of ``lam - element``: Fredholm with index zero."""
    lam = complex(lam)
    es, d = _checked_distance(element, lam, resolution)
    if not d > es.threshold:
        return Verdict("not_fredholm", None, d, es.threshold,
                       within_tolerance_band=d > separation_tolerance)
    ind = fredholm_index(element, lam, resolution, separation_tolerance)
    return Verdict("invertible" if ind == 0 else "fredholm_nonzero_index", ind, d,
                   es.threshold)


@dataclass(frozen=True)
class Corollary4Report:
    lam: complex
    element: Verdict
    limit_toeplitz: Verdict

    @property
    def agree(self):
        return self.element.kind == self.limit_toeplitz.kind

    def as_dict(self):
        return {"lambda": [self.lam.real, self.lam.imag], "element": self.element.as_dict(),
                "limit_toeplitz": self.limit_toeplitz.as_dict(), "agree": self.agree}


def corollary4_equivalence(element, lam, resolution=DEFAULT_RESOLUTION):
    """Invertibility of ``lam - element`` against that of its limit Toeplitz operator."""
    lam = complex(lam)
    v_el = is_invertible(element, lam, resolution)
    if v_el.kind == "not_fredholm":
        raise NotFredholmError(f"lambda = {lam} is not a Fredholm point of the element",
                               distance=v_el.distance, threshold=v_el.threshold)
    v_t = is_invertible(homotopy(element, 0.0), lam, resolution)
    report = Corollary4Report(lam, v_el, v_t)
    if not report.agree:
        raise ConsistencyError("element and limit Toeplitz verdicts disagree",
                               report.as_dict())
    return report


@dataclass(frozen=True)
class TraceEntry:
    w: float
    distance: float
    index: int
    containment_gap: float


def homotopy_trace(element, lam, w_grid, resolution=DEFAULT_RESOLUTION):
    """Distance to ``sigma_e(H(w))`` and index of ``lam - H(w)`` along ``w_grid``.

    Checks that every sampled point of ``sigma_e(H(w))`` lies within
    ``resolution`` (+ tail bound) of ``sigma_e(element)`` and that the index
    never changes; either failure raises ConsistencyError.
    """
    lam = complex(lam)
    base = essential_spectrum(element, resolution)
    if not base.distance(lam) > base.threshold:
        raise NotFredholmError(f"lambda = {lam} is not a Fredholm point of the element",
                               distance=base.distance(lam), threshold=base.threshold)
    pts = base.points
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    entries = []
    for w in w_grid:
        hw = homotopy(element, w)
        es = essential_spectrum(hw, resolution)
        hp = es.points
        gap = float(np.max(tree.query(np.column_stack([hp.real, hp.imag]))[0]))
        if gap > resolution + element.tail_bound + 1e-12:
            raise ConsistencyError(
                f"sigma_e(H({w})) leaves sigma_e(T) by {gap:.3e} > resolution {resolution:g}",
                {"w": w, "gap": gap})
        entries.append(TraceEntry(float(w), es.distance(lam), fredholm_index(hw, lam, resolution),
                                  gap))
    if len({e.index for e in entries}) > 1:
        raise ConsistencyError("index is not constant along the homotopy",
                               {"trace": [(e.w, e.index) for e in entries]})
    return entries


# ---------------------------------------------------------------------------
# spectrum by flood fill


@dataclass
class ComponentInfo:
    label: int
    representative: complex
    index: int
    cells: int
    unbounded: bool
    distance: float


@dataclass
class SpectrumReport:
    """Essential spectrum cloud plus the index of each sampled complement component."""

    essential: EssentialSpectrum
    components: list
    filled_points: np.ndarray
    bounding_box: tuple
    resolution: int
    cell_size: float

    @property
    def essential_points(self):
        return self.essential.points

    @property
    def component_indices(self):
        return [(c.representative, c.index) for c in self.components]

    @property
    def spectrum_points(self):
        return np.concatenate([self.essential.points, self.filled_points])

    @property
    def sigma_equals_sigma_e(self):
        return all(c.index == 0 for c in self.components)

    def check(self):
        for c in self.components:
            if c.cells and (c.index != 0) != self._flagged(c):
                raise ConsistencyError("component flag does not match its index",
                                       {"component": c.label})

    def _flagged(self, c):
        return c.index != 0


def _auto_box(element, es, box):
    pts = es.points
    R = 1.1 * element.norm_bound() + 0.1
    if box is None:
        box = (-R, R, -R, R)
    x0, x1, y0, y1 = map(float, box)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-3)
    x0 = min(x0, pts.real.min() - pad)
    x1 = max(x1, pts.real.max() + pad)
    y0 = min(y0, pts.imag.min() - pad)
    y1 = max(y1, pts.imag.max() + pad)
    return (x0, x1, y0, y1)


def spectrum(element, bounding_box=None, resolution=256):
    """Spectrum as ``sigma_e`` plus every complement component of nonzero index.

    The complement of the sampled essential spectrum is flood-filled on a
    ``resolution x resolution`` grid; one index is computed per component at
    its point farthest from ``sigma_e``.
    """
    resolution = int(resolution)
    if resolution < 8:
        raise ParameterError("spectrum resolution must be at least 8")
    coarse = essential_spectrum(element)
    box = _auto_box(element, coarse, bounding_box)
    x0, x1, y0, y1 = box
    h = max(x1 - x0, y1 - y0) / resolution
    es = essential_spectrum(element, min(DEFAULT_RESOLUTION, h / 2))
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = es.points
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    dist = tree.query(np.column_stack([X.ravel(), Y.ravel()]))[0].reshape(X.shape)
    hx, hy = (x1 - x0) / resolution, (y1 - y0) / resolution
    blocked = dist <= 0.75 * max(hx, hy) + es.resolution_bound + es.tail_bound
    labels, count = ndimage.label(~blocked)
    if count == 0:
        raise ResolutionError("every grid cell touches the essential spectrum; "
                              "increase the spectrum resolution")
    components = []
    edge = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0],
                                         labels[:, -1]])).tolist()) - {0}
    filled = []
    for lab in range(1, count + 1):
        mask = labels == lab
        flat = np.argmax(np.where(mask, dist, -1.0))
        i, j = np.unravel_index(flat, mask.shape)
        rep = complex(X[i, j], Y[i, j])
        d = es.distance(rep)
        if not d > es.threshold:
            raise ResolutionError(
                f"component {lab} cannot be separated from the essential spectrum at "
                f"resolution {resolution}; refine the grid")
        ind = fredholm_index(element, rep, resolution=min(DEFAULT_RESOLUTION, h / 2))
        components.append(ComponentInfo(lab, rep, ind, int(mask.sum()), lab in edge, d))
        if ind != 0:
            filled.append(X[mask] + 1j * Y[mask])
    filled_pts = np.concatenate(filled) if filled else np.zeros(0, dtype=complex)
    report = SpectrumReport(es, components, filled_pts, box, resolution, h)
    report.check()
    return report


# ---------------------------------------------------------------------------
# random test elements


def random_element(rng, max_terms=3, max_degree=2):
    """Random finite-sum element with trigonometric-polynomial Toeplitz symbols.

    Multipliers are drawn from ``limit + scale * exp(-alpha t)`` and
    ``exp(i c t)`` families so their limits at infinity vary.
    """
    from .symbols import complex_exp, exp_decay

    def rc(scale=1.0):
        return complex(*rng.normal(size=2)) * scale

    def rsym():
        deg_lo, deg_hi = -int(rng.integers(0, max_degree + 1)), int(rng.integers(0, max_degree + 1))
        coeffs = {k: rc(0.6) for k in range(deg_lo, deg_hi + 1)}
        return LineSymbol.from_circle(CircleSymbol(coeffs))

    def rmult():
        if rng.random() < 0.7:
            return exp_decay(float(rng.uniform(0.3, 3.0)), scale=rc(0.7), limit=rc(0.8))
        return complex_exp(complex(rng.normal(), rng.uniform(0.3, 2.0)))

    td = tuple((rsym(), rmult()) for _ in range(int(rng.integers(1, max_terms + 1))))
    dt = tuple((rmult(), rsym()) for _ in range(int(rng.integers(0, max_terms))))
    return PsiElement(td, dt, rc(0.5))


def random_fredholm_point(element, rng, margin=0.05, resolution=DEFAULT_RESOLUTION,
                          tries=200):
    """Uniform point in the norm box at distance ``> margin`` from ``sigma_e``."""
    es = essential_spectrum(element, resolution)
    pts = es.points
    lo = complex(pts.real.min(), pts.imag.min()) - (0.5 + 0.5j)
    hi = complex(pts.real.max(), pts.imag.max()) + (0.5 + 0.5j)
    for _ in range(tries):
        lam = complex(rng.uniform(lo.real, hi.real), rng.uniform(lo.imag, hi.imag))
        if es.distance(lam) > max(margin, es.threshold):
            return lam
    raise ResolutionError("could not find a Fredholm point for the random element")
