import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hardypsi.algebra import (
    PsiElement,
    corollary4_equivalence,
    essential_spectrum,
    fredholm_index,
    gelfand_symbol,
    homotopy,
    homotopy_trace,
    is_invertible,
    limit_toeplitz_symbol,
    random_element,
    random_fredholm_point,
    spectrum,
)
from hardypsi.errors import ConsistencyError, NotFredholmError, ParameterError
from hardypsi.finite_model import TruncationConfig, psi_element_matrix, sigma_min, singular_values
from hardypsi.symbols import (
    CircleSymbol,
    LineSymbol,
    complex_exp,
    constant_multiplier,
    exp_decay,
    piecewise_linear,
)

from .helpers import hausdorff


def line(coeffs):
    return LineSymbol.from_circle(CircleSymbol(coeffs))


Z = line({1: 1.0})
SPIRAL_C = 1 + 1j


def spiral_oracle(n=200_000):
    t = np.concatenate([np.linspace(0, 40, n), [np.inf]])
    return np.where(np.isinf(t), 0, np.exp(1j * SPIRAL_C * np.where(np.isinf(t), 0, t)))


# -- Gelfand symbol --------------------------------------------------------------

def test_gelfand_pure_toeplitz():
    phi = line({0: 0.3, 1: 1.0, -1: 0.5j})
    g = gelfand_symbol(PsiElement.toeplitz(phi))
    assert np.allclose(g.whisker, phi(np.inf))
    assert np.allclose(g.circle, phi(g.x))
    assert g.meeting_gap() < 1e-14


def test_gelfand_pure_multiplier():
    th = complex_exp(SPIRAL_C)
    g = gelfand_symbol(PsiElement.multiplier(th))
    assert np.allclose(g.whisker, th(g.t))
    assert np.allclose(g.circle, 0)


def test_gelfand_algebra_map_on_commuting_generators():
    p1, p2 = line({0: 1.0, 1: 0.5}), line({-1: 0.7j, 2: 0.2})
    t1, t2 = exp_decay(1.0, 0.8, 0.4), complex_exp(0.5 + 1.2j)
    t = np.concatenate([np.linspace(0, 5, 501), np.geomspace(5, 1e3, 200)])
    x = np.linspace(-40, 40, 801)
    g1, g2, g12 = (gelfand_symbol(el, t, x) for el in (
        PsiElement.td(p1, t1), PsiElement.td(p2, t2), PsiElement.td(p1 * p2, t1 * t2)))
    assert np.max(np.abs(g1.whisker * g2.whisker - g12.whisker)) < 1e-10
    assert np.max(np.abs(g1.circle * g2.circle - g12.circle)) < 1e-10


# -- essential spectrum -----------------------------------------------------------

def test_essential_spectrum_shift_is_unit_circle():
    es = essential_spectrum(PsiElement.toeplitz(Z))
    assert np.max(np.abs(np.abs(es.circle) - 1)) < 1e-12
    assert np.allclose(es.whisker, 1)
    th = np.linspace(0, 2 * np.pi, 20001)
    assert hausdorff(es.points, np.exp(1j * th)) < 1e-3


def test_essential_spectrum_decay_is_segment():
    es = essential_spectrum(PsiElement.multiplier(complex_exp(1j)))
    assert np.max(np.abs(es.whisker.imag)) < 1e-15
    assert hausdorff(es.points, np.linspace(0, 1, 20001)) < 1e-3
    assert es.whisker[0] == 1 and es.whisker[-1] == 0


def test_essential_spectrum_spiral_matches_parametric_curve():
    es = essential_spectrum(PsiElement.multiplier(complex_exp(SPIRAL_C)))
    assert hausdorff(es.points, spiral_oracle()) < 1e-3
    assert es.resolution_bound < 1e-3


def test_essential_spectrum_tail_bound_inflates_threshold():
    el = PsiElement.toeplitz(Z)
    wide = PsiElement(el.td_terms, el.dt_terms, 0, tail_bound=0.01)
    assert essential_spectrum(wide).threshold == pytest.approx(
        essential_spectrum(el).threshold + 0.01)


# -- limit symbol and homotopy ------------------------------------------------------

def test_limit_symbol_zero_limits_gives_scalar():
    el = PsiElement.td(Z, exp_decay(1.0)) + PsiElement.dt(complex_exp(2j), Z) + 0.5
    assert limit_toeplitz_symbol(el).circle_form.coefficients == {0: 0.5}


def test_limit_symbol_of_toeplitz_is_symbol():
    phi = line({0: 0.1, 3: 2.0})
    assert limit_toeplitz_symbol(PsiElement.toeplitz(phi)).circle_form.allclose(phi.circle_form)


def test_limit_symbol_mixed_coefficients():
    phi, psi = line({0: 1.0, 1: 2.0}), line({-1: 1j, 2: 3.0})
    el = PsiElement.td(phi, exp_decay(1.0, 1.0, 0.5)) + PsiElement.dt(
        piecewise_linear([(0, 0.0), (1, 2.0)]), psi)
    lim = limit_toeplitz_symbol(el).circle_form
    oracle = {0: 0.5, 1: 1.0, -1: 2j, 2: 6.0}
    for k, v in oracle.items():
        assert abs(lim.coefficient(k) - v) < 1e-15
    assert set(lim.coefficients) == set(oracle)


def test_homotopy_endpoints():
    el = PsiElement.td(Z, exp_decay(1.0, 1.0, 0.5)) + 0.2
    assert homotopy(el, 1.0) is el
    h0 = homotopy(el, 0.0)
    assert h0.is_pure_toeplitz
    assert limit_toeplitz_symbol(h0).circle_form.allclose(limit_toeplitz_symbol(el).circle_form)


def test_homotopy_shift_law():
    h = homotopy(PsiElement.multiplier(exp_decay(1.0)), math.exp(-1))
    (_, th), = h.td_terms
    t = np.linspace(0, 10, 41)
    assert np.max(np.abs(th(t) - math.exp(-1) * np.exp(-t))) < 1e-15


def test_homotopy_parameter_range():
    with pytest.raises(ParameterError):
        homotopy(PsiElement.identity(), 1.5)


# -- index and invertibility ----------------------------------------------------------

def test_index_of_shift():
    T = PsiElement.toeplitz(Z)
    assert fredholm_index(T, 0) == -1
    assert fredholm_index(T, 2) == 0


def test_index_of_perturbed_square_shift_and_kernel_dimension():
    el = PsiElement.toeplitz(line({2: 1.0})) + 0.1 * PsiElement.multiplier(exp_decay(1.0))
    es = essential_spectrum(el)
    assert es.distance(0) > 0.5
    assert fredholm_index(el, 0) == -2
    # finite-section evidence: exactly two near-zero singular values at N = 512
    s = singular_values(psi_element_matrix(0 - el, TruncationConfig(512)))
    assert np.sum(s < 1e-8) == 2 and s[-3] > 0.5


def test_index_on_essential_spectrum_raises():
    with pytest.raises(NotFredholmError) as info:
        fredholm_index(PsiElement.toeplitz(Z), 1j)
    assert info.value.distance < info.value.threshold


def test_invertibility_examples():
    v = is_invertible(PsiElement.toeplitz(Z), 0)
    assert v.kind == "fredholm_nonzero_index" and v.index == -1
    assert is_invertible(PsiElement.identity(), 2).invertible
    spiral = PsiElement.multiplier(complex_exp(SPIRAL_C))
    v = is_invertible(spiral, 0.5)
    assert v.invertible and v.index == 0
    # the spiral point nearest to 1/2, by dense sampling
    assert abs(v.distance - np.min(np.abs(spiral_oracle() - 0.5))) < 1e-3
    assert is_invertible(spiral, 0).kind == "not_fredholm"


def test_limit_toeplitz_agreement_pure_and_mixed():
    r = corollary4_equivalence(PsiElement.toeplitz(Z), 0.3)
    assert r.agree and r.element.index == -1
    el = PsiElement.td(Z, exp_decay(0.5, 1.0, 0.3)) + PsiElement.dt(complex_exp(1 + 1j), line({-1: 1.0}))
    for lam in (0.0, 2.0, -0.5j):
        assert corollary4_equivalence(el, lam).agree


def test_limit_toeplitz_agreement_rejects_non_fredholm_point():
    with pytest.raises(NotFredholmError):
        corollary4_equivalence(PsiElement.toeplitz(Z), 1.0)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2 ** 32 - 1))
def test_limit_toeplitz_agreement_random(seed):
    rng = np.random.default_rng(seed)
    el = random_element(rng)
    lam = random_fredholm_point(el, rng)
    assert corollary4_equivalence(el, lam).agree


# -- spectrum -----------------------------------------------------------------------

def test_spectrum_of_shift_is_closed_disc():
    rep = spectrum(PsiElement.toeplitz(Z), resolution=96)
    by_index = {c.index: c for c in rep.components}
    assert set(by_index) == {0, -1}
    assert abs(by_index[-1].representative) < 0.2
    assert by_index[0].unbounded and not by_index[-1].unbounded
    filled = rep.filled_points
    assert np.all(np.abs(filled) < 1) and filled.size > 0
    assert not rep.sigma_equals_sigma_e


def test_spectrum_of_identity_is_one_point():
    rep = spectrum(PsiElement.identity(), resolution=64)
    assert np.allclose(rep.essential_points, 1)
    assert [c.index for c in rep.components] == [0]
    assert rep.sigma_equals_sigma_e


def test_spectrum_of_spiral_equals_essential_spectrum():
    rep = spectrum(PsiElement.multiplier(complex_exp(SPIRAL_C)), resolution=128)
    assert rep.sigma_equals_sigma_e
    assert rep.filled_points.size == 0


# -- homotopy trace -----------------------------------------------------------------

def test_homotopy_trace_single_point_matches_index():
    el = PsiElement.toeplitz(Z) + PsiElement.multiplier(exp_decay(1.0, 0.2))
    (e,) = homotopy_trace(el, 0.0, [1.0])
    assert e.index == fredholm_index(el, 0.0) == -1


def test_homotopy_trace_pure_toeplitz_constant():
    trace = homotopy_trace(PsiElement.toeplitz(Z), 0.5, np.linspace(0, 1, 5))
    assert len({(round(e.distance, 12), e.index) for e in trace}) == 1


def test_homotopy_trace_decay_multiplier():
    el = PsiElement.multiplier(exp_decay(1.0))
    trace = homotopy_trace(el, 2.0, np.linspace(0, 1, 11))
    d1 = [e.distance for e in trace if e.w == 1.0][0]
    assert d1 == pytest.approx(1.0)
    assert all(e.distance >= d1 - 1e-12 for e in trace)
    assert all(e.index == 0 for e in trace)
    assert all(e.containment_gap <= 1e-3 for e in trace)


def test_homotopy_trace_requires_fredholm_point():
    with pytest.raises(NotFredholmError):
        homotopy_trace(PsiElement.multiplier(exp_decay(1.0)), 0.5, [1.0])


@settings(max_examples=5, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2 ** 32 - 1))
def test_homotopy_index_constant_random(seed):
    rng = np.random.default_rng(seed)
    el = random_element(rng)
    lam = random_fredholm_point(el, rng)
    trace = homotopy_trace(el, lam, np.linspace(0, 1, 6))
    assert len({e.index for e in trace}) == 1


# -- finite-section corroboration -------------------------------------------------------

def test_finite_section_sigma_min_trends():
    el = PsiElement.toeplitz(Z) + PsiElement.multiplier(exp_decay(1.0, 0.3))
    assert is_invertible(el, 2.0).invertible
    assert is_invertible(el, 0.0).kind == "fredholm_nonzero_index"
    good, bad = [], []
    for N in (128, 256, 512, 1024):
        cfg = TruncationConfig(N)
        good.append(sigma_min(psi_element_matrix(2.0 - el, cfg)))
        bad.append(sigma_min(psi_element_matrix(0.0 - el, cfg)))
    assert min(good) > 0.5
    assert max(bad) < 1e-10


def test_element_arithmetic():
    el = PsiElement.toeplitz(Z)
    assert (2 - el).scalar == 2
    assert len((el + el).td_terms) == 2
    assert (3 * el).td_terms[0][0].circle_form.coefficient(1) == 3
    with pytest.raises(ParameterError):
        PsiElement(tail_bound=-1.0)


def test_consistency_error_carries_diagnostics():
    err = ConsistencyError("x", {"a": 1})
    assert err.diagnostics == {"a": 1} and err.exit_code == 5


def test_norm_bound():
    el = PsiElement.td(line({0: 0.5, 1: 0.5}), constant_multiplier(2.0)) + 1
    assert el.norm_bound() == pytest.approx(3.0)
