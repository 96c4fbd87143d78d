import math

import numpy as np
import pytest

from hardypsi.algebra import essential_spectrum, is_invertible, limit_toeplitz_symbol
from hardypsi.composition import (
    QuasiParabolicMap,
    choose_alpha,
    disc_matrix_direct,
    series_element,
    series_expansion,
    tail_bound,
    tail_ratio,
    verify_sigma_equals_sigma_e,
    whisker_oracle,
)
from hardypsi.errors import ParameterError, SymbolClassError
from hardypsi.finite_model import (
    TruncationConfig,
    multiplier_matrix,
    psi_element_matrix,
    singular_values,
)
from hardypsi.symbols import exp_decay, poly_exp_sup

from .helpers import hausdorff

MAPS = {
    "constant_1+i": dict(constant=1 + 1j),
    "constant_2i": dict(constant=2j),
    "one_pole": dict(constant=2j, poles=(0.5,)),
    "two_poles": dict(constant=0.5 + 1.5j, poles=(0.25 + 0.25j, 0.1j)),
}


def qmap(name, **kw):
    return QuasiParabolicMap(epsilon=0.5, **MAPS[name], **kw)


def block_discrepancy(el, q, N=64, block=32):
    cfg = TruncationConfig(N)
    S = psi_element_matrix(el, cfg).entries
    D = disc_matrix_direct(q, cfg).entries
    return np.linalg.norm(S[:block, :block] - D[:block, :block], 2)


# -- map validation ------------------------------------------------------------------

def test_admissibility_check():
    with pytest.raises(SymbolClassError):
        QuasiParabolicMap(1 - 1j)
    with pytest.raises(SymbolClassError):
        # Im psi dips to 0.5 - 1 < 0 at x = 0
        QuasiParabolicMap(0.5j, poles=(1.0,))
    q = QuasiParabolicMap(2j, poles=(0.5,))
    # Im 0.5/(x+i) = -0.5/(x^2+1), lowest at x = 0
    assert q.min_imag() == pytest.approx(1.5, abs=1e-9)


def test_disc_map_stays_in_disc():
    q = qmap("two_poles")
    th = np.linspace(0, 2 * np.pi, 4001)
    assert np.all(np.abs(q.disc_map_samples(th)) <= 1 + 1e-14)


# -- series ------------------------------------------------------------------------------

def test_series_first_term_substitution():
    q = QuasiParabolicMap(2j, epsilon=0.5, alpha=8.0)
    exp = series_expansion(q, n_max=0)
    assert exp.tau.circle_form.coefficients == {0: 6j}
    (phi0, th0), = exp.element.td_terms
    t = np.linspace(0, 3, 31)
    assert np.max(np.abs(th0(t) - np.exp(-8 * t))) < 1e-15
    assert phi0.circle_form.coefficients == {0: 1}
    assert exp.ratio == pytest.approx(0.75)


def test_series_resums_to_single_multiplier():
    q = qmap("constant_1+i")
    el = series_element(q)
    es = essential_spectrum(el)
    finite = np.isfinite(es.whisker_params)
    err = np.abs(es.whisker[finite] - np.exp(1j * (1 + 1j) * es.whisker_params[finite]))
    assert err.max() <= el.tail_bound + 1e-12


def test_series_limit_symbol_is_zero():
    el = series_element(qmap("two_poles"))
    assert all(th.limit_at_infinity == 0 for _, th in el.td_terms)
    assert limit_toeplitz_symbol(el).circle_form.coefficients == {}


def test_alpha_too_small_reports_suggestion():
    with pytest.raises(ParameterError, match="try alpha"):
        series_expansion(QuasiParabolicMap(1 + 1j, alpha=0.5, epsilon=0.5))


def test_choose_alpha_ratio_below_bound():
    for name in MAPS:
        q = qmap(name)
        assert tail_ratio(q, choose_alpha(q)) < 0.9


def test_tail_bound_closed_form():
    # direct partial sum of the majorant against the closed-form remainder
    tau, alpha, n_max = 1.2, 2.0, 10
    direct = sum(tau ** n * poly_exp_sup(n, alpha) for n in range(n_max + 1, 400))
    assert tail_bound(tau, alpha, n_max) >= direct
    assert tail_bound(tau, alpha, n_max) < 1.01 * direct + 1e-300
    assert tail_bound(0.0, 1.0, 0) == 0
    assert math.isinf(tail_bound(2.0, 1.0, 3))


def test_tail_bound_honesty_under_doubling():
    q = qmap("constant_1+i")
    cfg = TruncationConfig(48)
    prev = None
    for n in (3, 6, 12):
        exp = series_expansion(q, n_max=n)
        M = psi_element_matrix(exp.element, cfg).entries
        if prev is not None:
            assert np.linalg.norm(M - prev[0], 2) <= prev[1]
        prev = (M, exp.tail_bound)


def test_alpha_robustness():
    q = qmap("one_pole")
    a0 = choose_alpha(q)
    e1 = series_element(q)
    e2 = series_element(QuasiParabolicMap(2j, poles=(0.5,), epsilon=0.5, alpha=1.4 * a0))
    s1, s2 = essential_spectrum(e1), essential_spectrum(e2)
    tol = s1.resolution_bound + s2.resolution_bound + e1.tail_bound + e2.tail_bound
    assert hausdorff(s1.points, s2.points) <= tol + 1e-3
    for lam in (0.5, -0.3 + 0.2j, 1.5, 0.2j):
        assert is_invertible(e1, lam).kind == is_invertible(e2, lam).kind


# -- direct builder -----------------------------------------------------------------

def test_direct_identity_map():
    q = QuasiParabolicMap(0, check_admissible=False)
    D = disc_matrix_direct(q, TruncationConfig(24)).entries
    assert np.max(np.abs(D - np.eye(24))) < 1e-13


def test_direct_translation_matches_multiplier():
    q = qmap("constant_2i")
    cfg = TruncationConfig(48)
    D = disc_matrix_direct(q, cfg).entries
    M = multiplier_matrix(exp_decay(2.0), cfg).entries
    assert np.max(np.abs(D - M)) < 1e-12


def test_direct_reports_conditioning():
    m = disc_matrix_direct(qmap("two_poles"), TruncationConfig(32))
    assert m.diagnostics["weight_condition"] >= 1
    assert m.diagnostics["alias_bound"] < 1e-8


@pytest.mark.parametrize("name", list(MAPS))
def test_oracle_equivalence(name):
    q = qmap(name)
    el = series_element(q)
    assert block_discrepancy(el, q) <= el.tail_bound + 1e-5


@pytest.mark.parametrize("name", ["constant_1+i", "two_poles"])
def test_boundedness_certificate(name):
    q = qmap(name)
    bound = series_expansion(q).norm_bound
    for N in (32, 64, 128):
        D = disc_matrix_direct(q, TruncationConfig(N))
        assert np.linalg.norm(D.entries, axis=0).max() <= bound
        assert singular_values(D)[0] <= bound


# -- sigma = sigma_e ---------------------------------------------------------------

def test_sigma_equals_sigma_e_spiral():
    rep = verify_sigma_equals_sigma_e(qmap("constant_1+i"), resolution=96)
    assert rep.sigma_equals_sigma_e
    assert all(c.index == 0 for c in rep.components)


def test_sigma_e_contains_one_and_zero():
    for name in MAPS:
        es = essential_spectrum(series_element(qmap(name)))
        tol = es.threshold
        assert es.distance(1.0) <= tol and es.distance(0.0) <= tol


def test_translation_sigma_e_is_unit_interval():
    es = essential_spectrum(series_element(qmap("constant_2i")))
    assert hausdorff(es.points, np.linspace(0, 1, 20001)) < 1e-3


def test_whisker_oracle_endpoints():
    q = qmap("constant_1+i")
    assert whisker_oracle(q, [0.0])[0] == 1
    assert whisker_oracle(q, [np.inf])[0] == 0
