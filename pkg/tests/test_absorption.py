import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings, strategies as st

from metrics import alternation, decade_fraction, relative_variation
from sbdimer.absorption import (OpticalParams, absorption_strength, absorption_strengths,
                                band_windows, broaden, interpolate_band, ratio_curve,
                                spin_direction, spin_ratio, stick_spectrum, transition_element,
                                transition_elements)
from sbdimer.errors import DomainError, ProvenanceError
from sbdimer.model import SET_A, SET_B, BasisSpec, ModelParams
from sbdimer.phase_analysis import PhasePoint, husimi_value
from sbdimer.spectrum import EigenSystem, solve

SMALL = BasisSpec(120, 200)


@pytest.fixture(scope="module")
def es_small():
    return solve(SET_B, SMALL)


def one_state(up0, down0):
    coeffs = np.zeros((1, 2, 4))
    coeffs[0, 0, 0], coeffs[0, 1, 0] = up0, down0
    coeffs[0, 0, 1] = math.sqrt(max(0.0, 1 - up0 ** 2 - down0 ** 2))
    return EigenSystem(params=ModelParams(p=1, r=1), basis=BasisSpec(4, 1),
                       energies=np.zeros(1), coeffs=coeffs)


def test_optical_params_validation_and_tag():
    with pytest.raises(DomainError):
        OpticalParams(0, 0)
    with pytest.raises(DomainError):
        OpticalParams(math.nan, 1)
    assert OpticalParams(1, 1).tag == "1_1"
    assert OpticalParams(-0.5, 2).tag == "m0p5_2"
    assert OpticalParams(3, 4).norm2 == 25


def test_spin_direction():
    s = spin_direction(OpticalParams(3, 4))
    assert (s.c_up, s.c_down) == pytest.approx((0.6, 0.8), abs=1e-15)
    s = spin_direction(OpticalParams(0, 2))
    assert (s.c_up, s.c_down) == (0.0, 1.0)
    s = spin_direction(OpticalParams(1, 1))
    assert s.c_up == pytest.approx(1 / math.sqrt(2)) and s.c_down == pytest.approx(1 / math.sqrt(2))


def test_single_state_strengths():
    es = one_state(0.6, 0.0)
    assert absorption_strength(es, 0, OpticalParams(1, 0)) == pytest.approx(0.36, abs=1e-15)
    assert absorption_strength(es, 0, OpticalParams(0, 1)) == 0.0
    assert transition_element(es, 0, OpticalParams(2, 5)) == pytest.approx(1.2)
    es = one_state(0.3, -0.4)
    # 3-4-5 dipoles: (0.6*0.3 - 0.8*0.4)^2
    assert absorption_strength(es, 0, OpticalParams(3, 4)) == pytest.approx((0.18 - 0.32) ** 2, abs=1e-15)


def test_strength_matches_origin_husimi(es_small):
    for o in (OpticalParams(1, 0), OpticalParams(1, 1), OpticalParams(-2, 0.7)):
        s = spin_direction(o)
        q = absorption_strengths(es_small, o)
        for lam in (0, 17, 150, 199):
            assert q[lam] == pytest.approx(husimi_value(es_small, lam, PhasePoint(0, 0), s), abs=1e-12)


def test_elements_and_strength_relation(es_small):
    o = OpticalParams(1, 1)
    t = transition_elements(es_small, o)
    q = absorption_strengths(es_small, o)
    np.testing.assert_allclose(np.abs(t), math.sqrt(2) * np.sqrt(q), atol=1e-14)
    assert transition_element(es_small, 42, o) == pytest.approx(t[42], abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), st.floats(-5, 5),
       st.floats(0.01, 100))
def test_strength_scale_invariant(mu1, mu2, k):
    es = one_state(0.5, -0.7)
    a = absorption_strength(es, 0, OpticalParams(mu1, mu2))
    b = absorption_strength(es, 0, OpticalParams(k * mu1, k * mu2))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
    assert 0 <= a <= 1


def test_sum_rule_full_set():
    es = solve(SET_A, BasisSpec(30, 60))
    for o in (OpticalParams(1, 0), OpticalParams(0, 1), OpticalParams(1, -2)):
        assert absorption_strengths(es, o).sum() == pytest.approx(1.0, abs=1e-12)


def test_stick_spectrum_window(es_small):
    o = OpticalParams(1, 1)
    empty = stick_spectrum(es_small, o, (-1e3, -9e2))
    assert len(empty) == 0 and empty.total == 0 and math.isnan(empty.mean_energy)
    e = es_small.energies
    spec = stick_spectrum(es_small, o, (e[10], e[20]))
    np.testing.assert_array_equal(spec.lams, np.arange(10, 21))
    assert spec.lines[0] == (e[10], spec.strengths[0])
    assert spec.source == es_small.fingerprint


def test_band_windows():
    w = band_windows(SET_B)
    assert w["lower"][1] < w["upper"][0]
    gap = math.sqrt(0.25 + 100.0)
    assert np.mean(w["upper"]) == pytest.approx(gap)
    assert np.mean(w["lower"]) == pytest.approx(-gap)
    w = band_windows(SET_B, halfwidth=0.5)
    assert w["upper"] == pytest.approx((gap - 0.5, gap + 0.5))
    # near the harmonic limit the quantum floor sets the width
    w = band_windows(ModelParams(p=0.0, r=0.2))
    assert w["upper"][1] - w["upper"][0] == pytest.approx(2.0)


def test_spin_ratio_undefined():
    assert spin_ratio(one_state(0.0, 0.5), 0) is None
    assert spin_ratio(one_state(0.5, 0.25), 0) == 0.5
    es = EigenSystem(params=ModelParams(p=1, r=1), basis=BasisSpec(4, 2), energies=np.array([0.0, 1.0]),
                     coeffs=np.stack([one_state(0.0, 0.5).coeffs[0], one_state(0.5, 0.25).coeffs[0]]))
    rc = ratio_curve(es)
    assert list(rc.defined) == [False, True]
    assert math.isnan(rc.ratios[0]) and rc.ratios[1] == 0.5
    assert rc.points == [(1.0, 0.5)]


def test_interpolation_identity_and_exactness(es_small):
    w = (es_small.energies[50], es_small.energies[150])
    base = stick_spectrum(es_small, OpticalParams(1, 0), w)
    rc = ratio_curve(es_small, w)
    same = interpolate_band(base, rc, OpticalParams(1, 0))
    # lines with an undefined ratio differ only by c_up0^2 < 1e-28
    np.testing.assert_allclose(same.strengths, base.strengths, rtol=1e-15, atol=1e-28)
    for o in (OpticalParams(1, 1), OpticalParams(2, -3), OpticalParams(0, 1)):
        direct = stick_spectrum(es_small, o, w)
        interp = interpolate_band(base, rc, o)
        np.testing.assert_allclose(interp.strengths, direct.strengths, atol=1e-12)
        assert interp.optical == o
    down = interpolate_band(base, rc, OpticalParams(0, 3)).strengths
    np.testing.assert_allclose(down, es_small.down[base.lams, 0] ** 2, atol=1e-12)


def test_interpolation_with_undefined_ratio():
    c = np.zeros((2, 2, 4))
    c[0, 1, 0], c[0, 0, 1] = 0.6, 0.8
    c[1, 0, 0], c[1, 1, 0], c[1, 1, 1] = 0.6, 0.0, 0.8
    es = EigenSystem(params=ModelParams(p=1, r=1), basis=BasisSpec(4, 2), energies=np.array([0.0, 1.0]),
                     coeffs=c)
    base = stick_spectrum(es, OpticalParams(1, 0), (-1, 2))
    got = interpolate_band(base, ratio_curve(es), OpticalParams(1, 2)).strengths
    want = stick_spectrum(es, OpticalParams(1, 2), (-1, 2)).strengths
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_interpolation_rejects_mismatch(es_small):
    other = solve(SET_A, BasisSpec(50, 20))
    w = (-100, 100)
    base = stick_spectrum(es_small, OpticalParams(1, 0), w)
    with pytest.raises(ProvenanceError):
        interpolate_band(base, ratio_curve(other, w), OpticalParams(1, 1))
    with pytest.raises(DomainError):
        interpolate_band(stick_spectrum(es_small, OpticalParams(1, 1), w), ratio_curve(es_small, w),
                         OpticalParams(1, 1))
    narrow = ratio_curve(es_small, (es_small.energies[0], es_small.energies[3]))
    with pytest.raises(ProvenanceError):
        interpolate_band(base, narrow, OpticalParams(1, 1))


def test_broaden_area(es_small):
    spec = stick_spectrum(es_small, OpticalParams(1, 1), (-100, 100))
    grid = np.linspace(-40, 40, 40001)
    y = broaden(spec, grid, 0.3)
    assert trapezoid(y, grid) == pytest.approx(spec.total, rel=1e-6)
    with pytest.raises(DomainError):
        broaden(spec, grid, 0.0)


@pytest.mark.slow
def test_band_reversal_and_sum_rule(es_a, es_b):
    for es, m in ((es_a, SET_A), (es_b, SET_B)):
        w = band_windows(m)
        for o, bright, dark in ((OpticalParams(1, 0), "upper", "lower"),
                                (OpticalParams(0, 1), "lower", "upper")):
            hi = stick_spectrum(es, o, w[bright]).total
            lo = stick_spectrum(es, o, w[dark]).total
            assert hi > 0.99 and lo < 0.01
        assert absorption_strengths(es, OpticalParams(1, 0)).sum() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.slow
def test_upper_band_texture(es_a, es_b):
    o = OpticalParams(1, 1)
    a = stick_spectrum(es_a, o, band_windows(SET_A)["upper"]).strengths
    b = stick_spectrum(es_b, o, band_windows(SET_B)["upper"]).strengths
    assert alternation(a) >= 0.8 and decade_fraction(a) >= 0.8
    assert alternation(b) < 0.8 and decade_fraction(b) <= 0.5


@pytest.mark.slow
def test_ratio_smoother_than_amplitudes(es_a, es_b):
    for es, m in ((es_a, SET_A), (es_b, SET_B)):
        w = band_windows(m)["upper"]
        rc = ratio_curve(es, w)
        assert rc.defined.all()
        assert relative_variation(rc.ratios) < 0.1 * relative_variation(es.up[rc.lams, 0] ** 2)
