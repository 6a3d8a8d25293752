from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from hesse_mahler.binforms import QuadForm
from hesse_mahler.qseries import (
    EtaQuotient,
    PoleError,
    QExpansion,
    class_polynomial,
    eta_eval,
    eta_imaginary,
    eta_qexp,
    eta_quotient_coeffs,
    j_eval,
    j_from_t,
    t_eval,
    t_qexp,
    verify_t_value,
)


def test_t_prefix():
    t = t_qexp(8)
    assert [t.coeff(e) for e in range(-1, 5)] == [1, 15, 54, -76, -243, 1188]


def test_eta_prefix_is_pentagonal():
    e = eta_qexp(30)
    assert e.lead_exp == Fraction(1, 24)
    nonzero = {int(k - e.lead_exp): int(c) for k, c in e.terms() if c}
    assert nonzero == {0: 1, 1: -1, 2: -1, 5: 1, 7: 1, 12: -1, 15: -1, 22: 1, 26: 1}


@pytest.mark.parametrize("tau", [0.1 + 1.2j, -0.4 + 0.6j, 0.3j, 0.05j, 0.5 + 0.05j])
def test_eta_against_mpmath(tau, prec):
    mpmath.mp.prec = 256
    try:
        ref = mpmath.eta(mpmath.mpc(tau))
    finally:
        mpmath.mp.prec = 53
    assert abs(eta_eval(tau, prec) - ref) < 1e-60 * max(1, abs(ref))


def test_eta_imaginary_inversion_is_consistent(prec):
    mp = prec.mp
    for y in (mp.mpf("0.02"), mp.mpf("0.7"), mp.mpf(3)):
        assert abs(eta_imaginary(y, prec) - mp.sqrt(1 / y) * eta_imaginary(1 / y, prec)) < 1e-60


def test_t_at_known_points(prec):
    assert abs(t_eval(QuadForm(1, -1, 1), prec) + 216) < 1e-60
    assert abs(t_eval(QuadForm(3, 0, 1), prec) - 54) < 1e-60


def test_j_at_classical_points(prec):
    mp = prec.mp
    assert abs(j_eval(mp.mpc(0, 1), prec) - 1728) < 1e-55
    assert abs(j_eval(mp.expjpi(mp.mpf(2) / 3), prec)) < 1e-55
    assert abs(j_eval(mp.mpc(0, mp.sqrt(3)), prec) - 54000) < 1e-55
    # invariant under SL2(Z)
    tau = mp.mpc("0.2", "0.9")
    assert abs(j_eval(-1 / tau, prec) - j_eval(tau, prec)) < 1e-50 * abs(j_eval(tau, prec))


def test_j_from_t_pole(prec):
    with pytest.raises(PoleError):
        j_from_t(27, prec)


@pytest.mark.parametrize("D, expected", [
    (-12, [1, -54000]),
    (-75, [1, 654403829760, 5209253090426880]),
    (-108, [1, -151013228706000, 224179462188000000, -(2**12 * 3**3 * 5**9 * 11**6 * 17**3)]),
    (-243, [1, 1855762905734664192000, -(2**30 * 3**3 * 5**6 * 7 * 29 * 1097 * 37181),
            2**45 * 3 * 5**9 * 11**3 * 23**3]),
    (-4, [1, -1728]),
    (-3, [1, 0]),
])
def test_class_polynomials(D, expected):
    assert class_polynomial(D) == expected


def test_verify_t_value_accepts_and_rejects():
    assert verify_t_value(QuadForm(3, -3, 7), "-4320-1944*sqrt(5)").passed
    assert not verify_t_value(QuadForm(3, -3, 7), "-4320+1944*sqrt(5)").passed


def test_eta_quotient_metadata():
    g144 = EtaQuotient(((12, 12), (6, -4), (24, -4)))
    assert g144.weight == 2
    assert g144.lead_exp == 1


def test_eta_quotient_modular_coefficients_match_exact():
    factors = ((12, 12), (6, -4), (24, -4))
    exact = eta_quotient_coeffs(factors, 200)
    modular = EtaQuotient(factors).coefficients(200)
    lead = EtaQuotient(factors).lead_exp
    for n in range(1, 200):
        assert int(modular[n]) == exact[n - int(lead)]


def test_eta_quotient_evaluation_matches_series(prec):
    eq = EtaQuotient(((3, 2), (9, 2)))
    mp = prec.mp
    tau = mp.mpc("0.1", "0.4")
    ref = eta_eval(3 * tau, prec) ** 2 * eta_eval(9 * tau, prec) ** 2
    assert abs(eq.evaluate(tau, prec) - ref) < 1e-60


small = st.lists(st.integers(-20, 20), min_size=6, max_size=6)


def _agree(X, Y, start, stop):
    return all(X.coeff(start + n) == Y.coeff(start + n) for n in range(int(stop - start)))


@given(small, small)
def test_series_ring_laws(a, b):
    A = QExpansion(Fraction(1, 3), a)
    B = QExpansion(0, [1] + b[1:])
    quotient = (A * B) / B
    assert _agree(quotient, A, A.lead_exp, min(quotient.order, A.order))
    assert A * B == B * A
    C = QExpansion(1, a)
    diff = (C + B) - B
    assert _agree(diff, C, 0, min(diff.order, C.order))


def test_dilate_and_pow():
    e = eta_qexp(10)
    assert e.dilate(3).lead_exp == Fraction(1, 8)
    sq = e ** 2
    assert sq.coeff(Fraction(1, 12)) == 1 and sq.coeff(Fraction(1, 12) + 1) == -2


def test_coefficients_beyond_truncation_are_unknown():
    with pytest.raises(IndexError):
        t_qexp(3).coeff(10)
