import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hesse_mahler.mpnum import (
    PrecisionContext,
    QuadratureError,
    default_context,
    gauss_legendre,
    integrate_adaptive,
    principal_root,
    roots_cubic_monic,
)


def test_contexts_are_independent():
    lo, hi = PrecisionContext(64), PrecisionContext(512)
    assert lo.mp.prec == 64 and hi.mp.prec == 512
    assert mpmath.mp.prec == 53
    assert abs(hi.mp.pi - mpmath.mpf(mpmath.pi)) < 1e-15


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext(32)
    with pytest.raises(ValueError):
        PrecisionContext(128, 0)


def test_env_override(monkeypatch):
    monkeypatch.setenv("HESSE_MAHLER_PREC", "192")
    assert default_context().working_bits == 192
    monkeypatch.delenv("HESSE_MAHLER_PREC")
    assert default_context().working_bits == 256


def test_gauss_legendre_integrates_polynomials_exactly(prec):
    nodes, weights = gauss_legendre(20, 256)
    mp = prec.mp
    for k in (0, 10, 38, 39):
        exact = mp.mpf(0) if k % 2 else mp.mpf(2) / (k + 1)
        assert abs(mp.fsum(w * x ** k for x, w in zip(nodes, weights)) - exact) < mp.mpf(10) ** -70


def test_adaptive_against_closed_forms(prec):
    mp = prec.mp
    val, err = integrate_adaptive(mp.exp, 0, 1, 1e-60, prec)
    assert abs(val - (mp.e - 1)) < 1e-60
    val, _ = integrate_adaptive(lambda x: mp.sqrt(x), 0, 1, 1e-30, prec)
    assert abs(val - mp.mpf(2) / 3) < 1e-30
    # kink handled by a breakpoint or by bisection
    val, _ = integrate_adaptive(lambda x: abs(x - mp.mpf(1) / 3), 0, 1, 1e-40, prec, breakpoints=[mp.mpf(1) / 3])
    assert abs(val - mp.mpf(5) / 18) < 1e-40


def test_adaptive_matches_mpmath_quad(prec):
    mp = prec.mp
    f = lambda x: mp.log(1 + x * x) * mp.cos(3 * x)
    val, _ = integrate_adaptive(f, 0, 2, 1e-50, prec)
    assert abs(val - mp.quad(f, [0, 1, 2])) < 1e-45


def test_adaptive_reports_failure(prec):
    mp = prec.mp
    with pytest.raises(QuadratureError) as info:
        integrate_adaptive(lambda x: 1 / mp.sqrt(abs(x - mp.mpf(1) / 7)), 0, 1, 1e-60, prec, max_panels=50)
    assert info.value.err_estimate > 0


def test_principal_root(prec):
    mp = prec.mp
    assert abs(principal_root(-8, 3, prec) - (1 + mp.sqrt(3) * 1j)) < 1e-70
    assert abs(principal_root(-4, 2, prec) - 2j) < 1e-70
    with pytest.raises(ValueError):
        principal_root(2, 5, prec)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_cubic_roots_satisfy_vieta(c2, c1, c0):
    prec = PrecisionContext(128)
    mp = prec.mp
    r = roots_cubic_monic(c2, c1, c0, prec)
    scale = 1 + abs(c2) + abs(c1) + abs(c0)
    tol = mp.mpf(10) ** -25 * scale ** 3
    assert abs(r[0] + r[1] + r[2] + c2) < tol
    assert abs(r[0] * r[1] + r[0] * r[2] + r[1] * r[2] - c1) < tol
    assert abs(r[0] * r[1] * r[2] + c0) < tol


def test_cubic_roots_match_numpy(prec):
    coeffs = (2 - 1j, 0.5, 3 + 2j)
    ours = sorted((complex(z) for z in roots_cubic_monic(*coeffs, prec)), key=lambda z: (z.real, z.imag))
    ref = sorted(np.roots([1, *coeffs]), key=lambda z: (z.real, z.imag))
    assert np.allclose(ours, ref, atol=1e-12)
