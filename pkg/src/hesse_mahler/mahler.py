"""Mahler measures m_3(t) of x^3 + y^3 + 1 - k x y and their lattice-sum values.

For fixed x = e^(i theta) Jensen's formula turns the inner integral over y into
sum log+ |y_i| over the three roots of y^3 - k x y + x^3 + 1.  The roots at
omega x are omega^-1 times the roots at x (omega a cube root of unity), so the
integrand has period 2 pi / 3 and only one third of the circle is integrated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .binforms import QuadForm, in_Fprime
from .lser import from_theta, lvalue2
from .mpnum import DEFAULT, PrecisionContext, integrate_adaptive, principal_root, roots_cubic_monic
from .qseries import t_eval
from .thetalat import chi3_theta

__all__ = [
    "Region",
    "DomainError",
    "MahlerInput",
    "VillegasSumSpec",
    "in_KQ",
    "deltoid_discriminant",
    "m3",
    "m3_with_error",
    "villegas_spec",
    "villegas_rhs",
    "villegas_direct_sum",
]


class DomainError(ValueError):
    pass


class Region(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def deltoid_discriminant(k, prec: PrecisionContext = DEFAULT):
    """27 - 18|k|^2 + 8 Re(k^3) - |k|^4: positive exactly inside the deltoid.

    The region of k for which x^3 + y^3 + 1 - kxy vanishes on the torus is the
    set of sums of three unit complex numbers with product 1, i.e. traces of
    SU(3).  This polynomial is the discriminant of its characteristic
    polynomial, which vanishes exactly on the boundary curve.
    """
    mp = prec.mp
    k = mp.mpc(k)
    r2 = abs(k) ** 2
    return 27 - 18 * r2 + 8 * (k ** 3).real - r2 * r2


def in_KQ(k, prec: PrecisionContext = DEFAULT, tol=None) -> Region:
    mp = prec.mp
    k = mp.mpc(k)
    tol = mp.ldexp(1, -prec.working_bits // 2) if tol is None else mp.mpf(tol)
    if k.imag == 0:
        x = k.real
        if -1 + tol < x < 3 - tol:
            return Region.INSIDE
        if abs(x + 1) <= tol or abs(x - 3) <= tol:
            return Region.BOUNDARY
        return Region.OUTSIDE
    d = deltoid_discriminant(k, prec)
    if abs(d) <= tol * (1 + abs(k) ** 4):
        return Region.BOUNDARY
    return Region.INSIDE if d > 0 else Region.OUTSIDE


@dataclass(frozen=True)
class MahlerInput:
    t: object
    k: object

    @classmethod
    def from_t(cls, t, prec: PrecisionContext = DEFAULT) -> "MahlerInput":
        t = prec.mp.mpc(t)
        return cls(t, principal_root(t, 3, prec))


def _logplus_sum(k, theta, prec):
    mp = prec.mp
    x = mp.expj(theta)
    roots = roots_cubic_monic(0, -k * x, x ** 3 + 1, prec)
    return mp.fsum(mp.ln(abs(r)) for r in roots if abs(r) > 1)


def m3(t, prec: PrecisionContext = DEFAULT, tol=None, k=None, check_domain: bool = True):
    """3 m(x^3 + y^3 + 1 - k x y) with k the principal cube root of t.

    ``k`` may be given explicitly to use another cube root.
    """
    return m3_with_error(t, prec, tol, k, check_domain)[0]


def m3_with_error(t, prec: PrecisionContext = DEFAULT, tol=None, k=None, check_domain: bool = True):
    """(value, quadrature error estimate) of :func:`m3`."""
    mp = prec.mp
    tol = mp.mpf(1e-25 if tol is None else tol)
    if k is None:
        k = principal_root(t, 3, prec)
    k = mp.mpc(k)
    if check_domain and in_KQ(k, prec) is Region.INSIDE:
        raise DomainError(f"k = {mp.nstr(k, 10)} lies inside the deltoid; Jensen evaluation is not valid")
    period = 2 * mp.pi / 3
    factor = 9 / (2 * mp.pi)
    res = integrate_adaptive(lambda th: _logplus_sum(k, th, prec), 0, period, tol / factor, prec,
                             initial_panels=6)
    return factor * res.value, factor * res.err_estimate


@dataclass(frozen=True)
class VillegasSumSpec:
    """The lattice sum attached to a CM point [a, b, c].

    value = constant * sqrt(radicand) / pi^2 * sum' chi_-3(n) (l m + s n) / Qr(m, n)^2

    where Qr = (qa, qb, qc) is 9c m^2 - 3b mn + a n^2 and (l, s) = (-3b, 2a),
    both divided by their content; ``constant`` absorbs the contents.
    """

    form: QuadForm
    qform: tuple
    weights: tuple
    constant: Fraction
    radicand: int

    @property
    def rational_constant(self):
        """constant * sqrt(radicand) when it is rational, else None."""
        r = isqrt(self.radicand)
        return self.constant * r if r * r == self.radicand else None

    def prefactor(self, prec: PrecisionContext = DEFAULT):
        mp = prec.mp
        return mp.mpf(self.constant.numerator) / self.constant.denominator * mp.sqrt(self.radicand) / mp.pi ** 2

    def theta(self):
        l, s = self.weights
        qa, qb, qc = self.qform
        return chi3_theta(1, l, s, qa, qb, qc, f"villegas{self.form}")


def villegas_spec(form: QuadForm) -> VillegasSumSpec:
    a, b, c = form.a, form.b, form.c
    qa, qb, qc = 9 * c, -3 * b, a
    l, s = -3 * b, 2 * a
    g = gcd(gcd(qa, qb), qc)
    h = gcd(l, s)
    qa, qb, qc, l, s = qa // g, qb // g, qc // g, l // h, s // h
    if l < 0:
        # m -> -m
        l, qb = -l, -qb
    # 81 sqrt(3) sqrt|D| / (16 pi^2) * (h / g^2)
    return VillegasSumSpec(form, (qa, qb, qc), (l, s), Fraction(81 * h, 16 * g * g), -3 * form.disc)


def villegas_rhs(form: QuadForm, prec: PrecisionContext = DEFAULT, check_hypotheses: bool = True):
    """The lattice-sum value, evaluated as a theta-series L-value at s = 2."""
    if check_hypotheses:
        tau = form.tau(prec)
        if not in_Fprime(tau, prec):
            raise DomainError(f"{form} is not in F'")
        k = principal_root(t_eval(tau, prec), 3, prec)
        if in_KQ(k, prec) is Region.INSIDE:
            raise DomainError(f"cube root of t({form}) lies inside the deltoid")
    spec = villegas_spec(form)
    L = lvalue2(from_theta(spec.theta(), prec), prec)
    return spec.prefactor(prec) * L.value


def villegas_direct_sum(form: QuadForm, R: int = 2000) -> float:
    """Truncated double sum over |m|, |n| <= R in double precision."""
    spec = villegas_spec(form)
    qa, qb, qc = spec.qform
    l, s = spec.weights
    n = np.arange(-R, R + 1, dtype=np.float64)
    chi = np.zeros_like(n)
    r = np.mod(np.arange(-R, R + 1), 3)
    chi[r == 1] = 1.0
    chi[r == 2] = -1.0
    total = 0.0
    for m in range(-R, R + 1):
        Q = qa * m * m + qb * m * n + qc * n * n
        Q[chi == 0] = 1.0
        total += float(np.sum(chi * (l * m + s * n) / (Q * Q)))
    return float(spec.constant) * np.sqrt(spec.radicand) / np.pi ** 2 * total
