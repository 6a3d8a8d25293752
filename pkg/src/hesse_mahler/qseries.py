"""Truncated q-expansions, Dedekind eta quotients, the Hauptmodul t and j."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd

import numpy as np

from .mpnum import DEFAULT, PrecisionContext

__all__ = [
    "QExpansion",
    "EtaQuotient",
    "PoleError",
    "PrecisionInsufficient",
    "eta_qexp",
    "t_qexp",
    "eta_eval",
    "eta_imaginary",
    "eta_quotient_coeffs",
    "t_eval",
    "j_eval",
    "j_from_t",
    "class_polynomial",
    "verify_t_value",
    "TValueCheck",
]


class PoleError(ZeroDivisionError):
    pass


class PrecisionInsufficient(ArithmeticError):
    pass


class QExpansion:
    """sum_{n < M} c_n q^(lead_exp + n) + O(q^(lead_exp + M)), exact rational coefficients."""

    __slots__ = ("lead_exp", "coeffs")

    def __init__(self, lead_exp, coeffs):
        self.lead_exp = Fraction(lead_exp)
        self.coeffs = tuple(Fraction(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a q-expansion needs at least one known coefficient")

    @property
    def M(self) -> int:
        return len(self.coeffs)

    @property
    def order(self) -> Fraction:
        """Exponent of the first unknown term."""
        return self.lead_exp + self.M

    def __repr__(self):
        terms = [f"{c}*q^({self.lead_exp + n})" for n, c in enumerate(self.coeffs[:6]) if c]
        return f"QExpansion({' + '.join(terms) or '0'} + O(q^({self.order})))"

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return self.lead_exp == other.lead_exp and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.lead_exp, self.coeffs))

    def coeff(self, exponent) -> Fraction:
        """Coefficient of q^exponent; raises if beyond the truncation."""
        n = Fraction(exponent) - self.lead_exp
        if n >= self.M:
            raise IndexError(f"q^{exponent} lies beyond the truncation O(q^{self.order})")
        if n < 0 or n.denominator != 1:
            return Fraction(0)
        return self.coeffs[int(n)]

    def terms(self):
        """(exponent, coefficient) pairs of the nonzero known terms."""
        return [(self.lead_exp + n, c) for n, c in enumerate(self.coeffs) if c]

    def valuation(self):
        for n, c in enumerate(self.coeffs):
            if c:
                return self.lead_exp + n
        return None

    def normalized(self) -> "QExpansion":
        """Shift the lead exponent onto the first nonzero coefficient."""
        for n, c in enumerate(self.coeffs):
            if c:
                return QExpansion(self.lead_exp + n, self.coeffs[n:])
        return self

    def truncate(self, order) -> "QExpansion":
        """Keep the terms with exponent below ``order``."""
        keep = int(Fraction(order) - self.lead_exp)
        if keep > self.M:
            raise ValueError("cannot extend a truncated series")
        return QExpansion(self.lead_exp, self.coeffs[:max(keep, 1)])

    def _aligned(self, other):
        shift = other.lead_exp - self.lead_exp
        if shift.denominator != 1:
            raise ValueError("exponents differ by a non-integer")
        lead = min(self.lead_exp, other.lead_exp)
        order = min(self.order, other.order)
        n = int(order - lead)
        a = [self.coeff(lead + k) if lead + k < self.order else 0 for k in range(n)]
        b = [other.coeff(lead + k) if lead + k < other.order else 0 for k in range(n)]
        return lead, a, b

    def __add__(self, other):
        if not isinstance(other, QExpansion):
            # a constant is known exactly, so it does not truncate
            n = -self.lead_exp
            if n.denominator != 1 or n >= self.M:
                raise ValueError("constant term lies outside the known range")
            if n < 0:
                return QExpansion(0, [other] + [0] * int(-n - 1) + list(self.coeffs))
            coeffs = list(self.coeffs)
            coeffs[int(n)] += Fraction(other)
            return QExpansion(self.lead_exp, coeffs)
        lead, a, b = self._aligned(other)
        return QExpansion(lead, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return QExpansion(self.lead_exp, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            other = Fraction(other)
            return QExpansion(self.lead_exp, [other * c for c in self.coeffs])
        # the relative precision of a product is the smaller of the two
        va, vb = self.valuation(), other.valuation()
        if va is None or vb is None:
            return QExpansion(self.lead_exp + other.lead_exp, [0] * min(self.M, other.M))
        a, b = self.normalized(), other.normalized()
        n = min(a.M, b.M)
        out = [Fraction(0)] * n
        for i in range(n):
            if a.coeffs[i]:
                for j in range(n - i):
                    out[i + j] += a.coeffs[i] * b.coeffs[j]
        return QExpansion(va + vb, out)

    __rmul__ = __mul__

    def inverse(self) -> "QExpansion":
        a = self.normalized()
        c0 = a.coeffs[0]
        if not c0:
            raise ZeroDivisionError("series has no known nonzero coefficient")
        out = [1 / c0]
        for n in range(1, a.M):
            s = sum(a.coeffs[k] * out[n - k] for k in range(1, n + 1))
            out.append(-s / c0)
        return QExpansion(-a.lead_exp, out)

    def __truediv__(self, other):
        if not isinstance(other, QExpansion):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QExpansion(0, [1] * 1 + [0] * (self.normalized().M - 1))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def dilate(self, d: int) -> "QExpansion":
        """Substitute q -> q^d."""
        if d < 1:
            raise ValueError("dilation factor must be a positive integer")
        out = [Fraction(0)] * (d * self.M)
        for n, c in enumerate(self.coeffs):
            out[d * n] = c
        return QExpansion(d * self.lead_exp, out)

    def evaluate(self, q_lead, q, prec: PrecisionContext = DEFAULT):
        """Sum numerically given q^lead_exp and q."""
        mp = prec.mp
        s = mp.mpc(0)
        for c in reversed(self.coeffs):
            s = s * q + mp.mpf(c.numerator) / c.denominator
        return q_lead * s


def _pentagonal(M: int):
    """Exponents and signs of prod (1 - q^n) below q^M."""
    out = [(0, 1)]
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 >= M:
            break
        s = -1 if k % 2 else 1
        out.append((e1, s))
        e2 = k * (3 * k + 1) // 2
        if e2 < M:
            out.append((e2, s))
        k += 1
    return out


def eta_qexp(M: int) -> QExpansion:
    """q^(1/24) prod (1 - q^n) through M coefficients."""
    if M < 1:
        raise ValueError("M must be >= 1")
    c = [0] * M
    for e, s in _pentagonal(M):
        c[e] = s
    return QExpansion(Fraction(1, 24), c)


_PRIME = 33554393  # largest prime below 2^25: products and short dot products fit in int64


def _sparse_eta(d: int, M: int):
    """Exponents (>= 1) and signs of prod (1 - q^(d n)) below q^M."""
    pent = _pentagonal(-(-M // d))[1:]
    idx = np.array([d * e for e, _ in pent], dtype=np.int64)
    vals = np.array([s for _, s in pent], dtype=np.int64)
    keep = idx < M
    return idx[keep], vals[keep]


def eta_quotient_coeffs(factors, M: int, modulus: int | None = None):
    """Coefficients of prod_d prod_n (1 - q^(d n))^(r_d) through q^(M-1).

    ``factors`` is a sequence of (d, r).  Each eta factor is a sparse
    pentagonal series, so multiplication is a handful of shifted adds and
    division is a short recurrence.  With ``modulus`` (a prime below 2^25) the
    arithmetic runs in int64 and the symmetric residues are returned, which is
    exact whenever the true coefficients are below modulus/2 in size.
    """
    exact = modulus is None
    c = np.zeros(M, dtype=object if exact else np.int64)
    c[0] = 1
    for d, r in factors:
        idx, vals = _sparse_eta(d, M)
        if exact:
            vals = vals.astype(object)
        for _ in range(abs(r)):
            if r > 0:
                new = c.copy()
                for i, v in zip(idx, vals):
                    new[i:] += v * c[:M - i]
                c = new
            else:
                for n in range(1, M):
                    k = np.searchsorted(idx, n, side="right")
                    if k:
                        c[n] -= np.dot(vals[:k], c[n - idx[:k]])
                        if not exact:
                            c[n] %= modulus
            if not exact:
                c %= modulus
    if not exact:
        c = np.where(c > modulus // 2, c - modulus, c)
    return c


@dataclass(frozen=True)
class EtaQuotient:
    """prod eta(d tau)^r over ``factors`` = ((d, r), ...)."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple((int(d), int(r)) for d, r in self.factors))
        if any(d < 1 for d, _ in self.factors):
            raise ValueError("eta scales must be positive")

    @property
    def lead_exp(self) -> Fraction:
        return Fraction(sum(d * r for d, r in self.factors), 24)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.factors), 2)

    @property
    def step(self) -> int:
        return reduce(gcd, (d for d, _ in self.factors))

    def qexp(self, M: int) -> QExpansion:
        """Through M integer steps past the lead exponent."""
        return QExpansion(self.lead_exp, [int(x) for x in eta_quotient_coeffs(self.factors, M)])

    def coefficients(self, n_max: int, modulus: int = _PRIME):
        """Integer a_n with f = sum a_n q^n for n <= n_max (integral lead exponent).

        Computed in the variable q^g, g the gcd of the scales, modulo a prime.
        """
        lead = self.lead_exp
        if lead.denominator != 1:
            raise ValueError("needs an integral lead exponent")
        g = self.step
        scaled = [(d // g, r) for d, r in self.factors]
        m = (n_max - int(lead)) // g + 1
        base = eta_quotient_coeffs(scaled, max(m, 1), modulus)
        out = np.zeros(n_max + 1, dtype=np.int64)
        idx = int(lead) + g * np.arange(len(base))
        keep = idx <= n_max
        out[idx[keep]] = base[keep]
        return out

    def evaluate(self, tau, prec: PrecisionContext = DEFAULT):
        out = prec.mp.mpc(1)
        for d, r in self.factors:
            out *= eta_eval(d * tau, prec) ** r
        return out

    def evaluate_imaginary(self, y, prec: PrecisionContext = DEFAULT):
        """Value at tau = i y, valid for all y > 0 (real for real coefficients)."""
        out = prec.mp.mpf(1)
        for d, r in self.factors:
            out *= eta_imaginary(d * y, prec) ** r
        return out


def t_qexp(M: int) -> QExpansion:
    """27 + (eta(tau)/eta(3 tau))^12 through M coefficients."""
    ratio = QExpansion(-1, [int(x) for x in eta_quotient_coeffs(((1, 12), (3, -12)), M)])
    return ratio + 27


def _n_terms(y, prec: PrecisionContext) -> int:
    mp = prec.mp
    eps_log = prec.working_bits * mp.ln(2) + prec.guard_bits
    return int(mp.ceil(eps_log / (2 * mp.pi * y))) + 2


def _eta_series(tau, prec: PrecisionContext):
    mp = prec.mp
    tau = mp.mpc(tau)
    y = tau.imag
    if y <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    q = mp.expjpi(2 * tau)
    s = mp.mpc(1)
    M = _n_terms(y, prec)
    for e, sign in _pentagonal(M)[1:]:
        s += sign * q ** e
    return mp.expjpi(tau / 12) * s


def eta_imaginary(y, prec: PrecisionContext = DEFAULT):
    """eta(i y) for real y > 0, through eta(i y) = y^(-1/2) eta(i / y) when y < 1."""
    mp = prec.mp
    y = mp.mpf(y)
    if y <= 0:
        raise ValueError("y must be positive")
    if y < 1:
        return _eta_series(mp.mpc(0, 1 / y), prec).real / mp.sqrt(y)
    return _eta_series(mp.mpc(0, y), prec).real


def eta_eval(tau, prec: PrecisionContext = DEFAULT):
    """Dedekind eta at tau; purely imaginary arguments below i use the inversion."""
    mp = prec.mp
    tau = mp.mpc(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    if tau.real == 0 and tau.imag < 1:
        return mp.mpc(eta_imaginary(tau.imag, prec))
    return _eta_series(tau, prec)


def t_eval(tau, prec: PrecisionContext = DEFAULT):
    """27 + (eta(tau)/eta(3 tau))^12; ``tau`` may be a number, QuadForm or CMPoint."""
    if hasattr(tau, "form"):
        tau = tau.form
    if hasattr(tau, "disc"):
        tau = tau.tau(prec)
    mp = prec.mp
    tau = mp.mpc(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    return 27 + (eta_eval(tau, prec) / eta_eval(3 * tau, prec)) ** 12


def j_from_t(t, prec: PrecisionContext = DEFAULT):
    mp = prec.mp
    t = mp.mpc(t)
    if t == 27:
        raise PoleError("j has a pole at t = 27")
    return t * (t + 216) ** 3 / (t - 27) ** 3


def _reduce_sl2(tau, mp):
    """Move tau into the closed fundamental domain of SL(2, Z)."""
    for _ in range(10000):
        tau = mp.mpc(tau.real - mp.nint(tau.real), tau.imag)
        if abs(tau) < 1:
            tau = -1 / tau
        else:
            return tau
    raise ArithmeticError("SL(2,Z) reduction did not terminate")


def j_eval(tau, prec: PrecisionContext = DEFAULT):
    mp = prec.mp
    tau = _reduce_sl2(mp.mpc(tau), mp)
    return j_from_t(t_eval(tau, prec), prec)


def class_polynomial(D: int, prec: PrecisionContext | None = None) -> list:
    """Integer coefficients of prod (X - j(tau_i)), highest degree first."""
    from .binforms import cm_points_fundamental

    forms = cm_points_fundamental(D)
    if prec is None:
        # roughly log2 of the largest coefficient plus margin
        import math
        bits = int(math.pi * math.sqrt(-D) / math.log(2)) * len(forms) + 128
        prec = PrecisionContext(max(bits, 128))
    mp = prec.mp
    poly = [mp.mpc(1)]
    for f in forms:
        j = j_eval(f.tau(prec), prec)
        poly = [a - j * b for a, b in zip(poly + [0], [0] + poly)]
    out = []
    for c in poly:
        n = int(mp.nint(c.real))
        resid = abs(c - n)
        if resid >= 0.25:
            raise PrecisionInsufficient(
                f"class polynomial of {D}: coefficient off an integer by {mp.nstr(resid, 3)}")
        out.append(n)
    return out


@dataclass(frozen=True)
class TValueCheck:
    form: object
    computed: object
    claimed: object
    residual: object
    j_residual: object
    passed: bool


def verify_t_value(point, claimed, digits: int = 60, prec: PrecisionContext | None = None) -> TValueCheck:
    """Compare t(tau0) with a claimed exact value and check j(claimed) is a singular modulus."""
    from .binforms import QuadForm
    from .radical import RadicalExpr

    form = point.form if hasattr(point, "form") else point
    if not isinstance(form, QuadForm):
        raise TypeError("point must be a QuadForm or CMPoint")
    if prec is None or prec.working_bits < int(digits * 3.33) + 40:
        prec = PrecisionContext(int(digits * 3.33) + 64 + int(4 * (-form.disc) ** 0.5))
    mp = prec.mp
    if isinstance(claimed, str):
        claimed = RadicalExpr(claimed)
    value = claimed.evaluate(prec) if hasattr(claimed, "evaluate") else mp.mpc(claimed)
    computed = t_eval(form, prec)
    tol = mp.mpf(10) ** (-digits) * max(1, abs(computed))
    residual = abs(computed - value)
    j = j_from_t(value, prec)
    roots_poly = class_polynomial(form.disc, prec)
    # smallest |H_D(j)| relative to the size of its terms
    h = mp.mpc(0)
    scale = mp.mpf(0)
    for c in roots_poly:
        h = h * j + c
        scale = scale * abs(j) + abs(c)
    j_residual = abs(h) / scale
    return TValueCheck(form, computed, value, residual, j_residual,
                       bool(residual < tol and j_residual < tol))
