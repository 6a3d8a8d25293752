"""Shifted theta series with a linear harmonic polynomial on rank-2 even lattices.

For an even positive definite Gram matrix A, a linear form P(v) = p.v and a
shift Y in the dual lattice,

    Theta_Y(tau) = sum_{X in Z^2} P(X + Y) q^(Q(X + Y)),   Q(v) = v^T A v / 2.

A :class:`ShiftedHarmonicTheta` is a weighted sum of these over several shifts.
Near the real axis the series is evaluated through Poisson summation:

    Theta_Y(tau) = -tau^-2 det(A)^-1/2 sum_w (p^T A^-1 w) sin(2 pi w.Y) e(-k_w / (N tau)),

with k_w = w^T (N A^-1) w / 2 an integer, N the lattice level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor, ceil, isqrt

from sympy import kronecker_symbol

from .mpnum import DEFAULT, PrecisionContext
from .qseries import QExpansion

__all__ = [
    "EvenLattice",
    "ShiftedHarmonicTheta",
    "ThetaEvaluator",
    "evaluator",
    "canonical_name",
    "TransformCheckResult",
    "TABLE1",
    "lattice_level",
    "chi3_theta",
    "table1_form",
    "f108_newform",
    "theta_qexp",
    "theta_eval_imaginary",
    "gamma0_transform_check",
    "aggregate_invariance_check",
    "gamma0_samples",
]


def _mat(A):
    return tuple(tuple(Fraction(x) for x in row) for row in A)


def _det(A):
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def _inv(A):
    d = _det(A)
    return ((A[1][1] / d, -A[0][1] / d), (-A[1][0] / d, A[0][0] / d))


def _is_even_integral(B) -> bool:
    return (all(x.denominator == 1 for row in B for x in row)
            and B[0][0] % 2 == 0 and B[1][1] % 2 == 0 and B[0][1] == B[1][0])


def lattice_level(A) -> int:
    """Smallest N > 0 with N A^-1 even."""
    A = _mat(A)
    if not _is_even_integral(A):
        raise ValueError("Gram matrix must be symmetric, integral, with even diagonal")
    d = _det(A)
    if A[0][0] <= 0 or d <= 0:
        raise ValueError("Gram matrix must be positive definite")
    Ainv = _inv(A)
    for N in range(1, 2 * int(d) + 1):
        if _is_even_integral(tuple(tuple(N * x for x in row) for row in Ainv)):
            return N
    raise AssertionError("level search exceeded 2 det A")


@dataclass(frozen=True)
class EvenLattice:
    gram: tuple

    def __post_init__(self):
        object.__setattr__(self, "gram", _mat(self.gram))
        lattice_level(self.gram)

    @property
    def level(self) -> int:
        return lattice_level(self.gram)

    @property
    def det(self) -> Fraction:
        return _det(self.gram)

    def Q(self, v) -> Fraction:
        A = self.gram
        return (A[0][0] * v[0] * v[0] + 2 * A[0][1] * v[0] * v[1] + A[1][1] * v[1] * v[1]) / 2

    def in_dual(self, Y) -> bool:
        A = self.gram
        return all((A[i][0] * Y[0] + A[i][1] * Y[1]).denominator == 1 for i in range(2))


def _points(lattice: EvenLattice, Y, bound):
    """Vectors v in Y + Z^2 with Q(v) <= bound, with Q(v)."""
    A = lattice.gram
    a11, a12 = A[0][0], A[0][1]
    d = _det(A)
    # Q(v) = a11/2 (v1 + a12 v2 / a11)^2 + d / (2 a11) v2^2
    r2 = Fraction(2 * bound) * a11 / d
    v2_lo = ceil(-Fraction(isqrt(int(r2) + 1) + 1) - Y[1])
    v2_hi = floor(Fraction(isqrt(int(r2) + 1) + 1) - Y[1])
    out = []
    for x2 in range(v2_lo, v2_hi + 1):
        v2 = x2 + Y[1]
        rest = 2 * bound - d * v2 * v2 / a11
        if rest < 0:
            continue
        centre = -a12 * v2 / a11
        half = isqrt(int(rest / a11) + 1) + 1
        for x1 in range(floor(centre - half - Y[0]), ceil(centre + half - Y[0]) + 1):
            v = (x1 + Y[0], v2)
            q = lattice.Q(v)
            if q <= bound:
                out.append((v, q))
    return out


@dataclass(frozen=True)
class ShiftedHarmonicTheta:
    """scale * sum_j weight_j * Theta_{Y_j} for the linear form ``p``."""

    lattice: EvenLattice
    p: tuple
    terms: tuple
    scale: Fraction = Fraction(1)
    name: str = field(default="", compare=False)
    form_level: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(Fraction(x) for x in self.p))
        object.__setattr__(self, "terms", tuple(
            (tuple(Fraction(x) for x in Y), Fraction(w)) for Y, w in self.terms))
        object.__setattr__(self, "scale", Fraction(self.scale))
        for Y, _ in self.terms:
            if not self.lattice.in_dual(Y):
                raise ValueError(f"shift {Y} is not in the dual lattice")

    @property
    def level(self) -> int:
        """Level of the modular form (may be smaller than the lattice level)."""
        return self.form_level or self.lattice.level

    def P(self, v) -> Fraction:
        return self.p[0] * v[0] + self.p[1] * v[1]

    def single(self, Y, weight=1) -> "ShiftedHarmonicTheta":
        return ShiftedHarmonicTheta(self.lattice, self.p, ((Y, weight),), 1, f"{self.name}[Y={Y}]")

    def __str__(self):
        return self.name or "ShiftedHarmonicTheta"


@lru_cache(maxsize=256)
def _theta_terms(theta: ShiftedHarmonicTheta, bound: Fraction):
    coeffs = {}
    for Y, w in theta.terms:
        for v, q in _points(theta.lattice, Y, bound):
            c = theta.scale * w * theta.P(v)
            if c:
                coeffs[q] = coeffs.get(q, 0) + c
    return coeffs


def theta_qexp(theta: ShiftedHarmonicTheta, M) -> QExpansion:
    """q-expansion containing every exponent <= M, by direct enumeration."""
    M = Fraction(M)
    coeffs = _theta_terms(theta, M)
    lead = theta.lattice.Q(theta.terms[0][0]) % 1
    for e in coeffs:
        if (e - lead).denominator != 1:
            raise ValueError("exponents are not congruent modulo 1; no single q-expansion")
    n = int(floor(M - lead)) + 1
    out = [Fraction(0)] * n
    for e, c in coeffs.items():
        out[int(e - lead)] += c
    return QExpansion(lead, out)


def chi3_theta(r, l, s, a, b, c, name: str = "", form_level: int | None = None) -> ShiftedHarmonicTheta:
    """r * sum_{m,n} chi_-3(n) (l m + s n) q^(a m^2 + b m n + c n^2).

    With n = 3 n' + j the character becomes the weights +1 (j = 1) and -1
    (j = 2) on the lattice with Gram matrix [[2a, 3b], [3b, 18c]] and shifts
    (0, j/3).
    """
    lat = EvenLattice(((2 * a, 3 * b), (3 * b, 18 * c)))
    third = Fraction(1, 3)
    return ShiftedHarmonicTheta(lat, (l, 3 * s), (((0, third), 1), ((0, 2 * third), -1)),
                                Fraction(r), name, form_level)


# name: (r, l, s, a, b, c, level)
TABLE1 = {
    "F108": (Fraction(1, 2), 0, 1, 27, 0, 1, 108),
    "Ft108": (Fraction(1, 8), 3, 4, 9, 6, 4, 108),
    "F144": (Fraction(1, 2), 0, 1, 12, 0, 1, 144),
    "Ft144": (Fraction(1, 2), 0, 1, 3, 0, 4, 144),
    "F225": (Fraction(1, 4), 3, 2, 21, 3, 1, 225),
    "F243": (Fraction(1, 4), 3, 2, 63, 3, 1, 243),
    "Ft243": (Fraction(1, 28), 3, 14, 9, 3, 7, 243),
    "F441": (Fraction(1, 4), 3, 2, 39, 3, 1, 441),
    "G108": (Fraction(1, 2), 1, 1, 4, 2, 1, 108),
    "G243": (Fraction(1, 4), 1, 2, 7, 1, 1, 243),
}

_ALIASES = {"F̃108": "Ft108", "F̃144": "Ft144", "F̃243": "Ft243",
            "F~108": "Ft108", "F~144": "Ft144", "F~243": "Ft243"}


def canonical_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in TABLE1 and name != "f108":
        raise KeyError(f"unknown form {name!r}; expected one of {', '.join(TABLE1)}, f108")
    return name


@lru_cache(maxsize=None)
def table1_form(name: str) -> ShiftedHarmonicTheta:
    name = canonical_name(name)
    if name == "f108":
        return f108_newform()
    r, l, s, a, b, c, N = TABLE1[name]
    return chi3_theta(r, l, s, a, b, c, name, N)


@lru_cache(maxsize=None)
def f108_newform() -> ShiftedHarmonicTheta:
    """sum (4m + 3n) q^(4m^2 + 6mn + 3n^2) over m = +-1, +-2 and n = 5 (mod 6).

    With m = 6 v1, n = 6 v2 this is the lattice [[288, 216], [216, 216]] with
    P(v) = 24 v1 + 18 v2 and shifts (i/6, 5/6), i = 1, 2, 4, 5.
    """
    lat = EvenLattice(((288, 216), (216, 216)))
    terms = tuple(((Fraction(i, 6), Fraction(5, 6)), 1) for i in (1, 2, 4, 5))
    return ShiftedHarmonicTheta(lat, (24, 18), terms, 1, "f108", 108)


class ThetaEvaluator:
    """Numeric evaluation of a theta series anywhere in the upper half-plane.

    ``y_star`` is the height below which the Poisson-dual series is used;
    it defaults to 1/sqrt(N).
    """

    max_dual_terms = 400000

    def __init__(self, theta: ShiftedHarmonicTheta, prec: PrecisionContext = DEFAULT, y_star=None):
        self.theta = theta
        self.prec = prec
        mp = prec.mp
        self.N = theta.lattice.level
        self.y_star = mp.mpf(y_star) if y_star is not None else 1 / mp.sqrt(self.N)
        self._direct_cache = None
        self._dual_cache = {}

    @property
    def _log_eps(self):
        mp = self.prec.mp
        return self.prec.working_bits * mp.ln(2) + self.prec.guard_bits

    # direct q-series

    def _direct_coeffs(self, M: int):
        if self._direct_cache is None or self._direct_cache[0] < M:
            M = max(M, 2 * (self._direct_cache[0] if self._direct_cache else 0))
            mp = self.prec.mp
            qe = theta_qexp(self.theta, M)
            coeffs = [(int(n), mp.mpf(c.numerator) / c.denominator) for n, c in enumerate(qe.coeffs) if c]
            self._direct_cache = (M, qe.lead_exp, coeffs)
        return self._direct_cache

    def direct(self, tau):
        mp = self.prec.mp
        tau = mp.mpc(tau)
        y = tau.imag
        if y <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        M = int(mp.ceil(self._log_eps / (2 * mp.pi * y))) + 4
        _, lead, coeffs = self._direct_coeffs(M)
        q = mp.expjpi(2 * tau)
        s = mp.mpc(0)
        last = 0
        qpow = mp.mpc(1)
        for n, c in coeffs:
            if n > M:
                break
            qpow *= q ** (n - last)
            last = n
            s += c * qpow
        return mp.expjpi(2 * tau * lead) * s

    # Poisson dual

    def _dual_coeffs(self, K: int):
        """{phase class: [(k, b_k)]} for k <= K; phase class is Q(Y) mod 1."""
        cached = self._dual_cache.get("K", -1)
        if cached < K:
            K = max(K, 2 * cached)
            mp = self.prec.mp
            lat = self.theta.lattice
            N = self.N
            Ainv = _inv(lat.gram)
            B = EvenLattice(tuple(tuple(N * x for x in row) for row in Ainv))
            p = self.theta.p
            pA = (p[0] * Ainv[0][0] + p[1] * Ainv[1][0], p[0] * Ainv[0][1] + p[1] * Ainv[1][1])
            classes = {}
            vecs = _points(B, (Fraction(0), Fraction(0)), K)
            for Y, w in self.theta.terms:
                cls = lat.Q(Y) % 1
                acc = classes.setdefault(cls, {})
                for v, k in vecs:
                    lin = pA[0] * v[0] + pA[1] * v[1]
                    if not lin:
                        continue
                    arg = 2 * (v[0] * Y[0] + v[1] * Y[1])
                    sn = mp.sinpi(mp.mpf(arg.numerator) / arg.denominator)
                    if sn == 0:
                        continue
                    val = self.theta.scale * w * lin
                    acc[int(k)] = acc.get(int(k), 0) + (mp.mpf(val.numerator) / val.denominator) * sn
            pref = 1 / mp.sqrt(mp.mpf(lat.det.numerator) / lat.det.denominator)
            self._dual_cache = {"K": K, "classes": {
                cls: sorted((k, pref * b) for k, b in acc.items() if k > 0) for cls, acc in classes.items()}}
        return self._dual_cache["classes"]

    def dual(self, tau):
        """Poisson-dual evaluation, after translating tau by the nearest integer."""
        mp = self.prec.mp
        tau = mp.mpc(tau)
        n = int(mp.nint(tau.real))
        z = tau - n
        w = -1 / z
        h = w.imag
        if h <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        K = int(mp.ceil(self.N * self._log_eps / (2 * mp.pi * h))) + 4
        if K > self.max_dual_terms:
            raise ValueError(f"tau = {mp.nstr(tau, 8)} is too close to a cusp for the dual series")
        classes = self._dual_coeffs(K)
        E = mp.expjpi(2 * w / self.N)
        total = mp.mpc(0)
        for cls, coeffs in classes.items():
            s = mp.mpc(0)
            last = 0
            Ek = mp.mpc(1)
            for k, b in coeffs:
                if k > K:
                    break
                Ek *= E ** (k - last) if k - last > 1 else E
                last = k
                s += b * Ek
            phase = mp.expjpi(2 * n * mp.mpf(cls.numerator) / cls.denominator) if cls else 1
            total += phase * s
        return -total / (z * z)

    def __call__(self, tau):
        mp = self.prec.mp
        tau = mp.mpc(tau)
        if tau.imag >= self.y_star:
            return self.direct(tau)
        return self.dual(tau)

    def imaginary(self, y):
        """Theta(i y) as a real number (the coefficients are real)."""
        mp = self.prec.mp
        return self(mp.mpc(0, y)).real


@lru_cache(maxsize=64)
def evaluator(theta: ShiftedHarmonicTheta, prec: PrecisionContext = DEFAULT) -> ThetaEvaluator:
    return ThetaEvaluator(theta, prec)


def theta_eval_imaginary(theta: ShiftedHarmonicTheta, y, prec: PrecisionContext = DEFAULT, method: str = "auto"):
    ev = evaluator(theta, prec)
    tau = prec.mp.mpc(0, y)
    if method == "direct":
        return ev.direct(tau).real
    if method == "dual":
        return ev.dual(tau).real
    return ev(tau).real


@dataclass(frozen=True)
class TransformCheckResult:
    gamma: tuple
    tau: object
    lhs: object
    rhs: object
    abs_err: object
    passed: bool


def _slash2(ev, gamma, tau):
    a, b, c, d = gamma
    return ev((a * tau + b) / (c * tau + d)) / (c * tau + d) ** 2


def _v(d: int, det: int) -> int:
    if d > 0:
        return kronecker_symbol(-det, d)
    return -kronecker_symbol(-det, -d)


def gamma0_transform_check(theta: ShiftedHarmonicTheta, gamma, tau, prec: PrecisionContext = DEFAULT,
                           tol=1e-20) -> TransformCheckResult:
    """Compare (Theta_Y |_2 gamma)(tau) with v(d) e(ab Q(Y)) Theta_{aY}(tau), shift by shift.

    ``gamma`` = (a, b, c, d) with c divisible by the lattice level.
    """
    a, b, c, d = gamma
    if a * d - b * c != 1:
        raise ValueError("gamma must have determinant 1")
    lat = theta.lattice
    if c % lat.level:
        raise ValueError(f"c = {c} is not divisible by the lattice level {lat.level}")
    mp = prec.mp
    tau = mp.mpc(tau)
    det = int(lat.det)
    lhs = mp.mpc(0)
    rhs = mp.mpc(0)
    for Y, w in theta.terms:
        single = ShiftedHarmonicTheta(lat, theta.p, ((Y, 1),))
        aY = tuple((a * y) % 1 for y in Y)
        moved = ShiftedHarmonicTheta(lat, theta.p, ((aY, 1),))
        coef = theta.scale * w
        coef = mp.mpf(coef.numerator) / coef.denominator
        lhs += coef * _slash2(evaluator(single, prec), gamma, tau)
        ph = a * b * lat.Q(Y)
        rhs += coef * _v(d, det) * mp.expjpi(2 * mp.mpf(ph.numerator) / ph.denominator) * evaluator(moved, prec)(tau)
    err = abs(lhs - rhs)
    return TransformCheckResult(tuple(gamma), tau, lhs, rhs, err, bool(err < tol))


def gamma0_samples(N: int, prec: PrecisionContext = DEFAULT):
    """Six (gamma, tau) pairs with gamma in Gamma_0(N), both sides at moderate height.

    gamma = T^m [[e, 0], [c', e]] T^-n and tau = n + z with -1/z = w fixed,
    so Im(-1/z) and Im(-1/(gamma tau - m)) both equal Im w.
    """
    mp = prec.mp
    w = mp.mpc(mp.mpf(3) / 10, mp.mpf(7) / 5)
    z = -1 / w
    out = [((1, 1, 0, 1), mp.mpc(mp.mpf(1) / 10, mp.mpf(9) / 10))]
    for m, cp, e, n in ((0, N, 1, 0), (1, N, 1, 1), (0, N, -1, -1), (2, 2 * N, -1, 1), (-1, 3 * N, 1, -2)):
        a = e + m * cp
        d = e - cp * n
        b = -e * n + m * (e - cp * n)
        out.append(((a, b, cp, d), n + z))
    return out


def aggregate_invariance_check(theta: ShiftedHarmonicTheta, samples=None, prec: PrecisionContext = DEFAULT,
                               tol=1e-20) -> list:
    """|(F |_2 gamma)(tau) - F(tau)| for gamma in Gamma_0(level)."""
    N = theta.level
    if samples is None:
        samples = gamma0_samples(N, prec)
    ev = evaluator(theta, prec)
    out = []
    for gamma, tau in samples:
        a, b, c, d = gamma
        if c % N or a * d - b * c != 1:
            raise ValueError(f"{gamma} is not in Gamma_0({N})")
        lhs = _slash2(ev, gamma, tau)
        rhs = ev(tau)
        err = abs(lhs - rhs)
        out.append(TransformCheckResult(tuple(gamma), tau, lhs, rhs, err, bool(err < tol)))
    return out
