"""Positive definite binary quadratic forms, CM points and the Gamma_0(3) search.

A CM point is stored as the primitive form ``[a, b, c]`` of which it is the
root ``tau = (-b + i sqrt|D|) / (2a)`` in the upper half-plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt

from .mpnum import DEFAULT, PrecisionContext

__all__ = [
    "QuadForm",
    "CMPoint",
    "CosetRep",
    "GAMMA",
    "DISCRIMINANTS",
    "IndeterminateComparison",
    "reduce_form",
    "class_number",
    "cm_points_fundamental",
    "moebius_transform",
    "scale_form",
    "in_F",
    "in_Fprime",
    "search_cm_points",
    "degree_hypothesis_check",
]


# Negative discriminants of class number 1, 2 and 3 (complete lists).
DISCRIMINANTS = {
    1: (-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163),
    2: (-15, -20, -24, -32, -35, -36, -40, -48, -51, -52, -60, -64, -72,
        -75, -88, -91, -99, -100, -112, -115, -123, -147, -148, -187, -232,
        -235, -267, -403, -427),
    3: (-23, -31, -44, -59, -76, -83, -92, -107, -108, -124, -139, -172,
        -211, -243, -268, -283, -307, -331, -379, -499, -547, -643, -652,
        -883, -907),
}


@dataclass(frozen=True, order=True)
class QuadForm:
    """Primitive positive definite form a X^2 + b XY + c Y^2."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"{self}: need a > 0")
        if self.b * self.b - 4 * self.a * self.c >= 0:
            raise ValueError(f"{self}: not positive definite")
        if gcd(gcd(self.a, self.b), self.c) != 1:
            raise ValueError(f"{self}: not primitive")

    @classmethod
    def primitive(cls, a: int, b: int, c: int) -> "QuadForm":
        g = gcd(gcd(a, b), c)
        if a < 0:
            g = -g
        return cls(a // g, b // g, c // g)

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def mirror(self) -> "QuadForm":
        """The form of -conj(tau)."""
        return QuadForm(self.a, -self.b, self.c)

    def tau(self, prec: PrecisionContext = DEFAULT):
        mp = prec.mp
        return mp.mpc(-self.b, mp.sqrt(-self.disc)) / (2 * self.a)

    def __str__(self):
        return f"[{self.a},{self.b},{self.c}]"


@dataclass(frozen=True)
class CosetRep:
    alpha: int
    beta: int
    gamma: int
    delta: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.alpha * self.delta - self.beta * self.gamma != 1:
            raise ValueError("coset representative must have determinant 1")

    def inverse(self) -> "CosetRep":
        return CosetRep(self.delta, -self.beta, -self.gamma, self.alpha, self.name + "^-1")

    def apply(self, tau):
        return (self.alpha * tau + self.beta) / (self.gamma * tau + self.delta)


# Right coset representatives of Gamma_0(3) in SL(2, Z): I, S, ST, ST^-1.
GAMMA = (
    CosetRep(1, 0, 0, 1, "I"),
    CosetRep(0, -1, 1, 0, "S"),
    CosetRep(0, -1, 1, 1, "ST"),
    CosetRep(0, -1, 1, -1, "ST^-1"),
)


def _check_disc(D: int):
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"invalid negative discriminant {D}")


def reduce_form(f: QuadForm) -> QuadForm:
    """The reduced form equivalent to ``f``: |b| <= a <= c, b >= 0 on the boundary."""
    a, b, c = f.a, f.b, f.c
    if b * b - 4 * a * c >= 0:
        raise ValueError(f"{f} is not positive definite")
    while True:
        if not -a < b <= a:
            # translate tau by an integer so that -a < b <= a
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        elif a > c:
            a, b, c = c, -b, a
        else:
            break
    if a == c and b < 0:
        b = -b
    return QuadForm(a, b, c)


@lru_cache(maxsize=None)
def _reduced_forms(D: int) -> tuple:
    _check_disc(D)
    out = []
    bmax = isqrt(-D // 3)
    for b in range(-bmax, bmax + 1):
        if (b - D) % 2:
            continue
        ac = (b * b - D) // 4
        a = max(1, abs(b))
        while a * a <= ac:
            if ac % a == 0:
                c = ac // a
                if gcd(gcd(a, b), c) == 1 and not (b < 0 and (-b == a or a == c)):
                    out.append(QuadForm(a, b, c))
            a += 1
    return tuple(sorted(out, key=lambda f: (f.a, abs(f.b), f.b)))


def class_number(D: int) -> int:
    """Number of reduced primitive forms of discriminant ``D``."""
    return len(_reduced_forms(D))


def cm_points_fundamental(D: int) -> list:
    """Representatives in the closed SL(2,Z) fundamental domain, one per class.

    On the boundary |b| = a or a = c the representative with b <= 0 is used,
    i.e. the point with Re(tau) = +1/2 or on the right half of the unit arc.
    """
    out = []
    for f in _reduced_forms(D):
        if f.b > 0 and (f.b == f.a or f.a == f.c):
            f = f.mirror()
        out.append(f)
    return out


def moebius_transform(f: QuadForm, g: CosetRep) -> QuadForm:
    """Primitive form satisfied by g(tau) when ``f`` is satisfied by tau."""
    # tau = g^-1(w) = (delta w - beta) / (-gamma w + alpha)
    al, be, ga, de = g.alpha, g.beta, g.gamma, g.delta
    a, b, c = f.a, f.b, f.c
    A = a * de * de - b * de * ga + c * ga * ga
    B = -2 * a * de * be + b * (al * de + be * ga) - 2 * c * ga * al
    C = a * be * be - b * al * be + c * al * al
    return QuadForm.primitive(A, B, C)


def scale_form(f: QuadForm, m: int) -> QuadForm:
    """Primitive form of m*tau."""
    if m < 1:
        raise ValueError("scale must be a positive integer")
    return QuadForm.primitive(f.a, m * f.b, m * m * f.c)


def in_F(tau, prec: PrecisionContext = DEFAULT) -> bool:
    """Closed SL(2,Z) fundamental domain, with tolerance 2^(-bits/2)."""
    mp = prec.mp
    tol = mp.ldexp(1, -prec.working_bits // 2)
    tau = mp.mpc(tau)
    return abs(tau.real) <= mp.mpf(0.5) + tol and abs(tau) >= 1 - tol


def in_Fprime(tau, prec: PrecisionContext = DEFAULT) -> bool:
    """True iff g^-1(tau) lies in F for one of the four coset representatives."""
    mp = prec.mp
    tau = mp.mpc(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    return any(in_F(g.inverse().apply(tau), prec) for g in GAMMA)


@dataclass(frozen=True)
class CMPoint:
    form: QuadForm
    tau: object
    class_number_self: int
    class_number_3tau: int

    @classmethod
    def from_form(cls, f: QuadForm, prec: PrecisionContext = DEFAULT) -> "CMPoint":
        return cls(f, f.tau(prec), class_number(f.disc), class_number(scale_form(f, 3).disc))

    @property
    def D(self) -> int:
        return self.form.disc


def search_cm_points(h_max: int = 3, hh_max: int = 4, prec: PrecisionContext = DEFAULT) -> list:
    """CM points of F' with h(tau) <= h_max and h(tau) h(3 tau) <= hh_max.

    Both boundary representatives of each class are translated by the coset
    representatives, so every boundary point of F' is produced.
    """
    if h_max not in (1, 2, 3):
        raise ValueError("discriminant lists are only available for h <= 3")
    seen = {}
    for h in range(1, h_max + 1):
        for D in DISCRIMINANTS[h]:
            for f0 in cm_points_fundamental(D):
                for f in {f0, f0.mirror()}:
                    if reduce_form(f) != reduce_form(f0):
                        continue
                    for g in GAMMA:
                        f1 = moebius_transform(f, g)
                        if f1 in seen:
                            continue
                        h3 = class_number(scale_form(f1, 3).disc)
                        if h * h3 > hh_max:
                            continue
                        if not in_Fprime(f1.tau(prec), prec):
                            continue
                        seen[f1] = CMPoint(f1, f1.tau(prec), h, h3)
    return sorted(seen.values(), key=lambda p: (-p.D, p.form.a, p.form.c, p.form.b))


class IndeterminateComparison(ArithmeticError):
    """Two values could not be told apart at the working precision."""

    def __init__(self, message, separation, resolution):
        super().__init__(message)
        self.separation = separation
        self.resolution = resolution


def degree_hypothesis_check(point, prec: PrecisionContext = DEFAULT) -> bool:
    """Whether j(3 tau0) differs from j(3 g tau0) for g = S, ST, ST^-1.

    Returns False when some value coincides to working precision, True when
    all three are separated by more than ten times the error estimate, and
    raises :class:`IndeterminateComparison` in between.
    """
    from .qseries import j_eval

    f = point.form if isinstance(point, CMPoint) else point
    mp = prec.mp
    eps = mp.ldexp(1, -prec.working_bits + prec.guard_bits)
    j0 = j_eval(scale_form(f, 3).tau(prec), prec)
    result = True
    for g in GAMMA[1:]:
        j1 = j_eval(scale_form(moebius_transform(f, g), 3).tau(prec), prec)
        resolution = eps * (1 + abs(j0) + abs(j1))
        sep = abs(j0 - j1)
        if sep <= resolution:
            result = False
        elif sep <= 10 * resolution:
            raise IndeterminateComparison(
                f"j values at 3*{g.name}({f}) separated by {mp.nstr(sep, 3)} only", sep, resolution)
    return result
