"""L(f, 2) of weight-2 cusp forms from their values on the imaginary axis.

    L(f, 2) = 4 pi^2 * integral_0^oo f(iy) y dy

is integrated in u = log y.  Both ends decay exponentially because every form
here has a fast evaluator close to the cusp 0 (Poisson duality for theta
series, the eta inversion for eta quotients), so no functional equation or
Atkin-Lehner sign is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable

import numpy as np
from sympy import primefactors

from .mpnum import DEFAULT, PrecisionContext, integrate_adaptive
from .qseries import EtaQuotient, QExpansion
from .thetalat import ShiftedHarmonicTheta, evaluator, table1_form, theta_qexp

__all__ = [
    "ModularEvaluator",
    "LValueResult",
    "ETA_FORMS",
    "from_theta",
    "from_eta",
    "modular_form",
    "dilate",
    "combination",
    "lvalue2",
    "lvalue2_dirichlet",
    "dirichlet_coefficients",
    "sturm_bound",
    "verify_linear_identity",
    "lprime0_from_l2",
]

# name: (eta factors, level)
ETA_FORMS = {
    "f27": (((3, 2), (9, 2)), 27),
    "f36": (((6, 4),), 36),
    "g36": (((6, 4),), 36),
    "g144": (((12, 12), (6, -4), (24, -4)), 144),
}


@dataclass(frozen=True)
class ModularEvaluator:
    """A weight-2 cusp form seen through y -> f(iy).

    ``n0`` is the leading exponent at infinity and ``lam0`` the decay rate at
    zero, f(iy) ~ y^-2 exp(-2 pi lam0 / y).  ``qexp`` maps M to the
    expansion through q^M.
    """

    eval: Callable
    level: int
    qexp: Callable
    n0: Fraction
    lam0: Fraction
    name: str = ""
    coefficients: Callable | None = None

    def __call__(self, y):
        return self.eval(y)


@dataclass(frozen=True)
class LValueResult:
    value: object
    err_estimate: object
    method: str

    def __float__(self):
        return float(self.value)


def from_theta(theta: ShiftedHarmonicTheta, prec: PrecisionContext = DEFAULT) -> ModularEvaluator:
    ev = evaluator(theta, prec)
    mp = prec.mp
    qe = theta_qexp(theta, 60)
    n0 = qe.valuation()
    # the smallest dual exponent k/N present in the Poisson series
    classes = ev._dual_coeffs(4 * ev.N)
    k0 = min(c[0][0] for c in classes.values() if c)

    def coeffs(n_max):
        q = theta_qexp(theta, n_max)
        out = np.zeros(n_max + 1)
        for e, c in q.terms():
            out[int(e)] = float(c)
        return out

    return ModularEvaluator(lambda y: ev(mp.mpc(0, y)).real, theta.level,
                            lambda M: theta_qexp(theta, M), n0, Fraction(k0, ev.N),
                            theta.name, coeffs)


def from_eta(eq: EtaQuotient, level: int, name: str = "", prec: PrecisionContext = DEFAULT) -> ModularEvaluator:
    lam0 = sum(Fraction(r, 24 * d) for d, r in eq.factors)
    if lam0 <= 0 or eq.lead_exp <= 0:
        raise ValueError("not a cusp form at both 0 and infinity")

    def qexp(M):
        n = int(M - eq.lead_exp) + 1
        return eq.qexp(max(n, 1))

    return ModularEvaluator(lambda y: eq.evaluate_imaginary(y, prec), level, qexp,
                            eq.lead_exp, lam0, name, lambda n: eq.coefficients(n))


@lru_cache(maxsize=None)
def modular_form(name: str, prec: PrecisionContext = DEFAULT) -> ModularEvaluator:
    """f27, f36, g36, g144, f108 or any Table 1 form by name."""
    if name in ETA_FORMS:
        factors, N = ETA_FORMS[name]
        return from_eta(EtaQuotient(factors), N, name, prec)
    return from_theta(table1_form(name), prec)


def dilate(f: ModularEvaluator, d: int) -> ModularEvaluator:
    """f(d tau)."""
    if d < 1:
        raise ValueError("dilation must be a positive integer")
    if d == 1:
        return f

    def coeffs(n_max):
        base = f.coefficients(n_max // d)
        out = np.zeros(n_max + 1, dtype=base.dtype)
        out[::d][:len(base)] = base
        return out

    return ModularEvaluator(lambda y: f.eval(d * y), f.level * d,
                            lambda M: f.qexp(Fraction(M, d)).dilate(d).truncate(Fraction(M) + 1),
                            f.n0 * d, f.lam0 / d, f"{f.name}({d}tau)",
                            coeffs if f.coefficients else None)


def combination(terms, name: str = "", prec: PrecisionContext = DEFAULT) -> ModularEvaluator:
    """sum c_i f_i for ``terms`` = [(c_i, f_i), ...] with rational c_i."""
    mp = prec.mp
    terms = [(Fraction(c), f) for c, f in terms]
    level = lcm(*(f.level for _, f in terms))
    numeric = [(mp.mpf(c.numerator) / c.denominator, f) for c, f in terms]

    def ev(y):
        return mp.fsum(c * f.eval(y) for c, f in numeric)

    def qexp(M):
        out = None
        for c, f in terms:
            s = f.qexp(M) * c
            out = s if out is None else out + s
        return out

    def coeffs(n_max):
        return sum(float(c) * np.asarray(f.coefficients(n_max), dtype=float) for c, f in terms)

    return ModularEvaluator(ev, level, qexp, min(f.n0 for _, f in terms),
                            min(f.lam0 for _, f in terms), name, coeffs)


def lvalue2(f: ModularEvaluator, prec: PrecisionContext = DEFAULT, tol=None,
            delta=Fraction(1, 10000), y_max=None) -> LValueResult:
    """4 pi^2 * integral of f(iy) y dy over [delta, y_max] plus tail bounds.

    ``y_max`` defaults to the larger of 40/sqrt(N) and the height where the
    leading term exp(-2 pi n0 y) falls below the tolerance.
    """
    mp = prec.mp
    tol = mp.mpf(tol if tol is not None else mp.ldexp(1, -prec.working_bits // 2))
    N = f.level
    n0 = mp.mpf(f.n0.numerator) / f.n0.denominator
    lam0 = mp.mpf(f.lam0.numerator) / f.lam0.denominator
    if y_max is None:
        y_max = max(40 / mp.sqrt(N), (-mp.ln(tol) + prec.guard_bits) / (2 * mp.pi * n0))
    y_max = mp.mpf(y_max)
    delta = mp.mpf(delta.numerator) / delta.denominator if isinstance(delta, Fraction) else mp.mpf(delta)
    y_star = 1 / mp.sqrt(N)

    def integrand(u):
        y = mp.exp(u)
        return f.eval(y) * y * y

    lo, hi = mp.ln(delta), mp.ln(y_max)
    cuts = [c for c in (mp.ln(y_star),) if lo < c < hi]
    res = integrate_adaptive(integrand, lo, hi, tol / (4 * mp.pi ** 2), prec, breakpoints=cuts, initial_panels=8)
    # tails: f(iy) y ~ f(iy_max) y_max exp(-2 pi n0 (y - y_max)) and symmetrically at 0
    fmax = abs(f.eval(y_max))
    upper = fmax * (y_max / (2 * mp.pi * n0) + 1 / (2 * mp.pi * n0) ** 2)
    fdelta = abs(f.eval(delta))
    lower = fdelta * delta ** 3 / (2 * mp.pi * lam0)
    tail = 2 * (upper + lower)
    scale = 4 * mp.pi ** 2
    err = scale * (res.err_estimate + tail)
    if scale * tail > tol:
        raise ArithmeticError(f"L-value tail bound {mp.nstr(scale * tail, 3)} exceeds tolerance")
    return LValueResult(scale * res.value, max(err, mp.ldexp(1, -prec.working_bits)), "mellin-integral")


def dirichlet_coefficients(f: ModularEvaluator, n_max: int):
    if f.coefficients is None:
        raise ValueError(f"no coefficient generator for {f.name}")
    return np.asarray(f.coefficients(n_max), dtype=float)


def lvalue2_dirichlet(f: ModularEvaluator, n_max: int = 100000) -> LValueResult:
    """Truncated sum of a_n / n^2 with a heuristic tail estimate.

    The tail is estimated as if the a_n beyond n_max had random signs with the
    root-mean-square size seen on (n_max/2, n_max].
    """
    a = dirichlet_coefficients(f, n_max)
    n = np.arange(len(a), dtype=float)
    n[0] = 1.0
    terms = a / n ** 2
    terms[0] = 0.0
    total = float(np.sum(terms))
    window = a[n_max // 2:]
    rms = float(np.sqrt(np.mean(window ** 2)))
    tail = rms * np.sqrt(1.0 / (3.0 * n_max ** 3)) * 3
    return LValueResult(total, max(tail, 1e-16), "direct-sum")


def sturm_bound(N: int, k: int = 2) -> int:
    if N < 1:
        raise ValueError("level must be positive")
    index = Fraction(N)
    for p in primefactors(N):
        index *= Fraction(p + 1, p)
    return int(k * index / 12)


def verify_linear_identity(lhs: QExpansion, rhs_terms, N: int, k: int = 2, margin: int = 50) -> bool:
    """Exact equality of lhs and sum c_i s_i through q^(sturm_bound + margin)."""
    B = sturm_bound(N, k) + margin
    series = [lhs] + [s for _, s in rhs_terms]
    for s in series:
        if s.order <= B:
            raise ValueError(f"series known only below q^{s.order}, need through q^{B}")
    start = min(s.lead_exp for s in series)
    e = start
    while e <= B:
        rhs = sum(Fraction(c) * s.coeff(e) for c, s in rhs_terms)
        if lhs.coeff(e) != rhs:
            return False
        e += 1
    return True


def lprime0_from_l2(l2, N: int, prec: PrecisionContext = DEFAULT):
    mp = prec.mp
    return N * mp.mpf(l2) / (4 * mp.pi ** 2)
