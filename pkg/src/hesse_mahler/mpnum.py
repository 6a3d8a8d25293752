"""Arbitrary-precision numerics shared by every other module.

All routines take an explicit :class:`PrecisionContext`.  Each context owns a
private ``mpmath.MPContext`` so that no routine touches ``mpmath.mp`` and
concurrent callers with different precisions never interfere.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

__all__ = [
    "PrecisionContext",
    "QuadratureError",
    "QuadResult",
    "DEFAULT",
    "default_context",
    "gauss_legendre",
    "integrate_adaptive",
    "roots_cubic_monic",
    "principal_root",
]


@lru_cache(maxsize=None)
def _mpctx(bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision (bits) plus the absolute error target callers aim for."""

    working_bits: int = 256
    target_abs_err: float = 1e-12

    def __post_init__(self):
        if self.working_bits < 64:
            raise ValueError(f"working_bits must be >= 64, got {self.working_bits}")
        if not self.target_abs_err > 0:
            raise ValueError("target_abs_err must be positive")

    @property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        return _mpctx(self.working_bits)

    @property
    def guard_bits(self) -> int:
        return 10 + self.working_bits // 8

    @property
    def eps(self):
        """2^(-working_bits) as an mpf of this context."""
        return self.mp.ldexp(1, -self.working_bits)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits, self.target_abs_err)

    def with_tol(self, tol: float) -> "PrecisionContext":
        return PrecisionContext(self.working_bits, tol)


DEFAULT = PrecisionContext()


def default_context() -> PrecisionContext:
    """Context honouring the HESSE_MAHLER_PREC environment override."""
    bits = os.environ.get("HESSE_MAHLER_PREC")
    return PrecisionContext(int(bits)) if bits else DEFAULT


class QuadratureError(ArithmeticError):
    """Adaptive quadrature hit its subdivision limit before meeting ``tol``."""

    def __init__(self, message, value, err_estimate, depth):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate
        self.depth = depth


@dataclass(frozen=True)
class QuadResult:
    value: object
    err_estimate: object
    panels: int = 0

    def __iter__(self):
        yield self.value
        yield self.err_estimate


@lru_cache(maxsize=None)
def gauss_legendre(n: int, bits: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    mp = _mpctx(bits + 20)
    tol = mp.ldexp(1, -bits - 10)
    nodes, weights = [], []
    for i in range(1, (n + 1) // 2 + 1):
        x = mp.cos(mp.pi * (i - mp.mpf(0.25)) / (n + mp.mpf(0.5)))
        for _ in range(100):
            p0, p1 = mp.one, x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < tol:
                break
        p0, p1 = mp.one, x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        w = 2 / ((1 - x * x) * dp * dp)
        nodes.append(x)
        weights.append(w)
        if abs(x) > tol:
            nodes.append(-x)
            weights.append(w)
    out = _mpctx(bits)
    return tuple(out.mpf(x) for x in nodes), tuple(out.mpf(w) for w in weights)


def _panel(f, a, b, mp, rules):
    h = (b - a) / 2
    m = (a + b) / 2
    vals = []
    for nodes, weights in rules:
        vals.append(h * mp.fsum(w * f(m + h * x) for x, w in zip(nodes, weights)))
    return vals[-1], abs(vals[-1] - vals[0])


def integrate_adaptive(
    f,
    a,
    b,
    tol=None,
    prec: PrecisionContext = DEFAULT,
    *,
    breakpoints=(),
    initial_panels: int = 4,
    order: int = 20,
    max_panels: int = 4000,
    max_depth: int = 80,
) -> QuadResult:
    """Globally adaptive Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    Each panel is integrated with an ``order``-point and a ``2*order``-point
    rule; their difference is the panel error estimate and the finer value is
    kept.  The panel with the largest estimate is bisected until the summed
    estimate drops below ``tol``.  Kinks are not located explicitly, they are
    resolved by repeated bisection.

    Returns a :class:`QuadResult`; unpacks as ``value, err``.
    """
    mp = prec.mp
    tol = mp.mpf(prec.target_abs_err if tol is None else tol)
    a, b = mp.mpf(a), mp.mpf(b)
    if a == b:
        return QuadResult(mp.zero, mp.zero, 0)
    rules = (gauss_legendre(order, prec.working_bits), gauss_legendre(2 * order, prec.working_bits))

    cuts = sorted({a, b, *(mp.mpf(p) for p in breakpoints if min(a, b) < p < max(a, b))})
    if b < a:
        cuts = cuts[::-1]
    edges = []
    for lo, hi in zip(cuts, cuts[1:]):
        for j in range(initial_panels):
            edges.append((lo + (hi - lo) * j / initial_panels, lo + (hi - lo) * (j + 1) / initial_panels))

    heap = []
    counter = 0
    for lo, hi in edges:
        val, err = _panel(f, lo, hi, mp, rules)
        heapq.heappush(heap, (-err, counter, lo, hi, val, 0))
        counter += 1

    def totals():
        return mp.fsum(p[4] for p in heap), mp.fsum(-p[0] for p in heap)

    value, err = totals()
    deepest = 0
    while err > tol:
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"no convergence after {len(heap)} panels (err {mpmath.nstr(err, 3)} > tol {mpmath.nstr(tol, 3)})",
                value, err, deepest)
        negerr, _, lo, hi, val, depth = heapq.heappop(heap)
        if depth >= max_depth:
            heapq.heappush(heap, (negerr, counter, lo, hi, val, depth))
            raise QuadratureError(f"maximum subdivision depth {max_depth} reached", value, err, depth)
        mid = (lo + hi) / 2
        for sub in ((lo, mid), (mid, hi)):
            v, e = _panel(f, sub[0], sub[1], mp, rules)
            counter += 1
            heapq.heappush(heap, (-e, counter, sub[0], sub[1], v, depth + 1))
        deepest = max(deepest, depth + 1)
        value, err = totals()
    return QuadResult(value, err, len(heap))


def principal_root(z, n: int, prec: PrecisionContext = DEFAULT):
    """r^(1/n) e^(i theta/n) with theta = arg z in (-pi, pi]."""
    if n not in (2, 3):
        raise ValueError("only square and cube roots are supported")
    mp = prec.mp
    z = mp.mpc(z)
    if z == 0:
        return mp.mpc(0)
    return mp.root(abs(z), n) * mp.expj(mp.arg(z) / n)


def _newton_polish(coeffs, y, mp, eps, max_iter=300):
    c2, c1, c0 = coeffs
    best = y
    best_res = abs(((y + c2) * y + c1) * y + c0)
    for _ in range(max_iter):
        p = ((y + c2) * y + c1) * y + c0
        dp = (3 * y + 2 * c2) * y + c1
        if dp == 0:
            break
        step = p / dp
        y = y - step
        res = abs(((y + c2) * y + c1) * y + c0)
        if res < best_res:
            best, best_res = y, res
        elif res > 4 * best_res:
            break
        if abs(step) <= eps * max(1, abs(y)):
            break
    return best


def roots_cubic_monic(c2, c1, c0, prec: PrecisionContext = DEFAULT):
    """The three roots (with multiplicity) of y^3 + c2 y^2 + c1 y + c0.

    Double-precision seeds from the companion matrix are polished by Newton's
    method at full precision.  The largest root is deflated out and the
    remaining quadratic is solved at full precision, which keeps repeated
    roots from collapsing onto one seed.
    """
    mp = prec.mp
    c2, c1, c0 = mp.mpc(c2), mp.mpc(c1), mp.mpc(c0)
    eps = prec.eps * 4
    seeds = np.roots([1, complex(c2), complex(c1), complex(c0)])
    seeds = sorted(seeds, key=lambda s: -abs(s))
    r1 = _newton_polish((c2, c1, c0), mp.mpc(seeds[0]), mp, eps)
    # quotient y^2 + p y + q of the cubic by (y - r1)
    p = c2 + r1
    q = c1 + r1 * p
    disc = mp.sqrt(p * p - 4 * q)
    # stable quadratic formula
    s = -p - disc if abs(-p - disc) >= abs(-p + disc) else -p + disc
    if s == 0:
        r2 = r3 = mp.mpc(0)
    else:
        r2 = s / 2
        r3 = 2 * q / s
    r2 = _newton_polish((c2, c1, c0), r2, mp, eps, max_iter=8)
    r3 = _newton_polish((c2, c1, c0), r3, mp, eps, max_iter=8)
    return [r1, r2, r3]
