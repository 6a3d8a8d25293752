"""Registry of verifiable statements and the runners that check them."""

from __future__ import annotations

import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import yaml

from .binforms import QuadForm, search_cm_points
from .hesse import build_paths, period_integral, regulator_det
from .lser import dilate, lprime0_from_l2, lvalue2, modular_form, verify_linear_identity
from .mahler import m3, villegas_rhs
from .mpnum import PrecisionContext, principal_root
from .qseries import class_polynomial, t_eval, t_qexp, verify_t_value
from .radical import evaluate_radical
from .reports import VerificationReport, make_report

__all__ = [
    "IdentityRecord",
    "UnknownIdError",
    "reference_data",
    "identity_records",
    "registry_ids",
    "expand_ids",
    "run",
    "run_entry",
    "table2_rows",
    "printed_digits_match",
    "parse_printed",
]


class UnknownIdError(KeyError):
    pass


@lru_cache(maxsize=None)
def reference_data() -> dict:
    text = resources.files("hesse_mahler").joinpath("data/reference_constants.yaml").read_text()
    return yaml.safe_load(text)


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    taus: tuple
    exact_t: tuple
    form_name: str
    constant: Fraction
    kind: str

    @property
    def tau(self) -> QuadForm:
        return self.taus[0]


def identity_records() -> dict:
    """Group id -> list of records, in registry order."""
    out = {}
    for group in reference_data()["identities"]:
        out[group["id"]] = [
            IdentityRecord(st["label"], tuple(QuadForm(*f) for f in st["tau"]), tuple(st["t"]),
                           st["form"], Fraction(st["constant"]), st["kind"])
            for st in group["statements"]
        ]
    return out


def _samart_records() -> dict:
    return {r["id"]: r for r in reference_data()["samart"]}


def registry_ids() -> list:
    return [*identity_records(), *_samart_records(), reference_data()["determinant"]["id"],
            "table2", "classpoly", "qprefix", "sturm", "periods"]


def expand_ids(ids) -> list:
    known = registry_ids()
    if not ids or list(ids) == ["all"]:
        return known
    for i in ids:
        if i not in known:
            raise UnknownIdError(i)
    return list(ids)


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        reports = fn(*args, **kwargs)
        per = 1000 * (time.perf_counter() - start) / max(len(reports), 1)
        for r in reports:
            if not r.wall_ms:
                r.wall_ms = per
        return reports
    return wrapper


def _pi2(prec):
    return prec.mp.pi ** 2


def _rel(a, b):
    return abs(a - b) / abs(b)


@_timed
def _verify_statement(rec: IdentityRecord, prec: PrecisionContext, tol: float) -> list:
    mp = prec.mp
    t = evaluate_radical(rec.exact_t[0], prec)
    lhs = m3(t, prec)
    L = lvalue2(modular_form(rec.form_name, prec), prec).value
    c = mp.mpf(rec.constant.numerator) / rec.constant.denominator
    rhs = c * L / _pi2(prec)
    details = {"form": rec.form_name, "constant": str(rec.constant), "tau": str(rec.tau)}
    checks = []
    for form, text in zip(rec.taus, rec.exact_t):
        tv = verify_t_value(form, text, digits=40)
        details[f"t_check{form}"] = float(tv.residual)
        checks.append(tv.passed)
        v = villegas_rhs(form, prec)
        details[f"villegas_rel_err{form}"] = float(_rel(v, lhs))
        checks.append(_rel(v, lhs) < tol)
    if rec.kind == "pair":
        # a non-principal cube root, so the conjugate is not a mirror image of the same quadrature
        t2 = evaluate_radical(rec.exact_t[1], prec)
        other = m3(t2, prec, k=principal_root(t2, 3, prec) * mp.expjpi(mp.mpf(2) / 3))
        details["conjugate_rel_err"] = float(_rel(other, lhs))
        checks.append(_rel(other, lhs) < tol)
    rep = make_report(rec.id, lhs, rhs, tol, prec.working_bits, **details)
    rep.passed = rep.passed and all(checks)
    return [rep]


@_timed
def _verify_samart(rec: dict, prec: PrecisionContext, tol: float) -> list:
    mp = prec.mp
    t = evaluate_radical(rec["t"], prec)
    lhs = m3(t, prec)
    scale = Fraction(rec["scale"])
    total = mp.mpf(0)
    details = {}
    for coeff, name in rec["terms"]:
        f = modular_form(name, prec)
        lp = lprime0_from_l2(lvalue2(f, prec).value, f.level, prec)
        details[f"Lprime0_{name}"] = lp
        c = Fraction(coeff)
        total += mp.mpf(c.numerator) / c.denominator * lp
    rhs = mp.mpf(scale.numerator) / scale.denominator * total
    checks = []
    form = QuadForm(*rec["tau"][0])
    tv = verify_t_value(form, rec["t"], digits=40)
    checks.append(tv.passed)
    v = villegas_rhs(form, prec)
    details["villegas_rel_err"] = float(_rel(v, lhs))
    checks.append(_rel(v, lhs) < tol)
    eq = rec.get("equivalent")
    if eq:
        c = Fraction(eq["constant"])
        single = mp.mpf(c.numerator) / c.denominator * lvalue2(modular_form(eq["form"], prec), prec).value / _pi2(prec)
        details["equivalent_rel_err"] = float(_rel(single, rhs))
        checks.append(_rel(single, rhs) < tol)
    rep = make_report(rec["id"], lhs, rhs, tol, prec.working_bits, **details)
    rep.passed = rep.passed and all(checks)
    return [rep]


def parse_printed(text: str) -> tuple:
    """'15.01873-62.96451i' -> (Decimal('15.01873'), Decimal('-62.96451'))."""
    m = re.fullmatch(r"\s*(-?[\d.]+)\s*(?:([+-])\s*([\d.]+)i)?\s*", text)
    if not m:
        raise ValueError(f"cannot parse printed value {text!r}")
    im = Decimal(m.group(3)) * (-1 if m.group(2) == "-" else 1) if m.group(2) else Decimal(0)
    return Decimal(m.group(1)), im


def _as_decimal(x, mp) -> Decimal:
    return Decimal(mp.nstr(x, mp.dps, min_fixed=-mp.dps, max_fixed=mp.dps))


def printed_digits_match(value, printed: Decimal, mp, places: int = 5) -> bool:
    """Whether ``printed`` is ``value`` truncated toward zero to ``places`` decimals.

    Printed values that are exact to working precision (integers such as
    -216.00000) also match when the computed value lies on either side.
    """
    d = _as_decimal(value, mp)
    quantum = Decimal(1).scaleb(-places)
    if d.quantize(quantum, rounding=ROUND_DOWN) == printed:
        return True
    noise = Decimal(10) ** (-(mp.dps // 2)) * max(1, abs(d))
    return abs(d - printed) < noise


def table2_rows() -> list:
    """[(QuadForm, printed text, italic)] in source order."""
    return [(QuadForm(*r["tau"]), r["t"], bool(r.get("italic", False))) for r in reference_data()["table2"]]


@_timed
def _verify_table2(prec: PrecisionContext, tol: float) -> list:
    mp = prec.mp
    reports = []
    for form, text, _ in table2_rows():
        start = time.perf_counter()
        t = t_eval(form, prec)
        re_p, im_p = parse_printed(text)
        ok = printed_digits_match(t.real, re_p, mp) and printed_digits_match(t.imag, im_p, mp)
        diff = max(abs(_as_decimal(t.real, mp) - re_p), abs(_as_decimal(t.imag, mp) - im_p))
        size = abs(complex(float(re_p), float(im_p))) or 1.0
        reports.append(VerificationReport(
            id=f"table2{form}", lhs=mp.nstr(t, 25), rhs=text, abs_err=float(diff),
            rel_err=float(diff) / size, passed=ok, precision_bits=prec.working_bits,
            wall_ms=1000 * (time.perf_counter() - start)))
    start = time.perf_counter()
    found = {p.form for p in search_cm_points(prec=prec)}
    missing = [str(f) for f, _, _ in table2_rows() if f not in found]
    reports.append(VerificationReport(
        id="table2/search", lhs=f"{len(table2_rows()) - len(missing)} rows found", rhs=f"{len(table2_rows())} rows",
        abs_err=float(len(missing)), rel_err=float(len(missing)), passed=not missing,
        precision_bits=prec.working_bits, wall_ms=1000 * (time.perf_counter() - start),
        details={"missing": missing} if missing else {}))
    return reports


def _exact_report(id: str, lhs, rhs, ok: bool, bits: int, **details) -> VerificationReport:
    return VerificationReport(id=id, lhs=str(lhs), rhs=str(rhs), abs_err=0.0 if ok else 1.0,
                              rel_err=0.0 if ok else 1.0, passed=ok, precision_bits=bits, details=details)


@_timed
def _verify_class_polynomials(prec: PrecisionContext, tol: float) -> list:
    out = []
    for D, printed in reference_data()["class_polynomials"].items():
        computed = class_polynomial(int(D))
        out.append(_exact_report(f"classpoly{D}", computed, printed, computed == printed, prec.working_bits))
    return out


def _prefix_series(name: str, through: int, prec: PrecisionContext):
    if name == "t":
        return t_qexp(through + 2)
    return modular_form(name, prec).qexp(through)


@_timed
def _verify_q_prefixes(prec: PrecisionContext, tol: float) -> list:
    out = []
    for name, spec in reference_data()["q_prefixes"].items():
        through = spec["through"]
        terms = {int(e): int(c) for e, c in spec["terms"].items()}
        s = _prefix_series(name, through, prec)
        lo = min(terms)
        computed = {e: s.coeff(e) for e in range(lo, through + 1)}
        expected = {e: terms.get(e, 0) for e in range(lo, through + 1)}
        bad = [e for e in expected if computed[e] != expected[e]]
        shown = {e: int(c) for e, c in computed.items() if c}
        out.append(_exact_report(f"qprefix:{name}", shown, terms, not bad, prec.working_bits,
                                 **({"mismatched_exponents": bad} if bad else {})))
    return out


@_timed
def _verify_sturm(prec: PrecisionContext, tol: float) -> list:
    from .lser import sturm_bound

    out = []
    for ident in reference_data()["sturm_identities"]:
        N = ident["level"]
        M = sturm_bound(N) + 60
        lhs = modular_form(ident["lhs"], prec).qexp(M)
        terms = [(Fraction(c), dilate(modular_form(name, prec), d).qexp(M)) for c, name, d in ident["rhs"]]
        ok = verify_linear_identity(lhs, terms, N)
        rhs_text = " + ".join(f"({c}) {name}({d}tau)" for c, name, d in ident["rhs"])
        out.append(_exact_report(f"sturm:{ident['lhs']}", ident["lhs"], rhs_text, ok, prec.working_bits,
                                 checked_through=sturm_bound(N) + 50))
    return out


@_timed
def _verify_periods(prec: PrecisionContext, tol: float) -> list:
    mp = prec.mp
    out = []
    for sign, key in ((1, "plus"), (-1, "minus")):
        printed = mp.mpf(reference_data()["periods"][key])
        value, err = period_integral(build_paths(sign, prec))
        # printed to 12 decimals: allow one unit in the last place
        ok = abs(value.imag - printed) <= mp.mpf("1e-12") and abs(value.real) < mp.mpf("1e-15")
        rep = make_report(f"period:{key}", value.imag, printed, 1, prec.working_bits,
                          real_part=float(value.real), quad_err=float(err))
        rep.passed = bool(ok)
        out.append(rep)
    return out


@_timed
def _verify_determinant(prec: PrecisionContext, tol: float) -> list:
    return [regulator_det(prec, tol)]


def run_entry(id: str, bits: int, tol: float) -> list:
    """Reports for one registry id; failures become failing reports."""
    prec = PrecisionContext(bits)
    start = time.perf_counter()
    try:
        groups = identity_records()
        if id in groups:
            return [r for rec in groups[id] for r in _verify_statement(rec, prec, tol)]
        samart = _samart_records()
        if id in samart:
            return _verify_samart(samart[id], prec, tol)
        if id == reference_data()["determinant"]["id"]:
            return _verify_determinant(prec, tol)
        runners = {
            "table2": _verify_table2,
            "classpoly": _verify_class_polynomials,
            "qprefix": _verify_q_prefixes,
            "sturm": _verify_sturm,
            "periods": _verify_periods,
        }
        if id not in runners:
            raise UnknownIdError(id)
        return runners[id](prec, tol)
    except UnknownIdError:
        raise
    except Exception as exc:  # reported, not raised: one failure must not hide the rest
        return [VerificationReport(id=id, lhs="", rhs="", abs_err=float("nan"), rel_err=float("nan"),
                                   passed=False, precision_bits=bits,
                                   wall_ms=1000 * (time.perf_counter() - start),
                                   error=f"{type(exc).__name__}: {exc}")]


def run(ids=("all",), bits: int = 256, tol: float = 1e-10, jobs: int = 1) -> list:
    """Run registry entries; reports come back in registry order whatever ``jobs`` is."""
    ids = expand_ids(ids)
    if jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_entry, ids, [bits] * len(ids), [tol] * len(ids)))
    else:
        results = [run_entry(i, bits, tol) for i in ids]
    return [r for group in results for r in group]
