"""End-to-end acceptance checks, one block per criterion.

Each check records a line that the terminal summary prints as PASS or FAIL.
"""

import random
import time
from decimal import Decimal

import pytest

from conftest import record
from hesse_mahler.hesse import (
    DIFFERENTIAL_RATIO,
    KERNEL_T2,
    composition_check,
    curve_C,
    differential_ratio_check,
    kernel_check,
    phi_sigma,
    velu_phi,
)
from hesse_mahler.lser import lvalue2, lvalue2_dirichlet, modular_form
from hesse_mahler.mahler import MahlerInput, m3, villegas_direct_sum, villegas_rhs
from hesse_mahler.mpnum import PrecisionContext
from hesse_mahler.qseries import t_eval
from hesse_mahler.registry import (
    _as_decimal,
    identity_records,
    parse_printed,
    run_entry,
    table2_rows,
)
from hesse_mahler.thetalat import TABLE1, aggregate_invariance_check, table1_form, theta_eval_imaginary

C1 = "1 tabulated t(tau) values at 128 bits in < 120 s"
C2 = "2 ten m3 statements at 256 bits, rel < 1e-10, < 180 s each, lattice sums agree"
C3 = "3 eta-quotient identities via L'(f, 0), rel < 1e-10"
C4 = "4 regulator determinant, rel < 1e-10"
C5 = "5 period integrals to the printed digits"
C6 = "6 exact data: class polynomials, q-prefixes, Sturm identities"
C7 = "7 property suites (a)-(f)"

STATEMENT_GROUPS = list(identity_records())
ALL_FORMS = list(TABLE1) + ["f108"]


def _check(criterion, ok, message):
    record(criterion, ok, message)
    assert ok, message


def _reports_ok(criterion, reports):
    for r in reports:
        record(criterion, r.passed, f"{r.id}: rel_err={r.rel_err:.3e} {r.error or ''}".strip())
    bad = [r.id for r in reports if not r.passed]
    assert not bad, bad


# criterion 1

@pytest.fixture(scope="module")
def table2_run():
    start = time.perf_counter()
    reports = run_entry("table2", 128, 1e-10)
    return reports, time.perf_counter() - start


def test_c1_table_matches_printed_digits(table2_run):
    reports, elapsed = table2_run
    _reports_ok(C1, reports)
    _check(C1, len(reports) == len(table2_rows()) + 1, f"{len(reports) - 1} rows checked")
    _check(C1, elapsed < 120, f"runtime {elapsed:.1f} s")


@pytest.mark.xfail(strict=True, reason="printed values are truncated, not rounded: "
                                       "up to 1e-5 off in the last digit")
def test_c1_literal_half_unit_bound():
    prec = PrecisionContext(128)
    mp = prec.mp
    worst, over = Decimal(0), 0
    for form, text, _ in table2_rows():
        t = t_eval(form, prec)
        for value, printed in zip((t.real, t.imag), parse_printed(text)):
            d = abs(_as_decimal(value, mp) - printed)
            worst = max(worst, d)
            over += d >= Decimal("5e-6")
    record("1' literal |delta| < 5e-6 per component (expected failure)", over == 0,
           f"{over} of {2 * len(table2_rows())} components off by >= 5e-6, worst {worst:.2e}")
    assert over == 0


# criterion 2

def test_c2_ten_statements():
    n = sum(len(recs) for recs in identity_records().values())
    _check(C2, n == 10, f"{n} statements registered")


@pytest.mark.parametrize("group", STATEMENT_GROUPS)
def test_c2_statement(group):
    reports = run_entry(group, 256, 1e-10)
    _reports_ok(C2, reports)
    for r in reports:
        _check(C2, r.wall_ms < 180_000, f"{r.id}: {r.wall_ms / 1000:.1f} s")
        villegas = [v for k, v in r.details.items() if k.startswith("villegas_rel_err")]
        _check(C2, villegas and all(v < 1e-10 for v in villegas), f"{r.id}: lattice sum rel {villegas}")


# criterion 3

@pytest.mark.parametrize("id", ["1.6", "1.8", "1.9"])
def test_c3_eta_quotient_identity(id):
    reports = run_entry(id, 256, 1e-10)
    _reports_ok(C3, reports)


# criterion 4

def test_c4_regulator_determinant():
    reports = run_entry("thm1.4", 256, 1e-10)
    _reports_ok(C4, reports)
    _check(C4, reports[0].details["ab"] == 4, f"ab = {reports[0].details['ab']}")


# criterion 5

def test_c5_periods():
    reports = run_entry("periods", 256, 1e-10)
    _reports_ok(C5, reports)
    for r in reports:
        _check(C5, abs(r.details["real_part"]) < 1e-15, f"{r.id}: real part {r.details['real_part']:.2e}")


# criterion 6

@pytest.mark.parametrize("id", ["classpoly", "qprefix", "sturm"])
def test_c6_exact_data(id):
    reports = run_entry(id, 256, 1e-10)
    _reports_ok(C6, reports)
    expected = {"classpoly": 4, "qprefix": 4, "sturm": 4}[id]
    _check(C6, len(reports) == expected, f"{id}: {len(reports)} checks")


# criterion 7

@pytest.mark.parametrize("name", ALL_FORMS)
def test_c7a_gamma0_transformations(name, prec):
    results = aggregate_invariance_check(table1_form(name), prec=prec, tol=1e-20)
    worst = max(float(r.abs_err) for r in results)
    _check(C7, len(results) == 6 and all(r.passed for r in results), f"(a) {name}: worst {worst:.2e}")


@pytest.mark.parametrize("name", ALL_FORMS)
def test_c7b_poisson_crossover(name, prec):
    y = prec.mp.mpf("0.4")
    theta = table1_form(name)
    d = abs(theta_eval_imaginary(theta, y, prec, "direct") - theta_eval_imaginary(theta, y, prec, "dual"))
    _check(C7, d < 1e-25, f"(b) {name}: {float(d):.2e}")


@pytest.mark.parametrize("name", ALL_FORMS + ["f27", "f36", "g36", "g144"])
def test_c7c_lvalue_dirichlet_oracle(name, prec128):
    f = modular_form(name, prec128)
    d = abs(float(lvalue2(f, prec128).value) - lvalue2_dirichlet(f, 20000).value)
    _check(C7, d < 1e-4, f"(c) {name}: {d:.2e}")


def _statement_ts(prec):
    for recs in identity_records().values():
        for rec in recs:
            yield rec.id, t_eval(rec.taus[0], prec)


def test_c7d_cube_root_and_conjugation(prec):
    mp = prec.mp
    for id, t in _statement_ts(prec):
        k = MahlerInput.from_t(t, prec).k
        base = m3(t, prec, tol=1e-20)
        rotated = m3(t, prec, tol=1e-20, k=k * mp.expjpi(mp.mpf(2) / 3))
        conj = m3(mp.conj(t), prec, tol=1e-20)
        err = max(abs(rotated - base), abs(conj - base)) / abs(base)
        _check(C7, err < 1e-10, f"(d) {id}: {float(err):.2e}")


def test_c7e_villegas_direct_truncation(prec128):
    seen = set()
    for recs in identity_records().values():
        for rec in recs:
            for form in rec.taus:
                if form in seen:
                    continue
                seen.add(form)
                d = abs(float(villegas_rhs(form, prec128)) - villegas_direct_sum(form, 2000))
                _check(C7, d < 1e-3, f"(e) {form}: {d:.2e}")


def test_c7f_isogeny_suite(prec):
    mp = prec.mp
    _check(C7, kernel_check(), "(f) kernel points lie on C and are annihilated")
    phi, phis = velu_phi(), phi_sigma()
    C = curve_C()
    rng = random.Random(11)
    worst = mp.mpf(0)
    for _ in range(20):
        P = C.random_point(rng, prec)
        Q = phi(P, prec)
        worst = max(worst, C.residual(P, prec), phi.target.residual(Q, prec),
                    phis.target.residual(phis(Q, prec), prec))
    _check(C7, worst < 1e-25, f"(f) on-curve residual {float(worst):.2e}")
    _check(C7, phi((KERNEL_T2[0].to_mp(prec), mp.mpc(0)), prec, check=False) is None,
           "(f) T2 maps to the point at infinity")
    comp = composition_check(20, prec)
    _check(C7, comp < 1e-25, f"(f) phi^sigma o phi vs [4]: {float(comp):.2e}")
    res = differential_ratio_check(prec=prec, tol=1e-20)
    _check(C7, res["passed"], "(f) differential ratio -(52 + 30 sqrt 3)")
    _check(C7, DIFFERENTIAL_RATIO.norm() == 4, f"(f) norm of the ratio {DIFFERENTIAL_RATIO.norm()}")
