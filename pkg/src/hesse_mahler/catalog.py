"""JSON-lines cache of the CM-point search with t(tau) values."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .binforms import QuadForm, class_number, in_Fprime, scale_form, search_cm_points
from .mpnum import DEFAULT, PrecisionContext
from .qseries import t_eval

__all__ = ["CatalogError", "CatalogRow", "catalog_rows", "cache_catalog", "load_catalog", "digits_for"]

FIELDS = ("a", "b", "c", "D", "h", "h3", "t_re", "t_im", "digits")


class CatalogError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class CatalogRow:
    form: QuadForm
    D: int
    h: int
    h3: int
    t_re: str
    t_im: str
    digits: int

    def as_dict(self) -> dict:
        return {"a": self.form.a, "b": self.form.b, "c": self.form.c, "D": self.D, "h": self.h,
                "h3": self.h3, "t_re": self.t_re, "t_im": self.t_im, "digits": self.digits}

    def t(self, prec: PrecisionContext = DEFAULT):
        return prec.mp.mpc(self.t_re, self.t_im)


def digits_for(prec: PrecisionContext) -> int:
    """Significant digits stored for values computed in ``prec``."""
    return int(prec.working_bits * math.log10(2)) - 10


def _row(form: QuadForm, h: int, h3: int, prec: PrecisionContext) -> CatalogRow:
    mp = prec.mp
    digits = digits_for(prec)
    t = t_eval(form, prec)
    noise = mp.mpf(10) ** (-digits) * max(1, abs(t))
    re_, im_ = (x if abs(x) > noise else mp.zero for x in (t.real, t.imag))
    return CatalogRow(form, form.disc, h, h3, mp.nstr(re_, digits), mp.nstr(im_, digits), digits)


def catalog_rows(prec: PrecisionContext = DEFAULT) -> list:
    return [_row(p.form, p.class_number_self, p.class_number_3tau, prec) for p in search_cm_points(prec=prec)]


def cache_catalog(path, prec: PrecisionContext = DEFAULT) -> int:
    rows = catalog_rows(prec)
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r.as_dict()) + "\n")
    return len(rows)


def _validate(obj, line: int, prec: PrecisionContext) -> CatalogRow:
    if not isinstance(obj, dict) or set(obj) != set(FIELDS):
        raise CatalogError(f"expected fields {', '.join(FIELDS)}", line)
    for key in ("a", "b", "c", "D", "h", "h3", "digits"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise CatalogError(f"field {key!r} must be an integer", line)
    for key in ("t_re", "t_im"):
        if not isinstance(obj[key], str):
            raise CatalogError(f"field {key!r} must be a decimal string", line)
        try:
            prec.mp.mpf(obj[key])
        except (ValueError, TypeError):
            raise CatalogError(f"field {key!r} is not a number", line) from None
    try:
        form = QuadForm(obj["a"], obj["b"], obj["c"])
    except ValueError as exc:
        raise CatalogError(str(exc), line) from None
    if obj["D"] != form.disc:
        raise CatalogError(f"D = {obj['D']} but b^2 - 4ac = {form.disc}", line)
    if obj["h"] != class_number(form.disc):
        raise CatalogError(f"h = {obj['h']} but h({form.disc}) = {class_number(form.disc)}", line)
    h3 = class_number(scale_form(form, 3).disc)
    if obj["h3"] != h3:
        raise CatalogError(f"h3 = {obj['h3']} but h(3 tau) = {h3}", line)
    if not in_Fprime(form.tau(prec), prec):
        raise CatalogError(f"{form} is not in F'", line)
    return CatalogRow(form, obj["D"], obj["h"], obj["h3"], obj["t_re"], obj["t_im"], obj["digits"])


def load_catalog(path, prec: PrecisionContext = DEFAULT, reverify: int = 3, seed: int = 0) -> list:
    """Read and validate a catalog.

    Rows stored with fewer digits than ``prec`` provides are recomputed.  Then
    ``reverify`` randomly chosen rows are recomputed and compared with the
    stored values.
    """
    mp = prec.mp
    rows = []
    stale = set()
    for i, text in enumerate(Path(path).read_text().splitlines(), start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"invalid JSON ({exc.msg})", i) from None
        row = _validate(obj, i, prec)
        if row.digits < digits_for(prec):
            row = _row(row.form, row.h, row.h3, prec)
            stale.add(len(rows))
        rows.append((i, row))
    fresh = [k for k in range(len(rows)) if k not in stale]
    rng = random.Random(seed)
    for k in rng.sample(fresh, min(reverify, len(fresh))):
        line, row = rows[k]
        t = t_eval(row.form, prec)
        tol = mp.mpf(10) ** (2 - row.digits) * max(1, abs(t))
        if abs(t - row.t(prec)) > tol:
            raise CatalogError(f"stored t for {row.form} does not match recomputation", line)
    return [row for _, row in rows]
