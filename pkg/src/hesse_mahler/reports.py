"""Verification reports shared by the library and the command line."""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath

__all__ = ["VerificationReport", "make_report"]


@dataclass
class VerificationReport:
    id: str
    lhs: str
    rhs: str
    abs_err: float
    rel_err: float
    passed: bool
    precision_bits: int
    wall_ms: float = 0.0
    details: dict = field(default_factory=dict)
    error: str | None = None

    def as_dict(self) -> dict:
        out = {
            "id": self.id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "pass": self.passed,
            "precision_bits": self.precision_bits,
            "wall_ms": round(self.wall_ms, 3),
        }
        if self.details:
            out["details"] = self.details
        if self.error:
            out["error"] = self.error
        return out


def _plain(v, digits):
    # mp numbers from any precision context become strings
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if hasattr(v, "real") and hasattr(v, "imag"):
        return mpmath.nstr(v, digits)
    return str(v)


def make_report(id: str, lhs, rhs, rel_tol, bits: int, digits: int = 30, **details) -> VerificationReport:
    """Compare two mp numbers; pass iff the relative error is below ``rel_tol``."""
    diff = abs(lhs - rhs)
    scale = abs(rhs)
    rel = diff / scale if scale else diff
    return VerificationReport(
        id=id,
        lhs=mpmath.nstr(lhs, digits),
        rhs=mpmath.nstr(rhs, digits),
        abs_err=float(diff),
        rel_err=float(rel),
        passed=bool(rel < rel_tol),
        precision_bits=bits,
        details={k: _plain(v, digits) for k, v in details.items()},
    )
