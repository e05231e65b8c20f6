"""Report records and their deterministic JSON/CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

SIG_DIGITS = 12
DEFAULT_REL_TOL = 1e-6


def round_sig(x: float, digits: int = SIG_DIGITS):
    """Round to ``digits`` significant digits; non-finite values become strings."""
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{digits}g}") + 0.0


def _clean(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def default_tolerance(lhs: float, rhs: float, rel: float = DEFAULT_REL_TOL) -> float:
    return rel * max(abs(lhs), abs(rhs), 1.0)


@dataclass
class VerificationReport:
    """Outcome of one inequality check.

    ``deficit`` is the slack of the inequality in its stated direction:
    ``rhs - lhs`` for ``lhs <= rhs`` (the default) and ``lhs - rhs`` for
    ``lhs >= rhs``. The check passes iff ``deficit >= -tolerance``.
    """

    inequality_id: str
    lhs: float
    rhs: float
    deficit: float
    tolerance: float
    passed: bool
    params: Dict[str, Any] = field(default_factory=dict)
    provenance: str = ""

    @classmethod
    def build(
        cls,
        inequality_id: str,
        lhs: float,
        rhs: float,
        relation: str = "<=",
        tolerance: Optional[float] = None,
        rel_tol: float = DEFAULT_REL_TOL,
        params: Optional[dict] = None,
        provenance: str = "",
    ) -> "VerificationReport":
        lhs, rhs = float(lhs), float(rhs)
        if relation == "<=":
            deficit = rhs - lhs
        elif relation == ">=":
            deficit = lhs - rhs
        else:
            raise ValueError(f"relation must be '<=' or '>=', got {relation!r}")
        tol = default_tolerance(lhs, rhs, rel_tol) if tolerance is None else float(tolerance)
        params = dict(params or {})
        params.setdefault("relation", relation)
        passed = bool(deficit >= -tol)
        return cls(inequality_id, lhs, rhs, deficit, tol, passed, params, provenance)

    def to_record(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "params": _clean(self.params),
            "lhs": round_sig(self.lhs),
            "rhs": round_sig(self.rhs),
            "deficit": round_sig(self.deficit),
            "tolerance": round_sig(self.tolerance),
            "passed": bool(self.passed),
            "provenance": self.provenance,
        }


@dataclass
class SweepResult:
    parameter_values: np.ndarray
    implied_values: np.ndarray
    limit_estimate: float
    target: float
    label: str = ""
    extras: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.parameter_values = np.asarray(self.parameter_values, dtype=float)
        self.implied_values = np.asarray(self.implied_values, dtype=float)
        if self.parameter_values.shape != self.implied_values.shape:
            raise ValueError("parameter and implied arrays differ in length")

    def to_record(self) -> dict:
        return {
            "sweep": self.label,
            "parameter_values": _clean(self.parameter_values),
            "implied_values": _clean(self.implied_values),
            "limit_estimate": round_sig(self.limit_estimate),
            "target": round_sig(self.target),
            "extras": _clean(self.extras),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "implied_value"])
        for a, b in zip(self.parameter_values, self.implied_values):
            w.writerow([f"{a:.12g}", f"{b:.12g}"])
        return buf.getvalue()


def richardson_limit(params, values) -> float:
    """Extrapolate to parameter 0 with the quadratic through the last three points.

    Exact for values that are polynomials of degree <= 2 in the parameter,
    so it removes the first-order term of a smooth expansion.
    """
    x = np.asarray(params, dtype=float)[-3:]
    y = np.asarray(values, dtype=float)[-3:]
    if x.size < 3:
        return float(y[-1])
    # Lagrange basis evaluated at 0
    l0 = x[1] * x[2] / ((x[0] - x[1]) * (x[0] - x[2]))
    l1 = x[0] * x[2] / ((x[1] - x[0]) * (x[1] - x[2]))
    l2 = x[0] * x[1] / ((x[2] - x[0]) * (x[2] - x[1]))
    return float(l0 * y[0] + l1 * y[1] + l2 * y[2])


def dumps_json(records: Iterable[dict]) -> str:
    return json.dumps(list(records), indent=2, sort_keys=False, allow_nan=False) + "\n"


CSV_HEADER = ["inequality_id", "space", "p", "N", "avr", "lhs", "rhs", "deficit", "passed"]


def reports_to_csv(reports: List[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        p = r.params
        w.writerow(
            [
                r.inequality_id,
                p.get("space", ""),
                _fmt(p.get("p", "")),
                _fmt(p.get("N", "")),
                _fmt(p.get("avr", "")),
                _fmt(r.lhs),
                _fmt(r.rhs),
                _fmt(r.deficit),
                "true" if r.passed else "false",
            ]
        )
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (float, int, np.floating)) and not isinstance(x, bool):
        return f"{float(x) + 0.0:.12g}"
    return str(x)
