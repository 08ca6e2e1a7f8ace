"""CSV / JSON emission with a fixed schema and deterministic ordering.

CSV columns, in order: system, quantity, subset, n, epsilon, delta, s, N,
bound_type, method, value, seed, config_hash. Rationals are "p/q" strings,
reals carry 12 significant digits, rows sort lexicographically by their
string tuple. Identical configs (same seed) therefore produce
byte-identical files.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional, Sequence

from .estimators import DiscrepancyReport, MdimReport
from .util import fmt_real

CSV_COLUMNS = ("system", "quantity", "subset", "n", "epsilon", "delta", "s", "N",
               "bound_type", "method", "value", "seed", "config_hash")


@dataclass(frozen=True)
class Record:
    system: str = ""
    quantity: str = ""
    subset: str = ""
    n: Optional[int] = None
    epsilon: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    s: Optional[float] = None
    N: Optional[int] = None
    bound_type: str = ""
    method: str = ""
    value: Optional[float] = None
    seed: Optional[int] = None
    config_hash: str = ""

    def row(self) -> tuple:
        def cell(name, v):
            if v is None:
                return ""
            if name in ("epsilon", "delta") and isinstance(v, Fraction):
                return str(v)
            if name in ("s", "value"):
                return fmt_real(v)
            return str(v)

        return tuple(cell(f.name, getattr(self, f.name)) for f in fields(self))


def write_csv(records: Sequence[Record], path) -> None:
    rows = sorted(r.row() for r in records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)


def write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def mdim_report_dict(report: MdimReport, seed: int, config_hash: str) -> dict:
    return {
        "quantity": report.quantity,
        "ladder": [
            {
                "scale": str(r.scale),
                "rate_lower": r.rate_lower.value,
                "rate_upper": r.rate_upper.value,
                "bound_types": [r.rate_lower.bound_type, r.rate_upper.bound_type],
                "methods": [r.rate_lower.method, r.rate_upper.method],
                "residuals": [r.rate_lower.residual, r.rate_upper.residual],
            }
            for r in report.ladder
        ],
        "slope_lower": report.slope_lower,
        "slope_upper": report.slope_upper,
        "window": list(report.window),
        "caveats": list(report.caveats),
        "extras": [list(e) for e in report.extras],
        "seed": seed,
        "config_hash": config_hash,
    }


def discrepancy_report_dict(report: DiscrepancyReport, seed: int, config_hash: str) -> dict:
    return {
        "theorem_id": report.theorem_id,
        "left": mdim_report_dict(report.left, seed, config_hash),
        "right": [mdim_report_dict(r, seed, config_hash) for r in report.right],
        "per_scale": [list(row) for row in report.per_scale],
        "discrepancy": report.discrepancy,
        "verdict": report.verdict,
        "tolerance": report.tolerance,
        "hard_checks": report.hard_checks,
        "caveats": list(report.caveats),
        "seed": seed,
        "config_hash": config_hash,
    }


def mdim_report_records(report: MdimReport, system_desc: str, subset: str,
                        seed: int, config_hash: str,
                        scale_column: str = "epsilon",
                        fixed_epsilon: Optional[Fraction] = None) -> list:
    """Ladder rungs and slope summary as CSV records.

    ``scale_column`` says which column the rung scale lands in ("epsilon"
    for eps-ladders, "delta" for delta-ladders at fixed eps).
    """
    records = []
    for rung in report.ladder:
        for rate, tag in ((rung.rate_lower, "lower_curve"), (rung.rate_upper, "upper_curve")):
            kwargs = {
                "system": system_desc,
                "quantity": f"{report.quantity}.{tag}",
                "subset": subset,
                "bound_type": rate.bound_type,
                "method": rate.method,
                "value": rate.value,
                "seed": seed,
                "config_hash": config_hash,
            }
            if scale_column == "epsilon":
                kwargs["epsilon"] = rung.scale
            else:
                kwargs["delta"] = rung.scale
                kwargs["epsilon"] = fixed_epsilon
            records.append(Record(**kwargs))
    for tag, slope in (("slope_lower", report.slope_lower), ("slope_upper", report.slope_upper)):
        records.append(Record(system=system_desc, quantity=f"{report.quantity}.{tag}",
                              subset=subset, epsilon=fixed_epsilon,
                              bound_type="lower" if tag == "slope_lower" else "upper",
                              method="least_squares", value=slope, seed=seed,
                              config_hash=config_hash))
    return records
