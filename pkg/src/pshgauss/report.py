"""Report serialization: JSON (schema-stable, byte-reproducible) and CSV."""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone

from .verify import Report

COLUMNS = ("suite", "identity", "f", "g", "dim", "method", "lhs", "rhs", "abs_err", "rel_err",
           "tol", "stderr", "nodes", "samples", "seed", "pass")


def _finite(x):
    # JSON has no inf/nan; encode them as strings so the output stays valid
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, list):
        return [_finite(v) for v in x]
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    return x


def to_json(report: Report, timestamp: bool = True) -> str:
    d = report.to_dict()
    if timestamp:
        d["timestamp"] = report.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(_finite(d), indent=2) + "\n"


def complex_text(v) -> str:
    """``re+imi`` form used by the CSV export."""
    re_, im = v
    sign = "-" if im < 0 or (im == 0 and math.copysign(1.0, im) < 0) else "+"
    return f"{re_!r}{sign}{abs(im)!r}i"


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for c in report.checks:
        rec = c.to_record()
        row = []
        for col in COLUMNS:
            v = rec[col]
            if col in ("lhs", "rhs"):
                v = complex_text(v)
            elif v is None:
                v = ""
            row.append(v)
        w.writerow(row)
    return buf.getvalue()


def write_report(report: Report, path: str, fmt: str = "json") -> None:
    text = to_json(report) if fmt == "json" else to_csv(report)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def strip_timestamp(text: str) -> str:
    """JSON report text with the timestamp field removed (for replay comparison)."""
    d = json.loads(text)
    d.pop("timestamp", None)
    return json.dumps(d, indent=2) + "\n"
