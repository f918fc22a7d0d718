"""Performance metrics J1..J6 and the comparison report."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument

ABSENT = "absent"
REPORT_COLUMNS = ["case", "algorithm", "J1", "J2", "J3", "J4", "J5", "J6",
                  "cross_track_max", "reached", "safe", "saturations"]


@dataclass(frozen=True)
class MetricsReport:
    J1: float       # min obstacle distance, m
    J2: float       # max |psi - u|, rad
    J3: float       # max command step, rad
    J4: float       # integrated command-rate variation, rad
    J5: float       # reach time, s (horizon when unreached)
    J6: float       # path length, m
    cross_track_max: float
    reached: bool
    C_s: float
    saturations: int = 0

    @property
    def safe(self) -> bool:
        return self.J1 >= self.C_s


def _wrap(a: np.ndarray) -> np.ndarray:
    w = np.mod(a + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def metrics(trace, tracks: Sequence, C_s: Optional[float] = None,
            horizon: Optional[float] = None) -> MetricsReport:
    """Metrics of a trace over its own time grid.

    ``C_s`` and ``horizon`` default to the values stored with the trace.
    """
    n = len(trace.t)
    if n == 0:
        raise InvalidArgument("empty trace")
    sc = trace.scenario or {}
    C_s = float(sc.get("C_s", 0.0)) if C_s is None else C_s
    horizon = float(sc.get("horizon", trace.t[-1])) if horizon is None else horizon
    t = np.asarray(trace.t, dtype=float)
    x = np.asarray(trace.x, dtype=float)
    y = np.asarray(trace.y, dtype=float)
    u = np.asarray(trace.u, dtype=float)
    if tracks:
        d = np.full(n, np.inf)
        for tr in tracks:
            vx, vy = tr.velocity
            d = np.minimum(d, np.hypot(x - (tr.p0[0] + vx * t), y - (tr.p0[1] + vy * t)))
        J1 = float(d.min())
    else:
        J1 = math.inf
    J2 = float(np.abs(_wrap(np.asarray(trace.psi) - u)).max())
    du = np.diff(u)
    J3 = float(np.abs(du).max()) if du.size else 0.0
    if du.size >= 2:
        udot = du / np.diff(t)
        J4 = float(np.sum(np.abs(np.diff(udot)) * np.diff(t)[1:]))
    else:
        J4 = 0.0
    reached = trace.status == "reached"
    J5 = float(trace.reach_time) if reached else float(horizon)
    J6 = float(np.sum(np.hypot(np.diff(x), np.diff(y))))
    if sc.get("waypoint") is not None:
        x0, y0 = x[0], y[0]
        wx, wy = sc["waypoint"]
        L = math.hypot(wx - x0, wy - y0)
        xt = np.abs((wx - x0) * (y - y0) - (wy - y0) * (x - x0)) / L if L > 0 else np.zeros(n)
        cross = float(xt.max())
    else:
        cross = math.nan
    return MetricsReport(J1, J2, J3, J4, J5, J6, cross, reached, C_s,
                         int(getattr(trace, "saturation_count", 0)))


def compare_report(reports: dict, algorithms: Sequence[str] = ("proposed", "vo")) -> list:
    """Rows ``case x algorithm``; a missing algorithm yields an ``absent`` row.

    Only algorithms present somewhere in ``reports`` get columns, so a single
    algorithm run gives one row per case.
    """
    if not reports:
        raise InvalidArgument("report needs at least one case")
    present = [a for a in algorithms if any(a in v for v in reports.values())]
    extra = sorted({a for v in reports.values() for a in v} - set(present))
    rows = []
    for case in sorted(reports, key=_case_key):
        for alg in present + extra:
            m = reports[case].get(alg)
            if m is None:
                rows.append({c: ABSENT for c in REPORT_COLUMNS} | {"case": case, "algorithm": alg})
                continue
            rows.append({"case": case, "algorithm": alg, "J1": m.J1, "J2": m.J2, "J3": m.J3,
                         "J4": m.J4, "J5": m.J5, "J6": m.J6, "cross_track_max": m.cross_track_max,
                         "reached": m.reached, "safe": m.safe, "saturations": m.saturations})
    return rows


def _case_key(c):
    return (0, c, "") if isinstance(c, int) else (1, 0, str(c))


def _cell(v):
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report(rows: list, stem, header: Optional[dict] = None) -> tuple:
    """Write ``<stem>.csv`` and ``<stem>.json`` with the same rows.

    ``header`` entries become ``# key: value`` comment lines in the CSV.
    """
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    header = header or {}
    with csv_path.open("w", newline="") as fh:
        for k, v in header.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([_cell(r[c]) for c in REPORT_COLUMNS])

    def js(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    doc = {"header": header, "columns": REPORT_COLUMNS,
           "rows": [{c: js(r[c]) for c in REPORT_COLUMNS} for r in rows]}
    json_path.write_text(json.dumps(doc, indent=1))
    return csv_path, json_path


def report_dict(m: MetricsReport) -> dict:
    d = asdict(m)
    d["safe"] = m.safe
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}
