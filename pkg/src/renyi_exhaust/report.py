"""Cross-check the certified eigenvalue, the density fixed point and the
Monte Carlo stage ratios against each other."""

from __future__ import annotations

import datetime as _dt
import math

import numpy as np

from .interval import Interval

REFERENCE_R_HALF = Interval(0.616445 - 0.0035, 0.616445 + 0.0035)
DENSITY_TOL = 1e-8
FIRST_SIM_STAGE = 3


class MissingInput(ValueError):
    pass


class InconsistentResults(RuntimeError):
    def __init__(self, report: dict, failed: list):
        super().__init__("inconsistent results: " + ", ".join(failed))
        self.report = report
        self.failed = failed


def _lambda_from(cert) -> Interval:
    if isinstance(cert, dict):
        return Interval.from_json(cert["lambda"])
    return cert.lam


def _c_from(fstar) -> float:
    if isinstance(fstar, dict):
        return float(fstar["C"])
    return float(fstar.C)


def _ratios_from(sim) -> list:
    out = []
    for row in sim:
        d = row if isinstance(row, dict) else row.row()
        stage = int(d["stage"])
        ratio = float(d["ratio"])
        if stage >= FIRST_SIM_STAGE and not math.isnan(ratio):
            out.append((stage, ratio))
    return out


def build_report(cert, fstar=None, sim=None, timestamp: bool = True) -> dict:
    """Assemble the cross-check report; raises InconsistentResults if any
    present section disagrees with the certified enclosure."""
    if cert is None:
        raise MissingInput("an eigenvalue certificate is required")
    lam = _lambda_from(cert)
    r_half = Interval(lam.lo * 0.5, lam.hi * 0.5)
    failed = []
    rep: dict = {
        "spectral": {
            "lambda": lam.to_json(),
            "R_half": r_half.to_json(),
            "within_reference": r_half.subset(REFERENCE_R_HALF),
        }
    }
    if not rep["spectral"]["within_reference"]:
        failed.append("spectral")

    if fstar is None:
        rep["density"] = {"status": "absent"}
    else:
        C = _c_from(fstar)
        window = lam + Interval(-DENSITY_TOL, DENSITY_TOL)
        ok = window.contains(1.0 + C)
        rep["density"] = {
            "status": "present",
            "C": repr(C),
            "R_half": repr((1.0 + C) / 2.0),
            "one_plus_C_in_lambda": ok,
            "tolerance": repr(DENSITY_TOL),
        }
        if not ok:
            failed.append("density")

    if sim is None:
        rep["simulation"] = {"status": "absent"}
    else:
        ratios = _ratios_from(sim)
        if len(ratios) < 2:
            rep["simulation"] = {"status": "present", "stages_used": [s for s, _ in ratios],
                                 "overlaps_certified": False, "note": "need two or more stages >= 3"}
            failed.append("simulation")
        else:
            vals = np.array([r for _, r in ratios])
            mean = float(vals.mean())
            sd = float(vals.std(ddof=1))
            band = Interval(mean - 3 * sd, mean + 3 * sd)
            ok = band.intersects(r_half)
            rep["simulation"] = {
                "status": "present",
                "stages_used": [s for s, _ in ratios],
                "ratio_mean": repr(mean),
                "ratio_sd": repr(sd),
                "band": band.to_json(),
                "overlaps_certified": ok,
            }
            if not ok:
                failed.append("simulation")

    rep["consistent"] = not failed
    if timestamp:
        rep["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    if failed:
        raise InconsistentResults(rep, failed)
    return rep


def to_markdown(rep: dict) -> str:
    sp = rep["spectral"]
    lines = [
        "# Exhaustion ratio cross-check",
        "",
        f"- certified lambda: [{sp['lambda']['lo']}, {sp['lambda']['hi']}]",
        f"- R_1/2 = lambda/2: [{sp['R_half']['lo']}, {sp['R_half']['hi']}]",
        f"- inside 0.616445 +- 0.0035: {sp['within_reference']}",
    ]
    d = rep["density"]
    if d["status"] == "absent":
        lines.append("- density: absent")
    else:
        lines.append(f"- density C = {d['C']}, 1 + C inside lambda (+-{d['tolerance']}): {d['one_plus_C_in_lambda']}")
    s = rep["simulation"]
    if s["status"] == "absent":
        lines.append("- simulation: absent")
    elif "ratio_mean" in s:
        lines.append(f"- simulation stages {s['stages_used']}: mean ratio {s['ratio_mean']} "
                     f"(sd {s['ratio_sd']}), band overlaps R_1/2: {s['overlaps_certified']}")
    else:
        lines.append(f"- simulation: {s['note']}")
    lines.append(f"- consistent: {rep['consistent']}")
    return "\n".join(lines) + "\n"
