"""Run artifacts on disk, and offline replay of a telemetry log."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .config import ScenarioConfig
from .estimator import ContactEstimator
from .pipeline import EventRecord, RunReport
from .telemetry import HEADER, read_telemetry

SUMMARY_COLUMNS = ["name", "seed", "incline_true_deg", "incline_est_deg", "error_deg",
                   "heading_rad", "outcome", "contacts", "sim_time_s", "reason"]
EVENT_COLUMNS = ["t", "arm_id", "true_arm", "pc_x", "pc_y", "pc_z", "tau_x", "tau_y", "tau_z",
                 "match_angle", "tie"]


def summary_row(r: RunReport) -> list:
    # elapsed time is simulated time so that reports stay byte-identical across hosts
    return [r.name, r.seed, repr(r.true_incline_deg), repr(r.est_incline_deg),
            repr(r.error_deg), repr(r.heading), r.outcome, len(r.events), repr(r.sim_time),
            r.abort_reason]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def events_csv(r: RunReport) -> str:
    rows = [[repr(e.time), e.arm_id, e.true_arm, *map(repr, e.p_c), *map(repr, e.tau),
             repr(e.match_angle), int(e.tie)] for e in r.events]
    return _csv_text(EVENT_COLUMNS, rows)


def report_text(r: RunReport, cfg: ScenarioConfig | None = None) -> str:
    out = [
        f"scenario: {r.name}",
        f"world.incline_deg = {r.true_incline_deg!r}",
        f"seed: {r.seed}",
        f"outcome: {r.outcome}" + (f" ({r.abort_reason})" if r.abort_reason else ""),
        f"sim time: {r.sim_time!r} s",
    ]
    if r.truncated:
        out.append("log truncated: partial report")
    out.append("")
    out.append("phases:")
    out += [f"  {t:10.3f}  {ph}" for t, ph in r.phases]
    out.append("")
    out.append(f"contact events: {len(r.events)}")
    for e in r.events:
        p = ", ".join(f"{v:+.6f}" for v in e.p_c)
        out.append(f"  t={e.time:.3f} arm {e.arm_id} at ({p}) match {math.degrees(e.match_angle):.3f} deg"
                   + (" [tie]" if e.tie else ""))
    if r.plane is not None:
        pl = r.plane
        out += [
            "",
            f"plane ({pl.source}):",
            "  centroid " + ", ".join(f"{v:+.6f}" for v in pl.centroid),
            "  normal   " + ", ".join(f"{v:+.6f}" for v in pl.normal),
            f"  heading  {pl.heading:+.6f} rad",
            f"  incline  {math.degrees(pl.incline):.4f} deg (true {r.true_incline_deg:.4f},"
            f" error {r.error_deg:+.4f})",
        ]
    if r.plan is not None:
        pn = r.plan
        out += ["", "landing plan:",
                "  approach " + ", ".join(f"{v:+.4f}" for v in pn.approach_point),
                f"  yaw      {pn.target_yaw:+.6f} rad"]
        for side, sp in zip(("left", "right"), pn.ee_setpoints):
            out.append(f"  {side:5s}    " + ", ".join(f"{v:+.4f}" for v in sp))
    if r.outcome == "Landed":
        rpy = ", ".join(f"{math.degrees(v):+.4f}" for v in r.final_rpy[:2])
        d = ", ".join(f"{v * 1000:+.3f}" for v in r.stance_distances)
        out += ["", f"final roll, pitch: {rpy} deg", f"stance heights (gear, left, right): {d} mm"]
    if cfg is not None:
        out += ["", "configuration:", cfg.dump().rstrip("\n")]
    return "\n".join(out) + "\n"


def write_run(r: RunReport, out_dir, cfg: ScenarioConfig | None = None) -> Path:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / "summary.csv").write_text(_csv_text(SUMMARY_COLUMNS, [summary_row(r)]))
    (d / "telemetry.csv").write_text(HEADER + "\n" + "".join(line + "\n" for line in r.telemetry))
    (d / "events.csv").write_text(events_csv(r))
    (d / "report.txt").write_text(report_text(r, cfg))
    return d


def replay(lines, cfg: ScenarioConfig) -> RunReport:
    """Re-run observer, detection, localization and plane fit over a recorded log."""
    rows, truncated = read_telemetry(lines)
    dt = cfg["sim.dt"]
    est = ContactEstimator(cfg.inertia(), cfg.allocation(), cfg.arms(), dt,
                           cfg["observer.gain"], cfg.detection())
    r = RunReport(cfg["name"], cfg["sensor.seed"], cfg["world.incline_deg"], "Replayed")
    r.truncated = truncated
    phase = None
    for row in rows:
        if row.inp.phase != phase:
            phase = row.inp.phase
            r.phases.append((row.inp.t, phase))
        _, ev = est.process(row.inp)
        if ev is not None:
            r.events.append(EventRecord(ev.time, ev.arm_id, ev.p_c_world, ev.tau_observed,
                                        ev.match_angle, ev.tie, 0))
    n = cfg["probe.contacts"]
    if len(est.events) >= n:
        r.plane = est.plane(n)
    r.outcome = phase or "Empty"
    r.sim_time = rows[-1].inp.t if rows else 0.0
    return r
