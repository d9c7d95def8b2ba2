"""Closed-loop probing and landing scenario.

Phases: Approach -> Probe -> (RaiseArm -> Probe | Reposition -> Probe)* ->
PlanLanding -> Descend -> Landed, with Aborted reachable from anywhere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..kinematics import (
    SingularConfigurationError,
    UnreachableTargetError,
    differential_ik,
    ee_position,
    inverse_kinematics,
)
from ..se3 import EulerRPY, GimbalLockError, rot_to_rpy, rot_z
from ..surface import (
    DegeneratePointsError,
    InclineTooSteepError,
    LandingPlan,
    PlaneEstimate,
    SetpointUnreachableError,
    landing_geometry,
)
from .config import ScenarioConfig
from .estimator import ContactEstimator, TelemetryInput
from .plant import (
    AttitudeController,
    PlantInputs,
    PlantModel,
    VehicleState,
    step_plant,
    tilt_reference,
)
from .telemetry import format_row

log = logging.getLogger(__name__)

GRAVITY = 9.81

TRANSITIONS = {
    "Approach": {"Probe"},
    "Probe": {"RaiseArm", "Reposition", "PlanLanding"},
    "RaiseArm": {"Probe", "Reposition", "PlanLanding"},
    "Reposition": {"Probe"},
    "PlanLanding": {"Descend"},
    "Descend": {"Landed"},
    "Landed": set(),
    "Aborted": set(),
}


class PhaseError(RuntimeError):
    pass


@dataclass
class EventRecord:
    time: float
    arm_id: int
    p_c: tuple
    tau: tuple
    match_angle: float
    tie: bool
    true_arm: int  # ground-truth contacting arm from the plant (0 = none, -1 = several)


@dataclass
class RunReport:
    name: str
    seed: int
    true_incline_deg: float
    outcome: str
    abort_reason: str = ""
    plane: PlaneEstimate | None = None
    plan: LandingPlan | None = None
    events: list = field(default_factory=list)
    phases: list = field(default_factory=list)  # (time, phase)
    telemetry: list = field(default_factory=list)  # formatted CSV rows
    sim_time: float = 0.0
    final_rpy: tuple = (0.0, 0.0, 0.0)
    stance_distances: tuple = ()
    stance_corrections: tuple = ()
    truncated: bool = False

    @property
    def est_incline_deg(self) -> float:
        return math.degrees(self.plane.incline) if self.plane else math.nan

    @property
    def error_deg(self) -> float:
        """real - estimated, the sign convention of the reported error table."""
        return self.true_incline_deg - self.est_incline_deg

    @property
    def heading(self) -> float:
        return self.plane.heading if self.plane else math.nan


class _JointMove:
    """Constant-rate joint interpolation from the current to a target configuration."""

    def __init__(self, q_from, q_to, duration: float, dt: float):
        self.steps = max(1, int(round(duration / dt)))
        self.rate = (np.asarray(q_to, float) - np.asarray(q_from, float)) / (self.steps * dt)
        self.k = 0

    def next_rate(self) -> np.ndarray:
        if self.k >= self.steps:
            return np.zeros(3)
        self.k += 1
        return self.rate

    @property
    def done(self) -> bool:
        return self.k >= self.steps


class Simulation:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.dt = cfg["sim.dt"]
        self.world = cfg.world()
        self.sensor = cfg.sensor()
        self.arms = cfg.arms()
        self.alloc = cfg.allocation()
        nominal = cfg.inertia()
        self.inertia_nominal = nominal
        true_I = nominal.I * (1.0 + cfg["sim.model_mismatch"])
        self.model = PlantModel(true_I, self.alloc.N_O, self.arms, cfg["control.vel_lag"],
                                cfg["contact.stiffness"], cfg["contact.damping"])
        self.att = AttitudeController(nominal.I, cfg["control.att_natural_freq"],
                                      cfg["control.att_damping"])
        self.rng = np.random.default_rng(self.sensor.seed)
        self.estimator = ContactEstimator(nominal, self.alloc, self.arms, self.dt,
                                          cfg["observer.gain"], cfg.detection())
        self.n_contacts = cfg["probe.contacts"]
        self.mg = cfg["vehicle.total_mass"] * GRAVITY

        self.probe_dir = np.asarray(cfg["probe.direction"], float)
        sx, sy, sz = cfg["probe.start"]
        stagger = cfg["probe.stagger"]
        # right arm starts higher so level-ground contacts are not simultaneous
        self.probe_start = [np.array([sx, -abs(sy), sz]), np.array([sx, abs(sy), sz - stagger])]
        self.q_probe_start = [self._ik(a, p) for a, p in zip(self.arms, self.probe_start)]

        # start location: probe-start tips clear the surface by start_clearance
        c = np.asarray(self.world.centroid, float)
        highest = min(self.world.surface_z(c[0] + p[0], c[1] + p[1]) - p[2]
                      for p in self.probe_start)
        self.start = np.array([c[0], c[1], highest - cfg["approach.start_clearance"]])

        q0 = []
        for arm, q in zip(self.arms, self.q_probe_start):
            q = q.copy()
            q[0] += cfg["probe.raise_delta"]  # mirrored chains: same q1 lifts both outward
            q0.append(q)
        p0 = self.start + np.asarray(cfg["approach.offset"], float)
        self.state = VehicleState(p0, np.zeros(3), np.eye(3), np.zeros(3), q0,
                                  [np.zeros(3), np.zeros(3)], "Approach")

        self.t = 0.0
        self.k = 0
        self.phase = "Approach"
        self.phase_t0 = 0.0
        self.hold = self.start.copy()
        self.yaw_ref = 0.0
        self.moves: dict[int, _JointMove] = {}
        self.probing = [0, 1]
        self.exhausted: set[int] = set()
        self.p_ref: dict[int, np.ndarray] = {}
        self.search_steps = 0
        self.raised_arm: int | None = None
        self.x_shift = 0.0
        self.plan: LandingPlan | None = None
        self.plane: PlaneEstimate | None = None
        self.settle_since: float | None = None
        self.touch_since: float | None = None
        self.stance_corr = [0.0, 0.0]
        self.abort_reason = ""
        self.report = RunReport(cfg["name"], self.sensor.seed, self.world.incline_deg, "Aborted")
        self.report.phases.append((0.0, "Approach"))
        self._a_prev = np.zeros(3)

    # -- helpers ---------------------------------------------------------------

    def _ik(self, arm, p) -> np.ndarray:
        return inverse_kinematics(arm, p)[0].as_array()

    def _enter(self, phase: str):
        if phase != "Aborted" and phase not in TRANSITIONS[self.phase]:
            raise PhaseError(f"illegal transition {self.phase} -> {phase}")
        self.phase = phase
        self.phase_t0 = self.t
        self.settle_since = None
        self.report.phases.append((round(self.t, 9), phase))

    def _abort(self, reason: str):
        log.info("abort at t=%.3f: %s", self.t, reason)
        self.abort_reason = reason
        self._enter("Aborted")

    def _v_cmd(self, p_meas, target) -> np.ndarray:
        v = self.cfg["control.pos_gain"] * (np.asarray(target) - p_meas)
        n = float(np.linalg.norm(v))
        vmax = self.cfg["control.max_speed"]
        return v * (vmax / n) if n > vmax else v

    def _settled(self, ok: bool) -> bool:
        if not ok:
            self.settle_since = None
            return False
        if self.settle_since is None:
            self.settle_since = self.t
        return self.t - self.settle_since >= self.cfg["control.settle_time"] - 1e-12

    def _start_probe(self):
        for j in self.probing:
            self.p_ref[j] = ee_position(self.arms[j], self.state.q[j])
        self.exhausted = set()
        self._enter("Probe")

    def _probe_rates(self, j: int) -> np.ndarray:
        arm = self.arms[j]
        q = self.state.q[j]
        if j in self.exhausted:
            return np.zeros(3)
        p = ee_position(arm, q)
        start = self.probe_start[j] + np.array([self.x_shift, 0.0, 0.0])
        if (self.p_ref[j] - start) @ self.probe_dir >= self.cfg["probe.max_extent"] - start[2]:
            self.exhausted.add(j)
            return np.zeros(3)
        v = self.cfg["probe.speed"] * self.probe_dir
        self.p_ref[j] = self.p_ref[j] + v * self.dt
        v_fb = v + self.cfg["control.clik_gain"] * (self.p_ref[j] - p)
        try:
            qd = differential_ik(arm, q, v_fb).as_array()
        except SingularConfigurationError:
            self.exhausted.add(j)
            return np.zeros(3)
        qn = q + qd * self.dt
        if not all(lo <= v <= hi for v, (lo, hi) in zip(qn, arm.joint_limits)):
            self.exhausted.add(j)
            return np.zeros(3)
        return qd

    def _stance_world(self):
        """Rear gear and both arm tips in the world frame."""
        R, p = self.state.R, self.state.p
        gear = p + R @ np.asarray(self.cfg["landing.rear_gear"], float)
        tips = [p + R @ ee_position(a, q) for a, q in zip(self.arms, self.state.q)]
        return gear, tips

    # -- phase logic -----------------------------------------------------------

    def _command(self, p_meas):
        """Commands for this step: (v_cmd, R_ref, per-arm joint rates)."""
        cfg = self.cfg
        qd = [np.zeros(3), np.zeros(3)]
        R_ref = rot_z(self.yaw_ref)
        ph = self.phase

        if ph == "Approach":
            if not self.moves:
                self.moves = {j: _JointMove(self.state.q[j], self.q_probe_start[j],
                                            cfg["approach.arm_time"], self.dt) for j in (0, 1)}
            for j, m in self.moves.items():
                qd[j] = m.next_rate()
            v = self._v_cmd(p_meas, self.hold)
            # tilt the body the way a multirotor must to accelerate sideways
            a = (v - self.state.v) / max(cfg["control.vel_lag"], self.dt)
            R_ref = tilt_reference(self.yaw_ref, a)
            done = all(m.done for m in self.moves.values())
            if self._settled(done and float(np.linalg.norm(self.state.p - self.hold)) < 0.01):
                self.moves = {}
                self._start_probe()
            return v, R_ref, qd

        if ph == "Probe":
            for j in self.probing:
                qd[j] = self._probe_rates(j)
            if all(j in self.exhausted for j in self.probing):
                if self.search_steps >= cfg["probe.max_search_steps"]:
                    self._abort("unreachable: search pattern exhausted without contact")
                else:
                    self._begin_reposition(search=True)
            return self._v_cmd(p_meas, self.hold), R_ref, qd

        if ph == "RaiseArm":
            for j, m in self.moves.items():
                qd[j] = m.next_rate()
            if self._settled(all(m.done for m in self.moves.values())):
                self.moves = {}
                if self.raised_arm in self.probing:
                    self.probing.remove(self.raised_arm)
                if self.probing:
                    self._start_probe()
                else:
                    # third contact: re-probe with the first arm, shifted along body x
                    self.probing = [self.estimator.events[0].arm_id - 1]
                    self.x_shift = cfg["probe.third_x_offset"]
                    self._begin_reposition(search=False)
            return self._v_cmd(p_meas, self.hold), R_ref, qd

        if ph == "Reposition":
            for j, m in self.moves.items():
                qd[j] = m.next_rate()
            if self._settled(all(m.done for m in self.moves.values())
                             and float(np.linalg.norm(self.state.p - self.hold)) < 0.005):
                self.moves = {}
                self._start_probe()
            return self._v_cmd(p_meas, self.hold), R_ref, qd

        if ph == "PlanLanding":
            plan = self.plan
            for j, m in self.moves.items():
                qd[j] = m.next_rate()
            yaw = rot_to_rpy(self.state.R).yaw
            yaw_err = abs(math.remainder(yaw - plan.target_yaw, 2 * math.pi))
            ok = (all(m.done for m in self.moves.values())
                  and float(np.linalg.norm(self.state.p - self.hold)) < 0.005
                  and yaw_err < math.radians(0.5))
            if self._settled(ok):
                self.moves = {}
                self._enter("Descend")
            return self._v_cmd(p_meas, self.hold), R_ref, qd

        if ph == "Descend":
            return self._descend(p_meas, R_ref, qd)

        return np.zeros(3), R_ref, qd

    def _begin_reposition(self, search: bool):
        cfg = self.cfg
        if search:
            self.search_steps += 1
            self.hold = self.hold + cfg["probe.search_step_down"] * np.array([0.0, 0.0, 1.0])
        self.moves = {}
        for j in self.probing:
            start = self.probe_start[j] + np.array([self.x_shift, 0.0, 0.0])
            try:
                q_to = self._ik(self.arms[j], start)
            except UnreachableTargetError:
                self._abort(f"unreachable: probe start {start} for arm {j + 1}")
                return
            self.moves[j] = _JointMove(self.state.q[j], q_to, 1.0, self.dt)
        self._enter("Reposition")

    def _on_event(self, ev):
        cfg = self.cfg
        j = ev.arm_id - 1
        n = len(self.estimator.events)
        if math.degrees(ev.match_angle) > cfg["probe.max_match_deg"]:
            # no single arm tip explains the torque: the raised arm is back on the slope
            self._abort(f"too steep: contact torque {math.degrees(ev.match_angle):.1f} deg off "
                        f"arm {ev.arm_id} prediction, raised arm cannot clear the surface")
            return
        if n >= self.n_contacts:
            self._plan_landing()
            return
        q_to = self.state.q[j].copy()
        q_to[0] += cfg["probe.raise_delta"]
        self.moves = {j: _JointMove(self.state.q[j], q_to, cfg["probe.raise_time"], self.dt)}
        self.raised_arm = j
        self.hold = self.hold - cfg["probe.hop"] * np.array([0.0, 0.0, 1.0])
        self._enter("RaiseArm")

    def _plan_landing(self):
        cfg = self.cfg
        try:
            self.plane = self.estimator.plane(self.n_contacts)
        except DegeneratePointsError as exc:
            self._abort(f"degenerate contacts: {exc}")
            return
        self.report.plane = self.plane
        try:
            self.plan = landing_geometry(
                self.plane, cfg["landing.preset"], cfg["landing.rear_gear"], list(self.arms),
                cfg["landing.clearance"], cfg["landing.descent_velocity"],
                math.radians(cfg["landing.max_incline_deg"]), rot_to_rpy(self.state.R).yaw,
            )
        except InclineTooSteepError as exc:
            self._abort(f"too steep: {exc}")
            return
        except SetpointUnreachableError as exc:
            self._abort(f"unreachable: {exc}")
            return
        self.report.plan = self.plan
        self.hold = np.asarray(self.plan.approach_point, float)
        self.yaw_ref = self.plan.target_yaw
        self.moves = {j: _JointMove(self.state.q[j], self.plan.ee_configs[j].as_array(),
                                    cfg["landing.arm_time"], self.dt) for j in (0, 1)}
        self._enter("PlanLanding")

    def _descend(self, p_meas, R_ref, qd):
        """Level descent; the rear gear is rigid, the arm tips comply with the surface."""
        cfg = self.cfg
        tol = cfg["landing.touch_tol"]
        gear, tips = self._stance_world()
        gear_h = self.world.height_above(gear)
        target = self.hold.copy()
        v = self._v_cmd(p_meas, target)
        # proportional on gear height, capped at the descent speed; retracts if pushed in
        v[2] = min(cfg["landing.descent_velocity"], cfg["control.pos_gain"] * gear_h)
        R = self.state.R
        body_down = R.T @ np.array([0.0, 0.0, 1.0])
        for j, (arm, tip) in enumerate(zip(self.arms, tips)):
            h = self.world.height_above(tip)
            q = self.state.q[j]
            cos_n = max(1e-6, -float(self.world.true_normal @ (R @ body_down)))
            if h < 0.0:
                # pushed in: the servo yields back to the surface within one step
                v_arm = -(-h / cos_n) / self.dt * body_down
            elif gear_h <= tol and h > tol:
                v_arm = min(cfg["landing.descent_velocity"], (h / cos_n) / self.dt) * body_down
            else:
                continue
            try:
                qd[j] = differential_ik(arm, q, v_arm).as_array()
            except SingularConfigurationError:
                self._abort(f"unreachable: arm {j + 1} singular during touchdown")
                return np.zeros(3), R_ref, [np.zeros(3), np.zeros(3)]
            self.stance_corr[j] += float(np.linalg.norm(v_arm)) * self.dt
            qn = q + qd[j] * self.dt
            if not all(lo <= x <= hi for x, (lo, hi) in zip(qn, arm.joint_limits)):
                self._abort(f"unreachable: arm {j + 1} hit joint limit during touchdown")
                return np.zeros(3), R_ref, [np.zeros(3), np.zeros(3)]
        heights = [gear_h] + [self.world.height_above(t) for t in tips]
        try:
            rpy = rot_to_rpy(R)
        except GimbalLockError:
            rpy = EulerRPY(math.pi, 0.0, 0.0)
        level = max(abs(rpy.roll), abs(rpy.pitch)) <= math.radians(cfg["landing.level_tol_deg"])
        on_plane = all(abs(h) <= tol for h in heights) and all(float(np.linalg.norm(x)) == 0.0
                                                               for x in qd)
        if self._settled(on_plane and level and float(np.linalg.norm(self.state.v)) < 1e-3):
            self._enter("Landed")
        return v, R_ref, qd

    # -- main loop -------------------------------------------------------------

    def step(self):
        cfg = self.cfg
        s = self.state
        sig_w = self.sensor.gyro_noise_sigma
        sig_p = self.sensor.position_noise_sigma
        omega_meas = s.omega + np.asarray(self.sensor.gyro_bias)
        if sig_w > 0:
            omega_meas = omega_meas + self.rng.normal(0.0, sig_w, 3)
        p_meas = s.p + (self.rng.normal(0.0, sig_p, 3) if sig_p > 0 else 0.0)

        phase_before = self.phase
        v_cmd, R_ref, qd = self._command(p_meas)
        if self.phase in ("Landed", "Aborted") and phase_before == self.phase:
            return False

        M = self.att.moment(s.R, R_ref, omega_meas)
        u = self.alloc.thrusts_for(self.mg, M)
        try:
            rpy = rot_to_rpy(s.R).as_tuple()
        except GimbalLockError:
            self._abort("attitude diverged")
            return False
        row = TelemetryInput(
            round(self.t, 9), tuple(float(x) for x in p_meas), rpy,
            tuple(float(x) for x in omega_meas), tuple(float(x) for x in u),
            tuple(tuple(float(x) for x in q) for q in s.q),
            tuple(tuple(float(x) for x in v) for v in qd), self.phase,
        )
        tau, ev = self.estimator.process(row)
        self.report.telemetry.append(format_row(row, tau, ev.arm_id if ev else 0))
        if ev is not None:
            flags = s.contacts
            true_arm = 0
            if flags and sum(flags) == 1:
                true_arm = flags.index(True) + 1
            elif flags and sum(flags) > 1:
                true_arm = -1
            self.report.events.append(EventRecord(ev.time, ev.arm_id, ev.p_c_world,
                                                  ev.tau_observed, ev.match_angle, ev.tie,
                                                  true_arm))

        self.state = step_plant(s, PlantInputs(v_cmd, u, tuple(qd)), self.world, self.dt,
                                self.model)
        self.state.phase = self.phase
        self.k += 1
        self.t = self.k * self.dt
        if ev is not None and self.phase == "Probe":
            self._on_event(ev)
        if self.phase in ("Landed", "Aborted"):
            return False
        if self.t >= cfg["sim.max_time"]:
            self._abort(f"timeout after {cfg['sim.max_time']} s in phase {self.phase}")
            return False
        return True

    def run(self) -> RunReport:
        while self.step():
            pass
        r = self.report
        r.outcome = self.phase
        r.abort_reason = self.abort_reason
        r.sim_time = round(self.t, 9)
        try:
            r.final_rpy = rot_to_rpy(self.state.R).as_tuple()
        except GimbalLockError:
            r.final_rpy = (math.nan, math.nan, math.nan)
        gear, tips = self._stance_world()
        r.stance_distances = tuple(self.world.height_above(p) for p in (gear, *tips))
        r.stance_corrections = tuple(self.stance_corr)
        return r


def run_pipeline(cfg: ScenarioConfig) -> RunReport:
    return Simulation(cfg).run()
