"""2D least-squares positioning from combined radio measurements.

Each scenario row maps a fixed combination of departure-angle and traveled-
distance measurements to a residual vector; the UE position is the damped
Gauss-Newton minimizer of the squared residual norm, started from one
random in-room guess that is shared across scenarios of the same UE. A
brute-force grid minimizer over the room serves as the independent oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .features import FeatureSet
from .geometry import AnchorPose, Point2D, ScenePlan, wrap180

SCENARIOS = ("0", "1a", "1b", "1c", "1d", "2a", "2b", "2c", "2d", "2e", "2f")

# residual assigned to a measurement whose bearing is undefined because the
# trial point sits exactly on the anchor; large but finite so the solver can
# step away instead of crashing
COINCIDENT_PENALTY = 1e3

_STREAM_INIT = 13


@dataclass(frozen=True)
class RadioMeasurement:
    """One scalar measurement: an anchor AoD or a path distance."""

    kind: str  # "aod" or "dist"
    ris_index: Optional[int]  # None = BS anchor / direct path
    value: float  # degrees for aod, meters for dist
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in ("aod", "dist"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if self.weight <= 0:
            raise ValueError("weight must be positive")


@dataclass
class SolverSettings:
    max_iters: int = 100
    step_tol_m: float = 1e-6
    fd_step_m: float = 1e-3
    damping0: float = 1e-3
    # basin rescue: after converging from the shared random guess, a coarse
    # room scan at this cell size re-seeds the solver when it finds a strictly
    # lower objective (degraded measurement sets produce multiple basins);
    # 0 disables the rescue
    rescue_cell_m: float = 0.1


@dataclass
class LsProblem:
    measurements: list[RadioMeasurement]
    init: Point2D
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if len(self.measurements) < 2:
            raise ValueError("need at least two scalar measurements for 2 unknowns")


@dataclass
class ScenarioResult:
    scenario: str
    ue_index: int
    estimate: Point2D
    error_m: float
    iterations: int
    converged: bool
    in_room: bool
    objective: float


def _anchor(scene: ScenePlan, m: RadioMeasurement) -> AnchorPose:
    return scene.bs if m.ris_index is None else scene.ris(m.ris_index)


def _dist_leg(scene: ScenePlan, m: RadioMeasurement) -> float:
    if m.ris_index is None:
        return 0.0
    return scene.bs.position.distance_to(scene.ris(m.ris_index).position)


def build_measurements(scenario: str, features: FeatureSet, genie: bool = True,
                       weight_angle: float = 1.0, weight_distance: float = 1.0) -> list[RadioMeasurement]:
    """Measurement set for one scenario row.

    Scenario families: "0" pairs the SAGE BS AoD with the direct-path
    distance; "1x" rows use overall-channel-gain AoDs only; "2x" rows use
    SAGE AoDs, adding the matching path distances. The genie flag selects
    the best-of-3 candidate, otherwise the top-1 angle is used.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")

    def aod(anchor: str, fine: bool) -> RadioMeasurement:
        feats = features.get(anchor)
        if fine:
            value = feats.fine_best if genie else feats.fine_top1
        else:
            value = feats.coarse_best if genie else feats.coarse_top1
        if value is None:
            raise ValueError(f"scenario {scenario}: missing {'fine' if fine else 'coarse'} AoD for {anchor}")
        return RadioMeasurement("aod", feats.ris_index, value, weight_angle)

    def dist(anchor: str) -> RadioMeasurement:
        feats = features.get(anchor)
        if feats.path_distance_m is None:
            raise ValueError(f"scenario {scenario}: missing path distance for {anchor}")
        return RadioMeasurement("dist", feats.ris_index, feats.path_distance_m, weight_distance)

    if scenario == "0":
        return [aod("bs", True), dist("bs")]
    if scenario == "1a":
        return [aod("bs", False), aod("ris1", False)]
    if scenario == "1b":
        return [aod("bs", False), aod("ris2", False)]
    if scenario == "1c":
        return [aod("bs", False), aod("ris1", False), aod("ris2", False)]
    if scenario == "1d":
        return [aod("ris1", False), aod("ris2", False)]
    if scenario == "2a":
        return [aod("bs", True), dist("bs"), aod("ris1", True), dist("ris1")]
    if scenario == "2b":
        return [aod("bs", True), dist("bs"), aod("ris2", True), dist("ris2")]
    if scenario == "2c":
        return [aod("bs", True), dist("bs"), aod("ris1", True), dist("ris1"), aod("ris2", True), dist("ris2")]
    if scenario == "2d":
        return [aod("ris1", True), dist("ris1")]
    if scenario == "2e":
        return [aod("ris2", True), dist("ris2")]
    return [aod("ris1", True), dist("ris1"), aod("ris2", True), dist("ris2")]  # 2f


def residuals(measurements: list[RadioMeasurement], p: Point2D, scene: ScenePlan) -> np.ndarray:
    """Residual vector at a trial point: angle terms in radians, distances in meters."""
    out = np.empty(len(measurements))
    for i, m in enumerate(measurements):
        pose = _anchor(scene, m)
        dx = p.x - pose.position.x
        dy = p.y - pose.position.y
        if m.kind == "aod":
            if dx == 0.0 and dy == 0.0:
                out[i] = COINCIDENT_PENALTY * m.weight
                continue
            bearing = wrap180(math.degrees(math.atan2(dy, dx)) - pose.boresight_deg)
            out[i] = math.radians(wrap180(bearing - m.value)) * m.weight
        else:
            out[i] = (_dist_leg(scene, m) + math.hypot(dx, dy) - m.value) * m.weight
    return out


def _encode(measurements: list[RadioMeasurement], scene: ScenePlan):
    """Flat arrays consumed by the grid kernel (angles in radians)."""
    n = len(measurements)
    kinds = np.zeros(n, dtype=np.int64)
    ax = np.zeros(n)
    ay = np.zeros(n)
    bore = np.zeros(n)
    leg = np.zeros(n)
    value = np.zeros(n)
    weight = np.zeros(n)
    for i, m in enumerate(measurements):
        pose = _anchor(scene, m)
        ax[i], ay[i] = pose.position.x, pose.position.y
        weight[i] = m.weight
        if m.kind == "aod":
            kinds[i] = 0
            bore[i] = math.radians(pose.boresight_deg)
            value[i] = math.radians(m.value)
        else:
            kinds[i] = 1
            leg[i] = _dist_leg(scene, m)
            value[i] = m.value
    return kinds, ax, ay, bore, leg, value, weight


def brute_force_minimum(measurements: list[RadioMeasurement], scene: ScenePlan, cell_m: float = 0.01):
    """Objective minimizer over a regular grid covering the room (the oracle)."""
    room = scene.room
    xs = np.arange(room.x_min, room.x_max + cell_m / 2, cell_m)
    ys = np.arange(room.y_min, room.y_max + cell_m / 2, cell_m)
    args = _encode(measurements, scene)
    obj, i, j = _kernels.grid_objective_min(xs, ys, *args)
    return Point2D(float(xs[i]), float(ys[j])), float(obj)


def _damped_gauss_newton(meas, init: Point2D, scene: ScenePlan, st: SolverSettings):
    x = np.array([init.x, init.y])

    def res_at(v: np.ndarray) -> np.ndarray:
        return residuals(meas, Point2D(float(v[0]), float(v[1])), scene)

    r = res_at(x)
    cost = float(r @ r)
    lam = st.damping0
    converged = False
    iters = 0
    for iters in range(1, st.max_iters + 1):
        jac = np.empty((len(meas), 2))
        for k in range(2):
            dv = np.zeros(2)
            dv[k] = st.fd_step_m
            jac[:, k] = (res_at(x + dv) - res_at(x - dv)) / (2.0 * st.fd_step_m)
        hess = jac.T @ jac
        grad = jac.T @ r
        step = None
        while lam < 1e12:
            try:
                cand_step = np.linalg.solve(hess + lam * np.eye(2), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = res_at(x + cand_step)
            cost_new = float(r_new @ r_new)
            if cost_new < cost or (cost_new == cost and lam < 1.0):
                step = cand_step
                x = x + cand_step
                r, cost = r_new, cost_new
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
        if step is None:
            break  # damping exhausted; keep the best iterate
        if float(np.hypot(step[0], step[1])) < st.step_tol_m:
            converged = True
            break
    return Point2D(float(x[0]), float(x[1])), cost, iters, converged


def solve_ls(problem: LsProblem, scene: ScenePlan, scenario: str = "", ue_index: int = 0,
             truth: Point2D | None = None) -> ScenarioResult:
    """Damped Gauss-Newton minimization of the squared residual norm.

    The Jacobian comes from central finite differences; damping adapts
    multiplicatively, so the objective never increases across accepted
    steps. After converging from the given start, a coarse room scan may
    re-seed one more descent if it strictly lowers the objective (see
    SolverSettings.rescue_cell_m). The returned estimate is not clamped to
    the room; the in_room flag records whether it left the bounds.
    """
    st = problem.settings
    meas = problem.measurements
    estimate, cost, iters, converged = _damped_gauss_newton(meas, problem.init, scene, st)
    if st.rescue_cell_m > 0:
        coarse_pt, coarse_obj = brute_force_minimum(meas, scene, st.rescue_cell_m)
        if coarse_obj < cost:
            est2, cost2, iters2, conv2 = _damped_gauss_newton(meas, coarse_pt, scene, st)
            if cost2 < cost:
                estimate, cost, converged = est2, cost2, conv2
                iters += iters2
    error = estimate.distance_to(truth) if truth is not None else math.nan
    return ScenarioResult(
        scenario=scenario,
        ue_index=ue_index,
        estimate=estimate,
        error_m=error,
        iterations=iters,
        converged=converged,
        in_room=scene.room.contains(estimate),
        objective=cost,
    )


def initial_guess(scene: ScenePlan, seed: int, ue_index: int) -> Point2D:
    """Random in-room starting point, shared by all scenarios of one UE."""
    from .channel import derive_rng

    rng = derive_rng(seed, _STREAM_INIT, ue_index)
    x = rng.uniform(scene.room.x_min, scene.room.x_max)
    y = rng.uniform(scene.room.y_min, scene.room.y_max)
    return Point2D(float(x), float(y))


def run_campaign(
    scene: ScenePlan,
    features_by_ue: dict[int, FeatureSet],
    scenarios: list[str],
    seed: int,
    genie: bool = True,
    weight_angle: float = 1.0,
    weight_distance: float = 1.0,
    settings: SolverSettings | None = None,
    multistart: int = 0,
) -> list[ScenarioResult]:
    """Solve every scenario at every UE; failures yield NaN rows, the run continues.

    With multistart > 0, that many extra random starts are solved per
    scenario and the lowest-objective result wins (off by default; the
    reference protocol uses the single shared guess).
    """
    out: list[ScenarioResult] = []
    settings = settings or SolverSettings()
    for ue_index in sorted(features_by_ue):
        inits = [initial_guess(scene, seed, ue_index)]
        inits += [initial_guess(scene, seed, ue_index + 1000 * (r + 1)) for r in range(multistart)]
        truth = scene.ue_truths[ue_index]
        for scenario in scenarios:
            try:
                meas = build_measurements(scenario, features_by_ue[ue_index], genie, weight_angle, weight_distance)
                solved = [
                    solve_ls(LsProblem(meas, init, settings), scene, scenario, ue_index, truth)
                    for init in inits
                ]
                out.append(min(solved, key=lambda s: s.objective))
            except ValueError:
                out.append(
                    ScenarioResult(
                        scenario=scenario,
                        ue_index=ue_index,
                        estimate=Point2D(math.nan, math.nan),
                        error_m=math.nan,
                        iterations=0,
                        converged=False,
                        in_room=False,
                        objective=math.nan,
                    )
                )
    return out
