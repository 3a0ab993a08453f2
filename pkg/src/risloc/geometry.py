"""2D deployment geometry: anchors, UEs, room bounds, and exact path lengths.

Angle convention used everywhere: world bearings are measured anticlockwise
from the +x axis; angles at an anchor are referenced to its boresight (the
surface/array normal), so 0 deg points along the normal and positive angles
turn anticlockwise. All angles live in the half-open interval (-180, 180].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .channel import FrequencyGrid


def wrap180(angle_deg: float) -> float:
    """Wrap an angle in degrees to (-180, 180]."""
    w = angle_deg % 360.0
    return w - 360.0 if w > 180.0 else w


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class AxisRect:
    """Axis-aligned room rectangle in meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate room rectangle")

    def contains(self, p: Point2D) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max


@dataclass(frozen=True)
class AnchorPose:
    """Anchor position plus boresight direction (degrees, world frame)."""

    position: Point2D
    boresight_deg: float
    kind: str = "bs"  # "bs" or "ris"

    def __post_init__(self):
        if self.kind not in ("bs", "ris"):
            raise ValueError(f"unknown anchor kind {self.kind!r}")
        if not (-180.0 < self.boresight_deg <= 180.0):
            raise ValueError("boresight must lie in (-180, 180]")


@dataclass(frozen=True)
class SweepPlan:
    """Uniform azimuth scan grid, degrees."""

    start_deg: float = -60.0
    stop_deg: float = 60.0
    step_deg: float = 5.0

    def __post_init__(self):
        if self.step_deg <= 0:
            raise ValueError("sweep step must be positive")
        n = (self.stop_deg - self.start_deg) / self.step_deg
        if abs(n - round(n)) > 1e-9:
            raise ValueError("sweep span must be an integer multiple of step")

    @property
    def n_angles(self) -> int:
        return int(round((self.stop_deg - self.start_deg) / self.step_deg)) + 1

    def angles(self) -> list[float]:
        return [self.start_deg + i * self.step_deg for i in range(self.n_angles)]

    def nearest(self, angle_deg: float) -> float:
        """Sweep angle closest to angle_deg (ties toward the smaller angle)."""
        return min(self.angles(), key=lambda a: (abs(a - angle_deg), a))


@dataclass(frozen=True)
class PathSpec:
    """Direct path or a reflected path through one RIS."""

    kind: str  # "dp" or "rp"
    via_ris: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("dp", "rp"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if self.kind == "rp" and self.via_ris is None:
            raise ValueError("reflected path needs a RIS index")
        if self.kind == "dp" and self.via_ris is not None:
            raise ValueError("direct path takes no RIS index")


@dataclass
class ScenePlan:
    """Full 2D deployment: one BS, zero or more RIS, UE ground truths."""

    bs: AnchorPose
    ris_list: list[AnchorPose]
    ue_truths: list[Point2D]
    room: AxisRect
    sweep: SweepPlan = field(default_factory=SweepPlan)
    band: "FrequencyGrid | None" = None

    def __post_init__(self):
        if not self.ue_truths:
            raise ValueError("scene needs at least one UE position")
        for i, ue in enumerate(self.ue_truths):
            if not ue.is_finite():
                raise ValueError(f"UE{i + 1} has non-finite coordinates")
            if not self.room.contains(ue):
                raise ValueError(f"UE{i + 1} lies outside the room")

    def ris(self, index: int) -> AnchorPose:
        return self.ris_list[index]

    def anchor_for(self, path: PathSpec) -> AnchorPose:
        """Anchor whose beam steers toward the UE along this path."""
        return self.bs if path.kind == "dp" else self.ris(path.via_ris)


def bearing_from_anchor(pose: AnchorPose, target: Point2D) -> float:
    """Bearing of target as seen from the anchor, relative to its boresight.

    Positive angles are anticlockwise from the boresight; result in
    (-180, 180] degrees.
    """
    dx = target.x - pose.position.x
    dy = target.y - pose.position.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("target coincides with the anchor position")
    world = math.degrees(math.atan2(dy, dx))
    return wrap180(world - pose.boresight_deg)


def ota_distance(scene: ScenePlan, path: PathSpec, ue: Point2D) -> float:
    """Over-the-air traveled distance in meters for a DP or RP path."""
    if path.kind == "dp":
        return scene.bs.position.distance_to(ue)
    ris = scene.ris(path.via_ris)
    return scene.bs.position.distance_to(ris.position) + ris.position.distance_to(ue)


def aoa_at_ue(
    scene: ScenePlan,
    path: PathSpec,
    ue: Point2D,
    ue_array_orientation_deg: float = 0.0,
) -> float:
    """Arrival bearing of the last path segment in the UE array frame.

    For a DP the wave arrives from the BS, for an RP from the RIS; the
    returned angle is the bearing of that source, wrapped to (-180, 180].
    """
    src = scene.bs.position if path.kind == "dp" else scene.ris(path.via_ris).position
    dx = src.x - ue.x
    dy = src.y - ue.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("UE coincides with the path source point")
    world = math.degrees(math.atan2(dy, dx))
    return wrap180(world - ue_array_orientation_deg)
