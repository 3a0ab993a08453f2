"""Location-dependent radio features from beam-sweep outputs.

Two flavors of departure-angle estimates per anchor: coarse (ranking the
overall channel gain across pointing angles) and fine (ranking the gain of
the genie-isolated multipath component). Both keep the three strongest
pointing angles as candidates; the genie-aided "best of 3" picks the
candidate closest to the geometric truth, mirroring how the campaign data
is evaluated. Delay features are read off the isolated component at the
fine top-1 pointing angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .geometry import (
    PathSpec,
    ScenePlan,
    aoa_at_ue,
    bearing_from_anchor,
    ota_distance,
    wrap180,
)
from .sage import MpcEstimate

DIST_TOL_M = 1.0
AOA_TOL_DEG = 15.0


@dataclass
class SweepSeries:
    """Per-pointing-angle sweep outputs for one (anchor, UE) pair."""

    pointing_angles: list[float]
    overall_gain_db: list[float]
    isolated: list[Optional[MpcEstimate]]

    def __post_init__(self):
        if not (len(self.pointing_angles) == len(self.overall_gain_db) == len(self.isolated)):
            raise ValueError("series lengths differ")
        if any(b <= a for a, b in zip(self.pointing_angles, self.pointing_angles[1:])):
            raise ValueError("pointing angles must be strictly increasing")


def isolate_mpc(
    mpcs: list[MpcEstimate],
    expected_distance: float,
    expected_aoa: float,
    dist_tol: float = DIST_TOL_M,
    aoa_tol: float = AOA_TOL_DEG,
) -> Optional[MpcEstimate]:
    """Strongest component inside the expected distance/AoA window, if any."""
    hits = [
        m
        for m in mpcs
        if abs(m.ota_distance - expected_distance) <= dist_tol
        and abs(wrap180(m.aoa_deg - expected_aoa)) <= aoa_tol
    ]
    if not hits:
        return None
    return min(hits, key=lambda m: (-abs(m.gain), m.ota_distance, m.aoa_deg))


def _rank_angles(angles: list[float], scores: list[float], top: int = 3) -> list[float]:
    # ties resolve toward the smaller |angle|, then the smaller angle
    order = sorted(zip(angles, scores), key=lambda p: (-p[1], abs(p[0]), p[0]))
    return [a for a, _ in order[:top]]


def coarse_aod(series: SweepSeries) -> tuple[float, list[float]]:
    """Top-1 and top-3 pointing angles ranked by overall channel gain."""
    if not series.pointing_angles:
        raise ValueError("empty sweep series")
    top3 = _rank_angles(series.pointing_angles, series.overall_gain_db)
    return top3[0], top3


def fine_aod(series: SweepSeries) -> tuple[float, list[float]]:
    """Top-1 and top-3 pointing angles ranked by isolated-component power.

    Angles where the path was not isolated rank below every observed angle.
    """
    if not series.pointing_angles:
        raise ValueError("empty sweep series")
    if all(m is None for m in series.isolated):
        raise ValueError("path unobservable: no pointing angle isolated it")
    scores = [m.power_db if m is not None else -math.inf for m in series.isolated]
    top3 = _rank_angles(series.pointing_angles, scores)
    return top3[0], top3


def best_candidate(candidates: list[float], ground_truth: float) -> float:
    """Genie selection: candidate with the smallest wrapped error to truth."""
    if not candidates:
        raise ValueError("no candidates")
    return min(candidates, key=lambda c: (abs(wrap180(c - ground_truth)), abs(c), c))


def path_distance_estimate(isolated: Optional[MpcEstimate]) -> float:
    """OTA distance of the isolated component at the selected pointing angle."""
    if isolated is None:
        raise ValueError("path unobservable: no isolated component")
    return isolated.ota_distance


@dataclass
class AnchorFeatures:
    """Feature bundle for one anchor (BS or one RIS) at one UE."""

    anchor: str  # "bs", "ris1", "ris2", ...
    ris_index: Optional[int]
    gt_aod_deg: float
    gt_ota_m: float
    coarse_candidates: list[float] = field(default_factory=list)
    fine_candidates: list[float] = field(default_factory=list)
    coarse_top1: Optional[float] = None
    fine_top1: Optional[float] = None
    coarse_best: Optional[float] = None
    fine_best: Optional[float] = None
    path_distance_m: Optional[float] = None
    aoa_deg: Optional[float] = None


@dataclass
class FeatureSet:
    ue_index: int
    anchors: dict[str, AnchorFeatures] = field(default_factory=dict)

    def get(self, key: str) -> AnchorFeatures:
        if key not in self.anchors:
            raise KeyError(f"no features for anchor {key!r}")
        return self.anchors[key]


def anchor_key(ris_index: Optional[int]) -> str:
    return "bs" if ris_index is None else f"ris{ris_index + 1}"


def build_anchor_features(
    scene: ScenePlan,
    ue_index: int,
    ris_index: Optional[int],
    series: SweepSeries,
) -> AnchorFeatures:
    """Condense one sweep series into the anchor's radiolocation features."""
    ue = scene.ue_truths[ue_index]
    path = PathSpec("dp") if ris_index is None else PathSpec("rp", ris_index)
    pose = scene.anchor_for(path)
    out = AnchorFeatures(
        anchor=anchor_key(ris_index),
        ris_index=ris_index,
        gt_aod_deg=bearing_from_anchor(pose, ue),
        gt_ota_m=ota_distance(scene, path, ue),
    )
    top1, top3 = coarse_aod(series)
    out.coarse_top1 = top1
    out.coarse_candidates = top3
    out.coarse_best = best_candidate(top3, out.gt_aod_deg)
    try:
        ftop1, ftop3 = fine_aod(series)
    except ValueError:
        return out  # fine features stay unavailable
    out.fine_top1 = ftop1
    out.fine_candidates = ftop3
    out.fine_best = best_candidate(ftop3, out.gt_aod_deg)
    idx = series.pointing_angles.index(ftop1)
    isolated = series.isolated[idx]
    out.path_distance_m = path_distance_estimate(isolated)
    out.aoa_deg = isolated.aoa_deg
    return out


def build_series(
    scene: ScenePlan,
    ue_index: int,
    ris_index: Optional[int],
    pointing_angles: list[float],
    overall_gains_db: list[float],
    mpcs_per_angle: list[list[MpcEstimate]],
    dist_tol: float = DIST_TOL_M,
    aoa_tol: float = AOA_TOL_DEG,
) -> SweepSeries:
    """Apply genie isolation at every pointing angle of one sweep."""
    ue = scene.ue_truths[ue_index]
    path = PathSpec("dp") if ris_index is None else PathSpec("rp", ris_index)
    expected_d = ota_distance(scene, path, ue)
    expected_aoa = aoa_at_ue(scene, path, ue)
    isolated = [isolate_mpc(mpcs, expected_d, expected_aoa, dist_tol, aoa_tol) for mpcs in mpcs_per_angle]
    return SweepSeries(list(pointing_angles), list(overall_gains_db), isolated)
