"""Campaign configuration: YAML schema, defaults, validation.

A config file is a nested key-value document; any omitted key falls back to
the shipped default campaign. The default scene is the demo indoor
deployment: one BS and two RIS apertures on the walls of a 2D room with
five UE spots, boresights chosen so the geometric departure angles of the
demo points match the reference deployment this workbench models.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .channel import ArrayGeometry, C_LIGHT, FrequencyGrid, RadioConfig
from .geometry import AnchorPose, AxisRect, Point2D, ScenePlan, SweepPlan
from .positioning import SCENARIOS
from .sage import SageConfig

DEFAULTS: dict[str, Any] = {
    "seed": 20831,
    "out_dir": "out",
    "jobs": 1,
    "scene": {
        "room": {"x_min": 2.5, "x_max": 12.5, "y_min": 4.5, "y_max": 13.5},
        "bs": {"x": 6.06, "y": 11.60, "boresight_deg": -90.0},
        "ris": [
            {"x": 4.00, "y": 8.60, "boresight_deg": 0.0},
            {"x": 6.06, "y": 5.70, "boresight_deg": 45.0},
        ],
        "ue": [
            {"x": 7.06, "y": 10.00},
            {"x": 7.06, "y": 8.00},
            {"x": 7.06, "y": 5.99},
            {"x": 9.06, "y": 5.99},
            {"x": 11.06, "y": 5.99},
        ],
    },
    "sweep": {"start_deg": -60.0, "stop_deg": 60.0, "step_deg": 5.0},
    "band": {
        "f_start_hz": 25.0e9,
        "f_stop_hz": 35.0e9,
        "f_step_hz": 10.0e6,
        "carrier_hz": 28.0e9,
    },
    "radio": {
        "bs_elements": 32,
        "ris_elements": 32,
        "element_spacing_m": None,  # default: half wavelength at carrier
        "rx_grid_spacing_m": None,  # default: 0.4 wavelength at carrier
        "ris_illumination_gain_db": [30.0, 34.2],
        "snr_db": 0.0,
        "clutter": {"count": 16, "exponent": 2.0, "level_db": 13.0, "jitter_db": 3.0},
    },
    "sage": {
        "max_mpcs": 20,
        "energy_fraction": 0.99,
        "subband_hz": [27.0e9, 29.0e9],
        "delay_grid_step_s": None,  # default: 1 / (2 * sub-band width)
        "angle_grid_step_deg": 1.0,
        "refinement_iters": 10,
        "convergence_eps": 1.0e-4,
        "polish_rounds": 3,
    },
    "positioning": {
        "genie_candidates": True,
        "weight_angle": 1.0,
        "weight_distance": 1.0,
        "multistart": 0,
    },
    "scenarios": list(SCENARIOS),
}


class ConfigError(ValueError):
    """Invalid or inconsistent campaign configuration."""


@dataclass
class CampaignConfig:
    seed: int
    out_dir: Path
    jobs: int
    scene: ScenePlan
    grid: FrequencyGrid
    radio: RadioConfig
    sage: SageConfig
    scenarios: list[str]
    genie_candidates: bool = True
    weight_angle: float = 1.0
    weight_distance: float = 1.0
    multistart: int = 0
    raw: dict = field(default_factory=dict, repr=False)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _f(value) -> float:
    # YAML 1.1 leaves exponent forms without a sign as strings; coerce
    return float(value)


def _scene_from(d: dict, sweep: SweepPlan, grid: FrequencyGrid) -> ScenePlan:
    room = AxisRect(
        _f(d["room"]["x_min"]), _f(d["room"]["x_max"]), _f(d["room"]["y_min"]), _f(d["room"]["y_max"])
    )
    bs = AnchorPose(Point2D(_f(d["bs"]["x"]), _f(d["bs"]["y"])), _f(d["bs"]["boresight_deg"]), "bs")
    ris = [
        AnchorPose(Point2D(_f(r["x"]), _f(r["y"])), _f(r["boresight_deg"]), "ris") for r in d.get("ris", [])
    ]
    ue = [Point2D(_f(u["x"]), _f(u["y"])) for u in d["ue"]]
    return ScenePlan(bs=bs, ris_list=ris, ue_truths=ue, room=room, sweep=sweep, band=grid)


def build_config(data: dict | None = None) -> CampaignConfig:
    """Construct a validated campaign config; data overrides the defaults."""
    d = _merge(DEFAULTS, data or {})
    try:
        sweep = SweepPlan(_f(d["sweep"]["start_deg"]), _f(d["sweep"]["stop_deg"]), _f(d["sweep"]["step_deg"]))
        grid = FrequencyGrid(
            _f(d["band"]["f_start_hz"]),
            _f(d["band"]["f_stop_hz"]),
            _f(d["band"]["f_step_hz"]),
            _f(d["band"]["carrier_hz"]),
        )
        scene = _scene_from(d["scene"], sweep, grid)
        lam = C_LIGHT / grid.carrier
        rd = d["radio"]
        spacing = rd["element_spacing_m"]
        spacing = 0.5 * lam if spacing is None else _f(spacing)
        rx_spacing = rd["rx_grid_spacing_m"]
        rx_spacing = 0.4 * lam if rx_spacing is None else _f(rx_spacing)
        illum = rd["ris_illumination_gain_db"]
        illum = [_f(v) for v in illum] if isinstance(illum, (list, tuple)) else _f(illum)
        radio = RadioConfig(
            bs_array=ArrayGeometry(int(rd["bs_elements"]), spacing),
            ris_array=ArrayGeometry(int(rd["ris_elements"]), spacing),
            rx_spacing_m=rx_spacing,
            ris_illumination_gain_db=illum,
            snr_db=_f(rd["snr_db"]),
            clutter_count=int(rd["clutter"]["count"]),
            clutter_exponent=_f(rd["clutter"]["exponent"]),
            clutter_level_db=_f(rd["clutter"]["level_db"]),
            clutter_jitter_db=_f(rd["clutter"]["jitter_db"]),
        )
        sg = d["sage"]
        subband = sg["subband_hz"]
        sage = SageConfig(
            max_mpcs=int(sg["max_mpcs"]),
            energy_fraction=_f(sg["energy_fraction"]),
            subband=None if subband is None else (_f(subband[0]), _f(subband[1])),
            delay_grid_step_s=None if sg["delay_grid_step_s"] is None else _f(sg["delay_grid_step_s"]),
            angle_grid_step_deg=_f(sg["angle_grid_step_deg"]),
            refinement_iters=int(sg["refinement_iters"]),
            convergence_eps=_f(sg["convergence_eps"]),
            polish_rounds=int(sg["polish_rounds"]),
            rx_spacing_m=rx_spacing,
        )
        pos = d["positioning"]
        scenarios = [str(s) for s in d["scenarios"]]
        cfg = CampaignConfig(
            seed=int(d["seed"]),
            out_dir=Path(d["out_dir"]),
            jobs=int(d["jobs"]),
            scene=scene,
            grid=grid,
            radio=radio,
            sage=sage,
            scenarios=scenarios,
            genie_candidates=bool(pos["genie_candidates"]),
            weight_angle=_f(pos["weight_angle"]),
            weight_distance=_f(pos["weight_distance"]),
            multistart=int(pos["multistart"]),
            raw=d,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: CampaignConfig) -> None:
    unknown = [s for s in cfg.scenarios if s not in SCENARIOS]
    if unknown:
        raise ConfigError(f"unknown scenario ids: {unknown}")
    if cfg.sage.subband is not None:
        lo, hi = cfg.sage.subband
        if lo < cfg.grid.f_start - 1e-3 or hi > cfg.grid.f_stop + 1e-3:
            raise ConfigError("sub-band must lie inside the measured band")
    needs_ris2 = any(s in ("1b", "1c", "1d", "2b", "2c", "2e", "2f") for s in cfg.scenarios)
    needs_ris1 = any(s in ("1a", "1c", "1d", "2a", "2c", "2d", "2f") for s in cfg.scenarios)
    if needs_ris1 and len(cfg.scene.ris_list) < 1:
        raise ConfigError("scenario list needs RIS1 but the scene has no RIS")
    if needs_ris2 and len(cfg.scene.ris_list) < 2:
        raise ConfigError("scenario list needs RIS2 but the scene has fewer than two RIS")
    illum = cfg.radio.ris_illumination_gain_db
    if isinstance(illum, list) and len(illum) < len(cfg.scene.ris_list):
        raise ConfigError("ris_illumination_gain_db list shorter than the RIS list")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")


def load_config(path: str | Path | None) -> CampaignConfig:
    """Load a YAML config file; None loads the built-in defaults."""
    if path is None:
        return build_config()
    text = Path(path).read_text()
    data = yaml.safe_load(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return build_config(data)


def dump_default_yaml() -> str:
    return yaml.safe_dump(DEFAULTS, sort_keys=False)
