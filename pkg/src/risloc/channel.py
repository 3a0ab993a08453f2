"""Frequency-domain channel synthesis with 1-bit beam codebooks.

Emulates one VNA acquisition per beam pointing angle: a complex channel
matrix over the frequency grid and the 3x3 virtual RX positions, built from
deterministic geometric paths (direct and RIS-reflected), random static
clutter, and additive circular Gaussian noise. Beamforming at the BS and the
RIS uses azimuth-only linear array factors with element phases quantized to
{0, pi}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import PathSpec, Point2D, ScenePlan, aoa_at_ue, bearing_from_anchor, ota_distance, wrap180

C_LIGHT = 299_792_458.0

# sub-stream tags for deterministic RNG derivation
_STREAM_CLUTTER = 11
_STREAM_NOISE = 12
_ROLE_CODES = {"bs_scan": 1, "ris_scan": 2}


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for one (role, angle, ue, ...) work item."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed),) + tuple(int(k) for k in keys)))


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform measurement grid in Hz plus the carrier used for steering."""

    f_start: float = 25e9
    f_stop: float = 35e9
    f_step: float = 10e6
    carrier: float = 28e9

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise ValueError("f_start must be below f_stop")
        n = (self.f_stop - self.f_start) / self.f_step
        if abs(n - round(n)) > 1e-6:
            raise ValueError("band must be an integer number of steps")
        if not (self.f_start <= self.carrier <= self.f_stop):
            raise ValueError("carrier must lie inside the band")

    @property
    def n_freq(self) -> int:
        return int(round((self.f_stop - self.f_start) / self.f_step)) + 1

    def frequencies(self) -> np.ndarray:
        return self.f_start + self.f_step * np.arange(self.n_freq)

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.carrier

    def subgrid(self, f_lo: float, f_hi: float) -> "FrequencyGrid":
        """Grid restricted to [f_lo, f_hi]; endpoints snap to existing bins."""
        if f_lo >= f_hi:
            raise ValueError("malformed sub-band interval")
        freqs = self.frequencies()
        mask = (freqs >= f_lo - 1e-3) & (freqs <= f_hi + 1e-3)
        if not mask.any():
            raise ValueError("sub-band does not intersect the grid")
        sel = freqs[mask]
        carrier = min(max(self.carrier, sel[0]), sel[-1])
        return FrequencyGrid(float(sel[0]), float(sel[-1]), self.f_step, carrier)


@dataclass(frozen=True)
class ArrayGeometry:
    """Azimuth-only linear beamforming array (BS or RIS)."""

    n_elements: int = 32
    element_spacing_m: float = 0.5 * C_LIGHT / 28e9

    def __post_init__(self):
        if self.n_elements < 1 or self.element_spacing_m <= 0:
            raise ValueError("bad array geometry")


def rx_grid_offsets(spacing_m: float, shape: int = 3) -> np.ndarray:
    """RX virtual-grid offsets about the grid centroid, shape [P, 2] meters.

    Position index p = iy*shape + ix scans x fastest, matching the storage
    order of ChannelTensor columns.
    """
    if spacing_m <= 0:
        raise ValueError("grid spacing must be positive")
    half = (shape - 1) / 2.0
    return np.array(
        [[(ix - half) * spacing_m, (iy - half) * spacing_m] for iy in range(shape) for ix in range(shape)]
    )


def rx_steering(offsets: np.ndarray, carrier: float, aoa_deg: float) -> np.ndarray:
    """Steering vector of the RX grid for a plane wave arriving from aoa_deg."""
    k = 2.0 * math.pi * carrier / C_LIGHT
    th = math.radians(aoa_deg)
    return np.exp(1j * k * (offsets[:, 0] * math.cos(th) + offsets[:, 1] * math.sin(th)))


# ---------------------------------------------------------------------------
# 1-bit codebook
# ---------------------------------------------------------------------------

def quantize_1bit(ideal_phase: float) -> float:
    """Quantize a phase to {0, pi} by minimal wrapped angular distance.

    The exact tie (distance pi/2 to both) resolves to 0.
    """
    if not math.isfinite(ideal_phase):
        raise ValueError("phase must be finite")
    d0 = abs(math.remainder(ideal_phase, 2.0 * math.pi))
    dpi = abs(math.remainder(ideal_phase - math.pi, 2.0 * math.pi))
    return 0.0 if d0 <= dpi else math.pi


def steering_codeword(array: ArrayGeometry, carrier: float, aod_deg: float):
    """Ideal and 1-bit quantized element phases steering toward aod_deg.

    Element k gets ideal phase -(2 pi / lambda) * k * d * sin(aod), wrapped
    to (-pi, pi]; the quantized word maps each phase through quantize_1bit.
    Returns (ideal, quantized) arrays of length n_elements.
    """
    if not abs(aod_deg) < 90.0:
        raise ValueError("steering angle must satisfy |aod| < 90 deg")
    lam = C_LIGHT / carrier
    k = np.arange(array.n_elements)
    raw = -2.0 * math.pi / lam * k * array.element_spacing_m * math.sin(math.radians(aod_deg))
    ideal = np.array([-math.remainder(-p, 2.0 * math.pi) for p in raw])  # (-pi, pi]
    quantized = np.array([quantize_1bit(p) for p in ideal])
    return ideal, quantized


def array_factor(array: ArrayGeometry, carrier: float, codeword: np.ndarray, eval_angle_deg: float) -> complex:
    """Unnormalized array factor of a phase codeword at one azimuth angle.

    AF(theta) = sum_k exp(j[(2 pi / lambda) k d sin(theta) + phase_k]); the
    peak reaches n_elements under ideal steering.
    """
    if len(codeword) != array.n_elements:
        raise ValueError("codeword length does not match the array")
    lam = C_LIGHT / carrier
    k = np.arange(array.n_elements)
    phase = 2.0 * math.pi / lam * k * array.element_spacing_m * math.sin(math.radians(eval_angle_deg))
    return complex(np.sum(np.exp(1j * (phase + codeword))))


@dataclass
class BeamCodebook:
    """Quantized codewords for every pointing angle of a sweep plan."""

    array: ArrayGeometry
    carrier: float
    pointing_angles: list[float]
    codewords: dict[float, np.ndarray] = field(default_factory=dict)

    @classmethod
    def build(cls, array: ArrayGeometry, carrier: float, pointing_angles) -> "BeamCodebook":
        cb = cls(array, carrier, list(pointing_angles))
        for ang in cb.pointing_angles:
            _, q = steering_codeword(array, carrier, ang)
            cb.codewords[ang] = q
        return cb

    def gain(self, pointing_deg: float, eval_angle_deg: float) -> complex:
        return array_factor(self.array, self.carrier, self.codewords[pointing_deg], eval_angle_deg)


# ---------------------------------------------------------------------------
# path model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathComponent:
    """One propagation path as seen by the acquisition.

    aod_anchor_deg is the departure angle at the beam-scanning anchor (BS
    for the direct path, RIS for a reflected path); aod_bs_deg additionally
    stores the BS departure angle toward the RIS for reflected paths.
    """

    ota_distance: float
    aoa_ue_deg: float
    aod_anchor_deg: float
    gain: complex
    origin: str  # "dp", "rp" or "clutter"
    ris_index: Optional[int] = None
    aod_bs_deg: Optional[float] = None

    def __post_init__(self):
        if self.ota_distance <= 0:
            raise ValueError("OTA distance must be positive")
        if abs(self.gain) <= 0:
            raise ValueError("path amplitude must be positive")
        if self.origin not in ("dp", "rp", "clutter"):
            raise ValueError(f"unknown path origin {self.origin!r}")


@dataclass(frozen=True)
class TensorMeta:
    role: str = "bs_scan"
    ris_index: Optional[int] = None
    ue_index: int = 0
    pointing_deg: float = 0.0
    seed: int = 0


@dataclass
class ChannelTensor:
    """Complex frequency response, shape [n_freq, n_positions]."""

    values: np.ndarray
    grid: FrequencyGrid
    meta: TensorMeta = field(default_factory=TensorMeta)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.n_freq:
            raise ValueError("tensor shape inconsistent with the frequency grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("tensor entries must be finite")

    @property
    def n_pos(self) -> int:
        return self.values.shape[1]

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass
class RadioConfig:
    """Front-end model constants shared by synthesis and estimation.

    ris_illumination_gain_db folds the static BS-side illumination and the
    aperture projection of each RIS into one amplitude constant; a scalar
    applies to every RIS, a list gives one value per RIS.
    """

    bs_array: ArrayGeometry = field(default_factory=ArrayGeometry)
    ris_array: ArrayGeometry = field(default_factory=ArrayGeometry)
    rx_spacing_m: float = 0.4 * C_LIGHT / 28e9
    ris_illumination_gain_db: float | list[float] = 30.0
    snr_db: float = 0.0
    clutter_count: int = 16
    clutter_exponent: float = 2.0
    clutter_level_db: float = 13.0
    clutter_jitter_db: float = 3.0

    def rx_offsets(self) -> np.ndarray:
        return rx_grid_offsets(self.rx_spacing_m)

    def illumination_db(self, ris_index: int) -> float:
        if isinstance(self.ris_illumination_gain_db, (int, float)):
            return float(self.ris_illumination_gain_db)
        return float(self.ris_illumination_gain_db[ris_index])

    def noise_sigma(self, scene: ScenePlan, carrier: float) -> float:
        """Per-bin noise std referenced to the beam-peak DP magnitude at UE1."""
        ref = free_space_amp(scene.bs.position.distance_to(scene.ue_truths[0]), carrier)
        return ref * self.bs_array.n_elements * 10.0 ** (-self.snr_db / 20.0)


def free_space_amp(distance_m: float, carrier: float) -> float:
    lam = C_LIGHT / carrier
    return lam / (4.0 * math.pi * max(distance_m, 1e-3))


def direct_path(scene: ScenePlan, carrier: float, ue_index: int) -> PathComponent:
    ue = scene.ue_truths[ue_index]
    spec = PathSpec("dp")
    d = scene.bs.position.distance_to(ue)
    aod = bearing_from_anchor(scene.bs, ue)
    return PathComponent(
        ota_distance=ota_distance(scene, spec, ue),
        aoa_ue_deg=aoa_at_ue(scene, spec, ue),
        aod_anchor_deg=aod,
        gain=complex(free_space_amp(d, carrier)),
        origin="dp",
        aod_bs_deg=aod,
    )


def reflected_path(scene: ScenePlan, radio: RadioConfig, carrier: float, ue_index: int, ris_index: int) -> PathComponent:
    ue = scene.ue_truths[ue_index]
    ris = scene.ris(ris_index)
    spec = PathSpec("rp", ris_index)
    d1 = scene.bs.position.distance_to(ris.position)
    d2 = ris.position.distance_to(ue)
    amp = free_space_amp(d1, carrier) * free_space_amp(d2, carrier)
    amp *= 10.0 ** (radio.illumination_db(ris_index) / 20.0)
    return PathComponent(
        ota_distance=ota_distance(scene, spec, ue),
        aoa_ue_deg=aoa_at_ue(scene, spec, ue),
        aod_anchor_deg=bearing_from_anchor(ris, ue),
        gain=complex(amp),
        origin="rp",
        ris_index=ris_index,
        aod_bs_deg=bearing_from_anchor(scene.bs, ris.position),
    )


def generate_clutter(scene: ScenePlan, radio: RadioConfig, carrier: float, ue_index: int, seed: int) -> list[PathComponent]:
    """Random single-bounce scatterers, reproducible from the seed.

    Scatterer points are uniform in the room; amplitudes follow a power law
    of the traveled distance with log-normal jitter.
    """
    rng = derive_rng(seed, _STREAM_CLUTTER, ue_index)
    ue = scene.ue_truths[ue_index]
    bs = scene.bs.position
    lam = C_LIGHT / carrier
    out: list[PathComponent] = []
    while len(out) < radio.clutter_count:
        x = rng.uniform(scene.room.x_min, scene.room.x_max)
        y = rng.uniform(scene.room.y_min, scene.room.y_max)
        s = Point2D(float(x), float(y))
        if s.distance_to(ue) < 0.1 or s.distance_to(bs) < 0.1:
            continue
        ota = bs.distance_to(s) + s.distance_to(ue)
        jitter_db = rng.normal(0.0, radio.clutter_jitter_db)
        amp = (
            lam
            / (4.0 * math.pi)
            * ota ** (-radio.clutter_exponent / 2.0)
            * 10.0 ** ((radio.clutter_level_db + jitter_db) / 20.0)
        )
        phase = rng.uniform(0.0, 2.0 * math.pi)
        aoa = wrap180(math.degrees(math.atan2(s.y - ue.y, s.x - ue.x)))
        aod = bearing_from_anchor(scene.bs, s)
        out.append(
            PathComponent(
                ota_distance=float(ota),
                aoa_ue_deg=float(aoa),
                aod_anchor_deg=float(aod),
                gain=complex(amp * math.cos(phase), amp * math.sin(phase)),
                origin="clutter",
            )
        )
    return out


@dataclass(frozen=True)
class BeamState:
    """Active beam pointing: BS always, RIS only during a RIS scan."""

    bs_pointing_deg: Optional[float]
    ris_index: Optional[int] = None
    ris_pointing_deg: Optional[float] = None


def _beam_gain(path: PathComponent, beams: BeamState, radio: RadioConfig, carrier: float) -> complex:
    if path.origin == "clutter":
        return 1.0 + 0.0j
    if path.origin == "dp":
        if beams.bs_pointing_deg is None:
            return 1.0 + 0.0j
        _, cw = steering_codeword(radio.bs_array, carrier, beams.bs_pointing_deg)
        return array_factor(radio.bs_array, carrier, cw, path.aod_anchor_deg)
    # reflected path
    if beams.ris_index != path.ris_index or beams.ris_pointing_deg is None:
        raise ValueError("reflected path present while its RIS is not scanning")
    g = 1.0 + 0.0j
    if beams.bs_pointing_deg is not None:
        _, cw_bs = steering_codeword(radio.bs_array, carrier, beams.bs_pointing_deg)
        g *= array_factor(radio.bs_array, carrier, cw_bs, path.aod_bs_deg)
    _, cw_ris = steering_codeword(radio.ris_array, carrier, beams.ris_pointing_deg)
    g *= array_factor(radio.ris_array, carrier, cw_ris, path.aod_anchor_deg)
    return g


def synthesize_channel(
    grid: FrequencyGrid,
    radio: RadioConfig,
    beams: BeamState,
    paths: list[PathComponent],
    noise_sigma: float,
    seed: int,
    meta: TensorMeta | None = None,
    noise_keys: tuple[int, ...] = (),
) -> ChannelTensor:
    """Geometric ray-sum acquisition model.

    H[f, p] = sum_paths g_beam * gain * exp(-j 2 pi f tau)
              * exp(+j (2 pi carrier / c) r_p . u(aoa)) + noise,
    with tau the OTA delay and r_p the RX grid offset. Noise is circular
    complex Gaussian, std noise_sigma per entry, drawn from a stream derived
    from (seed, noise_keys).
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if not paths and noise_sigma == 0:
        raise ValueError("nothing to synthesize: no paths and no noise")
    freqs = grid.frequencies()
    offsets = radio.rx_offsets()
    n_pos = offsets.shape[0]
    values = np.zeros((grid.n_freq, n_pos), dtype=np.complex128)
    for path in paths:
        g = _beam_gain(path, beams, radio, grid.carrier) * path.gain
        tau = path.ota_distance / C_LIGHT
        freq_resp = np.exp(-2j * math.pi * freqs * tau)
        values += g * np.outer(freq_resp, rx_steering(offsets, grid.carrier, path.aoa_ue_deg))
    if noise_sigma > 0:
        rng = derive_rng(seed, _STREAM_NOISE, *noise_keys)
        noise = rng.standard_normal((grid.n_freq, n_pos)) + 1j * rng.standard_normal((grid.n_freq, n_pos))
        values += noise_sigma / math.sqrt(2.0) * noise
    return ChannelTensor(values, grid, meta or TensorMeta(seed=seed))


def run_sweep(
    scene: ScenePlan,
    radio: RadioConfig,
    grid: FrequencyGrid,
    role: str,
    ue_index: int,
    seed: int,
    ris_index: Optional[int] = None,
) -> list[ChannelTensor]:
    """One full azimuth sweep: one tensor per pointing angle.

    "bs_scan" scans the BS beam with every RIS off; "ris_scan" holds the BS
    beam on the sweep angle closest to the RIS bearing and scans the chosen
    RIS. Clutter is frozen across pointing angles (static room); the noise
    stream is derived per angle.
    """
    if role not in _ROLE_CODES:
        raise ValueError(f"unknown sweep role {role!r}")
    if role == "ris_scan" and (ris_index is None or not 0 <= ris_index < len(scene.ris_list)):
        raise ValueError("ris_scan needs a valid RIS index")
    role_code = _ROLE_CODES[role]
    ris_code = 0 if ris_index is None else ris_index + 1
    paths = [direct_path(scene, grid.carrier, ue_index)]
    if role == "ris_scan":
        paths.append(reflected_path(scene, radio, grid.carrier, ue_index, ris_index))
    # clutter is a property of the room, not of the scan: shared across roles
    paths.extend(generate_clutter(scene, radio, grid.carrier, ue_index, seed))
    sigma = radio.noise_sigma(scene, grid.carrier)
    bs_static = None
    if role == "ris_scan":
        bs_static = scene.sweep.nearest(bearing_from_anchor(scene.bs, scene.ris(ris_index).position))
    tensors = []
    for angle_idx, pointing in enumerate(scene.sweep.angles()):
        if role == "bs_scan":
            beams = BeamState(bs_pointing_deg=pointing)
        else:
            beams = BeamState(bs_pointing_deg=bs_static, ris_index=ris_index, ris_pointing_deg=pointing)
        meta = TensorMeta(role=role, ris_index=ris_index, ue_index=ue_index, pointing_deg=pointing, seed=seed)
        tensors.append(
            synthesize_channel(
                grid,
                radio,
                beams,
                paths,
                sigma,
                seed,
                meta=meta,
                noise_keys=(role_code, ris_code, ue_index, angle_idx),
            )
        )
    return tensors
