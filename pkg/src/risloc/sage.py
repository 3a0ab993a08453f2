"""SAGE multipath extraction from one channel tensor.

Components are found one at a time by successive cancellation: a coarse
init (delay from a matched-filter profile, arrival angle from a steering
scan at that delay) followed by coordinate-wise maximum-likelihood polish
of (delay, angle, complex gain) on the component's expectation signal.
After every addition a cyclic refinement pass revisits all components.
Extraction stops at the configured energy fraction or component cap.

Gains are referenced to the first frequency bin of the processed band and
the RX grid centroid; delays are reported as traveled distances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .channel import C_LIGHT, ChannelTensor, FrequencyGrid, rx_grid_offsets, rx_steering
from .geometry import wrap180


@dataclass
class SageConfig:
    max_mpcs: int = 20
    energy_fraction: float = 0.99
    subband: Optional[tuple[float, float]] = (27e9, 29e9)
    delay_grid_step_s: Optional[float] = None  # default 1 / (2 * bandwidth)
    angle_grid_step_deg: float = 1.0
    refinement_iters: int = 10
    convergence_eps: float = 1e-4
    polish_rounds: int = 3
    rx_spacing_m: Optional[float] = None  # default 0.4 wavelength at carrier

    def __post_init__(self):
        if not 0 < self.energy_fraction <= 1:
            raise ValueError("energy_fraction must be in (0, 1]")
        if self.max_mpcs < 1:
            raise ValueError("max_mpcs must be at least 1")


@dataclass(frozen=True)
class MpcEstimate:
    """One extracted multipath component."""

    ota_distance: float
    aoa_deg: float
    gain: complex

    @property
    def power_db(self) -> float:
        return 20.0 * math.log10(abs(self.gain))


def subband_select(tensor: ChannelTensor, interval: tuple[float, float]) -> ChannelTensor:
    """Restrict a tensor to the frequency bins inside [f_lo, f_hi]."""
    f_lo, f_hi = interval
    sub = tensor.grid.subgrid(f_lo, f_hi)  # validates the interval
    freqs = tensor.grid.frequencies()
    mask = (freqs >= f_lo - 1e-3) & (freqs <= f_hi + 1e-3)
    return ChannelTensor(tensor.values[mask], sub, tensor.meta)


def overall_gain_db(tensor: ChannelTensor) -> float:
    """Mean per-sample power of the tensor, in dB."""
    if tensor.values.size == 0:
        raise ValueError("empty tensor")
    p = float(np.mean(np.abs(tensor.values) ** 2))
    if p == 0.0:
        return -math.inf
    return 10.0 * math.log10(p)


def reconstruct(estimates: list[MpcEstimate], grid: FrequencyGrid, rx_spacing_m: float) -> np.ndarray:
    """Tensor modeled by a list of components (same conventions as extraction)."""
    freqs = grid.frequencies()
    rel = freqs - freqs[0]
    offsets = rx_grid_offsets(rx_spacing_m)
    out = np.zeros((len(freqs), offsets.shape[0]), dtype=np.complex128)
    for est in estimates:
        tau = est.ota_distance / C_LIGHT
        out += est.gain * np.outer(np.exp(-2j * math.pi * rel * tau), rx_steering(offsets, grid.carrier, est.aoa_deg))
    return out


class _Extractor:
    """Workspace holding the per-tensor grids and kernel arguments."""

    def __init__(self, tensor: ChannelTensor, cfg: SageConfig):
        self.values = tensor.values
        grid = tensor.grid
        freqs = grid.frequencies()
        self.rel_freqs = np.ascontiguousarray(freqs - freqs[0])
        bandwidth = freqs[-1] - freqs[0]
        self.dtau = cfg.delay_grid_step_s or 1.0 / (2.0 * bandwidth)
        tau_max = 1.0 / grid.f_step  # delay aliasing period of the grid
        self.taus = np.arange(0.0, tau_max, self.dtau)
        spacing = cfg.rx_spacing_m or 0.4 * grid.wavelength
        self.offsets = rx_grid_offsets(spacing)
        self.rx_x = np.ascontiguousarray(self.offsets[:, 0])
        self.rx_y = np.ascontiguousarray(self.offsets[:, 1])
        self.wavenumber = 2.0 * math.pi * grid.carrier / C_LIGHT
        self.angles = np.arange(-180.0, 180.0, cfg.angle_grid_step_deg)
        self.steer_conj = np.ascontiguousarray(
            np.conj([rx_steering(self.offsets, grid.carrier, a) for a in self.angles])
        )
        self.carrier = grid.carrier

    def coarse_init(self, residual: np.ndarray) -> tuple[float, float]:
        profile = _kernels.delay_power_profile(residual, self.rel_freqs, self.taus)
        tau = float(self.taus[int(np.argmax(profile))])
        powers = _kernels.angle_power_scan(residual, self.rel_freqs, tau, self.steer_conj)
        theta = float(self.angles[int(np.argmax(powers))])
        return tau, theta

    def polish(self, x: np.ndarray, tau: float, theta: float, rounds: int) -> tuple[float, float, complex]:
        tau, theta_rad, gain = _kernels.component_polish(
            x, self.rel_freqs, self.rx_x, self.rx_y, self.wavenumber,
            tau, math.radians(theta),
            self.dtau, math.radians(1.5), rounds, 1e-12, math.radians(1e-3),
        )
        return float(tau), math.degrees(theta_rad), complex(gain)

    def model(self, tau: float, theta: float, gain: complex) -> np.ndarray:
        resp = np.exp(-2j * math.pi * self.rel_freqs * tau)
        steer = rx_steering(self.offsets, self.carrier, theta)
        return gain * np.outer(resp, steer)


def sage_extract(tensor: ChannelTensor, config: SageConfig | None = None) -> list[MpcEstimate]:
    """Extract multipath components, strongest first."""
    cfg = config or SageConfig()
    work = tensor
    if cfg.subband is not None:
        work = subband_select(tensor, cfg.subband)
    if work.grid.n_freq < 2:
        raise ValueError("need at least two frequency bins")
    total = work.energy()
    if total == 0.0:
        return []
    ex = _Extractor(work, cfg)
    residual = ex.values.copy()
    comps: list[list] = []  # [tau, theta_deg, gain]

    def cyclic_pass(rounds: int = 1):
        nonlocal residual
        for comp in comps:
            expectation = residual + ex.model(*comp)
            tau, theta, gain = ex.polish(expectation, comp[0], comp[1], rounds)
            comp[0], comp[1], comp[2] = tau, theta, gain
            residual = expectation - ex.model(tau, theta, gain)

    while len(comps) < cfg.max_mpcs:
        tau0, theta0 = ex.coarse_init(residual)
        tau, theta, gain = ex.polish(residual, tau0, theta0, cfg.polish_rounds)
        if abs(gain) == 0.0:
            break
        residual = residual - ex.model(tau, theta, gain)
        comps.append([tau, theta, gain])
        cyclic_pass()
        if 1.0 - float(np.sum(np.abs(residual) ** 2)) / total >= cfg.energy_fraction:
            break

    prev = float(np.sum(np.abs(residual) ** 2))
    for _ in range(cfg.refinement_iters):
        cyclic_pass()
        energy = float(np.sum(np.abs(residual) ** 2))
        if prev > 0.0 and abs(prev - energy) / prev < cfg.convergence_eps:
            break
        prev = energy

    estimates = [
        MpcEstimate(ota_distance=tau * C_LIGHT, aoa_deg=wrap180(theta), gain=complex(gain))
        for tau, theta, gain in comps
        if abs(gain) > 0.0
    ]
    estimates.sort(key=lambda e: (-abs(e.gain), e.ota_distance, e.aoa_deg))
    return estimates
