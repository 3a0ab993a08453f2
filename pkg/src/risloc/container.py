"""Bit-exact binary container for one channel acquisition.

Layout (little-endian, 50-byte header + payload):

    offset  size  field
    0       4     magic "RISC"
    4       2     format version (u16, currently 1)
    6       4     n_freq (u32)
    10      4     n_pos  (u32)
    14      8     f_start in Hz (f64)
    22      8     f_step in Hz (f64)
    30      8     pointing angle in deg (f64)
    38      1     role code (u8: 1 = bs_scan, 2 = ris_scan)
    39      1     ris index (u8, 255 = none)
    40      2     ue index (u16)
    42      8     seed (u64)
    50      ...   n_freq * n_pos complex values, f64 (re, im) pairs,
                  row-major over frequency then position

The payload occupies exactly 16 * n_freq * n_pos bytes. Byte order is fixed
little-endian regardless of host.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .channel import ChannelTensor, FrequencyGrid, TensorMeta

MAGIC = b"RISC"
VERSION = 1
_HEADER = struct.Struct("<4sHIIdddBBHQ")
_ROLE_TO_CODE = {"bs_scan": 1, "ris_scan": 2}
_CODE_TO_ROLE = {v: k for k, v in _ROLE_TO_CODE.items()}
_NO_RIS = 255


class ContainerError(ValueError):
    """Malformed container file."""


def write_container(path: str | Path, tensor: ChannelTensor) -> None:
    meta = tensor.meta
    role_code = _ROLE_TO_CODE.get(meta.role)
    if role_code is None:
        raise ContainerError(f"role {meta.role!r} has no container code")
    ris = _NO_RIS if meta.ris_index is None else meta.ris_index
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        tensor.grid.n_freq,
        tensor.n_pos,
        tensor.grid.f_start,
        tensor.grid.f_step,
        meta.pointing_deg,
        role_code,
        ris,
        meta.ue_index,
        meta.seed,
    )
    payload = np.ascontiguousarray(tensor.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def read_container(path: str | Path, carrier: float) -> ChannelTensor:
    """Load a container; the carrier is supplied by the campaign config."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise ContainerError(f"{path}: truncated header")
    magic, version, n_freq, n_pos, f_start, f_step, pointing, role_code, ris, ue_index, seed = _HEADER.unpack(
        blob[: _HEADER.size]
    )
    if magic != MAGIC:
        raise ContainerError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    expected = 16 * n_freq * n_pos
    payload = blob[_HEADER.size:]
    if len(payload) != expected:
        raise ContainerError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    if role_code not in _CODE_TO_ROLE:
        raise ContainerError(f"{path}: unknown role code {role_code}")
    values = np.frombuffer(payload, dtype="<c16").reshape(n_freq, n_pos).astype(np.complex128)
    f_stop = f_start + (n_freq - 1) * f_step
    grid = FrequencyGrid(f_start, f_stop, f_step, min(max(carrier, f_start), f_stop))
    meta = TensorMeta(
        role=_CODE_TO_ROLE[role_code],
        ris_index=None if ris == _NO_RIS else int(ris),
        ue_index=int(ue_index),
        pointing_deg=float(pointing),
        seed=int(seed),
    )
    return ChannelTensor(values, grid, meta)
