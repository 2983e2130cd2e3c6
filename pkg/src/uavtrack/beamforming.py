"""UAV precoding and ground-side candidate beams.

The UAV phase-steers its line array from its own navigation data; the
ground station sweeps a square grid of beams around the sensor-seeded
direction cosines. Grid pitch follows the phase-shifter resolution: with
l-bit shifters the step is 2 pi / 2^l in direction-cosine units, and the
analog mode also rounds every weight phase to that lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ArrayConfig, steering_ula, steering_upa
from .geometry import Attitude, Position3, departure_angle
from .sensors import SensorReading

__all__ = [
    "Precoder",
    "CandidateSet",
    "precoder_from_angle",
    "build_precoder",
    "steer_weights",
    "quantize_phases",
    "candidate_set",
    "grid_weights",
]


@dataclass(frozen=True)
class Precoder:
    """Unit-norm UAV weight vector steered at departure cosine u_a."""

    u_a: float
    vector: np.ndarray


def precoder_from_angle(u_a: float, nu: int) -> Precoder:
    """Phase conjugate of the array response, scaled to unit norm.

    The inner product of the response at the true cosine with this vector
    has magnitude sqrt(nu) when the steering cosine is exact.
    """
    return Precoder(u_a=u_a, vector=steering_ula(u_a, nu).conj() / math.sqrt(nu))


def build_precoder(egi: SensorReading, gs_pos: Position3, cfg: ArrayConfig) -> Precoder:
    """Steer the UAV array from a navigation-unit reading.

    The ground station coordinates are rebased to the measured UAV
    position; the measured heading already includes yaw, so no extra
    attitude term enters the departure cosine.
    """
    if egi.heading is None:
        raise ValueError("precoder needs a reading that carries heading")
    g_u = Position3(
        gs_pos.x - egi.position.x, gs_pos.y - egi.position.y, gs_pos.h - egi.position.h
    )
    u_a_hat = departure_angle(g_u, egi.heading, Attitude())
    return precoder_from_angle(u_a_hat, cfg.nu)


def quantize_phases(w: np.ndarray, phase_bits: int) -> np.ndarray:
    """Round weight phases to multiples of 2 pi / 2^phase_bits.

    Magnitudes are kept; the result is renormalized to unit norm, which
    for constant-modulus weights changes nothing. Per-entry phase error is
    at most pi / 2^phase_bits.
    """
    step = 2.0 * math.pi / 2.0**phase_bits
    phases = np.round(np.angle(w) / step) * step
    q = np.abs(w) * np.exp(1j * phases)
    return q / np.linalg.norm(q)


def steer_weights(
    u0: float, v0: float, cfg: ArrayConfig, phase_bits: int | None = None
) -> np.ndarray:
    """Unit-norm ground beam pointed at (u0, v0), optionally phase-quantized."""
    w = steering_upa(u0, v0, cfg.nx, cfg.ny) / math.sqrt(cfg.n_ground)
    if phase_bits is not None:
        w = quantize_phases(w, phase_bits)
    return w


@dataclass(frozen=True)
class CandidateSet:
    """Square search grid of direction cosines around a seeded center.

    points enumerates the grid row-major over (u, v): flat index
    i * g_axis + j holds (u_offsets[i], v_offsets[j]) shifted by the
    center. half_span defaults to 2 / nx, the half main-lobe width.
    """

    center: tuple[float, float]
    u_values: np.ndarray
    v_values: np.ndarray
    delta: float
    half_span: float

    @property
    def g_axis(self) -> int:
        return len(self.u_values)

    @property
    def size(self) -> int:
        return len(self.u_values) * len(self.v_values)

    @property
    def points(self) -> np.ndarray:
        uu, vv = np.meshgrid(self.u_values, self.v_values, indexing="ij")
        return np.column_stack([uu.ravel(), vv.ravel()])

    def clip(self, point: np.ndarray) -> np.ndarray:
        """Project a point onto the grid bounding box."""
        lo = np.array([self.center[0] - self.half_span, self.center[1] - self.half_span])
        hi = np.array([self.center[0] + self.half_span, self.center[1] + self.half_span])
        return np.minimum(np.maximum(point, lo), hi)


def candidate_set(
    seed_u: float,
    seed_v: float,
    cfg: ArrayConfig,
    phase_bits: int = 6,
    half_span: float | None = None,
) -> CandidateSet:
    """Grid [seed - B : delta : seed + B] per axis, delta = 2 pi / 2^l.

    The number of points per axis is floor(2 B / delta) + 1, anchored at
    the lower edge, so the seed itself need not be a grid point.
    """
    delta = 2.0 * math.pi / 2.0**phase_bits
    b = 2.0 / cfg.nx if half_span is None else half_span
    g_axis = int(math.floor(2.0 * b / delta)) + 1
    offsets = -b + delta * np.arange(g_axis)
    u_values = np.clip(seed_u + offsets, -1.0, 1.0)
    v_values = np.clip(seed_v + offsets, -1.0, 1.0)
    for vals in (u_values, v_values):
        if g_axis >= 2 and len(np.unique(vals)) < 2:
            raise ValueError("candidate grid degenerates to a point after clipping")
    return CandidateSet(
        center=(seed_u, seed_v),
        u_values=u_values,
        v_values=v_values,
        delta=delta,
        half_span=b,
    )


def grid_weights(cands: CandidateSet, cfg: ArrayConfig, phase_bits: int | None = None) -> np.ndarray:
    """Stack of beams for every grid point, ordered like cands.points."""
    pts = cands.points
    ax = np.exp(-1j * math.pi * np.outer(pts[:, 0], np.arange(cfg.nx)))
    ay = np.exp(-1j * math.pi * np.outer(pts[:, 1], np.arange(cfg.ny)))
    w = (ax[:, :, None] * ay[:, None, :]).reshape(len(pts), -1) / math.sqrt(cfg.n_ground)
    if phase_bits is not None:
        step = 2.0 * math.pi / 2.0**phase_bits
        w = np.abs(w) * np.exp(1j * np.round(np.angle(w) / step) * step)
        w /= np.linalg.norm(w, axis=1, keepdims=True)
    return w
