import math

import numpy as np
import pytest

from uavtrack.beamforming import (
    build_precoder,
    candidate_set,
    grid_weights,
    precoder_from_angle,
    quantize_phases,
    steer_weights,
)
from uavtrack.channel import ArrayConfig, effective_channel, steering_ula, steering_upa
from uavtrack.geometry import Position3, SpatialAngles
from uavtrack.sensors import SensorReading

CFG = ArrayConfig()


def test_precoder_unit_norm_constant_modulus():
    p = precoder_from_angle(0.37, 8)
    assert abs(np.linalg.norm(p.vector) - 1.0) < 1e-12
    assert np.max(np.abs(np.abs(p.vector) - 1.0 / math.sqrt(8))) < 1e-12
    assert p.u_a == 0.37


def test_precoder_alignment_peaks_at_truth():
    p = precoder_from_angle(0.37, 8)
    assert abs(abs(steering_ula(0.37, 8) @ p.vector) - math.sqrt(8)) < 1e-12


def test_precoder_single_antenna():
    p = precoder_from_angle(0.9, 1)
    assert abs(abs(steering_ula(-0.3, 1) @ p.vector) - 1.0) < 1e-12


def test_build_precoder_exact_reading():
    # measured position equals truth: steering is exact, alignment sqrt(nu)
    uav = Position3(30.0, 40.0, 200.0)
    gs = Position3(0.0, 0.0, 25.0)
    egi = SensorReading(kind="egi", block=0, position=uav, heading=0.25)
    p = build_precoder(egi, gs, CFG)
    from uavtrack.geometry import departure_angle

    true_ua = departure_angle(Position3(gs.x - uav.x, gs.y - uav.y, gs.h - uav.h), 0.25)
    h = effective_channel(SpatialAngles(0.1, 0.1, u_a=true_ua), p.vector, 1.0, CFG)
    assert abs(abs(h.alignment) - math.sqrt(8)) < 1e-12


def test_build_precoder_requires_heading():
    egi = SensorReading(kind="egi", block=0, position=Position3(30, 40, 200))
    with pytest.raises(ValueError):
        build_precoder(egi, Position3(0, 0, 25), CFG)


def test_alignment_loss_at_small_steering_error():
    p = precoder_from_angle(0.35, 8)
    a = steering_ula(0.30, 8)
    ratio = abs(a @ p.vector) / math.sqrt(8)
    assert abs(ratio - 0.9364517377490459) < 1e-9


def test_candidate_set_default_geometry():
    c = candidate_set(0.1, -0.2, CFG, 6)
    assert c.g_axis == 6
    assert c.size == 36
    assert abs(c.delta - 2.0 * math.pi / 64.0) < 1e-15
    assert abs(c.half_span - 0.25) < 1e-15
    assert np.all(c.u_values >= 0.1 - 0.25 - 1e-12)
    assert np.all(c.u_values <= 0.1 + 0.25 + 1e-12)


def test_candidate_counts_over_phase_bits():
    counts = [candidate_set(0.0, 0.0, CFG, l).g_axis for l in (4, 5, 6, 7, 8)]
    assert counts == [2, 3, 6, 11, 21]


def test_candidate_endpoints_when_step_spans_grid():
    c = candidate_set(0.0, 0.0, CFG, 6, half_span=2.0 * math.pi / 128.0)
    assert c.g_axis == 2
    assert abs(c.u_values[0] - (-c.half_span)) < 1e-15
    assert abs(c.u_values[1] - c.half_span) < 1e-15


def test_candidate_grid_clips_to_unit_interval():
    c = candidate_set(0.99, 0.0, CFG, 6)
    assert c.u_values.max() <= 1.0
    with pytest.raises(ValueError):
        candidate_set(1.5, 0.0, CFG, 6)


def test_candidate_points_row_major():
    c = candidate_set(0.1, -0.2, CFG, 6)
    pts = c.points
    for i in range(c.g_axis):
        for j in range(c.g_axis):
            assert pts[i * c.g_axis + j, 0] == c.u_values[i]
            assert pts[i * c.g_axis + j, 1] == c.v_values[j]


def test_candidate_clip_projects_to_box():
    c = candidate_set(0.1, -0.2, CFG, 6)
    p = c.clip(np.array([5.0, -5.0]))
    assert p[0] == 0.1 + c.half_span
    assert p[1] == -0.2 - c.half_span
    inside = np.array([0.12, -0.18])
    assert np.array_equal(c.clip(inside), inside)


def test_steer_weights_center():
    w = steer_weights(0.0, 0.0, CFG)
    assert abs(np.linalg.norm(w) - 1.0) < 1e-12
    assert np.max(np.abs(np.angle(w))) < 1e-12


def test_steer_weights_gain_at_pointing_angle():
    w = steer_weights(0.3, -0.4, CFG)
    a = steering_upa(0.3, -0.4, 8, 8)
    assert abs(abs(np.vdot(w, a)) - 8.0) < 1e-12


def test_quantize_phase_lattice_and_error_bound():
    rng = np.random.default_rng(0)
    step = 2.0 * math.pi / 64.0
    for _ in range(50):
        u, v = rng.uniform(-0.9, 0.9, 2)
        w = steer_weights(u, v, CFG, phase_bits=6)
        ph = np.angle(w)
        assert np.max(np.abs(ph / step - np.round(ph / step))) < 1e-9
        wu = steer_weights(u, v, CFG)
        err = np.angle(w * wu.conj())
        assert np.max(np.abs(err)) <= math.pi / 64.0 + 1e-12
        assert abs(np.linalg.norm(w) - 1.0) < 1e-12


def test_quantize_idempotent_on_lattice():
    w = steer_weights(0.25, 0.125, CFG, phase_bits=6)
    again = quantize_phases(w, 6)
    assert np.max(np.abs(w - again)) < 1e-12


def test_quantized_gain_within_half_percent():
    rng = np.random.default_rng(1)
    for _ in range(300):
        u, v = rng.uniform(-0.6, 0.6, 2)
        a = steering_upa(u, v, 8, 8)
        ratio = abs(np.vdot(steer_weights(u, v, CFG, 6), a)) / abs(
            np.vdot(steer_weights(u, v, CFG), a)
        )
        assert ratio >= 0.995


def test_grid_weights_matches_per_point_construction():
    c = candidate_set(0.123, -0.321, CFG, 6)
    for bits in (None, 6):
        stack = grid_weights(c, CFG, bits)
        ref = np.array([steer_weights(u, v, CFG, bits) for u, v in c.points])
        assert np.max(np.abs(stack - ref)) < 1e-12


def test_kronecker_index_consistency():
    rng = np.random.default_rng(2)
    for _ in range(50):
        u, v, u0, v0 = rng.uniform(-0.8, 0.8, 4)
        flat = np.vdot(steering_upa(u0, v0, 8, 8), steering_upa(u, v, 8, 8))
        factored = np.vdot(steering_ula(u0, 8), steering_ula(u, 8)) * np.vdot(
            steering_ula(v0, 8), steering_ula(v, 8)
        )
        assert abs(flat - factored) < 1e-9


def test_noiseless_grid_argmax_is_nearest_point():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        seed_u, seed_v = rng.uniform(-0.4, 0.4, 2)
        tu = seed_u + rng.uniform(-0.25, 0.25)
        tv = seed_v + rng.uniform(-0.25, 0.25)
        h = effective_channel(
            SpatialAngles(tu, tv, u_a=0.3), precoder_from_angle(0.3, 8).vector, 1.0, CFG
        )
        c = candidate_set(seed_u, seed_v, CFG, 6)
        surf = np.abs(grid_weights(c, CFG).conj() @ h.vector)
        pick = c.points[int(np.argmax(surf))]
        assert pick[0] == c.u_values[np.argmin(np.abs(c.u_values - tu))]
        assert pick[1] == c.v_values[np.argmin(np.abs(c.v_values - tv))]
