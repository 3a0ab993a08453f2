import math

import numpy as np
import pytest

from risloc._kernels import implementations

IMPLS = implementations()
BACKENDS = sorted(IMPLS)


def sample_tensor(rng, n_freq=101, n_pos=9):
    return np.ascontiguousarray(
        rng.standard_normal((n_freq, n_pos)) + 1j * rng.standard_normal((n_freq, n_pos))
    )


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(12)
    values = sample_tensor(rng)
    rel_freqs = np.ascontiguousarray(np.arange(101) * 10e6)
    rx = rng.uniform(-0.005, 0.005, (9, 2))
    rx_x = np.ascontiguousarray(rx[:, 0])
    rx_y = np.ascontiguousarray(rx[:, 1])
    taus = np.ascontiguousarray(np.linspace(0, 9e-8, 50))
    steer = np.exp(-1j * rng.uniform(0, 2 * math.pi, (36, 9)))
    return values, rel_freqs, rx_x, rx_y, taus, np.ascontiguousarray(steer)


def test_both_backends_available():
    # numba is a declared dependency; the numpy fallback always exists
    assert "numpy" in IMPLS and "numba" in IMPLS


def test_correlation_backends_agree(data):
    values, rel_freqs, rx_x, rx_y, _, _ = data
    k = 2 * math.pi * 28e9 / 299792458.0
    results = [
        IMPLS[b]["mpc_correlation"](values, rel_freqs, rx_x, rx_y, k, 3.3e-8, 0.7)
        for b in BACKENDS
    ]
    assert results[0] == pytest.approx(results[1], rel=1e-10)


def test_polish_backends_agree(data):
    values, rel_freqs, rx_x, rx_y, _, _ = data
    k = 2 * math.pi * 28e9 / 299792458.0
    outs = [
        IMPLS[b]["component_polish"](
            values, rel_freqs, rx_x, rx_y, k, 3.0e-8, 0.4, 2.5e-10, 0.026, 3, 1e-12, 1e-5
        )
        for b in BACKENDS
    ]
    (t1, a1, g1), (t2, a2, g2) = outs
    assert t1 == pytest.approx(t2, abs=1e-11)
    assert a1 == pytest.approx(a2, abs=1e-4)
    assert abs(g1 - g2) < 1e-6 * max(abs(g1), 1e-12)


def test_delay_profile_backends_agree(data):
    values, rel_freqs, _, _, taus, _ = data
    a, b = (IMPLS[x]["delay_power_profile"](values, rel_freqs, taus) for x in BACKENDS)
    assert np.allclose(a, b, rtol=1e-10)


def test_angle_scan_backends_agree(data):
    values, rel_freqs, _, _, _, steer = data
    a, b = (IMPLS[x]["angle_power_scan"](values, rel_freqs, 2.0e-8, steer) for x in BACKENDS)
    assert np.allclose(a, b, rtol=1e-10)


def test_grid_min_backends_agree():
    xs = np.linspace(0.0, 10.0, 101)
    ys = np.linspace(0.0, 8.0, 81)
    kinds = np.array([0, 1, 0], dtype=np.int64)
    ax = np.array([0.0, 10.0, 5.0])
    ay = np.array([0.0, 0.0, 8.0])
    bore = np.array([0.3, 0.0, -2.0])
    leg = np.array([0.0, 1.5, 0.0])
    value = np.array([0.2, 6.0, 0.5])
    weight = np.array([1.0, 1.0, 2.0])
    outs = [
        IMPLS[b]["grid_objective_min"](xs, ys, kinds, ax, ay, bore, leg, value, weight)
        for b in BACKENDS
    ]
    (o1, i1, j1), (o2, i2, j2) = outs
    assert o1 == pytest.approx(o2, rel=1e-12)
    assert (i1, j1) == (i2, j2)


def test_delay_profile_peaks_at_true_delay(data):
    _, rel_freqs, _, _, _, _ = data
    tau_true = 4.0e-8
    values = np.ascontiguousarray(
        np.exp(-2j * math.pi * rel_freqs * tau_true)[:, None] * np.ones((1, 9))
    )
    taus = np.ascontiguousarray(np.linspace(0, 9e-8, 181))
    for b in BACKENDS:
        prof = IMPLS[b]["delay_power_profile"](values, rel_freqs, taus)
        assert abs(taus[int(np.argmax(prof))] - tau_true) < 1e-9
