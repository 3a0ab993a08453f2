"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The numba path is used whenever numba imports cleanly; set the environment
variable ``RISLOC_NUMBA=0`` before import to force the numpy fallback.
Both backends implement the same signatures and are exposed through
``implementations()`` so tests and the benchmark can compare them.

Kernels:
  mpc_correlation      matched-filter inner product of a channel tensor
                       against one (delay, arrival-angle) hypothesis
  component_polish     alternating golden-section refinement of one
                       component's (delay, angle) plus its ML gain
  delay_power_profile  noncoherent delay spectrum over a delay grid
  angle_power_scan     coherent power over a grid of arrival angles at a
                       fixed delay
  grid_objective_min   brute-force least-squares objective minimizer over a
                       rectangular position grid
"""
from __future__ import annotations

import math
import os

import numpy as np

TWO_PI = 2.0 * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _mpc_correlation_np(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad):
    """Sum of values[f, p] * exp(+j 2 pi f_rel tau) * conj(steering[p])."""
    ph = np.exp(1j * TWO_PI * rel_freqs * tau)
    proj = np.exp(-1j * wavenumber * (rx_x * math.cos(theta_rad) + rx_y * math.sin(theta_rad)))
    return complex((ph @ values) @ proj)


def _golden_max_scalar(fun, lo, hi, tol):
    c1 = hi - GOLDEN * (hi - lo)
    c2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fun(c1), fun(c2)
    while hi - lo > tol:
        if f1 > f2:
            hi, c2, f2 = c2, c1, f1
            c1 = hi - GOLDEN * (hi - lo)
            f1 = fun(c1)
        else:
            lo, c1, f1 = c1, c2, f2
            c2 = lo + GOLDEN * (hi - lo)
            f2 = fun(c2)
    return 0.5 * (lo + hi)


def _component_polish_np(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad,
                         dtau, dtheta, rounds, tau_tol, theta_tol):
    """Alternating 1D golden-section refinement of (delay, angle), then ML gain."""
    for _ in range(rounds):
        tau = _golden_max_scalar(
            lambda t: abs(_mpc_correlation_np(values, rel_freqs, rx_x, rx_y, wavenumber, t, theta_rad)),
            max(tau - dtau, 0.0), tau + dtau, tau_tol,
        )
        theta_rad = _golden_max_scalar(
            lambda a: abs(_mpc_correlation_np(values, rel_freqs, rx_x, rx_y, wavenumber, tau, a)),
            theta_rad - dtheta, theta_rad + dtheta, theta_tol,
        )
    gain = _mpc_correlation_np(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad) / values.size
    return tau, theta_rad, gain


def _delay_power_profile_np(values, rel_freqs, taus):
    basis = np.exp(1j * TWO_PI * np.outer(taus, rel_freqs))
    corr = basis @ values  # [D, P]
    return np.sum(np.abs(corr) ** 2, axis=1)


def _angle_power_scan_np(values, rel_freqs, tau, steer_conj):
    ph = np.exp(1j * TWO_PI * rel_freqs * tau)
    per_pos = ph @ values  # [P]
    z = steer_conj @ per_pos
    return np.abs(z) ** 2


def _grid_objective_min_np(xs, ys, kinds, ax, ay, bore_rad, leg, value, weight):
    best = math.inf
    bi = bj = 0
    gx = xs[:, None]
    chunk = max(1, int(2_000_000 // max(len(ys), 1)))
    for start in range(0, len(xs), chunk):
        sub = gx[start:start + chunk]
        obj = np.zeros((sub.shape[0], len(ys)))
        for m in range(len(kinds)):
            dx = sub - ax[m]
            dy = ys[None, :] - ay[m]
            if kinds[m] == 0:
                th = np.arctan2(dy, dx) - bore_rad[m] - value[m]
                th = (th + math.pi) % TWO_PI - math.pi
                obj += (th * weight[m]) ** 2
            else:
                r = leg[m] + np.hypot(dx, dy) - value[m]
                obj += (r * weight[m]) ** 2
        k = int(np.argmin(obj))
        i, j = divmod(k, obj.shape[1])
        if obj[i, j] < best:
            best = float(obj[i, j])
            bi, bj = start + i, j
    return best, bi, bj


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _build_numba():
    from numba import njit

    # uniform rel_freqs let every frequency sweep run on a phasor recurrence
    # (one complex multiply per bin) instead of per-bin trig

    @njit(cache=True)
    def _correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad):
        n_freq, n_pos = values.shape
        acc = np.zeros(n_pos, dtype=np.complex128)
        dstep = TWO_PI * tau * (rel_freqs[1] - rel_freqs[0])
        w = complex(math.cos(dstep), math.sin(dstep))
        ang0 = TWO_PI * tau * rel_freqs[0]
        ph = complex(math.cos(ang0), math.sin(ang0))
        for f in range(n_freq):
            for p in range(n_pos):
                acc[p] += values[f, p] * ph
            ph *= w
        ux = math.cos(theta_rad)
        uy = math.sin(theta_rad)
        z = 0.0 + 0.0j
        for p in range(n_pos):
            ang = -wavenumber * (rx_x[p] * ux + rx_y[p] * uy)
            z += acc[p] * complex(math.cos(ang), math.sin(ang))
        return z

    @njit(cache=True)
    def mpc_correlation(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad):
        return _correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad)

    @njit(cache=True)
    def component_polish(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad,
                         dtau, dtheta, rounds, tau_tol, theta_tol):
        for _ in range(rounds):
            # golden section over delay
            lo = tau - dtau
            if lo < 0.0:
                lo = 0.0
            hi = tau + dtau
            c1 = hi - GOLDEN * (hi - lo)
            c2 = lo + GOLDEN * (hi - lo)
            f1 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, c1, theta_rad))
            f2 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, c2, theta_rad))
            while hi - lo > tau_tol:
                if f1 > f2:
                    hi, c2, f2 = c2, c1, f1
                    c1 = hi - GOLDEN * (hi - lo)
                    f1 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, c1, theta_rad))
                else:
                    lo, c1, f1 = c1, c2, f2
                    c2 = lo + GOLDEN * (hi - lo)
                    f2 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, c2, theta_rad))
            tau = 0.5 * (lo + hi)
            # golden section over angle
            lo = theta_rad - dtheta
            hi = theta_rad + dtheta
            c1 = hi - GOLDEN * (hi - lo)
            c2 = lo + GOLDEN * (hi - lo)
            f1 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, c1))
            f2 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, c2))
            while hi - lo > theta_tol:
                if f1 > f2:
                    hi, c2, f2 = c2, c1, f1
                    c1 = hi - GOLDEN * (hi - lo)
                    f1 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, c1))
                else:
                    lo, c1, f1 = c1, c2, f2
                    c2 = lo + GOLDEN * (hi - lo)
                    f2 = abs(_correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, c2))
            theta_rad = 0.5 * (lo + hi)
        gain = _correlate(values, rel_freqs, rx_x, rx_y, wavenumber, tau, theta_rad) / values.size
        return tau, theta_rad, gain

    @njit(cache=True)
    def delay_power_profile(values, rel_freqs, taus):
        n_freq, n_pos = values.shape
        out = np.empty(len(taus))
        acc = np.zeros(n_pos, dtype=np.complex128)
        df = rel_freqs[1] - rel_freqs[0]
        for d in range(len(taus)):
            acc[:] = 0.0
            dstep = TWO_PI * taus[d] * df
            w = complex(math.cos(dstep), math.sin(dstep))
            ang0 = TWO_PI * taus[d] * rel_freqs[0]
            ph = complex(math.cos(ang0), math.sin(ang0))
            for f in range(n_freq):
                for p in range(n_pos):
                    acc[p] += values[f, p] * ph
                ph *= w
            s = 0.0
            for p in range(n_pos):
                s += acc[p].real ** 2 + acc[p].imag ** 2
            out[d] = s
        return out

    @njit(cache=True)
    def angle_power_scan(values, rel_freqs, tau, steer_conj):
        n_freq, n_pos = values.shape
        acc = np.zeros(n_pos, dtype=np.complex128)
        dstep = TWO_PI * tau * (rel_freqs[1] - rel_freqs[0])
        w = complex(math.cos(dstep), math.sin(dstep))
        ang0 = TWO_PI * tau * rel_freqs[0]
        ph = complex(math.cos(ang0), math.sin(ang0))
        for f in range(n_freq):
            for p in range(n_pos):
                acc[p] += values[f, p] * ph
            ph *= w
        n_ang = steer_conj.shape[0]
        out = np.empty(n_ang)
        for a in range(n_ang):
            z = 0.0 + 0.0j
            for p in range(n_pos):
                z += acc[p] * steer_conj[a, p]
            out[a] = z.real ** 2 + z.imag ** 2
        return out

    @njit(cache=True)
    def grid_objective_min(xs, ys, kinds, ax, ay, bore_rad, leg, value, weight):
        best = math.inf
        bi = 0
        bj = 0
        n_meas = len(kinds)
        for i in range(len(xs)):
            x = xs[i]
            for j in range(len(ys)):
                y = ys[j]
                obj = 0.0
                for m in range(n_meas):
                    dx = x - ax[m]
                    dy = y - ay[m]
                    if kinds[m] == 0:
                        th = math.atan2(dy, dx) - bore_rad[m] - value[m]
                        th = (th + math.pi) % TWO_PI - math.pi
                        obj += (th * weight[m]) ** 2
                    else:
                        r = leg[m] + math.hypot(dx, dy) - value[m]
                        obj += (r * weight[m]) ** 2
                if obj < best:
                    best = obj
                    bi = i
                    bj = j
        return best, bi, bj

    return {
        "mpc_correlation": mpc_correlation,
        "component_polish": component_polish,
        "delay_power_profile": delay_power_profile,
        "angle_power_scan": angle_power_scan,
        "grid_objective_min": grid_objective_min,
    }


_NUMPY_IMPLS = {
    "mpc_correlation": _mpc_correlation_np,
    "component_polish": _component_polish_np,
    "delay_power_profile": _delay_power_profile_np,
    "angle_power_scan": _angle_power_scan_np,
    "grid_objective_min": _grid_objective_min_np,
}


def _select_backend():
    if os.environ.get("RISLOC_NUMBA", "1").lower() in ("0", "false", "off"):
        return "numpy", _NUMPY_IMPLS
    try:
        return "numba", _build_numba()
    except ImportError:
        return "numpy", _NUMPY_IMPLS


BACKEND, _ACTIVE = _select_backend()

mpc_correlation = _ACTIVE["mpc_correlation"]
component_polish = _ACTIVE["component_polish"]
delay_power_profile = _ACTIVE["delay_power_profile"]
angle_power_scan = _ACTIVE["angle_power_scan"]
grid_objective_min = _ACTIVE["grid_objective_min"]


def implementations() -> dict:
    """All available backends keyed by name, for tests and benchmarks."""
    out = {"numpy": _NUMPY_IMPLS}
    try:
        out["numba"] = _build_numba()
    except ImportError:
        pass
    return out
