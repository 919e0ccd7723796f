"""Vectorised numpy versions of the hot kernels.

Same signatures and results as ``_kernels_numba``; integer outputs match
bit for bit, floating outputs to rounding.
"""
import math

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_PI = 2.0 * math.pi
INV_2_53 = 1.0 / 9007199254740992.0

LEAPFROG = 0
YOSHIDA4 = 1
RK4 = 2

_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)


def _mix(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * MIX1
        z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


def _to_unit(u):
    return (u >> np.uint64(11)).astype(np.float64) * INV_2_53


def stream_keys(seed, indices):
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(seed) ^ _mix(idx + GOLDEN))


def raw_draws(key, start, count):
    j = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(np.uint64(key) + j * GOLDEN)


def uniform_draws(key, start, count):
    return _to_unit(raw_draws(key, start, count))


def first_normal_per_key(keys):
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        u1 = _to_unit(_mix(keys + GOLDEN))
        u2 = _to_unit(_mix(keys + np.uint64(2) * GOLDEN))
    return np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(TWO_PI * u2)


def first_uniform_per_key(keys):
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _to_unit(_mix(keys + GOLDEN))


def _step(phi, v, dt, method):
    if method == LEAPFROG:
        v = v - 0.5 * dt * np.sin(phi)
        phi = phi + dt * v
        v = v - 0.5 * dt * np.sin(phi)
    elif method == YOSHIDA4:
        phi = phi + 0.5 * _W1 * dt * v
        v = v - _W1 * dt * np.sin(phi)
        phi = phi + 0.5 * (_W0 + _W1) * dt * v
        v = v - _W0 * dt * np.sin(phi)
        phi = phi + 0.5 * (_W0 + _W1) * dt * v
        v = v - _W1 * dt * np.sin(phi)
        phi = phi + 0.5 * _W1 * dt * v
    else:
        k1p = v
        k1v = -np.sin(phi)
        k2p = v + 0.5 * dt * k1v
        k2v = -np.sin(phi + 0.5 * dt * k1p)
        k3p = v + 0.5 * dt * k2v
        k3v = -np.sin(phi + 0.5 * dt * k2p)
        k4p = v + dt * k3v
        k4v = -np.sin(phi + dt * k3p)
        phi = phi + dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        v = v + dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return phi, v


def trajectory(phi0, v0, dt, t_max, method, stop_at_top):
    # a single trajectory cannot be vectorised; plain float loop
    n_max = int(math.ceil(t_max / dt))
    ts, ps, vs = [0.0], [float(phi0)], [float(v0)]
    phi, v = float(phi0), float(v0)
    step = _scalar_step(method)
    t_cross = -1.0
    for i in range(1, n_max + 1):
        phi_prev = phi
        phi, v = step(phi, v, dt)
        if not (math.isfinite(phi) and math.isfinite(v)):
            return np.array(ts), np.array(ps), np.array(vs), -2.0
        ts.append(i * dt)
        ps.append(phi)
        vs.append(v)
        if stop_at_top and abs(phi) >= math.pi:
            edge = math.pi if phi > 0 else -math.pi
            t_cross = (i - 1 + (edge - phi_prev) / (phi - phi_prev)) * dt
            break
    return np.array(ts), np.array(ps), np.array(vs), t_cross


def _scalar_step(method):
    sin = math.sin
    if method == LEAPFROG:
        def step(phi, v, dt):
            v -= 0.5 * dt * sin(phi)
            phi += dt * v
            v -= 0.5 * dt * sin(phi)
            return phi, v
    elif method == YOSHIDA4:
        def step(phi, v, dt):
            phi += 0.5 * _W1 * dt * v
            v -= _W1 * dt * sin(phi)
            phi += 0.5 * (_W0 + _W1) * dt * v
            v -= _W0 * dt * sin(phi)
            phi += 0.5 * (_W0 + _W1) * dt * v
            v -= _W1 * dt * sin(phi)
            phi += 0.5 * _W1 * dt * v
            return phi, v
    else:
        def step(phi, v, dt):
            k1p, k1v = v, -sin(phi)
            k2p, k2v = v + 0.5 * dt * k1v, -sin(phi + 0.5 * dt * k1p)
            k3p, k3v = v + 0.5 * dt * k2v, -sin(phi + 0.5 * dt * k2p)
            k4p, k4v = v + dt * k3v, -sin(phi + dt * k3p)
            phi += dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
            v += dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
            return phi, v
    return step


def classify_batch(phi0, v0, dt, t_max, method):
    v0 = np.asarray(v0, dtype=np.float64)
    n_max = int(math.ceil(t_max / dt))
    out = np.full(v0.shape[0], -1, dtype=np.int8)
    out[v0 <= 0.0] = 0
    live = np.flatnonzero(v0 > 0.0)
    phi = np.full(live.shape[0], float(phi0))
    v = v0[live].copy()
    for _ in range(n_max):
        if live.size == 0:
            break
        phi, v = _step(phi, v, dt, method)
        over = phi >= math.pi
        back = (v <= 0.0) & ~over
        if over.any() or back.any():
            out[live[over]] = 1
            out[live[back]] = 0
            keep = ~(over | back)
            live, phi, v = live[keep], phi[keep], v[keep]
    return out


def jacobi_eigh(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    sweeps = 0
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        off = math.sqrt(2.0) * np.linalg.norm(a[iu])
        if off <= tol * scale or off == 0.0:
            break
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                ph = apq / mag
                cph = ph.conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * cph * colq
                a[:, q] = s * colp + c * cph * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * ph * rowq
                a[q, :] = s * rowp + c * ph * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * cph * vq
                v[:, q] = s * vp + c * cph * vq
    return np.real(np.diag(a)).copy(), v, sweeps
