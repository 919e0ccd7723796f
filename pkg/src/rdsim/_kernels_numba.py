"""Loop-style kernels compiled with numba."""
import math

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
TWO_PI = 2.0 * math.pi
INV_2_53 = 1.0 / 9007199254740992.0

# integrator codes
LEAPFROG = 0
YOSHIDA4 = 1
RK4 = 2

_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)


@njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def stream_keys(seed, indices):
    out = np.empty(indices.shape[0], dtype=np.uint64)
    s = np.uint64(seed)
    for i in range(indices.shape[0]):
        out[i] = _mix(s ^ _mix(np.uint64(indices[i]) + GOLDEN))
    return out


@njit(cache=True, nogil=True)
def raw_draws(key, start, count):
    out = np.empty(count, dtype=np.uint64)
    k = np.uint64(key)
    for j in range(count):
        out[j] = _mix(k + np.uint64(start + j + 1) * GOLDEN)
    return out


@njit(cache=True, nogil=True)
def uniform_draws(key, start, count):
    out = np.empty(count, dtype=np.float64)
    k = np.uint64(key)
    for j in range(count):
        u = _mix(k + np.uint64(start + j + 1) * GOLDEN)
        out[j] = float(u >> np.uint64(11)) * INV_2_53
    return out


@njit(cache=True, nogil=True)
def first_normal_per_key(keys):
    """Box-Muller normal built from draws 0 and 1 of each stream."""
    out = np.empty(keys.shape[0], dtype=np.float64)
    for i in range(keys.shape[0]):
        u1 = float(_mix(keys[i] + GOLDEN) >> np.uint64(11)) * INV_2_53
        u2 = float(_mix(keys[i] + np.uint64(2) * GOLDEN) >> np.uint64(11)) * INV_2_53
        out[i] = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(TWO_PI * u2)
    return out


@njit(cache=True, nogil=True)
def first_uniform_per_key(keys):
    out = np.empty(keys.shape[0], dtype=np.float64)
    for i in range(keys.shape[0]):
        out[i] = float(_mix(keys[i] + GOLDEN) >> np.uint64(11)) * INV_2_53
    return out


@njit(cache=True, nogil=True)
def _step(phi, v, dt, method):
    if method == LEAPFROG:
        v -= 0.5 * dt * math.sin(phi)
        phi += dt * v
        v -= 0.5 * dt * math.sin(phi)
    elif method == YOSHIDA4:
        phi += 0.5 * _W1 * dt * v
        v -= _W1 * dt * math.sin(phi)
        phi += 0.5 * (_W0 + _W1) * dt * v
        v -= _W0 * dt * math.sin(phi)
        phi += 0.5 * (_W0 + _W1) * dt * v
        v -= _W1 * dt * math.sin(phi)
        phi += 0.5 * _W1 * dt * v
    else:
        k1p = v
        k1v = -math.sin(phi)
        k2p = v + 0.5 * dt * k1v
        k2v = -math.sin(phi + 0.5 * dt * k1p)
        k3p = v + 0.5 * dt * k2v
        k3v = -math.sin(phi + 0.5 * dt * k2p)
        k4p = v + dt * k3v
        k4v = -math.sin(phi + dt * k3p)
        phi += dt * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        v += dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return phi, v


@njit(cache=True, nogil=True)
def trajectory(phi0, v0, dt, t_max, method, stop_at_top):
    n_max = int(math.ceil(t_max / dt))
    ts = np.empty(n_max + 1)
    ps = np.empty(n_max + 1)
    vs = np.empty(n_max + 1)
    ts[0] = 0.0
    ps[0] = phi0
    vs[0] = v0
    phi = phi0
    v = v0
    t_cross = -1.0
    n = 0
    for i in range(1, n_max + 1):
        phi_prev = phi
        phi, v = _step(phi, v, dt, method)
        if not (math.isfinite(phi) and math.isfinite(v)):
            return ts[:i], ps[:i], vs[:i], -2.0
        ts[i] = i * dt
        ps[i] = phi
        vs[i] = v
        n = i
        if stop_at_top and abs(phi) >= math.pi:
            edge = math.pi if phi > 0 else -math.pi
            frac = (edge - phi_prev) / (phi - phi_prev)
            t_cross = (i - 1 + frac) * dt
            break
    return ts[: n + 1], ps[: n + 1], vs[: n + 1], t_cross


@njit(cache=True, nogil=True)
def classify_batch(phi0, v0, dt, t_max, method):
    """1 = over the top at +pi, 0 = turned back, -1 = undecided by t_max."""
    n_max = int(math.ceil(t_max / dt))
    out = np.empty(v0.shape[0], dtype=np.int8)
    for k in range(v0.shape[0]):
        phi = phi0
        v = v0[k]
        code = -1
        if v <= 0.0:
            code = 0
        else:
            for _ in range(n_max):
                phi, v = _step(phi, v, dt, method)
                if phi >= math.pi:
                    code = 1
                    break
                if v <= 0.0:
                    code = 0
                    break
        out[k] = code
    return out


@njit(cache=True, nogil=True)
def jacobi_eigh(a, tol, max_sweeps):
    """Cyclic complex Jacobi. Returns unsorted (w, v, sweeps); a is overwritten."""
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real ** 2 + a[i, j].imag ** 2
    scale = math.sqrt(scale)
    sweeps = 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
        off = math.sqrt(2.0 * off)
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
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * cph * akq
                    a[k, q] = s * akp + c * cph * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * ph * aqk
                    a[q, k] = s * apk + c * ph * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * cph * vkq
                    v[k, q] = s * vkp + c * cph * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps
