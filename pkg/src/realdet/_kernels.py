"""Hot loops: trigonometric series evaluation and RK4 flows at complex points.

Numba versions are used when numba imports and REALDET_NO_NUMBA is unset;
the numpy versions are always importable for comparison.
"""
import os

import numpy as np

_DISABLE = os.environ.get("REALDET_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------- numpy

def np_series(modes, coeffs, z):
    """sum_j coeffs[j] * exp(i modes[j] z) for an array z."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    for k, c in zip(modes, coeffs):
        if c != 0:
            out += c * np.exp(1j * k * z)
    return out


def np_series_pair(modes, coeffs, dcoeffs, z):
    z = np.asarray(z, dtype=np.complex128)
    val = np.zeros(z.shape, dtype=np.complex128)
    der = np.zeros(z.shape, dtype=np.complex128)
    for k, c, d in zip(modes, coeffs, dcoeffs):
        if c != 0:
            e = np.exp(1j * k * z)
            val += c * e
            der += d * e
    return val, der


def np_flow(modes, coeffs, dcoeffs, t, steps, z0):
    """RK4 for dz/dt = v(z) together with dp/dt = v'(z) p, p(0) = 1.

    Returns (z(t), p(t), max |Im z| seen along the way).
    """
    z = np.array(z0, dtype=np.complex128, copy=True)
    p = np.ones_like(z)
    dt = t / steps
    top = np.max(np.abs(z.imag)) if z.size else 0.0
    for _ in range(steps):
        k1, l1 = np_series_pair(modes, coeffs, dcoeffs, z)
        l1 = l1 * p
        z2 = z + 0.5 * dt * k1
        p2 = p + 0.5 * dt * l1
        k2, l2 = np_series_pair(modes, coeffs, dcoeffs, z2)
        l2 = l2 * p2
        z3 = z + 0.5 * dt * k2
        p3 = p + 0.5 * dt * l2
        k3, l3 = np_series_pair(modes, coeffs, dcoeffs, z3)
        l3 = l3 * p3
        z4 = z + dt * k3
        p4 = p + dt * l3
        k4, l4 = np_series_pair(modes, coeffs, dcoeffs, z4)
        l4 = l4 * p4
        z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        p = p + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)
        if z.size:
            top = max(top, float(np.max(np.abs(z.imag))))
    return z, p, top


# ---------------------------------------------------------------- numba

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _nb_pair_at(kmin, coeffs, dcoeffs, z):
        # e^{ikz} by recurrence from e^{i kmin z}: one exp per point
        step = np.exp(1j * z)
        e = np.exp(1j * kmin * z)
        val = 0j
        der = 0j
        for j in range(coeffs.shape[0]):
            val += coeffs[j] * e
            der += dcoeffs[j] * e
            e *= step
        return val, der

    @njit(cache=True, nogil=True)
    def _nb_series(kmin, coeffs, z):
        out = np.empty(z.shape[0], dtype=np.complex128)
        for i in range(z.shape[0]):
            step = np.exp(1j * z[i])
            e = np.exp(1j * kmin * z[i])
            acc = 0j
            for j in range(coeffs.shape[0]):
                acc += coeffs[j] * e
                e *= step
            out[i] = acc
        return out

    @njit(cache=True, nogil=True)
    def _nb_flow(kmin, coeffs, dcoeffs, t, steps, z0):
        n = z0.shape[0]
        zs = np.empty(n, dtype=np.complex128)
        ps = np.empty(n, dtype=np.complex128)
        dt = t / steps
        top = 0.0
        for i in range(n):
            z = z0[i]
            p = 1.0 + 0j
            if abs(z.imag) > top:
                top = abs(z.imag)
            for _ in range(steps):
                k1, d1 = _nb_pair_at(kmin, coeffs, dcoeffs, z)
                l1 = d1 * p
                k2, d2 = _nb_pair_at(kmin, coeffs, dcoeffs, z + 0.5 * dt * k1)
                l2 = d2 * (p + 0.5 * dt * l1)
                k3, d3 = _nb_pair_at(kmin, coeffs, dcoeffs, z + 0.5 * dt * k2)
                l3 = d3 * (p + 0.5 * dt * l2)
                k4, d4 = _nb_pair_at(kmin, coeffs, dcoeffs, z + dt * k3)
                l4 = d4 * (p + dt * l3)
                z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                p = p + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)
                if abs(z.imag) > top:
                    top = abs(z.imag)
            zs[i] = z
            ps[i] = p
        return zs, ps, top

    def _dense(modes, *coeff_arrays):
        """Integer modes -> (kmin, dense coefficient arrays over kmin..kmax)."""
        modes = np.asarray(modes, dtype=np.float64)
        if modes.size == 0:
            return 0.0, [np.zeros(1, np.complex128) for _ in coeff_arrays]
        k = np.rint(modes).astype(np.int64)
        if np.any(k != modes):
            return None, None
        kmin = int(k.min())
        out = []
        for c in coeff_arrays:
            d = np.zeros(int(k.max()) - kmin + 1, dtype=np.complex128)
            np.add.at(d, k - kmin, np.asarray(c, dtype=np.complex128))
            out.append(d)
        return float(kmin), out

    def nb_series(modes, coeffs, z):
        kmin, dense = _dense(modes, coeffs)
        if kmin is None:
            return np_series(modes, coeffs, z)
        z = np.asarray(z, dtype=np.complex128)
        flat = np.ascontiguousarray(z.ravel())
        return _nb_series(kmin, dense[0], flat).reshape(z.shape)

    def nb_flow(modes, coeffs, dcoeffs, t, steps, z0):
        kmin, dense = _dense(modes, coeffs, dcoeffs)
        if kmin is None:
            return np_flow(modes, coeffs, dcoeffs, t, steps, z0)
        z0 = np.asarray(z0, dtype=np.complex128)
        flat = np.ascontiguousarray(z0.ravel())
        z, p, top = _nb_flow(kmin, dense[0], dense[1], float(t), int(steps), flat)
        return z.reshape(z0.shape), p.reshape(z0.shape), float(top)


def backend():
    return "numba" if HAVE_NUMBA else "numpy"


if HAVE_NUMBA:
    series = nb_series
    flow = nb_flow
else:
    series = np_series
    flow = np_flow
