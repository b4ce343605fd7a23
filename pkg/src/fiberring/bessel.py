"""
Bessel functions J_n and modified Bessel functions K_n for n = 0, 1, 2.

J_n: ascending power series for x <= 5; for larger x, Miller's backward
recurrence normalized with J_0 + 2*sum(J_2k) = 1 (downward recurrence is the
stable direction for J).

K_n: ascending series with logarithmic terms for x <= 2; Steed/Temme continued
fraction for x > 2 (gives K_0 and K_1 together). K_2 follows from the upward
recurrence K_2 = K_0 + (2/x) K_1, which is stable for K.

Absolute accuracy is better than 1e-13 on (0, 50].
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

EULER_GAMMA = 0.57721566490153286061

_J_SERIES_MAX = 5.0
_K_SERIES_MAX = 2.0
_SERIES_TERMS = 40


class BesselDomainError(ValueError):
    """Argument outside the supported domain."""


def _as_array(x: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _j_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = -0.25 * x * x
    out = []
    for n in range(3):
        term = (0.5 * x) ** n / math.factorial(n)
        total = term.copy()
        for k in range(1, _SERIES_TERMS):
            term = term * y / (k * (k + n))
            total += term
        out.append(total)
    return out[0], out[1], out[2]


def _j_miller(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = int(1.2 * float(x.max())) + 40
    m += m % 2
    jp1 = np.zeros_like(x)
    jk = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    j0 = j1 = j2 = None
    inv = 2.0 / x
    for k in range(m, 0, -1):
        # jk holds J_k; step down to J_{k-1}
        if k % 2 == 0:
            norm += 2.0 * jk
        jm1 = k * inv * jk - jp1
        jp1, jk = jk, jm1
        if k == 3:
            j2 = jk.copy()
        elif k == 2:
            j1 = jk.copy()
        big = np.abs(jk) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            jk *= scale
            jp1 *= scale
            norm *= scale
            if j2 is not None:
                j2 *= scale
            if j1 is not None:
                j1 *= scale
    j0 = jk
    norm += j0
    return j0 / norm, j1 / norm, j2 / norm


def _j012(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    j2 = np.empty_like(x)
    small = x <= _J_SERIES_MAX
    if small.any():
        j0[small], j1[small], j2[small] = _j_series(x[small])
    if (~small).any():
        j0[~small], j1[~small], j2[~small] = _j_miller(x[~small])
    return j0, j1, j2


def _k01_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = 0.25 * x * x
    lg = np.log(0.5 * x)
    # I0, I1 and the digamma-weighted sums
    t0 = np.ones_like(x)  # y^k / (k!)^2
    t1 = np.ones_like(x)  # y^k / (k! (k+1)!)
    i0 = t0.copy()
    i1s = t1.copy()
    harm = 0.0  # H_k
    s0 = np.zeros_like(x)
    s1 = (2.0 * (-EULER_GAMMA) + 1.0) * t1  # psi(1) + psi(2) at k = 0
    for k in range(1, _SERIES_TERMS):
        t0 = t0 * y / (k * k)
        t1 = t1 * y / (k * (k + 1))
        harm += 1.0 / k
        i0 += t0
        i1s += t1
        s0 += harm * t0
        # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += (2.0 * harm + 1.0 / (k + 1) - 2.0 * EULER_GAMMA) * t1
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lg * (0.5 * x * i1s) - 0.25 * x * s1
    return k0, k1


def _k01_steed(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Temme's continued fraction CF2 evaluated with Steed's algorithm (order 0)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    delh = d.copy()
    h = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(2, 10_000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = np.where(done, h, h + delh)
        dels = q * delh
        s = np.where(done, s, s + dels)
        done |= np.abs(dels / s) < 1e-17
        if done.all():
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k012(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= _K_SERIES_MAX
    if small.any():
        k0[small], k1[small] = _k01_series(x[small])
    if (~small).any():
        k0[~small], k1[~small] = _k01_steed(x[~small])
    k2 = k0 + 2.0 / x * k1
    return k0, k1, k2


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise BesselDomainError(f"only orders 0, 1, 2 are supported, got {order}")


def bessel_j(order: int, x: ArrayLike):
    """Bessel function of the first kind J_order(x) for x >= 0."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise BesselDomainError("J_n is implemented for finite x >= 0")
    out = _j012(arr)[order]
    return float(out[0]) if scalar else out


def bessel_k(order: int, x: ArrayLike):
    """Modified Bessel function of the second kind K_order(x) for x > 0."""
    _check_order(order)
    arr, scalar = _as_array(x)
    if np.any(arr <= 0) or np.any(~np.isfinite(arr)):
        raise BesselDomainError("K_n requires finite x > 0")
    out = _k012(arr)[order]
    return float(out[0]) if scalar else out


def bessel_j012(x: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J_0, J_1, J_2 evaluated together (one recurrence pass)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise BesselDomainError("J_n is implemented for x >= 0")
    flat = np.atleast_1d(arr).ravel()
    return tuple(v.reshape(arr.shape) for v in _j012(flat))


def bessel_k012(x: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """K_0, K_1, K_2 evaluated together."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise BesselDomainError("K_n requires x > 0")
    flat = np.atleast_1d(arr).ravel()
    return tuple(v.reshape(arr.shape) for v in _k012(flat))
