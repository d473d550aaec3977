"""Compiled per-seed orbit loops.

Every kernel evaluates the cylinder lift through :func:`step` so that a
witness found by an ensemble search replays bit-for-bit through
:func:`orbit`. Coefficient tables have rows ``(j, sin_amp, cos_amp)``.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

LOWER = 0
UPPER = 1


@njit(cache=True, nogil=True)
def trig(co, t):
    acc = 0.0
    for r in range(co.shape[0]):
        a = TWO_PI * co[r, 0] * t
        if co[r, 1] != 0.0:
            acc += co[r, 1] * math.sin(a)
        if co[r, 2] != 0.0:
            acc += co[r, 2] * math.cos(a)
    return acc


@njit(cache=True, nogil=True)
def step(k, hco, vco, c, x, y):
    x1 = x + k * y + trig(hco, y)
    x1 -= math.floor(x1)
    return x1, y + (c + trig(vco, x1))


@njit(cache=True, nogil=True)
def step_inverse(k, hco, vco, c, x, y):
    y0 = y - (c + trig(vco, x))
    x0 = x - trig(hco, y0) - k * y0
    x0 -= math.floor(x0)
    return x0, y0


@njit(cache=True, nogil=True)
def orbit(k, hco, vco, c, x0, y0, n, every, out_x, out_y):
    """Fill samples every ``every`` steps; return the failing step or -1."""
    x = x0
    y = y0
    out_x[0] = x
    out_y[0] = y
    j = 1
    for t in range(1, n + 1):
        x, y = step(k, hco, vco, c, x, y)
        if not (math.isfinite(x) and math.isfinite(y)):
            return t
        if t % every == 0:
            out_x[j] = x
            out_y[j] = y
            j += 1
    return -1


@njit(cache=True, nogil=True)
def displacements(k, hco, vco, c, xs, ys, checkpoints, power, shift, out, bad):
    # out[cp, i] = displacement of seed i after checkpoints[cp] applications
    # of f^power + (0, shift)
    ncp = checkpoints.shape[0]
    last = checkpoints[ncp - 1]
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        y0 = y
        cp = 0
        for t in range(1, last + 1):
            for _ in range(power):
                x, y = step(k, hco, vco, c, x, y)
            if not math.isfinite(y):
                bad[i] = t
                break
            # the integer shift is kept out of the orbit so F-orbits stay bit-identical
            while cp < ncp and checkpoints[cp] == t:
                out[cp, i] = (y - y0) + shift * t
                cp += 1


@njit(cache=True, nogil=True)
def crossing_search(k, hco, vco, c, xs, ys, n_iter, threshold,
                    first_neg, first_pos, dmin, dmax, tmin, tmax, bad):
    # Per seed: first step with displacement < -threshold / > +threshold.
    # A seed stops once it has crossed on both sides.
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        y0 = y
        lo = 0.0
        hi = 0.0
        tlo = 0
        thi = 0
        fn = -1
        fp = -1
        for t in range(1, n_iter + 1):
            x, y = step(k, hco, vco, c, x, y)
            d = y - y0
            if not math.isfinite(d):
                bad[i] = t
                break
            if d < lo:
                lo = d
                tlo = t
            if d > hi:
                hi = d
                thi = t
            if fn < 0 and d < -threshold:
                fn = t
            if fp < 0 and d > threshold:
                fp = t
            if fn >= 0 and fp >= 0:
                break
        first_neg[i] = fn
        first_pos[i] = fp
        dmin[i] = lo
        dmax[i] = hi
        tmin[i] = tlo
        tmax[i] = thi


@njit(cache=True, nogil=True)
def sup_displacement(k, hco, vco, c, xs, ys, n_iter, q, p,
                     sup_abs, t_abs, sup_pos, t_pos, bad):
    # Iterates g = f^q - (0, p); tracks sup |d| and sup d over 1..n_iter.
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        y0 = y
        sa = 0.0
        ta = 0
        sp = 0.0
        tp = 0
        for t in range(1, n_iter + 1):
            for _ in range(q):
                x, y = step(k, hco, vco, c, x, y)
            d = (y - y0) - p * t
            if not math.isfinite(d):
                bad[i] = t
                break
            if abs(d) > sa:
                sa = abs(d)
                ta = t
            if d > sp:
                sp = d
                tp = t
        sup_abs[i] = sa
        t_abs[i] = ta
        sup_pos[i] = sp
        t_pos[i] = tp


@njit(cache=True, nogil=True)
def escape_times(k, hco, vco, c, xs, ys, horizon, sign, backward, out):
    # First t in 0..horizon at which the orbit leaves the closed half-cylinder
    # (y <= 0 for LOWER, y >= 0 for UPPER); horizon + 1 if it never does.
    for i in range(xs.shape[0]):
        x = xs[i]
        y = ys[i]
        res = horizon + 1
        for t in range(horizon + 1):
            if t > 0:
                if backward:
                    x, y = step_inverse(k, hco, vco, c, x, y)
                else:
                    x, y = step(k, hco, vco, c, x, y)
            if sign == LOWER:
                inside = y <= 0.0
            else:
                inside = y >= 0.0
            if not inside:
                res = t
                break
        out[i] = res


def warm_up():
    """Compile all kernels on a tiny input (useful before timing runs)."""
    co = np.zeros((0, 3))
    xs = np.zeros(1)
    ys = np.zeros(1)
    orbit(1.0, co, co, 0.0, 0.0, 0.0, 1, 1, np.zeros(2), np.zeros(2))
    displacements(1.0, co, co, 0.0, xs, ys, np.array([1], dtype=np.int64), 1, 0.0,
                  np.zeros((1, 1)), np.full(1, -1, dtype=np.int64))
    i64 = np.zeros(1, dtype=np.int64)
    crossing_search(1.0, co, co, 0.0, xs, ys, 1, 1.0, i64.copy(), i64.copy(),
                    np.zeros(1), np.zeros(1), i64.copy(), i64.copy(), i64.copy())
    sup_displacement(1.0, co, co, 0.0, xs, ys, 1, 1, 0.0, np.zeros(1), i64.copy(),
                     np.zeros(1), i64.copy(), i64.copy())
    escape_times(1.0, co, co, 0.0, xs, ys, 1, LOWER, False, i64.copy())
