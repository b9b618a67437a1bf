# cython: language_level=3, cdivision=True
"""Compiled prediction kernels; same signatures as ``_kernels_py``."""

from libc.math cimport fabs, pow, round as cround

# root bookkeeping is branchy and tiny; share the Python implementation
from pjp._kernels_py import power_base


cdef inline bint _close(double a, double b):
    cdef double d = fabs(a - b)
    return a == b or d <= 1e-9 or d <= 1e-9 * max(fabs(a), fabs(b))


def static_series(list ts, list ys, Py_ssize_t n):
    cdef list out = []
    cdef Py_ssize_t k = 0, m = len(ts), t
    for t in range(n + 1):
        while k < m and <long>ts[k] <= t:
            k += 1
        out.append(ys[k - 1] if k > 0 else ys[0])
    return out


def poly1_series(list ts, list ys, Py_ssize_t n):
    cdef Py_ssize_t m = len(ts), k = 0, t, i1, i2
    cdef double t1, y1, t2, y2
    if m == 1:
        return [ys[0]] * (n + 1)
    cdef list out = []
    for t in range(n + 1):
        while k < m and <long>ts[k] <= t:
            k += 1
        if k == m:
            i1 = m - 2
            i2 = m - 1
        elif k == 0:
            i1 = 0
            i2 = 1
        else:
            i1 = k - 1
            i2 = k
        t1 = ts[i1]
        y1 = ys[i1]
        t2 = ts[i2]
        y2 = ys[i2]
        out.append((t - t1) / (t1 - t2) * (y1 - y2) + y1)
    return out


def linreg_coefficients(list ts, list ys):
    cdef Py_ssize_t m = len(ts), i
    cdef double mt = 0, my = 0, sxx = 0, sxy = 0, dt
    for i in range(m):
        mt += <double>ts[i]
        my += <double>ys[i]
    mt /= m
    my /= m
    for i in range(m):
        dt = <double>ts[i] - mt
        sxx += dt * dt
        sxy += dt * (<double>ys[i] - my)
    cdef double slope = sxy / sxx
    return slope, my - slope * mt


def linreg_series(list ts, list ys, Py_ssize_t n):
    if len(ts) < 2:
        return [ys[-1]] * (n + 1)
    slope, icpt = linreg_coefficients(ts, ys)
    cdef double s = slope, c = icpt
    cdef Py_ssize_t t
    return [s * t + c for t in range(n + 1)]


cdef inline double _qkey(double x):
    cdef double r = cround(x * 1e6) / 1e6
    return 0.0 if r == 0 else r


def dominant_line(list ts, list ys):
    cdef dict counts = {}
    cdef dict exact = {}
    cdef Py_ssize_t m = len(ts), i, j
    cdef double a, b
    for i in range(m):
        for j in range(i + 1, m):
            a = (<double>ys[j] - <double>ys[i]) / (<double>ts[j] - <double>ts[i])
            b = <double>ys[i] - a * <double>ts[i]
            key = (_qkey(a), _qkey(b))
            counts[key] = counts.get(key, 0) + 1
            if key not in exact:
                exact[key] = (a, b)
    best = None
    for key, c in counts.items():
        if best is None or c > counts[best] or (c == counts[best] and key < best):
            best = key
    return exact[best], counts[best]


def dom_poly1_series(list ts, list ys, Py_ssize_t n):
    if len(ts) < 2:
        return [ys[-1]] * (n + 1)
    (a, b), _ = dominant_line(ts, ys)
    cdef double ca = a, cb = b
    cdef Py_ssize_t t
    return [ca * t + cb for t in range(n + 1)]


def distinct_count(list ys, Py_ssize_t limit):
    cdef list seen = []
    cdef double y, z
    cdef bint found
    for yo in ys:
        y = yo
        found = False
        for zo in seen:
            z = zo
            if _close(y, z):
                found = True
                break
        if not found:
            seen.append(y)
            if len(seen) >= limit:
                break
    return len(seen)


def poly2_series(list ts, list ys, Py_ssize_t n):
    if len(ts) < 3 or distinct_count(ys, 3) < 3:
        return static_series(ts, ys, n)
    cdef double x1 = ts[-3], x2 = ts[-2], x3 = ts[-1]
    cdef double y1 = ys[-3], y2 = ys[-2], y3 = ys[-1]
    cdef double d1 = (x1 - x2) * (x1 - x3)
    cdef double d2 = (x2 - x1) * (x2 - x3)
    cdef double d3 = (x3 - x1) * (x3 - x2)
    cdef list out = []
    cdef Py_ssize_t t
    cdef double td
    for t in range(n + 1):
        td = t
        out.append(y1 * (td - x2) * (td - x3) / d1
                   + y2 * (td - x1) * (td - x3) / d2
                   + y3 * (td - x1) * (td - x2) / d3)
    return out


def power_series(list ts, list ys, Py_ssize_t n):
    a = power_base(ts, ys)
    if a is None:
        return static_series(ts, ys, n)
    cdef double ca = a
    cdef Py_ssize_t t
    return [pow(ca, <double>t) for t in range(n + 1)]


def poly2_coefficients(list ts, list ys):
    cdef double x1 = ts[-3], x2 = ts[-2], x3 = ts[-1]
    cdef double y1 = ys[-3], y2 = ys[-2], y3 = ys[-1]
    cdef double d1 = (x1 - x2) * (x1 - x3)
    cdef double d2 = (x2 - x1) * (x2 - x3)
    cdef double d3 = (x3 - x1) * (x3 - x2)
    cdef double a = y1 / d1 + y2 / d2 + y3 / d3
    cdef double b = -(y1 * (x2 + x3) / d1 + y2 * (x1 + x3) / d2 + y3 * (x1 + x2) / d3)
    cdef double c = y1 * x2 * x3 / d1 + y2 * x1 * x3 / d2 + y3 * x1 * x2 / d3
    return a, b, c
