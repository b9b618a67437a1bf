"""Pure-Python prediction kernels.

Every ``*_series`` function takes the observed points of one variable as two
parallel lists (``ts`` strictly increasing integer timestamps, ``ys`` values)
and returns the prediction for every timestamp ``0..n``.  ``ts`` is never
empty.  The compiled twin in ``_kernels.pyx`` has the same signatures.
"""

import math


def static_series(ts, ys, n):
    out = []
    k = 0
    m = len(ts)
    for t in range(n + 1):
        while k < m and ts[k] <= t:
            k += 1
        out.append(ys[k - 1] if k > 0 else ys[0])
    return out


def poly1_series(ts, ys, n):
    m = len(ts)
    if m == 1:
        return [ys[0]] * (n + 1)
    out = []
    k = 0
    for t in range(n + 1):
        while k < m and ts[k] <= t:
            k += 1
        if k == m:
            i1, i2 = m - 2, m - 1
        elif k == 0:
            i1, i2 = 0, 1
        else:
            i1, i2 = k - 1, k
        t1 = ts[i1]
        y1 = ys[i1]
        out.append((t - t1) / (t1 - ts[i2]) * (y1 - ys[i2]) + y1)
    return out


def linreg_coefficients(ts, ys):
    m = len(ts)
    mt = sum(ts) / m
    my = sum(ys) / m
    sxx = 0.0
    sxy = 0.0
    for t, y in zip(ts, ys):
        sxx += (t - mt) * (t - mt)
        sxy += (t - mt) * (y - my)
    slope = sxy / sxx
    return slope, my - slope * mt


def linreg_series(ts, ys, n):
    if len(ts) < 2:
        return [ys[-1]] * (n + 1) if len(ts) == 1 else static_series(ts, ys, n)
    slope, icpt = linreg_coefficients(ts, ys)
    return [slope * t + icpt for t in range(n + 1)]


def _qkey(x):
    # round half away from zero, matching C ``round``
    r = math.copysign(math.floor(abs(x) * 1e6 + 0.5), x) / 1e6
    return 0.0 if r == 0 else r


def dominant_line(ts, ys):
    """Most frequent (slope, intercept) over all point pairs.

    Pairs are bucketed by coefficients rounded to 6 decimals; ties go to the
    lexicographically smallest bucket.  The exact coefficients of the first
    pair that filled the winning bucket are returned.
    """
    counts = {}
    exact = {}
    m = len(ts)
    for i in range(m):
        for j in range(i + 1, m):
            a = (ys[j] - ys[i]) / (ts[j] - ts[i])
            b = ys[i] - a * ts[i]
            key = (_qkey(a), _qkey(b))
            counts[key] = counts.get(key, 0) + 1
            if key not in exact:
                exact[key] = (a, b)
    best = None
    for key, c in counts.items():
        if best is None or c > counts[best] or (c == counts[best] and key < best):
            best = key
    return exact[best], counts[best]


def dom_poly1_series(ts, ys, n):
    if len(ts) < 2:
        return [ys[-1]] * (n + 1)
    (a, b), _ = dominant_line(ts, ys)
    return [a * t + b for t in range(n + 1)]


def distinct_count(ys, limit):
    """Number of distinct values (tolerance 1e-9), counting at most ``limit``."""
    seen = []
    for y in ys:
        for z in seen:
            if y == z or math.isclose(y, z, rel_tol=1e-9, abs_tol=1e-9):
                break
        else:
            seen.append(y)
            if len(seen) >= limit:
                break
    return len(seen)


def poly2_coefficients(ts, ys):
    """Exact quadratic through the three latest points: (a, b, c)."""
    x1, x2, x3 = ts[-3], ts[-2], ts[-1]
    y1, y2, y3 = ys[-3], ys[-2], ys[-1]
    d1 = (x1 - x2) * (x1 - x3)
    d2 = (x2 - x1) * (x2 - x3)
    d3 = (x3 - x1) * (x3 - x2)
    a = y1 / d1 + y2 / d2 + y3 / d3
    b = -(y1 * (x2 + x3) / d1 + y2 * (x1 + x3) / d2 + y3 * (x1 + x2) / d3)
    c = y1 * x2 * x3 / d1 + y2 * x1 * x3 / d2 + y3 * x1 * x2 / d3
    return a, b, c


def poly2_series(ts, ys, n):
    if len(ts) < 3 or distinct_count(ys, 3) < 3:
        return static_series(ts, ys, n)
    x1, x2, x3 = ts[-3], ts[-2], ts[-1]
    y1, y2, y3 = ys[-3], ys[-2], ys[-1]
    d1 = (x1 - x2) * (x1 - x3)
    d2 = (x2 - x1) * (x2 - x3)
    d3 = (x3 - x1) * (x3 - x2)
    # Lagrange form keeps the interpolation nodes exact
    return [y1 * (t - x2) * (t - x3) / d1
            + y2 * (t - x1) * (t - x3) / d2
            + y3 * (t - x1) * (t - x2) / d3
            for t in range(n + 1)]


def _roots(t, y):
    """Real bases ``a`` with ``a**t == y``; ``None`` means unconstrained."""
    if t == 0:
        return None if math.isclose(y, 1.0, rel_tol=1e-9, abs_tol=1e-9) else []
    if t % 2 == 1:
        r = abs(y) ** (1.0 / t)
        return [r if y >= 0 else -r]
    if y > 0:
        r = y ** (1.0 / t)
        return [r, -r]
    return []


def power_base(ts, ys):
    """The unique base consistent with every observation, else ``None``."""
    cands = None
    for t, y in zip(ts, ys):
        r = _roots(t, y)
        if r is None:
            continue
        if cands is None:
            cands = list(r)
        else:
            cands = [c for c in cands
                     if any(math.isclose(c, x, rel_tol=1e-9, abs_tol=1e-12) for x in r)]
        if not cands:
            return None
    if cands is None or len(cands) != 1:
        return None
    return cands[0]


def power_series(ts, ys, n):
    a = power_base(ts, ys)
    if a is None:
        return static_series(ts, ys, n)
    return [a ** t for t in range(n + 1)]
