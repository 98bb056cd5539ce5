"""Pure-Python backend for the partition kernels.

Mirrors the call surface of the compiled backend (``adaptrec._core``).
Exact entry points take pre-scaled integers: coordinates ``q[j] = y[j]*M``
and thresholds ``t[k] = delta[k]*M`` for a common denominator ``M``, so
every comparison below is integer-exact.  Python integers are unbounded,
which makes this backend the fallback for inputs whose scaled magnitude
does not fit the compiled backend's 64-bit range.

Geometry, in unscaled terms.  Write ``d[j]`` for the distance of ``y[j]``
to the nearest integer.  The level-``k`` region of the partition is
``{y : #{j : d[j] <= delta[k]} >= m-k}`` minus the lower levels, and its
cells are boxes: ``m-k`` coordinates pinned to within ``delta[k]`` of an
integer anchor, the rest ranging over open bands
``(n+delta[k-1], n+1-delta[k-1])``, with, for each ``i < k-1``, at least
``i+1`` band coordinates escaping to distance ``>= delta[i]`` from the
lattice.  Membership depends on the profile ``d`` alone, which gives the
closed-form level distances implemented here: pinning the ``m-k``
smallest profile entries and clearing each earlier threshold costs

    rho[k] = max(0, d(m-k) - delta[k], max_{i<k} (delta[i] - d(m-i)))

in the max norm, where ``d(1) <= ... <= d(m)`` is the sorted profile.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

BACKEND = "pure"


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# exact scalar kernels (arbitrary-precision integers)
# ---------------------------------------------------------------------------


def profile(q, M):
    """Per-coordinate scaled distance to the lattice M*Z."""
    out = []
    for qj in q:
        r = qj % M
        out.append(r if 2 * r <= M else M - r)
    return out


def level_dists(q, t, M):
    """Distance from y to the closure of each level's region, scaled by M.

    Returns a list of m+1 nonnegative integers.
    """
    m = len(q)
    d = sorted(profile(q, M))
    out = []
    carve = 0
    for k in range(m + 1):
        if k >= 1:
            gap = t[k - 1] - d[m - k]
            if gap > carve:
                carve = gap
        rho = carve
        if k < m:
            pin = d[m - k - 1] - t[k]
            if pin > rho:
                rho = pin
        out.append(rho if rho > 0 else 0)
    return out


def level_of(q, t, M):
    """Smallest k whose region contains y.  Total: every point has one."""
    m = len(q)
    d = sorted(profile(q, M))
    for k in range(m + 1):
        cnt = 0
        for dj in d:
            if dj <= t[k]:
                cnt += 1
        if cnt >= m - k:
            return k
    raise AssertionError("unreachable: level m accepts every profile")


def locate_cell(q, t, M, k):
    """The level-k cell whose closure contains y.

    Requires ``level_dists(q, t, M)[k] == 0``.  Returns
    ``(pinned, anchors, origins)`` with pinned coordinate indices sorted,
    anchors the nearest lattice points of the pinned coordinates, origins
    the floors of the free ones.
    """
    m = len(q)
    d = profile(q, M)
    pinned = []
    anchors = []
    origins = []
    for j in range(m):
        r = q[j] % M
        if d[j] <= t[k]:
            pinned.append(j)
            anchors.append((q[j] - r) // M + (1 if 2 * r > M else 0))
        else:
            if k >= 1 and d[j] < t[k - 1]:
                raise AssertionError("not in the closure of any level-%d cell" % k)
            origins.append((q[j] - r) // M)
    if len(pinned) != m - k:
        raise AssertionError(
            "point is %d-pinned, not %d-pinned; level distance was nonzero"
            % (len(pinned), m - k)
        )
    return tuple(pinned), tuple(anchors), tuple(origins)


def cell_dist(q, t, M, k, pinned, anchors, origins):
    """Max-norm distance from y to the closure of one level-k cell, scaled."""
    m = len(q)
    rho = 0
    pin_set = set(pinned)
    for idx, j in enumerate(pinned):
        gap = abs(q[j] - anchors[idx] * M) - t[k]
        if gap > rho:
            rho = gap
    band = []
    fi = 0
    for j in range(m):
        if j in pin_set:
            continue
        p = q[j] - origins[fi] * M
        fi += 1
        band.append(p)
        gap = t[k - 1] - p
        if p - (M - t[k - 1]) > gap:
            gap = p - (M - t[k - 1])
        if gap > rho:
            rho = gap
    # carving by the earlier levels: for each i <= k-2 at least i+1 band
    # coordinates must reach distance >= t[i] from the lattice
    for i in range(k - 1):
        costs = sorted(
            max(t[i] - p, p - (M - t[i]), 0) for p in band
        )
        if costs[i] > rho:
            rho = costs[i]
    return rho


def enum_cells(q, t, M, k, w):
    """All level-k cells whose coordinate boxes come within w of y.

    Superset of the cells at distance <= w; each entry is
    ``(pinned, anchors, origins, dist)``.
    """
    m = len(q)
    per_anchor = []
    per_origin = []
    for j in range(m):
        qj = q[j]
        lo = _ceil_div(qj - t[k] - w, M)
        hi = (qj + t[k] + w) // M
        per_anchor.append(range(lo, hi + 1))
        if k >= 1:
            lo = _ceil_div(qj - w - M + t[k - 1], M)
            hi = (qj + w - t[k - 1]) // M
            per_origin.append(range(lo, hi + 1))
        else:
            per_origin.append(range(0))
    out = []
    for pinned in combinations(range(m), m - k):
        if any(len(per_anchor[j]) == 0 for j in pinned):
            continue
        frees = [j for j in range(m) if j not in pinned]
        if any(len(per_origin[j]) == 0 for j in frees):
            continue
        for anchors in product(*(per_anchor[j] for j in pinned)):
            for origins in product(*(per_origin[j] for j in frees)):
                dist = cell_dist(q, t, M, k, pinned, anchors, origins)
                out.append((pinned, anchors, origins, dist))
    return out


# ---------------------------------------------------------------------------
# float64 scalar kernels
# ---------------------------------------------------------------------------


def profile_f(y):
    out = []
    for yj in y:
        r = yj % 1.0
        out.append(r if r <= 0.5 else 1.0 - r)
    return out


def level_dists_f(y, t):
    m = len(y)
    d = sorted(profile_f(y))
    out = []
    carve = 0.0
    for k in range(m + 1):
        if k >= 1:
            gap = t[k - 1] - d[m - k]
            if gap > carve:
                carve = gap
        rho = carve
        if k < m:
            pin = d[m - k - 1] - t[k]
            if pin > rho:
                rho = pin
        out.append(rho if rho > 0.0 else 0.0)
    return out


def locate_cell_f(y, t, k, tol):
    """Float locator: pins the m-k coordinates nearest the lattice.

    Returns ``(pinned, anchors, origins, slack)`` where slack is the
    worst amount by which a selected coordinate misses its constraint;
    callers reject the result when slack exceeds their tolerance budget.
    """
    m = len(y)
    d = profile_f(y)
    order = sorted(range(m), key=lambda j: (d[j], j))
    chosen = set(order[: m - k])
    pinned = []
    anchors = []
    origins = []
    slack = 0.0
    for j in range(m):
        if j in chosen:
            pinned.append(j)
            anchors.append(round(y[j]))
            slack = max(slack, d[j] - t[k])
        else:
            origins.append(int(np.floor(y[j])))
            if k >= 1:
                slack = max(slack, t[k - 1] - d[j])
    return tuple(pinned), tuple(anchors), tuple(origins), slack


def cell_dist_f(y, t, k, pinned, anchors, origins):
    m = len(y)
    rho = 0.0
    pin_set = set(pinned)
    for idx, j in enumerate(pinned):
        gap = abs(y[j] - anchors[idx]) - t[k]
        if gap > rho:
            rho = gap
    band = []
    fi = 0
    for j in range(m):
        if j in pin_set:
            continue
        p = y[j] - origins[fi]
        fi += 1
        band.append(p)
        gap = max(t[k - 1] - p, p - (1.0 - t[k - 1]))
        if gap > rho:
            rho = gap
    for i in range(k - 1):
        costs = sorted(max(t[i] - p, p - (1.0 - t[i]), 0.0) for p in band)
        if costs[i] > rho:
            rho = costs[i]
    return rho


def enum_cells_f(y, t, k, w):
    m = len(y)
    per_anchor = []
    per_origin = []
    for j in range(m):
        yj = y[j]
        lo = int(np.ceil(yj - t[k] - w))
        hi = int(np.floor(yj + t[k] + w))
        per_anchor.append(range(lo, hi + 1))
        if k >= 1:
            lo = int(np.ceil(yj - w - 1.0 + t[k - 1]))
            hi = int(np.floor(yj + w - t[k - 1]))
            per_origin.append(range(lo, hi + 1))
        else:
            per_origin.append(range(0))
    out = []
    for pinned in combinations(range(m), m - k):
        if any(len(per_anchor[j]) == 0 for j in pinned):
            continue
        frees = [j for j in range(m) if j not in pinned]
        if any(len(per_origin[j]) == 0 for j in frees):
            continue
        for anchors in product(*(per_anchor[j] for j in pinned)):
            for origins in product(*(per_origin[j] for j in frees)):
                dist = cell_dist_f(y, t, k, pinned, anchors, origins)
                out.append((pinned, anchors, origins, dist))
    return out


# ---------------------------------------------------------------------------
# shared encoding arithmetic (canonical integer form lives here; the
# compiled backend and the float mirrors must agree with these)
# ---------------------------------------------------------------------------


def zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def unzigzag(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(p: int) -> tuple[int, int]:
    import math

    s = (math.isqrt(8 * p + 1) - 1) // 2
    b = p - s * (s + 1) // 2
    return s - b, b


def subset_rank(subset, m: int) -> int:
    """Rank of a sorted index tuple among same-size subsets of range(m), lex order."""
    import math

    s = len(subset)
    rank = 0
    prev = -1
    for i, c in enumerate(subset):
        for v in range(prev + 1, c):
            rank += math.comb(m - v - 1, s - i - 1)
        prev = c
    return rank


def subset_unrank(rank: int, m: int, s: int):
    import math

    out = []
    v = 0
    for i in range(s):
        while True:
            block = math.comb(m - v - 1, s - i - 1)
            if rank < block:
                out.append(v)
                v += 1
                break
            rank -= block
            v += 1
    return tuple(out)


def cell_index_f(m, k, pinned, anchors, origins, comb_mk: float) -> float:
    """Float64 mirror of the exact cell index; may overflow to inf."""
    vals = [0.0] * m
    for idx, j in enumerate(pinned):
        a = anchors[idx]
        vals[j] = 2.0 * a if a >= 0 else -2.0 * a - 1.0
    fi = 0
    pin_set = set(pinned)
    for j in range(m):
        if j in pin_set:
            continue
        n = origins[fi]
        fi += 1
        vals[j] = 2.0 * n if n >= 0 else -2.0 * n - 1.0
    enc = vals[m - 1]
    for j in range(m - 2, -1, -1):
        s = vals[j] + enc
        enc = s * (s + 1.0) / 2.0 + enc
    return enc * comb_mk + subset_rank(pinned, m) + 1.0


def lambda_star_f(y, t, k, c, comb_mk):
    """Float separating score for color k+1 at y: max over nearby cells of
    c/(2*index) - dist.  Window D + c/2 provably brackets the supremum."""
    D = level_dists_f(y, t)[k]
    w = D + 0.5 * c
    best = -np.inf
    for pinned, anchors, origins, dist in enum_cells_f(y, t, k, w):
        idx = cell_index_f(len(y), k, pinned, anchors, origins, comb_mk)
        term = c / (2.0 * idx) - dist
        if term > best:
            best = term
    return best


# ---------------------------------------------------------------------------
# bulk kernels (numpy)
# ---------------------------------------------------------------------------


def bulk_level_dists(Q, t, M):
    """Level distances for N points at once; Q is (N, m) int64, scaled."""
    Q = np.ascontiguousarray(Q, dtype=np.int64)
    N, m = Q.shape
    R = Q % M
    D = np.minimum(R, M - R)
    D.sort(axis=1)
    t = np.asarray(t, dtype=np.int64)
    out = np.empty((N, m + 1), dtype=np.int64)
    carve = np.zeros(N, dtype=np.int64)
    for k in range(m + 1):
        if k >= 1:
            np.maximum(carve, t[k - 1] - D[:, m - k], out=carve)
        rho = carve.copy()
        if k < m:
            np.maximum(rho, D[:, m - k - 1] - t[k], out=rho)
        np.maximum(rho, 0, out=rho)
        out[:, k] = rho
    return out


def bulk_level_dists_f(Y, t):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    N, m = Y.shape
    R = np.mod(Y, 1.0)
    D = np.minimum(R, 1.0 - R)
    D.sort(axis=1)
    t = np.asarray(t, dtype=np.float64)
    out = np.empty((N, m + 1), dtype=np.float64)
    carve = np.zeros(N, dtype=np.float64)
    for k in range(m + 1):
        if k >= 1:
            np.maximum(carve, t[k - 1] - D[:, m - k], out=carve)
        rho = carve.copy()
        if k < m:
            np.maximum(rho, D[:, m - k - 1] - t[k], out=rho)
        np.maximum(rho, 0.0, out=rho)
        out[:, k] = rho
    return out


def _bisect_levels(zero, m):
    """Run the color bisection on a (N, m+1) zero-indicator table.

    Returns ``(level, rounds)`` per point.  The interval always contains
    a zero level, so once it is a singleton further probes would be
    no-ops; they are neither taken nor counted, matching the scalar
    protocol, which needs at most ceil(log2(m+1)) rounds.
    """
    N = zero.shape[0]
    P = np.zeros((N, m + 2), dtype=np.int64)
    P[:, 1:] = np.cumsum(zero, axis=1)
    lo = np.zeros(N, dtype=np.int64)
    hi = np.full(N, m, dtype=np.int64)
    rows = np.arange(N)
    used = np.zeros(N, dtype=np.int64)
    for _ in range(int(m).bit_length()):
        used += lo < hi
        size = hi - lo + 1
        mid = lo + (size + 1) // 2 - 1
        anyz = (P[rows, mid + 1] - P[rows, lo]) > 0
        lo = np.where(anyz, lo, mid + 1)
        hi = np.where(anyz, mid, hi)
    return lo, used


def bulk_recover_exact(Q, t, M):
    """Protocol simulation for N points in exact arithmetic.

    Returns ``(level, cellvals, rep2, queries)``: the landed level per
    point, per-coordinate anchor/origin integers, the cell representative
    in half-units of the unscaled partition (anchor*2, origin*2+1), and
    the per-point query count.
    """
    Q = np.ascontiguousarray(Q, dtype=np.int64)
    N, m = Q.shape
    L = bulk_level_dists(Q, t, M)
    lvl, rounds = _bisect_levels(L == 0, m)
    R = Q % M
    D = np.minimum(R, M - R)
    t_arr = np.asarray(t, dtype=np.int64)
    tk = t_arr[lvl][:, None]
    pin = D <= tk
    anchors = (Q - R) // M + (2 * R > M)
    origins = (Q - R) // M
    cellvals = np.where(pin, anchors, origins)
    rep2 = np.where(pin, 2 * anchors, 2 * origins + 1)
    assert np.all(pin.sum(axis=1) == m - lvl), "pin count mismatch at zero distance"
    return lvl, cellvals, rep2, rounds + 1


def bulk_recover_f(Y, t, tol):
    """Float64 protocol simulation.  Zero tests use ``<= tol``.

    Returns ``(level, cellvals, rep2, ok, queries)`` where ok flags the
    points whose located cell passed the slack re-check.
    """
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    N, m = Y.shape
    L = bulk_level_dists_f(Y, t)
    lvl, rounds = _bisect_levels(L <= tol, m)
    R = np.mod(Y, 1.0)
    D = np.minimum(R, 1.0 - R)
    order = np.argsort(D, axis=1, kind="stable")
    rank = np.empty_like(order)
    rows = np.arange(N)[:, None]
    rank[rows, order] = np.arange(m)[None, :]
    pin = rank < (m - lvl)[:, None]
    anchors = np.rint(Y).astype(np.int64)
    origins = np.floor(Y).astype(np.int64)
    cellvals = np.where(pin, anchors, origins)
    rep2 = np.where(pin, 2 * anchors, 2 * origins + 1)
    t_arr = np.asarray(t, dtype=np.float64)
    budget = (int(m).bit_length() + 1) * tol
    slack_pin = np.where(pin, D - t_arr[lvl][:, None], -np.inf).max(axis=1)
    tprev = t_arr[np.maximum(lvl - 1, 0)]
    slack_free = np.where(~pin, tprev[:, None] - D, -np.inf).max(axis=1)
    slack_free = np.where(lvl >= 1, slack_free, -np.inf)
    ok = (np.maximum(slack_pin, slack_free) <= budget)
    return lvl, cellvals, rep2, ok, rounds + 1


def bulk_lambda_star_f(Y, t, k, c, comb_mk):
    """Per-point float separating scores; pure backend loops in Python."""
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    out = np.empty(Y.shape[0], dtype=np.float64)
    t_list = list(map(float, t))
    for i in range(Y.shape[0]):
        out[i] = lambda_star_f(list(Y[i]), t_list, k, c, comb_mk)
    return out
