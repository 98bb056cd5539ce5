# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the hot paths.

Implements the bulk entry points of ``adaptrec._pykernel`` in C loops;
anything not exported here falls through to the pure backend at import
time.  Exact entry points require every scaled integer to fit in 64 bits
with headroom, which the callers check before dispatching.
"""

from libc.math cimport floor as c_floor, ceil as c_ceil, fabs, INFINITY
from libc.stdint cimport int64_t

import numpy as np

BACKEND = "compiled"

DEF MAXM = 64


cdef inline int64_t pymod(int64_t q, int64_t M) nogil:
    cdef int64_t r = q % M
    if r < 0:
        r += M
    return r


cdef inline void isort(int64_t* a, int n) nogil:
    cdef int i, j
    cdef int64_t v
    for i in range(1, n):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef inline void fsort(double* a, int n) nogil:
    cdef int i, j
    cdef double v
    for i in range(1, n):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef void level_dists_i(const int64_t* q, const int64_t* t, int64_t M, int m,
                        int64_t* out) nogil:
    cdef int64_t d[MAXM]
    cdef int j, k
    cdef int64_t r, carve, rho, gap
    for j in range(m):
        r = pymod(q[j], M)
        d[j] = r if 2 * r <= M else M - r
    isort(d, m)
    carve = 0
    for k in range(m + 1):
        if k >= 1:
            gap = t[k - 1] - d[m - k]
            if gap > carve:
                carve = gap
        rho = carve
        if k < m:
            gap = d[m - k - 1] - t[k]
            if gap > rho:
                rho = gap
        out[k] = rho if rho > 0 else 0


cdef void level_dists_d(const double* y, const double* t, int m,
                        double* out) nogil:
    cdef double d[MAXM]
    cdef int j, k
    cdef double r, carve, rho, gap
    for j in range(m):
        r = y[j] - c_floor(y[j])
        d[j] = r if r <= 0.5 else 1.0 - r
    fsort(d, m)
    carve = 0.0
    for k in range(m + 1):
        if k >= 1:
            gap = t[k - 1] - d[m - k]
            if gap > carve:
                carve = gap
        rho = carve
        if k < m:
            gap = d[m - k - 1] - t[k]
            if gap > rho:
                rho = gap
        out[k] = rho if rho > 0.0 else 0.0


cdef int bisect_zero(const unsigned char* zero, int m, int* rounds) nogil:
    """Color bisection over the zero-indicator table.

    Returns the landed level and writes the number of rounds taken; the
    interval always contains a zero level, so it stops at a singleton.
    """
    cdef int lo = 0, hi = m, mid, size, i
    cdef bint anyz
    rounds[0] = 0
    while lo < hi:
        rounds[0] += 1
        size = hi - lo + 1
        mid = lo + (size + 1) // 2 - 1
        anyz = False
        for i in range(lo, mid + 1):
            if zero[i]:
                anyz = True
                break
        if anyz:
            hi = mid
        else:
            lo = mid + 1
    return lo


def bulk_level_dists(Q, t, M):
    cdef int64_t[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.int64)
    cdef int64_t[::1] tv = np.ascontiguousarray(t, dtype=np.int64)
    cdef int64_t Mc = M
    cdef Py_ssize_t N = Qv.shape[0]
    cdef int m = Qv.shape[1]
    if m > MAXM:
        raise ValueError("compiled backend supports m <= %d" % MAXM)
    out_arr = np.empty((N, m + 1), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(N):
            level_dists_i(&Qv[i, 0], &tv[0], Mc, m, &out[i, 0])
    return out_arr


def bulk_level_dists_f(Y, t):
    cdef double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t N = Yv.shape[0]
    cdef int m = Yv.shape[1]
    if m > MAXM:
        raise ValueError("compiled backend supports m <= %d" % MAXM)
    out_arr = np.empty((N, m + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(N):
            level_dists_d(&Yv[i, 0], &tv[0], m, &out[i, 0])
    return out_arr


def bulk_recover_exact(Q, t, M):
    cdef int64_t[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.int64)
    cdef int64_t[::1] tv = np.ascontiguousarray(t, dtype=np.int64)
    cdef int64_t Mc = M
    cdef Py_ssize_t N = Qv.shape[0]
    cdef int m = Qv.shape[1]
    if m > MAXM:
        raise ValueError("compiled backend supports m <= %d" % MAXM)
    lvl_arr = np.empty(N, dtype=np.int64)
    cv_arr = np.empty((N, m), dtype=np.int64)
    rep_arr = np.empty((N, m), dtype=np.int64)
    q_arr = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] lvl = lvl_arr
    cdef int64_t[:, ::1] cv = cv_arr
    cdef int64_t[:, ::1] rep = rep_arr
    cdef int64_t[::1] nq = q_arr
    cdef int64_t ld[MAXM + 1]
    cdef unsigned char zero[MAXM + 1]
    cdef int64_t r, dj, a, o
    cdef Py_ssize_t i
    cdef int j, k, npin, rounds
    with nogil:
        for i in range(N):
            level_dists_i(&Qv[i, 0], &tv[0], Mc, m, ld)
            for k in range(m + 1):
                zero[k] = 1 if ld[k] == 0 else 0
            k = bisect_zero(zero, m, &rounds)
            lvl[i] = k
            nq[i] = rounds + 1
            npin = 0
            for j in range(m):
                r = pymod(Qv[i, j], Mc)
                dj = r if 2 * r <= Mc else Mc - r
                o = (Qv[i, j] - r) // Mc
                if dj <= tv[k]:
                    a = o + (1 if 2 * r > Mc else 0)
                    cv[i, j] = a
                    rep[i, j] = 2 * a
                    npin += 1
                else:
                    cv[i, j] = o
                    rep[i, j] = 2 * o + 1
            if npin != m - k:
                with gil:
                    raise AssertionError("pin count mismatch at zero distance")
    return lvl_arr, cv_arr, rep_arr, q_arr


def bulk_recover_f(Y, t, tol):
    cdef double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double tolc = tol
    cdef Py_ssize_t N = Yv.shape[0]
    cdef int m = Yv.shape[1]
    if m > MAXM:
        raise ValueError("compiled backend supports m <= %d" % MAXM)
    lvl_arr = np.empty(N, dtype=np.int64)
    cv_arr = np.empty((N, m), dtype=np.int64)
    rep_arr = np.empty((N, m), dtype=np.int64)
    ok_arr = np.empty(N, dtype=bool)
    q_arr = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] lvl = lvl_arr
    cdef int64_t[:, ::1] cv = cv_arr
    cdef int64_t[:, ::1] rep = rep_arr
    cdef unsigned char[::1] ok = ok_arr.view(np.uint8)
    cdef int64_t[::1] nq = q_arr
    cdef double ld[MAXM + 1]
    cdef double d[MAXM]
    cdef int idx[MAXM]
    cdef unsigned char zero[MAXM + 1]
    cdef unsigned char pin[MAXM]
    cdef double r, slack, budget
    cdef int64_t a, o
    cdef Py_ssize_t i
    cdef int j, k, u, v, tmp, rounds
    budget = (int(m).bit_length() + 1) * tolc
    with nogil:
        for i in range(N):
            level_dists_d(&Yv[i, 0], &tv[0], m, ld)
            for k in range(m + 1):
                zero[k] = 1 if ld[k] <= tolc else 0
            k = bisect_zero(zero, m, &rounds)
            lvl[i] = k
            nq[i] = rounds + 1
            for j in range(m):
                r = Yv[i, j] - c_floor(Yv[i, j])
                d[j] = r if r <= 0.5 else 1.0 - r
                idx[j] = j
            # stable insertion sort of indices by profile value
            for u in range(1, m):
                tmp = idx[u]
                v = u - 1
                while v >= 0 and (d[idx[v]] > d[tmp] or (d[idx[v]] == d[tmp] and idx[v] > tmp)):
                    idx[v + 1] = idx[v]
                    v -= 1
                idx[v + 1] = tmp
            for j in range(m):
                pin[j] = 0
            for u in range(m - k):
                pin[idx[u]] = 1
            slack = -INFINITY
            for j in range(m):
                o = <int64_t>c_floor(Yv[i, j])
                if pin[j]:
                    a = <int64_t>c_floor(Yv[i, j] + 0.5)
                    cv[i, j] = a
                    rep[i, j] = 2 * a
                    if d[j] - tv[k] > slack:
                        slack = d[j] - tv[k]
                else:
                    cv[i, j] = o
                    rep[i, j] = 2 * o + 1
                    if k >= 1 and tv[k - 1] - d[j] > slack:
                        slack = tv[k - 1] - d[j]
            ok[i] = 1 if slack <= budget else 0
    return lvl_arr, cv_arr, rep_arr, ok_arr, q_arr


# ---------------------------------------------------------------------------
# float separating scores
# ---------------------------------------------------------------------------


cdef double cell_dist_one(const double* y, const double* t, int m, int k,
                          const int* pinned_flag, const int64_t* aval) nogil:
    """Distance to one cell; aval holds the anchor or origin per coordinate."""
    cdef double rho = 0.0, p, gap
    cdef int j, i, nf, u, v
    cdef double costs[MAXM]
    cdef double band[MAXM]
    nf = 0
    for j in range(m):
        if pinned_flag[j]:
            gap = fabs(y[j] - <double>aval[j]) - t[k]
            if gap > rho:
                rho = gap
        else:
            p = y[j] - <double>aval[j]
            band[nf] = p
            nf += 1
            gap = t[k - 1] - p
            if p - (1.0 - t[k - 1]) > gap:
                gap = p - (1.0 - t[k - 1])
            if gap > rho:
                rho = gap
    for i in range(k - 1):
        for u in range(nf):
            gap = t[i] - band[u]
            if band[u] - (1.0 - t[i]) > gap:
                gap = band[u] - (1.0 - t[i])
            costs[u] = gap if gap > 0.0 else 0.0
        fsort(costs, nf)
        if costs[i] > rho:
            rho = costs[i]
    return rho


cdef double cell_index_d(int m, const int* pinned_flag, const int64_t* aval,
                         double comb_mk, const double* rank_tab) nogil:
    """Float mirror of the exact cell index.

    rank_tab holds binomials binom[(m-v-1)*(m+1) + r] for the subset rank.
    """
    cdef double vals[MAXM]
    cdef double enc, s, rank
    cdef int j, i, prev, v, size, pos
    cdef int64_t z
    size = 0
    for j in range(m):
        z = aval[j]
        vals[j] = 2.0 * z if z >= 0 else -2.0 * z - 1.0
        if pinned_flag[j]:
            size += 1
    enc = vals[m - 1]
    for j in range(m - 2, -1, -1):
        s = vals[j] + enc
        enc = s * (s + 1.0) / 2.0 + enc
    rank = 0.0
    prev = -1
    pos = 0
    for j in range(m):
        if not pinned_flag[j]:
            continue
        for v in range(prev + 1, j):
            rank += rank_tab[(m - v - 1) * (MAXM + 1) + (size - pos - 1)]
        prev = j
        pos += 1
    return enc * comb_mk + rank + 1.0


def bulk_lambda_star_f(Y, t, k, c, comb_mk):
    cdef double[:, ::1] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef int kc = k
    cdef double cc = c
    cdef double comb_c = comb_mk
    cdef Py_ssize_t N = Yv.shape[0]
    cdef int m = Yv.shape[1]
    if m > MAXM:
        raise ValueError("compiled backend supports m <= %d" % MAXM)

    # binomials for subset ranking, exact in double for this size range
    rank_np = np.zeros((MAXM + 1) * (MAXM + 1), dtype=np.float64)
    cdef double[::1] rank_tab = rank_np
    cdef int a_, b_
    for a_ in range(MAXM + 1):
        for b_ in range(MAXM + 1):
            if b_ == 0:
                rank_np[a_ * (MAXM + 1) + b_] = 1.0
            elif b_ <= a_:
                rank_np[a_ * (MAXM + 1) + b_] = (
                    rank_np[(a_ - 1) * (MAXM + 1) + b_ - 1]
                    + rank_np[(a_ - 1) * (MAXM + 1) + b_]
                )

    out_arr = np.empty(N, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double ld[MAXM + 1]
    cdef int sel[MAXM]
    cdef int pinned_flag[MAXM]
    cdef int64_t aval[MAXM]
    cdef int64_t alo[MAXM]
    cdef int64_t ahi[MAXM]
    cdef int64_t olo[MAXM]
    cdef int64_t ohi[MAXM]
    cdef int64_t pos[MAXM]
    cdef double w, best, term, dist, idxf
    cdef int j, u, npin, done, carry
    cdef bint feasible
    with nogil:
        for i in range(N):
            level_dists_d(&Yv[i, 0], &tv[0], m, ld)
            w = ld[kc] + 0.5 * cc
            for j in range(m):
                alo[j] = <int64_t>c_ceil(Yv[i, j] - tv[kc] - w)
                ahi[j] = <int64_t>c_floor(Yv[i, j] + tv[kc] + w)
                if kc >= 1:
                    olo[j] = <int64_t>c_ceil(Yv[i, j] - w - 1.0 + tv[kc - 1])
                    ohi[j] = <int64_t>c_floor(Yv[i, j] + w - tv[kc - 1])
                else:
                    olo[j] = 0
                    ohi[j] = -1
            best = -INFINITY
            npin = m - kc
            # first subset: {0, ..., npin-1}
            for u in range(npin):
                sel[u] = u
            done = 0
            while not done:
                for j in range(m):
                    pinned_flag[j] = 0
                for u in range(npin):
                    pinned_flag[sel[u]] = 1
                feasible = True
                for j in range(m):
                    if pinned_flag[j]:
                        if alo[j] > ahi[j]:
                            feasible = False
                            break
                    else:
                        if olo[j] > ohi[j]:
                            feasible = False
                            break
                if feasible:
                    for j in range(m):
                        pos[j] = alo[j] if pinned_flag[j] else olo[j]
                    while True:
                        for j in range(m):
                            aval[j] = pos[j]
                        dist = cell_dist_one(&Yv[i, 0], &tv[0], m, kc,
                                             pinned_flag, aval)
                        idxf = cell_index_d(m, pinned_flag, aval, comb_c,
                                            &rank_tab[0])
                        term = cc / (2.0 * idxf) - dist
                        if term > best:
                            best = term
                        carry = 1
                        for j in range(m - 1, -1, -1):
                            if not carry:
                                break
                            pos[j] += 1
                            if pos[j] > (ahi[j] if pinned_flag[j] else ohi[j]):
                                pos[j] = alo[j] if pinned_flag[j] else olo[j]
                                carry = 1
                            else:
                                carry = 0
                        if carry:
                            break
                # next subset of size npin in lex order
                if npin == 0:
                    done = 1
                else:
                    u = npin - 1
                    while u >= 0 and sel[u] == m - npin + u:
                        u -= 1
                    if u < 0:
                        done = 1
                    else:
                        sel[u] += 1
                        for j in range(u + 1, npin):
                            sel[j] = sel[j - 1] + 1
            out[i] = best
    return out_arr
