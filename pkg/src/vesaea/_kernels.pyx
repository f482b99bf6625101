# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Voronoi owner assignment and bulk TPS evaluation.

Same screening scheme as ``_kernels_py`` (float32 Gram screen, exact
float64 refinement); the per-row min/second-min scan,
the exact refinement and the kernel/tail reduction run in C without
temporaries. The Gram products still go through NumPy's BLAS.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, INFINITY

cnp.import_array()

cdef Py_ssize_t BLOCK = 8192
cdef double EPS32 = np.finfo(np.float32).eps


cdef void _center_block(const double[:, ::1] c, Py_ssize_t a, Py_ssize_t rows,
                        const double[::1] o, float[:, ::1] buf, double[::1] norm) noexcept nogil:
    """buf = float32(c[a:a+rows] - o); norm = float64 row norms of the centered rows."""
    cdef Py_ssize_t i, k, d = c.shape[1]
    cdef double t, acc
    for i in range(rows):
        acc = 0.0
        for k in range(d):
            t = c[a + i, k] - o[k]
            buf[i, k] = <float>t
            acc = acc + t * t
        norm[i] = sqrt(acc)


def nearest_site(cands, sites, origin):
    cdef const double[:, ::1] c = np.ascontiguousarray(cands, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(sites, dtype=np.float64)
    cdef Py_ssize_t m = c.shape[0], d = c.shape[1], n = s.shape[0]
    owner_arr = np.zeros(m, dtype=np.intp)
    cdef Py_ssize_t[::1] owner = owner_arr
    if n == 1 or m == 0:
        return owner_arr

    sc_arr = np.ascontiguousarray(np.asarray(s) - origin)
    cdef const double[::1] o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef const double[::1] sn = np.einsum("ij,ij->i", sc_arr, sc_arr)
    cdef double smax = sqrt(np.max(sn))
    cdef double gamma = 4.0 * (d + 4) * EPS32
    scT = np.ascontiguousarray(sc_arr.T, dtype=np.float32)

    buf_arr = np.empty((min(BLOCK, m), d), dtype=np.float32)
    g_arr = np.empty((min(BLOCK, m), n), dtype=np.float32)
    cdef float[:, ::1] buf = buf_arr
    cdef double[::1] norm = np.empty(min(BLOCK, m))
    cdef const float[:, ::1] g = g_arr
    cdef Py_ssize_t a, rows, i, j, k, arg
    cdef double best, second, q, cn, t, acc, bd
    for a in range(0, m, BLOCK):
        rows = min(BLOCK, m - a)
        with nogil:
            _center_block(c, a, rows, o, buf, norm)
        np.matmul(buf_arr[:rows], scT, out=g_arr[:rows])
        with nogil:
            for i in range(rows):
                best = INFINITY
                second = INFINITY
                arg = 0
                for j in range(n):
                    q = sn[j] - 2.0 * <double>g[i, j]
                    if q < best:
                        second = best
                        best = q
                        arg = j
                    elif q < second:
                        second = q
                cn = norm[i] + smax
                if second - best <= 2.0 * gamma * cn * cn:
                    bd = INFINITY
                    for j in range(n):
                        acc = 0.0
                        for k in range(d):
                            t = c[a + i, k] - s[j, k]
                            acc = acc + t * t
                        if acc < bd:
                            bd = acc
                            arg = j
                owner[a + i] = arg
    return owner_arr


def tps_eval(u, centers, weights, poly):
    cdef const double[:, ::1] x = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] p = np.ascontiguousarray(poly, dtype=np.float64)
    cdef Py_ssize_t m = x.shape[0], d = x.shape[1], n = w.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    if m == 0:
        return out_arr

    cc_arr = np.asarray(centers, dtype=np.float64) - 0.5
    cdef const double[::1] cn = np.einsum("ij,ij->i", cc_arr, cc_arr)
    ccT = np.ascontiguousarray(cc_arr.T)

    cdef const double[:, ::1] g
    cdef Py_ssize_t a, rows, i, j, k
    cdef double xn, t, r2, val
    x_arr = np.asarray(x)
    for a in range(0, m, BLOCK):
        rows = min(BLOCK, m - a)
        g = (x_arr[a:a + rows] - 0.5) @ ccT
        with nogil:
            for i in range(rows):
                xn = 0.0
                val = p[0]
                for k in range(d):
                    t = x[a + i, k] - 0.5
                    xn = xn + t * t
                    val = val + p[k + 1] * x[a + i, k]
                for j in range(n):
                    r2 = xn + cn[j] - 2.0 * g[i, j]
                    if r2 > 0.0:
                        val = val + w[j] * (0.5 * r2 * log(r2))
                out[a + i] = val
    return out_arr



cdef inline int _scan(const float[:, ::1] g, Py_ssize_t i, Py_ssize_t gcol0,
                      Py_ssize_t scol0, Py_ssize_t ncol, const double[::1] sn_cols,
                      double bt, double bnd, int status) noexcept nogil:
    """Continue a membership decision over ``ncol`` columns of ``g``.

    status 1: nearest top site still unbeaten, 2: undecided (needs exact
    refinement), 0: some site is certainly closer than every top site.
    """
    cdef Py_ssize_t j
    cdef double q
    for j in range(ncol):
        q = sn_cols[scol0 + j] - 2.0 * <double>g[i, gcol0 + j]
        if q < bt - bnd:
            return 0
        if q <= bt + bnd:
            status = 2
    return status


cdef Py_ssize_t _refine(const double[:, ::1] c, Py_ssize_t row,
                        const double[:, ::1] s) noexcept nogil:
    cdef Py_ssize_t j, k, arg = 0
    cdef double acc, t, bd = INFINITY
    for j in range(s.shape[0]):
        acc = 0.0
        for k in range(s.shape[1]):
            t = c[row, k] - s[j, k]
            acc = acc + t * t
        if acc < bd:
            bd = acc
            arg = j
    return arg


def top_membership(cands, sites, in_top, origin):
    """Boolean mask of candidates whose nearest site is flagged in ``in_top``.

    Equals ``in_top[nearest_site(...)]``. A row is decided by comparing the
    best top-site score ``bt`` with the other sites: a score below
    ``bt - bound`` means outside, scores all above ``bt + bound`` mean
    inside, anything in between is settled by an exact scan.

    The first block meets every site and counts which non-top sites own the
    most candidates; those become *witnesses*. Later blocks only meet the
    remaining sites on rows that no witness already rules out.
    """
    cdef const double[:, ::1] c = np.ascontiguousarray(cands, dtype=np.float64)
    cdef const double[:, ::1] s = np.ascontiguousarray(sites, dtype=np.float64)
    top_arr = np.asarray(in_top, dtype=bool)
    cdef Py_ssize_t m = c.shape[0], d = c.shape[1]
    out_arr = np.zeros(m, dtype=bool)
    cdef cnp.npy_bool[::1] out = out_arr
    if m == 0:
        return out_arr
    if top_arr.all() or not top_arr.any():
        out_arr[:] = bool(top_arr.all())
        return out_arr

    cdef const cnp.npy_bool[::1] flag = top_arr.view(np.uint8).view(bool)
    tops = np.flatnonzero(top_arr)
    rest = np.flatnonzero(~top_arr)
    cdef Py_ssize_t nt = tops.shape[0], nr = rest.shape[0], nw = nr

    sc_arr = np.ascontiguousarray(np.asarray(s) - origin)
    cdef const double[::1] o = np.ascontiguousarray(origin, dtype=np.float64)
    sn_arr = np.einsum("ij,ij->i", sc_arr, sc_arr)
    cdef double smax = sqrt(np.max(sn_arr))
    cdef double gamma = 4.0 * (d + 4) * EPS32

    # column order: top sites, then witnesses, then everything else
    order = np.concatenate([tops, rest])
    cdef const double[::1] sn_cols = np.ascontiguousarray(sn_arr[order])
    colsT = np.ascontiguousarray(sc_arr[order].T, dtype=np.float32)

    cdef Py_ssize_t blk = min(BLOCK, m)
    buf_arr = np.empty((blk, d), dtype=np.float32)
    g_flat = np.empty(blk * (nt + nr), dtype=np.float32)
    cdef float[:, ::1] buf = buf_arr
    cdef double[::1] norm = np.empty(blk)
    cdef double[::1] bt = np.empty(blk)
    cdef double[::1] bnd = np.empty(blk)
    cdef cnp.int8_t[::1] status = np.empty(blk, dtype=np.int8)
    cdef Py_ssize_t[::1] owner_count = np.zeros(nr, dtype=np.intp)
    cdef const float[:, ::1] g
    cdef const float[:, ::1] g2
    cdef Py_ssize_t[::1] surv = np.empty(blk, dtype=np.intp)
    cdef Py_ssize_t a, rows, i, j, arg, nsurv
    cdef double q, best

    for a in range(0, m, BLOCK):
        rows = min(BLOCK, m - a)
        with nogil:
            _center_block(c, a, rows, o, buf, norm)
        g_arr = g_flat[:rows * (nt + nw)].reshape(rows, nt + nw)
        g = np.matmul(buf_arr[:rows], colsT[:, :nt + nw], out=g_arr)
        nsurv = 0
        with nogil:
            for i in range(rows):
                bt[i] = INFINITY
                for j in range(nt):
                    q = sn_cols[j] - 2.0 * <double>g[i, j]
                    if q < bt[i]:
                        bt[i] = q
                bnd[i] = 2.0 * gamma * (norm[i] + smax) * (norm[i] + smax)
                status[i] = _scan(g, i, nt, nt, nw, sn_cols, bt[i], bnd[i], 1)
                if status[i] != 0:
                    surv[nsurv] = i
                    nsurv += 1
                if a == 0:
                    # the first block sees every site: tally approximate owners
                    best = INFINITY
                    arg = 0
                    for j in range(nr):
                        q = sn_cols[nt + j] - 2.0 * <double>g[i, nt + j]
                        if q < best:
                            best = q
                            arg = j
                    if best < bt[i]:
                        owner_count[arg] += 1

        if nw < nr and nsurv:
            g2 = np.matmul(buf_arr[np.asarray(surv[:nsurv])], colsT[:, nt + nw:])
            with nogil:
                for j in range(nsurv):
                    i = surv[j]
                    status[i] = _scan(g2, j, 0, nt + nw, nr - nw, sn_cols,
                                      bt[i], bnd[i], status[i])
        with nogil:
            for i in range(rows):
                if status[i] == 2:
                    status[i] = flag[_refine(c, a + i, s)]
                out[a + i] = status[i]

        if a == 0 and m > rows:
            # promote the busiest non-top cells to witnesses for later blocks
            nw = min(nr, max(8, nr // 4))
            busiest = np.argsort(-np.asarray(owner_count), kind="stable")[:nw]
            others = np.setdiff1d(np.arange(nr), busiest)
            order = np.concatenate([tops, rest[busiest], rest[others]])
            sn_cols = np.ascontiguousarray(sn_arr[order])
            colsT = np.ascontiguousarray(sc_arr[order].T, dtype=np.float32)
    return out_arr


def scale_unit(block, lo, width, hi):
    """In place: ``block = min(lo + block * width, hi)`` row by row."""
    cdef double[:, ::1] b = block
    cdef const double[::1] l = lo
    cdef const double[::1] w = width
    cdef const double[::1] h = hi
    cdef Py_ssize_t i, k, d = b.shape[1]
    cdef double v
    with nogil:
        for i in range(b.shape[0]):
            for k in range(d):
                v = b[i, k] * w[k] + l[k]
                b[i, k] = v if v < h[k] else h[k]
