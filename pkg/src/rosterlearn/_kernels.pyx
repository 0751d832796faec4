# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: run-length statistics and local-search repair.

Must stay step-for-step identical to ``_fallback.py``; the test suite
compares the two on the same random stream.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int32_t, int64_t, uint64_t
from numpy.random cimport bitgen_t

cdef enum:
    NONZERO = 0
    SUM = 1
    MIN_CONS_ZERO = 2
    MIN_CONS_ONE = 3
    MAX_CONS_ZERO = 4
    MAX_CONS_ONE = 5


def run_stats(const unsigned char[:, ::1] rows):
    """Per row: (min run of ones, max run of ones, min run of zeros, max run of zeros).

    A min entry is -1 when the row has no run of that symbol; a max entry is 0.
    """
    cdef Py_ssize_t n = rows.shape[0], length = rows.shape[1], i, j
    out = np.empty((n, 4), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    cdef int cur, b, run, mn1, mx1, mn0, mx0
    for i in range(n):
        mn1 = -1; mx1 = 0; mn0 = -1; mx0 = 0
        cur = -1; run = 0
        for j in range(length + 1):
            b = -2 if j == length else (1 if rows[i, j] else 0)
            if b == cur:
                run += 1
                continue
            if cur == 1:
                if mn1 < 0 or run < mn1:
                    mn1 = run
                if run > mx1:
                    mx1 = run
            elif cur == 0:
                if mn0 < 0 or run < mn0:
                    mn0 = run
                if run > mx0:
                    mx0 = run
            cur = b
            run = 1
        o[i, 0] = mn1; o[i, 1] = mx1; o[i, 2] = mn0; o[i, 3] = mx0
    return out


cdef inline uint64_t _raw(bitgen_t *rng) nogil:
    return rng.next_uint64(rng.state)


cdef inline double _uniform(bitgen_t *rng) nogil:
    return (_raw(rng) >> 11) * (1.0 / 9007199254740992.0)


cdef inline bint _is_min(int kd) nogil:
    return kd == MIN_CONS_ZERO or kd == MIN_CONS_ONE


cdef inline int _target(int kd) nogil:
    return 1 if (kd == MIN_CONS_ONE or kd == MAX_CONS_ONE) else 0


cdef class _State:
    # Incremental view of one tensor under a Layout.  For run-length kinds each
    # S-cell also keeps a histogram of its target-symbol run lengths at
    # hist[su_ptr[s] + s + length], so a flip only inspects neighbouring runs.
    cdef int K, n_cells
    cdef const int32_t[::1] lo, hi, s_off, s_kind
    cdef const int32_t[::1] u_of_cell, s_of_cell, su_ptr, su_idx, sc_ptr, sc_idx, u_pos
    cdef int32_t[::1] inner, val, viol, hist
    cdef int64_t[::1] cviol
    cdef int64_t total
    # run lengths removed (r0, r1) and added (a0, a1) by the flip last examined
    cdef int r0, r1, a0, a1

    def __init__(self, layout):
        self.K = layout.K
        self.n_cells = layout.n_cells
        self.lo = layout.lo
        self.hi = layout.hi
        self.s_off = layout.s_off
        self.u_of_cell = layout.u_of_cell
        self.s_of_cell = layout.s_of_cell
        self.su_ptr = layout.su_ptr
        self.su_idx = layout.su_idx
        self.sc_ptr = layout.sc_ptr
        self.sc_idx = layout.sc_idx
        self.u_pos = layout.u_pos
        self.s_kind = np.ascontiguousarray(
            np.repeat(layout.kind, np.diff(layout.s_off)), dtype=np.int32)
        self.inner = np.zeros(layout.n_u, dtype=np.int32)
        self.val = np.zeros(layout.n_s, dtype=np.int32)
        self.viol = np.zeros(layout.n_s, dtype=np.int32)
        self.hist = np.zeros(layout.n_u + layout.n_s + 1, dtype=np.int32)
        self.cviol = np.zeros(layout.K, dtype=np.int64)

    cdef inline int bit(self, int base, int q) nogil:
        return 1 if self.inner[self.su_idx[base + q]] > 0 else 0

    cdef int full_value(self, int s) nogil:
        # From scratch; also refreshes the run histogram of run-length kinds.
        cdef int kd = self.s_kind[s], base = self.su_ptr[s], L = self.su_ptr[s + 1] - base
        cdef int hb = base + s, q, b, cur = -1, run = 0, cnt = 0, mn = -1, mx = 0, T
        if kd == SUM or kd == NONZERO:
            for q in range(L):
                cnt += self.bit(base, q)
            if kd == NONZERO:
                return 1 if cnt > 0 else 0
            return cnt
        T = _target(kd)
        for q in range(L + 1):
            self.hist[hb + q] = 0
        for q in range(L + 1):
            b = -2 if q == L else self.bit(base, q)
            if b == cur:
                run += 1
                continue
            if cur == T:
                self.hist[hb + run] += 1
                if mn < 0 or run < mn:
                    mn = run
                if run > mx:
                    mx = run
            cur = b
            run = 1
        return mn if _is_min(kd) else mx

    cdef void runs_after(self, int s, int p) nogil:
        cdef int T = _target(self.s_kind[s]), base = self.su_ptr[s]
        cdef int L = self.su_ptr[s + 1] - base, l = p, r = p
        while l > 0 and self.bit(base, l - 1) == T:
            l -= 1
        while r < L - 1 and self.bit(base, r + 1) == T:
            r += 1
        if self.bit(base, p) == T:
            # the run l..r splits around p
            self.r0 = r - l + 1
            self.r1 = 0
            self.a0 = p - l
            self.a1 = r - p
        else:
            # the runs either side of p merge through it
            self.r0 = p - l
            self.r1 = r - p
            self.a0 = r - l + 1
            self.a1 = 0

    cdef inline int count_after(self, int hb, int n) nogil:
        return (self.hist[hb + n] - (self.r0 == n) - (self.r1 == n)
                + (self.a0 == n) + (self.a1 == n))

    cdef int run_value_after(self, int s, int p) nogil:
        cdef int base = self.su_ptr[s], L = self.su_ptr[s + 1] - base
        cdef int hb = base + s, cur = self.val[s], n, best
        self.runs_after(s, p)
        if _is_min(self.s_kind[s]):
            best = -1
            if self.a0 > 0:
                best = self.a0
            if self.a1 > 0 and (best < 0 or self.a1 < best):
                best = self.a1
            n = cur if cur > 0 else 1
            while n <= L:
                if self.count_after(hb, n) > 0:
                    return n if (best < 0 or n < best) else best
                n += 1
            return best
        best = self.a0 if self.a0 > self.a1 else self.a1
        n = cur
        while n >= 1:
            if self.count_after(hb, n) > 0:
                return n if n > best else best
            n -= 1
        return best

    cdef int value_after(self, int s, int u, int onz) nogil:
        # Value of S-cell s once slot u reads onz; no state changes except r0..a1.
        cdef int kd = self.s_kind[s], base, q, cnt = 0
        if kd == SUM:
            return self.val[s] + onz - (1 if self.inner[u] > 0 else 0)
        if kd == NONZERO:
            if onz:
                return 1
            base = self.su_ptr[s]
            for q in range(self.su_ptr[s + 1] - base):
                if self.su_idx[base + q] != u:
                    cnt += self.bit(base, q)
            return 1 if cnt > 0 else 0
        return self.run_value_after(s, self.u_pos[u])

    cdef inline int dist(self, int k, int v) nogil:
        if v < 0:
            return 0
        if v < self.lo[k]:
            return self.lo[k] - v
        if v > self.hi[k]:
            return v - self.hi[k]
        return 0

    cdef void rebuild(self, const unsigned char[::1] X):
        cdef int k, x, s, i
        cdef int64_t base
        self.inner[:] = 0
        self.total = 0
        for k in range(self.K):
            base = <int64_t>k * self.n_cells
            for x in range(self.n_cells):
                if X[x]:
                    self.inner[self.u_of_cell[base + x]] += 1
        for k in range(self.K):
            self.cviol[k] = 0
            for s in range(self.s_off[k], self.s_off[k + 1]):
                self.val[s] = self.full_value(s)
                i = self.dist(k, self.val[s])
                self.viol[s] = i
                self.cviol[k] += i
            self.total += self.cviol[k]

    cdef int delta_one(self, int k, int x, int d) nogil:
        cdef int64_t idx = <int64_t>k * self.n_cells + x
        cdef int u = self.u_of_cell[idx], old_in = self.inner[u], new_in = old_in + d
        cdef int s, nv
        if (old_in > 0) == (new_in > 0):
            return 0
        s = self.s_of_cell[idx]
        nv = self.value_after(s, u, 1 if new_in > 0 else 0)
        return self.dist(k, nv) - self.viol[s]

    cdef int64_t delta_all(self, int x, int d) nogil:
        cdef int k
        cdef int64_t tot = 0
        for k in range(self.K):
            tot += self.delta_one(k, x, d)
        return tot

    cdef void flip(self, unsigned char[::1] X, int x):
        cdef int d = -1 if X[x] else 1
        cdef int k, u, s, old_in, nv, nd, hb
        cdef int64_t idx
        X[x] = 1 - X[x]
        for k in range(self.K):
            idx = <int64_t>k * self.n_cells + x
            u = self.u_of_cell[idx]
            old_in = self.inner[u]
            if (old_in > 0) == (old_in + d > 0):
                self.inner[u] = old_in + d
                continue
            s = self.s_of_cell[idx]
            nv = self.value_after(s, u, 1 if old_in + d > 0 else 0)
            if self.s_kind[s] >= MIN_CONS_ZERO:
                hb = self.su_ptr[s] + s
                self.hist[hb + self.r0] -= 1
                self.hist[hb + self.r1] -= 1
                self.hist[hb + self.a0] += 1
                self.hist[hb + self.a1] += 1
                self.hist[hb] = 0
            self.inner[u] = old_in + d
            nd = self.dist(k, nv)
            self.val[s] = nv
            self.cviol[k] += nd - self.viol[s]
            self.total += nd - self.viol[s]
            self.viol[s] = nd


def violation_totals(layout, const unsigned char[::1] X):
    """Per-constraint violation magnitudes of X under ``layout``."""
    cdef _State st = _State(layout)
    st.rebuild(X)
    return np.asarray(st.cviol).copy()


def repair(unsigned char[::1] X, layout, bitgen, int max_steps, int restarts,
           double density, double noise, int mix_steps=0):
    """Randomize X and repair it in place; returns (satisfied, steps_used).

    A satisfied X then takes ``mix_steps`` random single-cell flips, each kept
    only if X stays satisfied.
    """
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")
    cdef _State st = _State(layout)
    cdef int attempt, step, x, i, k, kc, s, nviol, cnt, r, nbest, chosen, d
    cdef int64_t score, best
    cdef int steps_used = 0
    cdef bint noisy
    cdef int[::1] violated = np.zeros(max(st.K, 1), dtype=np.intc)
    with bitgen.lock:
        for attempt in range(restarts + 1):
            for x in range(st.n_cells):
                X[x] = 1 if _uniform(rng) < density else 0
            st.rebuild(X)
            for step in range(max_steps):
                if st.total == 0:
                    break
                steps_used += 1
                nviol = 0
                for k in range(st.K):
                    if st.cviol[k] > 0:
                        violated[nviol] = k
                        nviol += 1
                kc = violated[_raw(rng) % nviol]
                cnt = 0
                for s in range(st.s_off[kc], st.s_off[kc + 1]):
                    if st.viol[s] > 0:
                        cnt += 1
                r = <int>(_raw(rng) % cnt)
                for s in range(st.s_off[kc], st.s_off[kc + 1]):
                    if st.viol[s] > 0:
                        if r == 0:
                            break
                        r -= 1
                noisy = _uniform(rng) < noise
                best = 0
                nbest = 0
                chosen = -1
                for i in range(st.sc_ptr[s], st.sc_ptr[s + 1]):
                    x = st.sc_idx[i]
                    d = -1 if X[x] else 1
                    if st.delta_one(kc, x, d) >= 0:
                        continue
                    score = 0 if noisy else st.delta_all(x, d)
                    if nbest == 0 or score < best:
                        best = score
                        nbest = 1
                        chosen = x
                    elif score == best:
                        nbest += 1
                        if _raw(rng) % nbest == 0:
                            chosen = x
                if chosen < 0:
                    cnt = st.sc_ptr[s + 1] - st.sc_ptr[s]
                    chosen = st.sc_idx[st.sc_ptr[s] + <int>(_raw(rng) % cnt)]
                st.flip(X, chosen)
            if st.total == 0:
                for step in range(mix_steps):
                    x = <int>(_raw(rng) % st.n_cells)
                    if st.delta_all(x, -1 if X[x] else 1) == 0:
                        st.flip(X, x)
                return True, steps_used
    return False, steps_used
