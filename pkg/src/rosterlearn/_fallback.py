"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same algorithm, same consumption of the raw random stream, so both
backends produce identical schedules for identical seeds.
"""

import numpy as np

NONZERO, SUM, MIN_CONS_ZERO, MIN_CONS_ONE, MAX_CONS_ZERO, MAX_CONS_ONE = range(6)
_INV53 = 1.0 / 9007199254740992.0


def run_stats(rows):
    """Per row: (min run of ones, max run of ones, min run of zeros, max run of zeros).

    Vectorized with numpy; a min entry is -1 when the row has no run of that
    symbol, a max entry is 0.
    """
    rows = np.asarray(rows) != 0
    n, length = rows.shape
    out = np.empty((n, 4), dtype=np.int32)
    out[:, 0] = out[:, 2] = -1
    out[:, 1] = out[:, 3] = 0
    if n == 0 or length == 0:
        return out
    # Boundaries between runs, including both row ends.
    change = np.ones((n, length + 1), dtype=bool)
    change[:, 1:length] = rows[:, 1:] != rows[:, :-1]
    r_idx, c_idx = np.nonzero(change)
    # Consecutive boundaries in the same row delimit one run.
    same_row = r_idx[1:] == r_idx[:-1]
    starts = c_idx[:-1][same_row]
    lengths = c_idx[1:][same_row] - starts
    run_row = r_idx[:-1][same_row]
    symbol = rows[run_row, starts]
    for col_min, col_max, sym in ((0, 1, True), (2, 3, False)):
        sel = symbol == sym
        rr, ll = run_row[sel], lengths[sel].astype(np.int32)
        mx = np.zeros(n, dtype=np.int32)
        np.maximum.at(mx, rr, ll)
        mn = np.full(n, np.iinfo(np.int32).max, dtype=np.int32)
        np.minimum.at(mn, rr, ll)
        mn[mn == np.iinfo(np.int32).max] = -1
        out[:, col_min], out[:, col_max] = mn, mx
    return out


class _State:
    def __init__(self, layout):
        self.K = layout.K
        self.n_cells = layout.n_cells
        self.kind = layout.kind.tolist()
        self.lo = layout.lo.tolist()
        self.hi = layout.hi.tolist()
        self.s_off = layout.s_off.tolist()
        self.u_of_cell = layout.u_of_cell.tolist()
        self.s_of_cell = layout.s_of_cell.tolist()
        su_ptr, su_idx = layout.su_ptr.tolist(), layout.su_idx.tolist()
        self.su = [su_idx[su_ptr[s]:su_ptr[s + 1]] for s in range(layout.n_s)]
        sc_ptr, sc_idx = layout.sc_ptr.tolist(), layout.sc_idx.tolist()
        self.sc = [sc_idx[sc_ptr[s]:sc_ptr[s + 1]] for s in range(layout.n_s)]
        self.inner = [0] * layout.n_u
        self.val = [0] * layout.n_s
        self.viol = [0] * layout.n_s
        self.cviol = [0] * layout.K
        self.total = 0

    def value(self, k, s, ou=-1, onz=0):
        kd = self.kind[k]
        inner = self.inner
        if kd == SUM and ou >= 0:
            return self.val[s] + onz - (1 if inner[ou] > 0 else 0)
        bits = [onz if u == ou else (1 if inner[u] > 0 else 0) for u in self.su[s]]
        if kd == SUM:
            return sum(bits)
        if kd == NONZERO:
            return 1 if any(bits) else 0
        target = 1 if kd in (MIN_CONS_ONE, MAX_CONS_ONE) else 0
        mn, mx, cur, run = -1, 0, -1, 0
        for b in bits + [-2]:
            if b == cur:
                run += 1
                continue
            if cur == target:
                if mn < 0 or run < mn:
                    mn = run
                if run > mx:
                    mx = run
            cur, run = b, 1
        return mn if kd in (MIN_CONS_ONE, MIN_CONS_ZERO) else mx

    def dist(self, k, v):
        if v < 0:
            return 0
        if v < self.lo[k]:
            return self.lo[k] - v
        if v > self.hi[k]:
            return v - self.hi[k]
        return 0

    def rebuild(self, X):
        n = self.n_cells
        inner = self.inner = [0] * len(self.inner)
        ones = [x for x in range(n) if X[x]]
        for k in range(self.K):
            base = k * n
            for x in ones:
                inner[self.u_of_cell[base + x]] += 1
        self.total = 0
        for k in range(self.K):
            c = 0
            for s in range(self.s_off[k], self.s_off[k + 1]):
                v = self.value(k, s)
                self.val[s] = v
                self.viol[s] = self.dist(k, v)
                c += self.viol[s]
            self.cviol[k] = c
            self.total += c

    def delta_one(self, k, x, d):
        idx = k * self.n_cells + x
        u = self.u_of_cell[idx]
        old_in = self.inner[u]
        if (old_in > 0) == (old_in + d > 0):
            return 0
        s = self.s_of_cell[idx]
        nv = self.value(k, s, u, 1 if old_in + d > 0 else 0)
        return self.dist(k, nv) - self.viol[s]

    def delta_all(self, x, d):
        return sum(self.delta_one(k, x, d) for k in range(self.K))

    def flip(self, X, x):
        d = -1 if X[x] else 1
        X[x] = 1 - X[x]
        for k in range(self.K):
            idx = k * self.n_cells + x
            u = self.u_of_cell[idx]
            old_in = self.inner[u]
            if (old_in > 0) == (old_in + d > 0):
                self.inner[u] = old_in + d
                continue
            s = self.s_of_cell[idx]
            nv = self.value(k, s, u, 1 if old_in + d > 0 else 0)
            self.inner[u] = old_in + d
            nd = self.dist(k, nv)
            self.val[s] = nv
            self.cviol[k] += nd - self.viol[s]
            self.total += nd - self.viol[s]
            self.viol[s] = nd


def violation_totals(layout, X):
    st = _State(layout)
    st.rebuild(list(X))
    return np.asarray(st.cviol, dtype=np.int64)


def repair(X, layout, bitgen, max_steps, restarts, density, noise, mix_steps=0):
    """Randomize X and repair it in place; returns (satisfied, steps_used).

    A satisfied X then takes ``mix_steps`` random single-cell flips, each kept
    only if X stays satisfied.
    """
    raw = bitgen.random_raw
    st = _State(layout)
    bits = [0] * st.n_cells
    steps_used = 0
    ok = False
    # random_raw() takes bitgen.lock itself
    for _ in range(restarts + 1):
        for x in range(st.n_cells):
            bits[x] = 1 if (raw() >> 11) * _INV53 < density else 0
        st.rebuild(bits)
        for _step in range(max_steps):
            if st.total == 0:
                break
            steps_used += 1
            violated = [k for k in range(st.K) if st.cviol[k] > 0]
            kc = violated[raw() % len(violated)]
            bad = [s for s in range(st.s_off[kc], st.s_off[kc + 1]) if st.viol[s] > 0]
            s = bad[raw() % len(bad)]
            noisy = (raw() >> 11) * _INV53 < noise
            best, nbest, chosen = 0, 0, -1
            for x in st.sc[s]:
                d = -1 if bits[x] else 1
                if st.delta_one(kc, x, d) >= 0:
                    continue
                score = 0 if noisy else st.delta_all(x, d)
                if nbest == 0 or score < best:
                    best, nbest, chosen = score, 1, x
                elif score == best:
                    nbest += 1
                    if raw() % nbest == 0:
                        chosen = x
            if chosen < 0:
                cell = st.sc[s]
                chosen = cell[raw() % len(cell)]
            st.flip(bits, chosen)
        if st.total == 0:
            ok = True
            for _ in range(mix_steps):
                x = raw() % st.n_cells
                if st.delta_all(x, -1 if bits[x] else 1) == 0:
                    st.flip(bits, x)
            break
    X[:] = bits
    return ok, steps_used
