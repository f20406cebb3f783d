"""Compiled decoder cores: SC/SCL with lazy-copy banks, SCAN, SCANL.

Everything here is numba-jitted and operates on preallocated numpy arrays;
the friendly wrappers live in decoders.py. LLR conventions match polar.py
(positive favours bit 0, sign(0) = +1, saturation at +-LLR_MAX).

The list decoder keeps per-stage LLR and partial-sum arrays in bank pools
shared between paths with reference counts. Every write is a full-segment
overwrite, so a path that needs to write a shared bank claims a fresh one
and never copies bank contents; cloning a path copies only its bit history.
"""

import numpy as np
from numba import njit

LLR_MAX = 1.0e9


@njit(cache=True, inline="always")
def _sat(x):
    if x > LLR_MAX:
        return LLR_MAX
    if x < -LLR_MAX:
        return -LLR_MAX
    return x


@njit(cache=True, inline="always")
def _f(a, b):
    s = 1.0
    if a < 0.0:
        s = -s
    if b < 0.0:
        s = -s
    aa = -a if a < 0.0 else a
    bb = -b if b < 0.0 else b
    return s * (aa if aa < bb else bb)


@njit(cache=True, inline="always")
def _ctz(i):
    s = 0
    while (i >> s) & 1 == 0:
        s += 1
    return s


@njit(cache=True, inline="always")
def _hard_transform(u):
    # in-place butterfly XOR along a length-2^n uint8 row
    N = u.shape[0]
    h = 1
    while h < N:
        b = 0
        while b < N:
            for j in range(b, b + h):
                u[j] ^= u[j + h]
            b += 2 * h
        h *= 2


@njit(cache=True, inline="always")
def _crc_ok(u, left_info, n_msg, crc_G):
    # u holds the candidate input vector; message and checksum sit on the
    # non-frozen left-half positions, checksum last
    c = crc_G.shape[1]
    for t in range(c):
        acc = 0
        for j in range(n_msg):
            acc ^= u[left_info[j]] & crc_G[j, t]
        if acc != u[left_info[n_msg + t]]:
            return False
    return True


# ---- SCL core

@njit(cache=True, inline="always")
def _claim(bank, ref, s, slot):
    # make (s, slot) exclusively writable; full overwrite follows, no copy
    b = bank[s, slot]
    if b >= 0 and ref[s, b] == 1:
        return b
    if b >= 0:
        ref[s, b] -= 1
    nb = 0
    while ref[s, nb] != 0:
        nb += 1
    ref[s, nb] = 1
    bank[s, slot] = nb
    return nb


@njit(cache=True)
def _cascade(i, bit, slot, bpool, bbank, bref, tmp_a, tmp_b):
    # fold the fresh decision into stored partial sums while trailing
    # index bits are 1, then store at the first 0 stage
    tmp_a[0] = bit
    width = 1
    s = 0
    while (i >> s) & 1:
        bsrc = bbank[s, slot]
        for j in range(width):
            tmp_b[j] = bpool[s, bsrc, j] ^ tmp_a[j]
            tmp_b[width + j] = tmp_a[j]
        t = tmp_a
        tmp_a = tmp_b
        tmp_b = t
        width *= 2
        s += 1
    dst = _claim(bbank, bref, s, slot)
    for j in range(width):
        bpool[s, dst, j] = tmp_a[j]


@njit(cache=True)
def _scl_core(llr, frozen_mask, L,
              lpool, bpool, lbank, bbank, lref, bref,
              u_hist, pm, alive, take0, take1, tmp_a, tmp_b,
              cand_pm, cand_slot, cand_bit, cand_ord, order):
    """Runs list decoding; returns the survivor count. Survivors are the
    alive slots; `order` receives their slot ids sorted by ascending metric
    (ties by slot id)."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1

    lbank[:, :] = -1
    bbank[:, :] = -1
    lref[:, :] = 0
    bref[:, :] = 0
    alive[:] = 0
    alive[0] = 1
    pm[0] = 0.0
    for j in range(N):
        lpool[n, 0, j] = llr[j]
    lbank[n, 0] = 0
    lref[n, 0] = 1

    for i in range(N):
        # LLR chain per path down to stage 0
        for slot in range(L):
            if alive[slot] == 0:
                continue
            if i == 0:
                top = n - 1
            else:
                p = _ctz(i)
                w = 1 << p
                src = lbank[p + 1, slot]
                bsrc = bbank[p, slot]
                dst = _claim(lbank, lref, p, slot)
                for j in range(w):
                    a = lpool[p + 1, src, j]
                    b = lpool[p + 1, src, j + w]
                    if bpool[p, bsrc, j]:
                        lpool[p, dst, j] = _sat(b - a)
                    else:
                        lpool[p, dst, j] = _sat(b + a)
                top = p - 1
            for s in range(top, -1, -1):
                w = 1 << s
                src = lbank[s + 1, slot]
                dst = _claim(lbank, lref, s, slot)
                for j in range(w):
                    lpool[s, dst, j] = _f(lpool[s + 1, src, j],
                                          lpool[s + 1, src, j + w])

        if frozen_mask[i]:
            # every path is forced to 0, penalized when the LLR disagrees
            for slot in range(L):
                if alive[slot] == 0:
                    continue
                lam0 = lpool[0, lbank[0, slot], 0]
                if lam0 < 0.0:
                    pm[slot] -= lam0
                u_hist[slot, i] = 0
                _cascade(i, 0, slot, bpool, bbank, bref, tmp_a, tmp_b)
            continue

        # enumerate both extensions of every path, slot-ascending
        nc = 0
        for slot in range(L):
            if alive[slot] == 0:
                continue
            lam0 = lpool[0, lbank[0, slot], 0]
            pen0 = -lam0 if lam0 < 0.0 else 0.0
            pen1 = lam0 if lam0 >= 0.0 else 0.0
            cand_pm[nc] = pm[slot] + pen0
            cand_slot[nc] = slot
            cand_bit[nc] = 0
            nc += 1
            cand_pm[nc] = pm[slot] + pen1
            cand_slot[nc] = slot
            cand_bit[nc] = 1
            nc += 1
        keep = nc if nc < L else L

        # stable insertion sort of candidate indices by metric
        for t in range(nc):
            cand_ord[t] = t
        for t in range(1, nc):
            v = cand_ord[t]
            vp = cand_pm[v]
            r = t - 1
            while r >= 0 and cand_pm[cand_ord[r]] > vp:
                cand_ord[r + 1] = cand_ord[r]
                r -= 1
            cand_ord[r + 1] = v

        for slot in range(L):
            take0[slot] = 0
            take1[slot] = 0
        for t in range(keep):
            ci = cand_ord[t]
            if cand_bit[ci] == 0:
                take0[cand_slot[ci]] = 1
            else:
                take1[cand_slot[ci]] = 1

        # kills release banks before clones claim slots
        for slot in range(L):
            if alive[slot] and take0[slot] == 0 and take1[slot] == 0:
                for s in range(n + 1):
                    b = lbank[s, slot]
                    if b >= 0:
                        lref[s, b] -= 1
                        lbank[s, slot] = -1
                    b = bbank[s, slot]
                    if b >= 0:
                        bref[s, b] -= 1
                        bbank[s, slot] = -1
                alive[slot] = 0

        # split paths keeping both bits: pointer-copy the pre-decision
        # state into a free slot, which takes the bit-1 branch
        for slot in range(L):
            if alive[slot] and take0[slot] and take1[slot]:
                q = 0
                while alive[q] or take0[q] or take1[q]:
                    q += 1
                alive[q] = 1
                take1[q] = 1
                take1[slot] = 0
                for j in range(i):
                    u_hist[q, j] = u_hist[slot, j]
                pm[q] = pm[slot]
                for s in range(n + 1):
                    b = lbank[s, slot]
                    lbank[s, q] = b
                    if b >= 0:
                        lref[s, b] += 1
                    b = bbank[s, slot]
                    bbank[s, q] = b
                    if b >= 0:
                        bref[s, b] += 1

        # apply decisions and partial-sum cascades
        for slot in range(L):
            if alive[slot] == 0:
                continue
            lam0 = lpool[0, lbank[0, slot], 0]
            if take0[slot]:
                bit = 0
                pm[slot] += -lam0 if lam0 < 0.0 else 0.0
            elif take1[slot]:
                bit = 1
                pm[slot] += lam0 if lam0 >= 0.0 else 0.0
            else:
                continue
            u_hist[slot, i] = bit
            _cascade(i, bit, slot, bpool, bbank, bref, tmp_a, tmp_b)

    # survivors sorted by metric, ties by slot id
    cnt = 0
    for slot in range(L):
        if alive[slot]:
            order[cnt] = slot
            cnt += 1
    for t in range(1, cnt):
        v = order[t]
        vp = pm[v]
        r = t - 1
        while r >= 0 and pm[order[r]] > vp:
            order[r + 1] = order[r]
            r -= 1
        order[r + 1] = v
    return cnt


@njit(cache=True)
def scl_list(llr, frozen_mask, L):
    """Full list decode of one vector: returns (u, x, pm, count) with the
    first `count` rows filled, sorted by ascending metric."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    NB = 2 * L + 2
    lpool = np.empty((n + 1, NB, N), dtype=np.float64)
    bpool = np.empty((n + 1, NB, N), dtype=np.uint8)
    lbank = np.empty((n + 1, L), dtype=np.int64)
    bbank = np.empty((n + 1, L), dtype=np.int64)
    lref = np.empty((n + 1, NB), dtype=np.int64)
    bref = np.empty((n + 1, NB), dtype=np.int64)
    u_hist = np.zeros((L, N), dtype=np.uint8)
    pm = np.zeros(L, dtype=np.float64)
    alive = np.zeros(L, dtype=np.uint8)
    take0 = np.zeros(L, dtype=np.uint8)
    take1 = np.zeros(L, dtype=np.uint8)
    tmp_a = np.zeros(N, dtype=np.uint8)
    tmp_b = np.zeros(N, dtype=np.uint8)
    cand_pm = np.empty(2 * L, dtype=np.float64)
    cand_slot = np.empty(2 * L, dtype=np.int64)
    cand_bit = np.empty(2 * L, dtype=np.int64)
    cand_ord = np.empty(2 * L, dtype=np.int64)
    order = np.empty(L, dtype=np.int64)

    cnt = _scl_core(llr, frozen_mask, L, lpool, bpool, lbank, bbank,
                    lref, bref, u_hist, pm, alive, take0, take1,
                    tmp_a, tmp_b, cand_pm, cand_slot, cand_bit,
                    cand_ord, order)
    u_out = np.zeros((L, N), dtype=np.uint8)
    x_out = np.zeros((L, N), dtype=np.uint8)
    pm_out = np.zeros(L, dtype=np.float64)
    for r in range(cnt):
        slot = order[r]
        for j in range(N):
            u_out[r, j] = u_hist[slot, j]
            x_out[r, j] = bpool[n, bbank[n, slot], j]
        pm_out[r] = pm[slot]
    return u_out, x_out, pm_out, cnt


@njit(cache=True)
def soft_scl_rows(llr_rows, frozen_mask, L, alpha_e, alpha_b, k_min, k_max,
                  use_crc, left_info, n_msg, crc_G,
                  gamma, u_sel, x_sel, crc_pass, sel_pm):
    """Soft-output list decoding of a batch of rows.

    Per row: list decode, derive the extrinsic vector from survivor metric
    differences (metric-sum fallback where all survivors agree), and select
    the reported candidate (best metric, preferring checksum passers when
    use_crc). Outputs go to the caller's gamma/u_sel/x_sel/crc_pass/sel_pm.
    """
    R, N = llr_rows.shape
    n = 0
    while (1 << n) < N:
        n += 1
    NB = 2 * L + 2
    lpool = np.empty((n + 1, NB, N), dtype=np.float64)
    bpool = np.empty((n + 1, NB, N), dtype=np.uint8)
    lbank = np.empty((n + 1, L), dtype=np.int64)
    bbank = np.empty((n + 1, L), dtype=np.int64)
    lref = np.empty((n + 1, NB), dtype=np.int64)
    bref = np.empty((n + 1, NB), dtype=np.int64)
    u_hist = np.zeros((L, N), dtype=np.uint8)
    pm = np.zeros(L, dtype=np.float64)
    alive = np.zeros(L, dtype=np.uint8)
    take0 = np.zeros(L, dtype=np.uint8)
    take1 = np.zeros(L, dtype=np.uint8)
    tmp_a = np.zeros(N, dtype=np.uint8)
    tmp_b = np.zeros(N, dtype=np.uint8)
    cand_pm = np.empty(2 * L, dtype=np.float64)
    cand_slot = np.empty(2 * L, dtype=np.int64)
    cand_bit = np.empty(2 * L, dtype=np.int64)
    cand_ord = np.empty(2 * L, dtype=np.int64)
    order = np.empty(L, dtype=np.int64)
    xs = np.empty((L, N), dtype=np.uint8)
    mags = np.empty(N, dtype=np.float64)

    for m in range(R):
        llr = llr_rows[m]
        cnt = _scl_core(llr, frozen_mask, L, lpool, bpool, lbank, bbank,
                        lref, bref, u_hist, pm, alive, take0, take1,
                        tmp_a, tmp_b, cand_pm, cand_slot, cand_bit,
                        cand_ord, order)
        for r in range(cnt):
            slot = order[r]
            for j in range(N):
                xs[r, j] = bpool[n, bbank[n, slot], j]

        sel = 0
        passed = False
        if use_crc:
            for r in range(cnt):
                if _crc_ok(u_hist[order[r]], left_info, n_msg, crc_G):
                    sel = r
                    passed = True
                    break
        slot = order[sel]
        for j in range(N):
            u_sel[m, j] = u_hist[slot, j]
            x_sel[m, j] = xs[sel, j]
        crc_pass[m] = passed
        sel_pm[m] = pm[slot]

        # no-competitor magnitude: scaled sum of the smallest input magnitudes
        for j in range(N):
            mags[j] = llr[j] if llr[j] >= 0.0 else -llr[j]
        mags_s = np.sort(mags)
        ssum = 0.0
        for j in range(k_min, k_max + 1):
            ssum += mags_s[j]

        for j in range(N):
            pm0 = np.inf
            pm1 = np.inf
            for r in range(cnt):
                pr = pm[order[r]]
                if xs[r, j]:
                    if pr < pm1:
                        pm1 = pr
                else:
                    if pr < pm0:
                        pm0 = pr
            if pm0 < np.inf and pm1 < np.inf:
                gamma[m, j] = alpha_e * (alpha_b * (pm1 - pm0) - llr[j])
            else:
                mag = alpha_e * (alpha_b * ssum - llr[j])
                if mag < 0.0:
                    mag = 0.0
                gamma[m, j] = -mag if pm1 < np.inf else mag


# ---- SCAN core

@njit(cache=True)
def _scan_sweep(lam, beta, frozen_mask, T, ops, ss, bb):
    """T full sweeps of the scheduled message updates; lam[n] and beta[0]
    are fixed by the caller and never written. Returns the accumulated
    frozen-position metric -sum(lam[0][frozen]) over all sweeps."""
    N = lam.shape[1]
    pmv = 0.0
    for _ in range(T):
        for k in range(ops.shape[0]):
            op = ops[k]
            s = ss[k]
            b = bb[k]
            h = 1 << (s - 1)
            if op == 0:
                for i in range(b, b + h):
                    lam[s - 1, i] = _f(lam[s, i],
                                       _sat(lam[s, i + h] + beta[s - 1, i + h]))
            elif op == 1:
                for i in range(b, b + h):
                    lam[s - 1, i + h] = _sat(lam[s, i + h]
                                             + _f(lam[s, i], beta[s - 1, i]))
            else:
                for i in range(b, b + h):
                    beta[s, i] = _f(beta[s - 1, i],
                                    _sat(lam[s, i + h] + beta[s - 1, i + h]))
                    beta[s, i + h] = _sat(beta[s - 1, i + h]
                                          + _f(beta[s - 1, i], lam[s, i]))
        for i in range(N):
            if frozen_mask[i]:
                pmv -= lam[0, i]
    return pmv


@njit(cache=True, inline="always")
def _scan_init(lam, beta, llr, frozen_mask):
    n = lam.shape[0] - 1
    N = lam.shape[1]
    for s in range(n + 1):
        for i in range(N):
            lam[s, i] = 0.0
            beta[s, i] = 0.0
    for i in range(N):
        lam[n, i] = llr[i]
        if frozen_mask[i]:
            beta[0, i] = LLR_MAX


@njit(cache=True)
def scan_rows(llr_rows, frozen_mask, T, alpha_e, ops, ss, bb,
              use_crc, left_info, n_msg, crc_G,
              gamma, u_out, x_out, crc_pass, sel_pm):
    """Iterative soft decoding of a batch of rows on the factor graph."""
    R, N = llr_rows.shape
    n = 0
    while (1 << n) < N:
        n += 1
    lam = np.empty((n + 1, N), dtype=np.float64)
    beta = np.empty((n + 1, N), dtype=np.float64)
    for m in range(R):
        _scan_init(lam, beta, llr_rows[m], frozen_mask)
        pmv = _scan_sweep(lam, beta, frozen_mask, T, ops, ss, bb)
        for i in range(N):
            gamma[m, i] = alpha_e * beta[n, i]
            u_out[m, i] = 0 if lam[0, i] + beta[0, i] >= 0.0 else 1
            x_out[m, i] = u_out[m, i]
        _hard_transform(x_out[m])
        sel_pm[m] = pmv
        crc_pass[m] = _crc_ok(u_out[m], left_info, n_msg, crc_G) if use_crc else False


@njit(cache=True)
def scanl_rows(llr_rows, frozen_mask, T, alpha_e, sigmas, ops, ss, bb,
               use_crc, left_info, n_msg, crc_G,
               gamma, u_out, x_out, crc_pass, sel_pm):
    """SCAN over permuted factor graphs; per row the candidate with the
    best frozen-position metric wins, checksum passers preferred.

    sigmas holds one bit-index permutation per candidate graph (identity
    first); candidate l decodes llr[sigma] with frozen[sigma] and its
    outputs are mapped back through the same permutation.
    """
    R, N = llr_rows.shape
    Lp = sigmas.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    lam = np.empty((n + 1, N), dtype=np.float64)
    beta = np.empty((n + 1, N), dtype=np.float64)
    llr_p = np.empty(N, dtype=np.float64)
    froz_p = np.empty(N, dtype=np.uint8)
    g_all = np.empty((Lp, N), dtype=np.float64)
    u_all = np.empty((Lp, N), dtype=np.uint8)
    pm_all = np.empty(Lp, dtype=np.float64)
    ok_all = np.empty(Lp, dtype=np.uint8)

    for m in range(R):
        llr = llr_rows[m]
        for l in range(Lp):
            for j in range(N):
                sj = sigmas[l, j]
                llr_p[j] = llr[sj]
                froz_p[j] = frozen_mask[sj]
            _scan_init(lam, beta, llr_p, froz_p)
            pm_all[l] = _scan_sweep(lam, beta, froz_p, T, ops, ss, bb)
            for j in range(N):
                sj = sigmas[l, j]
                g_all[l, sj] = alpha_e * beta[n, j]
                u_all[l, sj] = 0 if lam[0, j] + beta[0, j] >= 0.0 else 1
            ok_all[l] = 1 if (use_crc and _crc_ok(u_all[l], left_info, n_msg, crc_G)) else 0

        best = 0
        for l in range(1, Lp):
            if ok_all[l] > ok_all[best]:
                best = l
            elif ok_all[l] == ok_all[best] and pm_all[l] < pm_all[best]:
                best = l
        for j in range(N):
            gamma[m, j] = g_all[best, j]
            u_out[m, j] = u_all[best, j]
            x_out[m, j] = u_all[best, j]
        _hard_transform(x_out[m])
        crc_pass[m] = ok_all[best] == 1
        sel_pm[m] = pm_all[best]


def scan_schedule(n):
    """Flat depth-first schedule of the n-stage graph: op 0 descends left,
    op 1 descends right, op 2 combines upward; each entry carries the parent
    stage and segment base."""
    ops, stages, bases = [], [], []

    def rec(s, b):
        if s == 0:
            return
        ops.append(0)
        stages.append(s)
        bases.append(b)
        rec(s - 1, b)
        ops.append(1)
        stages.append(s)
        bases.append(b)
        rec(s - 1, b + (1 << (s - 1)))
        ops.append(2)
        stages.append(s)
        bases.append(b)

    rec(n, 0)
    return (np.asarray(ops, dtype=np.int64),
            np.asarray(stages, dtype=np.int64),
            np.asarray(bases, dtype=np.int64))
