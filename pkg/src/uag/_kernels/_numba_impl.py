import numba as nb
import numpy as np

_FNV_OFFSET = np.uint64(1469598103934665603)
_FNV_PRIME = np.uint64(1099511628211)


@nb.njit(cache=True)
def _row_hash(row):
    h = _FNV_OFFSET
    for v in row:
        h = (h ^ np.uint64(v)) * _FNV_PRIME
    return h


@nb.njit(cache=True)
def _rows_equal(rows, i, cand):
    for c in range(cand.shape[0]):
        if rows[i, c] != cand[c]:
            return False
    return True


@nb.njit(cache=True)
def _rehash(rows, n, hcap):
    table = np.full(hcap, -1, np.int64)
    mask = np.uint64(hcap - 1)
    for i in range(n):
        slot = np.int64(_row_hash(rows[i]) & mask)
        while table[slot] != -1:
            slot = (slot + 1) & (hcap - 1)
        table[slot] = i
    return table


@nb.njit(cache=True)
def close_rows(gens, big, off, arity, radix, max_elems):
    """Semi-naive BFS closure of ``gens`` under the packed componentwise tables.

    Returns (rows, parent_op, parent_args, depth, status); status 1 means the
    element budget was exceeded and the outputs are truncated.
    """
    g = gens.shape[0]
    k = gens.shape[1]
    nops = arity.shape[0]
    maxar = 1
    for o in range(nops):
        if arity[o] > maxar:
            maxar = arity[o]

    cap = 64
    while cap < 2 * g:
        cap *= 2
    rows = np.empty((cap, k), np.int32)
    pop = np.empty(cap, np.int32)
    pargs = np.zeros((cap, maxar), np.int32)
    depth = np.empty(cap, np.int32)
    hcap = 4 * cap
    table = np.full(hcap, -1, np.int64)
    n = 0
    cand = np.empty(k, np.int32)
    idx = np.zeros(maxar, np.int64)
    status = 0

    # generators
    for i in range(g):
        for c in range(k):
            cand[c] = gens[i, c]
        mask = np.uint64(hcap - 1)
        slot = np.int64(_row_hash(cand) & mask)
        found = False
        while table[slot] != -1:
            if _rows_equal(rows, table[slot], cand):
                found = True
                break
            slot = (slot + 1) & (hcap - 1)
        if found:
            continue
        rows[n] = cand
        pop[n] = -1
        pargs[n, 0] = i
        depth[n] = 0
        table[slot] = n
        n += 1

    prev = 0
    rnd = 1
    while True:
        N = n
        for o in range(nops):
            a = arity[o]
            if a == 0 and rnd != 1:
                continue
            if a > 0 and N == 0:
                continue
            # prefix runs lexicographically over range(N)**(a-1); the last
            # position starts at prev unless the prefix already has a fresh entry
            for j in range(a):
                idx[j] = 0
            while True:
                fresh_prefix = a == 0
                for j in range(a - 1):
                    if idx[j] >= prev:
                        fresh_prefix = True
                        break
                if a == 0:
                    lo, hi = 0, 1
                else:
                    lo = 0 if fresh_prefix else prev
                    hi = N
                for last in range(lo, hi):
                    if a > 0:
                        idx[a - 1] = last
                    for c in range(k):
                        flat = 0
                        for j in range(a):
                            flat = flat * radix + rows[idx[j], c]
                        cand[c] = big[c, off[o] + flat]
                    mask = np.uint64(hcap - 1)
                    slot = np.int64(_row_hash(cand) & mask)
                    found = False
                    while table[slot] != -1:
                        if _rows_equal(rows, table[slot], cand):
                            found = True
                            break
                        slot = (slot + 1) & (hcap - 1)
                    if not found:
                        if n >= max_elems:
                            status = 1
                            return rows[:n], pop[:n], pargs[:n], depth[:n], status
                        if n == cap:
                            cap *= 2
                            rows2 = np.empty((cap, k), np.int32)
                            rows2[:n] = rows[:n]
                            rows = rows2
                            pop2 = np.empty(cap, np.int32)
                            pop2[:n] = pop[:n]
                            pop = pop2
                            pargs2 = np.zeros((cap, maxar), np.int32)
                            pargs2[:n] = pargs[:n]
                            pargs = pargs2
                            depth2 = np.empty(cap, np.int32)
                            depth2[:n] = depth[:n]
                            depth = depth2
                        rows[n] = cand
                        pop[n] = o
                        for j in range(a):
                            pargs[n, j] = idx[j]
                        depth[n] = rnd
                        n += 1
                        if 2 * n > hcap:
                            hcap *= 4
                            table = _rehash(rows, n, hcap)
                        else:
                            table[slot] = n - 1
                # advance the prefix
                j = a - 2
                while j >= 0:
                    idx[j] += 1
                    if idx[j] < N:
                        break
                    idx[j] = 0
                    j -= 1
                if j < 0:
                    break
        if n == N:
            break
        prev = N
        rnd += 1
    return rows[:n], pop[:n], pargs[:n], depth[:n], status


@nb.njit(cache=True)
def _partition_labels(F, cols, n):
    N = F.shape[0]
    labels = np.zeros(N, np.int64)
    nlab = 1 if N > 0 else 0
    for col in cols:
        remap = np.full(nlab * n, -1, np.int64)
        new = 0
        for i in range(N):
            key = labels[i] * n + F[i, col]
            if remap[key] == -1:
                remap[key] = new
                new += 1
            labels[i] = remap[key]
        nlab = new
    return labels, nlab


@nb.njit(cache=True)
def fd_closure(F, mask, n):
    """Columns of F functionally determined by the columns selected in mask."""
    N, P = F.shape
    cols = np.nonzero(mask)[0]
    labels, nlab = _partition_labels(F, cols, n)
    out = np.zeros(P, np.bool_)
    first = np.empty(nlab, np.int64)
    for p in range(P):
        if mask[p]:
            out[p] = True
            continue
        first[:] = -1
        ok = True
        for i in range(N):
            lab = labels[i]
            v = F[i, p]
            if first[lab] == -1:
                first[lab] = v
            elif first[lab] != v:
                ok = False
                break
        out[p] = ok
    return out
