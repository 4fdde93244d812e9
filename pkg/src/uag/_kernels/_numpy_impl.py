import numpy as np

_CHUNK = 1 << 20


def _arg_chunks(N, a, prev):
    """Lexicographic argument tuples over range(N)**a with some entry >= prev."""
    if a == 0:
        yield np.zeros((1, 0), np.int64)
        return
    tail = N ** (a - 1)
    lead_block = max(1, _CHUNK // max(tail, 1))
    for start in range(0, N, lead_block):
        stop = min(N, start + lead_block)
        grids = np.indices((stop - start,) + (N,) * (a - 1)).reshape(a, -1).T
        grids[:, 0] += start
        if prev > 0:
            grids = grids[(grids >= prev).any(axis=1)]
        if len(grids):
            yield grids


def _row_labels(rows, radix):
    """Exact int64 labels, equal iff rows are equal (columns packed in groups)."""
    n, k = rows.shape
    labels = np.zeros(n, np.int64)
    j = 0
    while j < k:
        # pack columns while labels * radix**c stays below 2**62
        bound, stop = max(n, 1), j
        while stop < k and bound * radix < (1 << 62):
            bound *= radix
            stop += 1
        stop = max(stop, j + 1)
        key = labels
        for c in range(j, stop):
            key = key * radix + rows[:, c]
        _, labels = np.unique(key, return_inverse=True)
        labels = labels.reshape(-1).astype(np.int64)
        j = stop
    return labels


def close_rows(gens, big, off, arity, radix, max_elems):
    gens = np.asarray(gens, np.int32)
    g, k = gens.shape
    maxar = max([1] + [int(a) for a in arity])
    known = {}
    rows, pop, pargs, depth = [], [], [], []

    def add(row, op, args, d):
        key = row.tobytes()
        if key in known:
            return True
        if len(rows) >= max_elems:
            return False
        known[key] = len(rows)
        rows.append(row)
        pop.append(op)
        padded = np.zeros(maxar, np.int32)
        padded[: len(args)] = args
        pargs.append(padded)
        depth.append(d)
        return True

    for i in range(g):
        if not add(gens[i].copy(), -1, [i], 0):
            return _pack(rows, pop, pargs, depth, k, maxar, 1)

    comp = np.arange(k)
    prev, rnd = 0, 1
    while True:
        N = len(rows)
        cur = np.array(rows, np.int32).reshape(N, k)
        for o, a in enumerate(arity):
            a = int(a)
            if a == 0 and rnd != 1:
                continue
            if a > 0 and N == 0:
                continue
            for args in _arg_chunks(N, a, prev):
                flat = np.zeros((len(args), k), np.int64)
                for j in range(a):
                    flat = flat * radix + cur[args[:, j]]
                cand = big[comp, off[o] + flat].astype(np.int32)
                _, first = np.unique(_row_labels(cand, radix), return_index=True)
                for t in np.sort(first):
                    if not add(cand[t].copy(), o, args[t], rnd):
                        return _pack(rows, pop, pargs, depth, k, maxar, 1)
        if len(rows) == N:
            break
        prev = N
        rnd += 1
    return _pack(rows, pop, pargs, depth, k, maxar, 0)


def _pack(rows, pop, pargs, depth, k, maxar, status):
    n = len(rows)
    return (
        np.array(rows, np.int32).reshape(n, k),
        np.array(pop, np.int32),
        np.array(pargs, np.int32).reshape(n, maxar),
        np.array(depth, np.int32),
        status,
    )


def fd_closure(F, mask, n):
    F = np.asarray(F)
    N, P = F.shape
    labels = _row_labels(F[:, np.asarray(mask, bool)].astype(np.int64), n)
    nlab = len(np.unique(labels)) if N else 0
    keys = labels[:, None] * n + F
    srt = np.sort(keys, axis=0)
    distinct = 1 + (np.diff(srt, axis=0) != 0).sum(axis=0) if N else np.zeros(P, np.int64)
    return np.asarray(mask, bool) | (distinct == nlab)
