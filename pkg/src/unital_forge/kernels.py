"""Hot search kernels, each in a numba-compiled and a pure-numpy flavour.

Setting ``UNITAL_FORGE_PURE_NUMPY=1`` (or running without numba) routes the
public names to the numpy implementations.  Both flavours must return
identical results; ``benchmarks/bench_kernels.py`` times one against the
other and the test-suite checks agreement.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    # an old system TBB makes numba fall back to another threading layer; harmless
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("UNITAL_FORGE_PURE_NUMPY", "").lower() not in ("1", "true", "yes")

# cap_search status codes
CAP_OK, CAP_NODE_BUDGET, CAP_RESULT_BUDGET = 0, 1, 2


def set_threads(n: int | None) -> None:
    if n and USE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------- line hits


def _line_hits_loops(line_pts, mask):
    out = np.zeros(line_pts.shape[0], dtype=np.int64)
    for l in range(line_pts.shape[0]):
        c = 0
        for j in range(line_pts.shape[1]):
            if mask[line_pts[l, j]]:
                c += 1
        out[l] = c
    return out


def line_hits_numpy(line_pts, mask):
    return mask[line_pts].sum(axis=1).astype(np.int64)


# ---------------------------------------------------------------- cap search


def _cap_search_loops(line_through, line_pts, cap0, max_extra, max_nodes, max_results):
    """Enumerate every complete cap containing ``cap0``.

    Depth-first over points in increasing id order; ``forb[z]`` counts the
    secant lines of the current cap through z.  A node is reported only when
    no point at all can be added, so each complete cap appears once.
    """
    N = line_through.shape[0]
    incap = np.zeros(N, dtype=np.bool_)
    forb = np.zeros(N, dtype=np.int64)
    n0 = cap0.shape[0]
    cap = np.empty(n0 + max_extra + 1, dtype=np.int64)
    for i in range(n0):
        cap[i] = cap0[i]
        incap[cap0[i]] = True
    for i in range(n0):
        for j in range(i + 1, n0):
            l = line_through[cap0[i], cap0[j]]
            for z in line_pts[l]:
                forb[z] += 1
    results = np.full((max_results, max_extra + 1), -1, dtype=np.int64)
    nres = 0
    nodes = 0
    status = 0
    size = n0
    depth = 0
    start = np.zeros(max_extra + 2, dtype=np.int64)
    entered = True
    while True:
        if entered:
            entered = False
            nodes += 1
            if nodes > max_nodes:
                status = 1
                break
            free = False
            for z in range(N):
                if not incap[z] and forb[z] == 0:
                    free = True
                    break
            if not free:
                if nres >= max_results:
                    status = 2
                    break
                for i in range(size - n0):
                    results[nres, i] = cap[n0 + i]
                nres += 1
            start[depth] = cap[size - 1] + 1 if depth > 0 else 0
        x = start[depth]
        while x < N and (incap[x] or forb[x] > 0):
            x += 1
        if x < N and depth < max_extra:
            start[depth] = x + 1
            for i in range(size):
                l = line_through[x, cap[i]]
                for z in line_pts[l]:
                    forb[z] += 1
            incap[x] = True
            cap[size] = x
            size += 1
            depth += 1
            entered = True
        else:
            if depth == 0:
                break
            size -= 1
            x = cap[size]
            incap[x] = False
            for i in range(size):
                l = line_through[x, cap[i]]
                for z in line_pts[l]:
                    forb[z] -= 1
            depth -= 1
    return status, nodes, results[:nres]


def cap_search_numpy(line_through, line_pts, cap0, max_extra, max_nodes, max_results):
    N = line_through.shape[0]
    incap = np.zeros(N, dtype=bool)
    incap[cap0] = True
    forb = np.zeros(N, dtype=np.int64)
    if len(cap0) > 1:
        iu = np.triu_indices(len(cap0), 1)
        np.add.at(forb, line_pts[line_through[cap0[iu[0]], cap0[iu[1]]]].ravel(), 1)
    state = {"nodes": 0, "status": 0}
    results: list[list[int]] = []
    cap = list(map(int, cap0))

    def visit(depth: int, lo: int) -> bool:
        state["nodes"] += 1
        if state["nodes"] > max_nodes:
            state["status"] = 1
            return False
        avail = ~incap & (forb == 0)
        if not avail.any():
            if len(results) >= max_results:
                state["status"] = 2
                return False
            results.append(cap[len(cap0) :])
            return True
        if depth >= max_extra:
            return True
        for x in np.flatnonzero(avail[lo:]) + lo:
            if incap[x] or forb[x] > 0:
                continue
            touched = line_pts[line_through[x, np.array(cap)]].ravel()
            np.add.at(forb, touched, 1)
            incap[x] = True
            cap.append(int(x))
            ok = visit(depth + 1, int(x) + 1)
            cap.pop()
            incap[x] = False
            np.add.at(forb, touched, -1)
            if not ok:
                return False
        return True

    visit(0, 0)
    out = np.full((len(results), max_extra + 1), -1, dtype=np.int64)
    for i, r in enumerate(results):
        out[i, : len(r)] = r
    return state["status"], state["nodes"], out


# ---------------------------------------------------------------- O'Nan


def _cross_id(add, mul, neg, inv, weights, offsets, x, y):
    c0 = add[mul[x[1], y[2]], neg[mul[x[2], y[1]]]]
    c1 = add[mul[x[2], y[0]], neg[mul[x[0], y[2]]]]
    c2 = add[mul[x[0], y[1]], neg[mul[x[1], y[0]]]]
    if c0 != 0:
        i = inv[c0]
        return offsets[0] + mul[i, c1] * weights[1] + mul[i, c2] * weights[2]
    if c1 != 0:
        i = inv[c1]
        return offsets[1] + mul[i, c2] * weights[2]
    return offsets[2]


def _onan_counts_loops(add, mul, neg, inv, weights, offsets, coords, line_coords, mask, arms):
    """Count O'Nan configurations through a point for every pair of secants.

    ``arms[i]`` lists the q unital points other than P on the i-th secant
    through P.  For secants i < j, a configuration is a pair of lines AB, CD
    (A, C on arm i; B, D on arm j; A != C, B != D) meeting inside the unital.
    """
    m = arms.shape[0]
    k = arms.shape[1]
    counts = np.zeros((m, m), dtype=np.int64)
    for i in prange(m):
        ab = np.empty(k * k, dtype=np.int64)
        for j in range(i + 1, m):
            for a in range(k):
                for b in range(k):
                    ab[a * k + b] = _cross_id(add, mul, neg, inv, weights, offsets, coords[arms[i, a]], coords[arms[j, b]])
            c = 0
            for s in range(k * k):
                a1 = s // k
                b1 = s % k
                for t in range(s + 1, k * k):
                    if t // k == a1 or t % k == b1:
                        continue
                    e = _cross_id(add, mul, neg, inv, weights, offsets, line_coords[ab[s]], line_coords[ab[t]])
                    if mask[e]:
                        c += 1
            counts[i, j] = c
    return counts


def onan_counts_numpy(add, mul, neg, inv, weights, offsets, coords, line_coords, mask, arms):
    m, k = arms.shape

    def cross_ids(X, Y):
        c = np.stack(
            [
                add[mul[X[..., 1], Y[..., 2]], neg[mul[X[..., 2], Y[..., 1]]]],
                add[mul[X[..., 2], Y[..., 0]], neg[mul[X[..., 0], Y[..., 2]]]],
                add[mul[X[..., 0], Y[..., 1]], neg[mul[X[..., 1], Y[..., 0]]]],
            ],
            axis=-1,
        )
        nz = c != 0
        lead = np.argmax(nz, axis=-1)
        lv = np.take_along_axis(c, lead[..., None], axis=-1)[..., 0]
        cn = mul[inv[lv][..., None], c]
        return offsets[lead] + cn @ weights - weights[lead]

    counts = np.zeros((m, m), dtype=np.int64)
    s_idx = np.arange(k * k)
    sa, sb = s_idx // k, s_idx % k
    valid = (sa[:, None] != sa[None, :]) & (sb[:, None] != sb[None, :]) & (s_idx[:, None] < s_idx[None, :])
    for i in range(m):
        for j in range(i + 1, m):
            A = coords[arms[i]][:, None, :]
            B = coords[arms[j]][None, :, :]
            ab = cross_ids(np.broadcast_to(A, (k, k, 3)), np.broadcast_to(B, (k, k, 3))).ravel()
            L = line_coords[ab]
            E = cross_ids(L[:, None, :], L[None, :, :])
            counts[i, j] = int((mask[E] & valid).sum())
    return counts


# ---------------------------------------------------------------- dispatch

IMPLS = {
    "line_hits": {"numpy": line_hits_numpy},
    "cap_search": {"numpy": cap_search_numpy},
    "onan_counts": {"numpy": onan_counts_numpy},
}

if HAVE_NUMBA:
    _cross_id = njit(cache=True)(_cross_id)
    IMPLS["line_hits"]["numba"] = njit(cache=True)(_line_hits_loops)
    IMPLS["cap_search"]["numba"] = njit(cache=True)(_cap_search_loops)
    IMPLS["onan_counts"]["numba"] = njit(cache=True, parallel=True)(_onan_counts_loops)

_flavour = "numba" if USE_NUMBA else "numpy"
line_hits = IMPLS["line_hits"][_flavour]
cap_search = IMPLS["cap_search"][_flavour]
onan_counts = IMPLS["onan_counts"][_flavour]
BACKEND = _flavour
