"""Time the numba kernels against their pure-numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Each pair is first checked for identical output; the first numba call
(compilation) is excluded from the timings.
"""

import argparse
from timeit import timeit

import numpy as np

from unital_forge import caps, kernels, unital
from unital_forge.abb import build_abb
from unital_forge.fields import field_for_q


def line_hits_case(q):
    ctx = field_for_q(q)
    abb = build_abb(ctx)
    U = unital.hermitian_unital(ctx, abb.plane)
    lp = np.ascontiguousarray(abb.plane.line_pts)
    return f"line_hits   PG(2,{q * q})", (lp, U.mask)


def cap_case(q, drop):
    ctx = field_for_q(q)
    space = caps.pg3(ctx)
    O = caps.standard_ovoid("elliptic-quadric", ctx, space).points
    K = np.ascontiguousarray(O[drop:])
    args = (
        np.ascontiguousarray(space.line_through, dtype=np.int64),
        np.ascontiguousarray(space.line_pts, dtype=np.int64),
        K,
        q * q + 1 - len(K),
        10_000_000,
        10_000,
    )
    return f"cap_search  q={q} minus {drop}", args


def onan_case(q):
    ctx = field_for_q(q)
    abb = build_abb(ctx)
    U = unital.hermitian_unital(ctx, abb.plane)
    P = int(U.points[0])
    pl = U.plane
    F = pl.F
    _, arms = unital._onan_arms(U, P)
    args = (F.add_t, F.mul_t, F.neg_t, F.inv_t, pl.weights, pl.offsets,
            np.ascontiguousarray(pl.coords), np.ascontiguousarray(pl.coords), U.mask, arms)
    return f"onan_counts q={q}", args


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "numba" not in kernels.IMPLS["line_hits"]:
        print("numba is not installed; nothing to compare")
        return
    cases = [
        ("line_hits", line_hits_case(4)),
        ("line_hits", line_hits_case(8)),
        ("cap_search", cap_case(4, 4)),
        ("cap_search", cap_case(5, 5)),
        ("cap_search", cap_case(5, 13)),
        ("onan_counts", onan_case(3)),
        ("onan_counts", onan_case(4)),
    ]
    print(f"{'kernel':28s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>9s}")
    for name, (label, a) in cases:
        f_np = kernels.IMPLS[name]["numpy"]
        f_nb = kernels.IMPLS[name]["numba"]
        assert same(f_np(*a), f_nb(*a)), f"{label}: flavours disagree"
        t_np = timeit(lambda f=f_np, a=a: f(*a), number=args.repeat) / args.repeat
        t_nb = timeit(lambda f=f_nb, a=a: f(*a), number=args.repeat) / args.repeat
        print(f"{label:28s} {t_np:11.5f} {t_nb:11.5f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
