"""Caps and ovoids of PG(3, q): checks, standard ovoids, exhaustive extension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import kernels
from .fields import FieldCtx
from .projective import ProjectiveSpace, Subspace, combine, nullspace, rref


class CapError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    """Search limits were hit before the enumeration finished."""


@dataclass(eq=False)
class Cap:
    ambient: ProjectiveSpace = field(repr=False)
    points: np.ndarray
    complete: bool | None = None
    completions: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.points)


@dataclass(eq=False)
class Extension:
    start: np.ndarray
    completions: list[np.ndarray]
    nodes: int
    unique_bound: float
    above_bound: bool
    ovoid_size: int

    @property
    def unique(self) -> bool:
        return len(self.completions) == 1

    @property
    def all_ovoids(self) -> bool:
        return all(len(c) == self.ovoid_size for c in self.completions)


def pg3(ctx: FieldCtx) -> ProjectiveSpace:
    return ProjectiveSpace(ctx.small, 3)


def is_cap(space: ProjectiveSpace, pts) -> tuple[bool, tuple[int, int, int] | None]:
    """(True, None) for a cap, else (False, a collinear triple)."""
    pts = np.unique(np.asarray(pts, dtype=np.int64))
    if len(pts) < 3:
        return True, None
    iu = np.triu_indices(len(pts), 1)
    lines = space.line_through[pts[iu[0]], pts[iu[1]]]
    uniq, counts = np.unique(lines, return_counts=True)
    if counts.max() == 1:
        return True, None
    l = uniq[np.argmax(counts > 1)]
    on = pts[np.isin(pts, space.line_pts[l])][:3]
    return False, tuple(int(x) for x in on)


# ---------------------------------------------------------------- ovoids


def _irreducible_binary_form(F) -> tuple[int, int]:
    """(b, c) with x^2 + b x y + c y^2 anisotropic over F."""
    x = np.arange(F.order)
    for b in range(F.order):
        for c in range(1, F.order):
            vals = F.add_t[F.add_t[F.mul_t[x, x], F.mul_t[b, x]], c]
            if not np.any(vals == 0):
                return b, c
    raise CapError("no anisotropic binary form")  # pragma: no cover


def elliptic_quadric(ctx: FieldCtx, space: ProjectiveSpace | None = None) -> np.ndarray:
    """{(1, x, y, x^2 + bxy + cy^2)} plus (0, 0, 0, 1): the quadric x0 x3 = f(x1, x2)."""
    space = space or pg3(ctx)
    F = ctx.small
    b, c = _irreducible_binary_form(F)
    x, y = np.divmod(np.arange(F.order**2), F.order)
    z = F.add_t[F.add_t[F.mul_t[x, x], F.mul_t[b, F.mul_t[x, y]]], F.mul_t[c, F.mul_t[y, y]]]
    vecs = np.stack([np.ones_like(x), x, y, z], axis=1)
    return np.unique(np.concatenate([space.ids(vecs), [space.ids([0, 0, 0, 1])]]))


def suzuki_tits(ctx: FieldCtx, space: ProjectiveSpace | None = None) -> np.ndarray:
    """{(1, x, y, xy + x^(s+2) + y^s)} plus (0, 0, 0, 1), s = 2^(e+1), q = 2^(2e+1)."""
    q = ctx.q
    if ctx.p != 2 or ctx.h % 2 == 0 or ctx.h < 3:
        raise CapError(f"Suzuki-Tits ovoid needs q = 2^(2e+1) >= 8, got q={q}")
    space = space or pg3(ctx)
    F = ctx.small
    s = 2 ** ((ctx.h + 1) // 2)
    x, y = np.divmod(np.arange(q * q), q)
    z = F.add_t[F.add_t[F.mul_t[x, y], F.pow(x, s + 2)], F.pow(y, s)]
    vecs = np.stack([np.ones_like(x), x, y, z], axis=1)
    return np.unique(np.concatenate([space.ids(vecs), [space.ids([0, 0, 0, 1])]]))


def standard_ovoid(kind: str, ctx: FieldCtx, space: ProjectiveSpace | None = None) -> Cap:
    space = space or pg3(ctx)
    if kind in ("elliptic-quadric", "eq"):
        pts = elliptic_quadric(ctx, space)
    elif kind in ("suzuki-tits", "tits"):
        pts = suzuki_tits(ctx, space)
    else:
        raise CapError(f"unknown ovoid kind {kind!r}")
    ok, _ = is_cap(space, pts)
    if not ok or len(pts) != ctx.q**2 + 1:  # pragma: no cover
        raise CapError("construction did not produce an ovoid")
    return Cap(space, pts, complete=True)


# ---------------------------------------------------------------- planes


def plane_incidence(space: ProjectiveSpace) -> np.ndarray:
    """(planes, points) boolean incidence of PG(3, q); planes are dual points."""
    cache = getattr(space, "_plane_inc", None)
    if cache is not None:
        return cache
    F, C = space.F, space.coords
    acc = np.zeros((space.N, space.N), dtype=np.int64)
    for i in range(4):
        acc = F.add_t[acc, F.mul_t[C[:, i][:, None], C[:, i][None, :]]]
    inc = acc == 0
    inc.setflags(write=False)
    space._plane_inc = inc
    return inc


def plane_sections(space: ProjectiveSpace, O) -> dict[int, int]:
    inc = plane_incidence(space)
    mask = np.zeros(space.N, dtype=bool)
    mask[O] = True
    sizes = (inc & mask[None, :]).sum(axis=1)
    vals, counts = np.unique(sizes, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def tangent_plane_at(space: ProjectiveSpace, O, A: int) -> Subspace:
    O = np.unique(np.asarray(O, dtype=np.int64))
    if A not in O:
        raise CapError("point is not on the ovoid")
    q = space.Q
    ok, _ = is_cap(space, O)
    if not ok or len(O) != q * q + 1:
        raise CapError("not an ovoid")
    inc = plane_incidence(space)
    mask = np.zeros(space.N, dtype=bool)
    mask[O] = True
    through = np.flatnonzero(inc[:, A])
    sizes = (inc[through] & mask[None, :]).sum(axis=1)
    tang = through[sizes == 1]
    if len(tang) != 1:
        raise CapError(f"{len(tang)} tangent planes at the point")  # pragma: no cover
    return space.span(vecs=nullspace(space.F, [space.coords[tang[0]]], 4))


def _conic_through(space: ProjectiveSpace, plane_id: int, pts: np.ndarray) -> bool:
    """True iff the plane section ``pts`` is the zero set of a quadratic form."""
    F = space.F
    # rows of the RREF span the plane; pivot entries are plane coordinates
    _, piv = rref(F, nullspace(F, [space.coords[plane_id]], 4))
    coords = space.coords[pts][:, piv]
    x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
    monos = np.stack([F.mul(x, x), F.mul(y, y), F.mul(z, z), F.mul(x, y), F.mul(x, z), F.mul(y, z)], axis=1)
    ker = nullspace(F, monos, 6)
    if len(ker) == 0:
        return False
    on_plane = np.flatnonzero(plane_incidence(space)[plane_id])
    allc = space.coords[on_plane][:, piv]
    x, y, z = allc[:, 0], allc[:, 1], allc[:, 2]
    m = np.stack([F.mul(x, x), F.mul(y, y), F.mul(z, z), F.mul(x, y), F.mul(x, z), F.mul(y, z)], axis=1)
    target = np.isin(on_plane, pts)
    for c in product(range(F.order), repeat=len(ker)):
        if not any(c):
            continue
        form = combine(F, np.array([c]), ker)[0]
        val = np.zeros(len(m), dtype=np.int64)
        for j in range(6):
            val = F.add_t[val, F.mul_t[form[j], m[:, j]]]
        if np.array_equal(val == 0, target):
            return True
    return False


def non_conic_sections(space: ProjectiveSpace, O) -> int:
    """Number of (q+1)-point plane sections of O that are not conics."""
    inc = plane_incidence(space)
    mask = np.zeros(space.N, dtype=bool)
    mask[O] = True
    q = space.Q
    count = 0
    for pl in np.flatnonzero((inc & mask[None, :]).sum(axis=1) == q + 1):
        pts = np.flatnonzero(inc[pl] & mask)
        if not _conic_through(space, int(pl), pts):
            count += 1
    return count


def is_complete(space: ProjectiveSpace, K) -> bool:
    K = np.unique(np.asarray(K, dtype=np.int64))
    covered = np.zeros(space.N, dtype=bool)
    covered[K] = True
    if len(K) > 1:
        iu = np.triu_indices(len(K), 1)
        covered[space.line_pts[space.line_through[K[iu[0]], K[iu[1]]]].ravel()] = True
    return bool(covered.all())


# ---------------------------------------------------------------- extension


def uniqueness_bound(q: int, n: int = 3) -> float:
    """Size above which a cap of PG(n, q) has a unique completion."""
    s = sum(q**i for i in range(1, n)) + 2
    return s / 2 if q % 2 == 0 else 2 * s / 3


def extend_cap(
    space: ProjectiveSpace,
    K,
    max_nodes: int = 2_000_000,
    max_results: int = 10_000,
) -> Extension:
    """Every complete cap containing K, by exhaustive backtracking.

    Raises BudgetExhausted when ``max_nodes`` or ``max_results`` is hit.
    """
    K = np.unique(np.asarray(K, dtype=np.int64))
    ok, wit = is_cap(space, K)
    if not ok:
        raise CapError(f"not a cap: collinear triple {wit}")
    q = space.Q
    max_extra = max(0, q * q + 1 - len(K)) if q > 2 else max(0, 8 - len(K))
    status, nodes, rows = kernels.cap_search(
        np.ascontiguousarray(space.line_through, dtype=np.int64),
        np.ascontiguousarray(space.line_pts, dtype=np.int64),
        K,
        max_extra,
        max_nodes,
        max_results,
    )
    if status != kernels.CAP_OK:
        raise BudgetExhausted(f"cap search stopped after {nodes} nodes ({'nodes' if status == 1 else 'results'} budget)")
    comps = sorted(
        (np.unique(np.concatenate([K, r[r >= 0]])) for r in rows),
        key=lambda c: (len(c), tuple(c)),
    )
    bound = uniqueness_bound(q)
    return Extension(K, comps, int(nodes), bound, len(K) > bound, q * q + 1)


# Table of cap-extension hypotheses: (id, delta bound text, condition text, evaluator)
# Evaluators return True/False, or None when the row carries unspecified constants.


def _q_info(q: int):
    from .fields import prime_power

    p, h = prime_power(q)
    return p, h


def _row(id_, bound, cond, fn):
    return {"id": id_, "bound": bound, "conditions": cond, "eval": fn}


CAP_TABLE = [
    _row("even-small", "delta <= q/2 + sqrt(q)/2 - 1", "q even, q > 2",
         lambda q, d, p, h: q % 2 == 0 and q > 2 and d <= q / 2 + math.sqrt(q) / 2 - 1),
    _row("even-8", "delta <= q - 4", "q even, q >= 8",
         lambda q, d, p, h: q % 2 == 0 and q >= 8 and d <= q - 4),
    _row("even-128", "delta <= 2q - 8", "q even, q >= 128",
         lambda q, d, p, h: q % 2 == 0 and q >= 128 and d <= 2 * q - 8),
    _row("odd-square", "delta <= sqrt(q)q/4 - 39q/64 - O(sqrt(q))", "q odd, q >= 17, q = p^(2e), e >= 1",
         lambda q, d, p, h: None if (q % 2 and q >= 17 and h % 2 == 0) else False),
    _row("odd-nonsquare", "delta <= p^(e+1)q/4 - 119pq/64 + O(p^(e+2))", "q odd, q >= 17, q = p^(2e+1), e >= 1",
         lambda q, d, p, h: None if (q % 2 and q >= 17 and h % 2 == 1 and h >= 3) else False),
    _row("odd-prime", "delta <= 359q^2/2700 + 4q/135 - 94/27", "q odd, q >= 17 prime",
         lambda q, d, p, h: bool(q % 2 and q >= 17 and h == 1 and d <= 359 * q * q / 2700 + 4 * q / 135 - 94 / 27)),
    _row("odd-p5", "delta <= sqrt(q)q/2 - 67q/16 + 5sqrt(q)/4 - 13/12", "q odd, q >= 17, q = p^h, p >= 5",
         lambda q, d, p, h: bool(q % 2 and q >= 17 and p >= 5
                                 and d <= math.sqrt(q) * q / 2 - 67 * q / 16 + 5 * math.sqrt(q) / 4 - 13 / 12)),
    _row("odd-large", "delta <= sqrt(q)q/2 - 35q/16 - O(sqrt(q))",
         "q odd, q >= 23^2, q = p^h (h even for p = 3), q != 5^5, 3^6",
         lambda q, d, p, h: None if (q % 2 and q >= 529 and not (p == 3 and h % 2) and q not in (5**5, 3**6)) else False),
]


def cap_table_rows(q: int, delta: int) -> list[dict]:
    """Evaluate every row; status is 'satisfied', 'not-satisfied' or 'non-evaluable'."""
    p, h = _q_info(q)
    out = []
    for row in CAP_TABLE:
        v = row["eval"](q, delta, p, h)
        status = "non-evaluable" if v is None else ("satisfied" if v else "not-satisfied")
        out.append({"id": row["id"], "bound": row["bound"], "conditions": row["conditions"], "status": status})
    return out


def cap_theorem_row(q: int, size: int) -> str | None:
    delta = q * q - size
    for r in cap_table_rows(q, delta):
        if r["status"] == "satisfied":
            return r["id"]
    return None


def cap_certificate(space: ProjectiveSpace, K, ext: Extension | None) -> dict:
    q = space.Q
    K = np.unique(np.asarray(K))
    cert = {
        "q": q,
        "size": len(K),
        "is_cap": is_cap(space, K)[0],
        "complete": is_complete(space, K),
        "theorem_row": cap_theorem_row(q, len(K)),
        "table_rows": cap_table_rows(q, q * q - len(K)),
    }
    if ext is not None:
        cert.update(
            {
                "completions": {"count": len(ext.completions), "sets": [list(map(int, c)) for c in ext.completions]},
                "unique": ext.unique,
                "all_ovoids": ext.all_ovoids,
                "uniqueness_bound": ext.unique_bound,
                "above_uniqueness_bound": ext.above_bound,
                "nodes": ext.nodes,
            }
        )
    return cert
