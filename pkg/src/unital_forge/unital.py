"""Unitals of PG(2, q^2): construction, validation and interrogation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import baer, caps, kernels
from .abb import AbbModel
from .fields import FieldCtx
from .projective import ProjectiveSpace, nullspace


class UnitalError(ValueError):
    pass


class BMError(ValueError):
    """A Buekenhout-Metz precondition failed; ``code`` names which."""

    def __init__(self, code: str, msg: str):
        super().__init__(f"{code}: {msg}")
        self.code = code


@dataclass(eq=False)
class Unital:
    ctx: FieldCtx = field(repr=False)
    plane: ProjectiveSpace = field(repr=False)
    points: np.ndarray = field(repr=False)
    provenance: str = "file"
    hits: np.ndarray = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)
    _baer: dict = field(default_factory=dict, repr=False)

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.plane.N, dtype=bool)
        m[self.points] = True
        return m

    def __contains__(self, pid) -> bool:
        i = np.searchsorted(self.points, pid)
        return bool(i < len(self.points) and self.points[i] == pid)

    def trace(self, lid: int) -> np.ndarray:
        pts = self.plane.line_pts[lid]
        return pts[self.mask[pts]]

    def secant_lines(self) -> np.ndarray:
        return np.flatnonzero(self.hits == self.q + 1)

    def tangent_at(self, P: int) -> int:
        through = self.plane.lines_through(P)
        t = through[self.hits[through] == 1]
        return int(t[0])

    def secants_at(self, P: int) -> np.ndarray:
        through = self.plane.lines_through(P)
        return np.sort(through[self.hits[through] == self.q + 1])

    def is_baer_secant(self, lid: int) -> bool:
        v = self._baer.get(lid)
        if v is None:
            v = baer.is_baer_subline(self.plane, self.trace(lid))
            self._baer[lid] = v
        return v


def validate_unital(ctx: FieldCtx, plane: ProjectiveSpace, pts, provenance: str = "file", meta=None) -> Unital:
    pts = np.unique(np.asarray(pts, dtype=np.int64))
    q = ctx.q
    if len(pts) != q**3 + 1:
        raise UnitalError(f"a unital of PG(2,{q * q}) has {q**3 + 1} points, got {len(pts)}")
    mask = np.zeros(plane.N, dtype=bool)
    mask[pts] = True
    hits = kernels.line_hits(np.ascontiguousarray(plane.line_pts), mask)
    bad = np.flatnonzero((hits != 1) & (hits != q + 1))
    if len(bad):
        l = int(bad[0])
        raise UnitalError(f"line {l} {tuple(plane.coords[l])} meets the set in {hits[l]} points")
    hits.setflags(write=False)
    return Unital(ctx, plane, pts, provenance, hits, dict(meta or {}))


# ---------------------------------------------------------------- Hermitian


def det3(F, M) -> int:
    M = np.asarray(M)
    t = 0
    for (i, j, k), sgn in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((0, 2, 1), -1), ((1, 0, 2), -1), ((2, 1, 0), -1)):
        term = F.mul(F.mul(M[0, i], M[1, j]), M[2, k])
        t = F.add(t, term) if sgn > 0 else F.sub(t, term)
    return int(t)


def hermitian_values(ctx: FieldCtx, H, coords) -> np.ndarray:
    """x^(q)T H x for each row x of ``coords``."""
    B = ctx.big
    Xq = ctx.frobenius(coords)
    out = np.zeros(len(coords), dtype=np.int64)
    for i, j in product(range(3), repeat=2):
        out = B.add(out, B.mul(B.mul(Xq[:, i], int(H[i][j])), coords[:, j]))
    return out


def is_hermitian_matrix(ctx: FieldCtx, H) -> bool:
    H = np.asarray(H)
    return bool(np.array_equal(H.T, ctx.frobenius(H)))


def random_hermitian_matrix(ctx: FieldCtx, rng: np.random.Generator) -> np.ndarray:
    """A uniformly drawn nonsingular Hermitian matrix over F_{q^2}."""
    while True:
        H = np.zeros((3, 3), dtype=np.int64)
        H[np.diag_indices(3)] = rng.integers(0, ctx.q, 3)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            H[i, j] = rng.integers(0, ctx.q2)
            H[j, i] = ctx.frobenius(H[i, j])
        if det3(ctx.big, H):
            return H


def hermitian_unital(ctx: FieldCtx, plane: ProjectiveSpace, H=None) -> Unital:
    H = np.eye(3, dtype=np.int64) if H is None else np.asarray(H, dtype=np.int64)
    if not is_hermitian_matrix(ctx, H):
        raise UnitalError("matrix is not Hermitian (H^T != H^(q))")
    if det3(ctx.big, H) == 0:
        raise UnitalError("Hermitian matrix is singular")
    vals = hermitian_values(ctx, H, plane.coords)
    return validate_unital(ctx, plane, np.flatnonzero(vals == 0), "hermitian", {"matrix": H.tolist()})


# ---------------------------------------------------------------- Buekenhout-Metz


def embed_ovoid(abb: AbbModel, ovoid3, space3: ProjectiveSpace, frame=None) -> np.ndarray:
    """Map an ovoid of PG(3, q) with tangent plane x0 = 0 at (0,0,0,1) into PG(4, q).

    ``frame`` gives the images (origin, e1, e2, A) of the coordinate vectors;
    the default sends (x0, x1, x2, x3) to (x0, x1, x2, x3, 0), so the point
    (0,0,0,1) lands on T and the tangent plane becomes {x0 = x4 = 0}.
    """
    if frame is None:
        frame = np.eye(4, 5, dtype=np.int64)
    frame = np.asarray(frame, dtype=np.int64)
    from .projective import combine

    vecs = combine(abb.ctx.small, space3.coords[np.asarray(ovoid3)], frame)
    return np.unique(abb.space.ids(vecs))


def bm_vertices(abb: AbbModel, A: int) -> np.ndarray:
    T = abb.spread[abb.spread_index[A]]
    return T[T != A]


def cone_points(abb: AbbModel, O, V: int) -> np.ndarray:
    """Plane points of the cone with vertex V over the affine part of O, plus P_inf of V."""
    F = abb.ctx.small
    O = np.asarray(O)
    aff = O[abb.space.is_affine(O)]
    X = abb.space.coords[aff]
    Vc = abb.space.coords[V]
    t = np.arange(abb.q)
    vecs = F.add_t[X[:, None, :], F.mul_t[t[None, :, None], Vc[None, None, :]]].reshape(-1, 5)
    sp = np.unique(abb.space.ids(vecs))
    sp = sp[abb.space.is_affine(sp)]
    return np.unique(np.concatenate([abb.to_plane(sp), [abb.ell_inf_point_of(V)]]))


def check_bm_base(abb: AbbModel, O, V: int) -> dict:
    """Validate the BM preconditions; return {A, T, solid} or raise BMError."""
    q = abb.q
    O = np.unique(np.asarray(O, dtype=np.int64))
    sp = abb.space
    solid = sp.span(O)
    if solid.dim != 3 or len(O) != q * q + 1:
        raise BMError("not-an-ovoid", "base does not span a solid with q^2+1 points")
    space3 = ProjectiveSpace(abb.ctx.small, 3)
    O3 = space3.ids(sp.coords[O][:, list(solid.pivots)])
    ok, wit = caps.is_cap(space3, O3)
    if not ok:
        raise BMError("not-an-ovoid", f"three collinear points {wit}")
    at_inf = O[~sp.is_affine(O)]
    if len(at_inf) != 1:
        raise BMError("wrong-hinf-intersection", f"base meets H_inf in {len(at_inf)} points")
    A = int(at_inf[0])
    T = abb.spread[abb.spread_index[A]]
    tp = caps.tangent_plane_at(space3, O3, int(space3.ids(sp.coords[A][list(solid.pivots)])))
    from .projective import combine

    tp_pts = np.unique(sp.ids(combine(abb.ctx.small, space3.coords[tp.points], solid.basis)))
    if np.isin(T, tp_pts).all():
        raise BMError("tangent-plane-contains-T", "tangent plane at A contains the spread line through A")
    if V == A:
        raise BMError("vertex-is-A", "vertex coincides with A")
    if V not in T:
        raise BMError("vertex-not-on-T", "vertex is not on the spread line through A")
    return {"A": A, "T": T, "solid": solid}


def bm_unital(abb: AbbModel, O, V: int, meta=None) -> Unital:
    info = check_bm_base(abb, O, V)
    pts = cone_points(abb, O, V)
    m = {"vertex": int(V), "A": info["A"], "special_point": abb.ell_inf_point_of(V)}
    m.update(meta or {})
    return validate_unital(abb.ctx, abb.plane, pts, "bm-cone", m)


def standard_bm(abb: AbbModel, kind: str = "elliptic-quadric", vertex_index: int = 0, frame=None) -> Unital:
    space3 = caps.pg3(abb.ctx)
    ov = caps.standard_ovoid(kind, abb.ctx, space3).points
    O = embed_ovoid(abb, ov, space3, frame)
    A = int(O[~abb.space.is_affine(O)][0])
    V = int(bm_vertices(abb, A)[vertex_index])
    return bm_unital(abb, O, V, {"ovoid": kind, "vertex_index": vertex_index})


# ---------------------------------------------------------------- census and searches


@dataclass
class Census:
    point: int
    tangent: int
    secants: list[int]
    baer_secants: list[int]

    @property
    def count(self) -> int:
        return len(self.baer_secants)


def secant_census(U: Unital, P: int) -> Census:
    if P not in U:
        raise UnitalError(f"point {P} is not on the unital")
    sec = U.secants_at(P)
    return Census(int(P), U.tangent_at(P), [int(l) for l in sec], [int(l) for l in sec if U.is_baer_secant(int(l))])


def census_table(U: Unital) -> dict[int, int]:
    return {int(P): secant_census(U, int(P)).count for P in U.points}


def _onan_arms(U: Unital, P: int) -> tuple[np.ndarray, np.ndarray]:
    sec = U.secants_at(P)
    arms = np.array([[x for x in U.trace(int(l)) if x != P] for l in sec], dtype=np.int64)
    return sec, arms


def onan_search(U: Unital, P: int, limit: int = 100) -> dict:
    """O'Nan configurations of U through P: the count and up to ``limit`` of them."""
    if P not in U:
        raise UnitalError(f"point {P} is not on the unital")
    pl = U.plane
    F = pl.F
    sec, arms = _onan_arms(U, P)
    counts = kernels.onan_counts(
        F.add_t, F.mul_t, F.neg_t, F.inv_t, pl.weights, pl.offsets,
        np.ascontiguousarray(pl.coords), np.ascontiguousarray(pl.coords), U.mask, arms,
    )
    total = int(counts.sum())
    configs = []
    for i, j in zip(*np.nonzero(counts)):
        if len(configs) >= limit:
            break
        k = arms.shape[1]
        ab = [(a, b, pl.line_of(int(arms[i, a]), int(arms[j, b]))) for a in range(k) for b in range(k)]
        for s, t in combinations(range(len(ab)), 2):
            (a1, b1, l1), (a2, b2, l2) = ab[s], ab[t]
            if a1 == a2 or b1 == b2:
                continue
            E = pl.ids(pl.cross(l1, l2))
            if E in U:
                configs.append(
                    {
                        "lines": [int(sec[i]), int(sec[j]), int(l1), int(l2)],
                        "points": [int(P), int(arms[i, a1]), int(arms[j, b1]), int(arms[i, a2]), int(arms[j, b2]), int(E)],
                    }
                )
                if len(configs) >= limit:
                    break
    return {"point": int(P), "count": total, "configurations": configs}


def onan_total(U: Unital) -> int:
    """Number of O'Nan configurations of the whole unital (slow mode)."""
    return sum(onan_search(U, int(P), limit=0)["count"] for P in U.points) // 6


def counting_lemma_census(U: Unital, P: int) -> list[dict]:
    """|pi meets U| for the Baer subplanes pi spanned by pairs of Baer secants at P."""
    c = secant_census(U, P)
    t_pts = U.plane.line_pts[c.tangent]
    out = []
    for l1, l2 in combinations(c.baer_secants, 2):
        sub = baer.baer_subplane_through(U.plane, U.trace(l1), U.trace(l2))
        n_t = int(np.isin(sub, t_pts).sum())
        out.append(
            {
                "lines": [l1, l2],
                "kind": "tangent" if n_t == 1 else "secant",
                "meet": int(U.mask[sub].sum()),
            }
        )
    return out


# ---------------------------------------------------------------- classicality


def _hermitian_rows(ctx: FieldCtx, coords: np.ndarray) -> np.ndarray:
    B = ctx.big
    w = ctx.omega
    Xq = ctx.frobenius(coords)
    cols = [ctx.norm(coords[:, i]) for i in range(3)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c = B.mul(Xq[:, i], coords[:, j])
        cols += [ctx.trace(c), ctx.trace(B.mul(c, w))]
    return np.stack(cols, axis=1)


def _matrix_from_params(ctx: FieldCtx, v) -> np.ndarray:
    H = np.zeros((3, 3), dtype=np.int64)
    H[0, 0], H[1, 1], H[2, 2] = v[0], v[1], v[2]
    for (i, j), k in zip(((0, 1), (0, 2), (1, 2)), (3, 5, 7)):
        H[i, j] = ctx.join(v[k], v[k + 1])
        H[j, i] = ctx.frobenius(H[i, j])
    return H


def is_classical(U: Unital, max_candidates: int = 10_000):
    """A Hermitian matrix whose absolute points are exactly U, or None."""
    ctx = U.ctx
    rows = _hermitian_rows(ctx, U.plane.coords[U.points])
    ker = nullspace(ctx.small, rows, 9)
    if len(ker) == 0:
        return None
    from .projective import combine

    tried = 0
    for c in product(range(ctx.q), repeat=len(ker)):
        nz = [x for x in c if x]
        if not nz or nz[0] != 1:
            continue
        tried += 1
        if tried > max_candidates:
            break
        v = combine(ctx.small, np.array([c]), ker)[0]
        H = _matrix_from_params(ctx, v)
        if det3(ctx.big, H) == 0:
            continue
        if np.array_equal(np.flatnonzero(hermitian_values(ctx, H, U.plane.coords) == 0), U.points):
            return H
    return None
