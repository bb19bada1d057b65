from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unital_forge.fields import field_for_q
from unital_forge.projective import (
    GeometryError,
    ProjectiveSpace,
    combine,
    mat_inv,
    nullspace,
    rref,
)


def gauss_size(Q, n):
    return (Q ** (n + 1) - 1) // (Q - 1)


@pytest.mark.parametrize("q,n", [(2, 2), (3, 2), (4, 2), (9, 2), (2, 3), (3, 3), (4, 3), (3, 4)])
def test_point_counts_and_ids(q, n):
    F = field_for_q(q).small if q in (2, 3, 4) else field_for_q(3).big
    sp = ProjectiveSpace(F, n)
    assert sp.N == gauss_size(F.order, n)
    assert np.array_equal(sp.ids(sp.coords), np.arange(sp.N))
    # leading nonzero coordinate is 1
    lead = sp.coords[np.arange(sp.N), np.argmax(sp.coords != 0, axis=1)]
    assert (lead == 1).all()
    # scalar multiples map to the same id
    for s in range(2, F.order):
        assert np.array_equal(sp.ids(F.mul_t[s, sp.coords]), np.arange(sp.N))


@pytest.mark.parametrize("q,n", [(3, 2), (4, 2), (2, 3), (3, 3)])
def test_lines(q, n):
    F = field_for_q(q).small
    sp = ProjectiveSpace(F, n)
    L = sp.line_pts
    nlines = gauss_size(q, n) * gauss_size(q, n - 1) // (q + 1) if n == 3 else gauss_size(q, 2)
    assert len(L) == nlines
    assert L.shape[1] == q + 1
    # any two points lie on exactly one line
    inc = np.zeros((len(L), sp.N), dtype=np.int64)
    np.put_along_axis(inc, L, 1, axis=1)
    pair = inc.T @ inc
    off = pair[~np.eye(sp.N, dtype=bool)]
    assert (off == 1).all()


def test_plane_duality():
    F = field_for_q(3).big
    pl = ProjectiveSpace(F, 2)
    for l in (0, 5, 50, pl.N - 1):
        pts = pl.line_pts[l]
        prods = F.mul_t[pl.coords[pts], pl.coords[l][None, :]]
        dots = F.add_t[F.add_t[prods[:, 0], prods[:, 1]], prods[:, 2]]
        assert (dots == 0).all()
    # lines through a point are the dual line
    for p in (0, 17):
        assert (np.isin(p, pl.line_pts[pl.lines_through(p)])).all()
        assert len(pl.lines_through(p)) == F.order + 1
    assert pl.line_of(0, 1) in pl.lines_through(0)
    assert set(pl.line_pts[0]) == set(np.flatnonzero(pl.coords[:, 0] == 0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=5, max_size=5), min_size=1, max_size=4))
def test_rref_and_nullspace(rows):
    F = field_for_q(5).small
    _, piv = rref(F, rows)
    K = nullspace(F, rows, 5)
    assert len(piv) + len(K) == 5
    for v in K:
        for r in rows:
            assert F.sum(F.mul(np.array(r), v)) == 0


def test_span_and_meet():
    F = field_for_q(3).small
    sp = ProjectiveSpace(F, 3)
    S = sp.span(sp.ids([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]))
    assert S.dim == 2 and len(S.points) == 13
    H = sp.hyperplane([1, 0, 0, 0])
    m = sp.meet(S, H)
    assert len(m) in (4, 13)
    assert sp.span(S.points) == S


def test_quotient_round_trip():
    F = field_for_q(3).small
    sp = ProjectiveSpace(F, 4)
    T = sp.span(vecs=np.array([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]))
    quo = sp.quotient(T)
    assert quo.target.n == 2
    outside = np.setdiff1d(np.arange(sp.N), T.points)
    img = quo.image(outside)
    # each image point has a fibre of size |<T,P>| - |T| = q^2
    counts = np.bincount(img, minlength=quo.target.N)
    assert (counts == 9).all()
    lifted = quo.lift(np.arange(quo.target.N))
    assert np.array_equal(quo.image(lifted), np.arange(quo.target.N))
    assert set(quo.fibre(4)) == set(outside[img == 4])
    with pytest.raises(GeometryError):
        quo.image(T.points[:1])


def test_mat_inv():
    F = field_for_q(4).big
    rng = np.random.default_rng(0)
    for _ in range(20):
        M = rng.integers(0, F.order, (3, 3))
        try:
            Mi = mat_inv(F, M)
        except GeometryError:
            continue
        assert np.array_equal(combine(F, M, Mi), np.eye(3, dtype=np.int64))
    with pytest.raises(GeometryError):
        mat_inv(F, np.zeros((3, 3), dtype=np.int64))


def test_zero_vector_rejected():
    sp = ProjectiveSpace(field_for_q(3).small, 2)
    with pytest.raises(GeometryError):
        sp.ids([0, 0, 0])


def test_pg3_line_through_table():
    sp = ProjectiveSpace(field_for_q(3).small, 3)
    lt = sp.line_through
    for a, b in combinations(range(0, sp.N, 7), 2):
        l = lt[a, b]
        assert a in sp.line_pts[l] and b in sp.line_pts[l]


def test_span_of_skew_lines_in_pg4():
    F = field_for_q(3).small
    sp = ProjectiveSpace(F, 4)
    l = sp.span(vecs=np.array([[1, 0, 0, 0, 0], [0, 1, 0, 0, 0]]))
    T = sp.span(vecs=np.array([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]))
    assert len(np.intersect1d(l.points, T.points)) == 0
    assert sp.span(np.concatenate([l.points, T.points])).dim == 3


def test_solid_in_pg4_5():
    sp = ProjectiveSpace(field_for_q(5).small, 4)
    S = sp.hyperplane([0, 0, 0, 0, 1])
    assert S.dim == 3 and len(S.points) == 156 == gauss_size(5, 3)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_quotients_of_pg4(q):
    sp = ProjectiveSpace(field_for_q(q).small, 4)
    T = sp.span(vecs=np.array([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]))
    quo = sp.quotient(T)
    assert quo.target.n == 2
    off = np.setdiff1d(np.arange(sp.N), T.points)
    assert len(np.unique(quo.image(off))) == q * q + q + 1
    v = sp.span(vecs=np.array([[0, 0, 0, 1, 0]]))
    quo_v = sp.quotient(v)
    assert quo_v.target.n == 3
    assert len(np.unique(quo_v.image(np.setdiff1d(np.arange(sp.N), v.points)))) == gauss_size(q, 3)
