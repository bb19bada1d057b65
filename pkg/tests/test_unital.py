from itertools import combinations

import numpy as np
import pytest
from _shared import abb, all_bm, bm, ctx, hermitian, pg3

from unital_forge import caps, pipeline, unital
from unital_forge.unital import BMError, UnitalError


def brute_hermitian(q):
    """Points with x^(q+1) + y^(q+1) + z^(q+1) = 0, straight from the norm."""
    c = ctx(q)
    pl = abb(q).plane
    B = c.big
    n = c.norm(pl.coords)
    return np.flatnonzero(B.add(B.add(n[:, 0], n[:, 1]), n[:, 2]) == 0)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_hermitian_matches_norm_form(q):
    U = hermitian(q)
    assert U.size == q**3 + 1
    assert np.array_equal(U.points, brute_hermitian(q))
    assert set(np.unique(U.hits)) == {1, q + 1}


def test_secant_and_tangent_counts_q3():
    U = hermitian(3)
    secants = U.secant_lines()
    assert len(secants) == 63  # q^2 (q^2 - q + 1)
    assert int((U.hits == 1).sum()) == 28
    P = int(U.points[0])
    assert len(U.secants_at(P)) == 9
    assert U.hits[U.tangent_at(P)] == 1


def test_mutated_set_names_a_bad_line():
    U = hermitian(3)
    pts = U.points.copy()
    pts[0] = np.setdiff1d(np.arange(U.plane.N), U.points)[0]
    with pytest.raises(UnitalError, match="line"):
        unital.validate_unital(U.ctx, U.plane, pts)
    with pytest.raises(UnitalError, match="28 points"):
        unital.validate_unital(U.ctx, U.plane, pts[:-1])


@pytest.mark.parametrize("q", [3, 4])
def test_random_hermitian_matrices(q):
    c = ctx(q)
    rng = np.random.default_rng(q)
    for _ in range(3):
        H = unital.random_hermitian_matrix(c, rng)
        assert unital.is_hermitian_matrix(c, H)
        U = unital.hermitian_unital(c, abb(q).plane, H)
        assert U.size == q**3 + 1
    with pytest.raises(UnitalError):
        unital.hermitian_unital(c, abb(q).plane, np.zeros((3, 3), dtype=np.int64))


@pytest.mark.parametrize("q", [3, 4])
def test_bm_unitals(q):
    A = abb(q)
    for U in all_bm(q):
        assert U.size == q**3 + 1
        assert U.meta["special_point"] == A.p_inf
        assert A.p_inf in U
        assert U.tangent_at(A.p_inf) == 0  # l_inf


def test_bm_precondition_errors():
    q = 3
    A = abb(q)
    sp3 = pg3(q)
    ov = caps.standard_ovoid("eq", ctx(q), sp3).points
    O = unital.embed_ovoid(A, ov, sp3)
    a = int(O[~A.space.is_affine(O)][0])
    with pytest.raises(BMError) as e:
        unital.bm_unital(A, O, a)
    assert e.value.code == "vertex-is-A"
    off = int(np.setdiff1d(A.H_inf, A.T)[0])
    with pytest.raises(BMError) as e:
        unital.bm_unital(A, O, off)
    assert e.value.code == "vertex-not-on-T"
    with pytest.raises(BMError) as e:
        unital.bm_unital(A, O[1:], int(unital.bm_vertices(A, a)[0]))
    assert e.value.code == "not-an-ovoid"


def test_tangent_plane_containing_t_is_rejected():
    q = 3
    A = abb(q)
    sp3 = pg3(q)
    ov = caps.standard_ovoid("eq", ctx(q), sp3).points
    frame = np.array([[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 0, 0, 1], [0, 0, 0, 1, 0]])
    O = unital.embed_ovoid(A, ov, sp3, frame)
    at_inf = O[~A.space.is_affine(O)]
    assert len(at_inf) == 1 and at_inf[0] in A.T
    V = int(unital.bm_vertices(A, int(at_inf[0]))[0])
    with pytest.raises(BMError) as e:
        unital.bm_unital(A, O, V)
    assert e.value.code == "tangent-plane-contains-T"
    # the unchecked cone really is not a unital
    with pytest.raises(UnitalError):
        unital.validate_unital(A.ctx, A.plane, unital.cone_points(A, O, V))


def test_wrong_hinf_intersection():
    q = 3
    A = abb(q)
    sp3 = pg3(q)
    ov = caps.standard_ovoid("eq", ctx(q), sp3).points
    # the whole ovoid inside H_inf
    frame = np.array([[0, 0, 0, 0, 1], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]])
    O = unital.embed_ovoid(A, ov, sp3, frame)
    assert (~A.space.is_affine(O)).sum() == q * q + 1
    with pytest.raises(BMError) as e:
        unital.check_bm_base(A, O, int(A.T[0]))
    assert e.value.code == "wrong-hinf-intersection"


@pytest.mark.parametrize("q", [3, 4, 5])
def test_census(q):
    U = hermitian(q)
    for P in U.points[:: max(1, U.size // 7)]:
        c = unital.secant_census(U, int(P))
        assert c.count == q * q == len(c.secants)
    with pytest.raises(UnitalError):
        unital.secant_census(U, int(np.setdiff1d(np.arange(U.plane.N), U.points)[0]))
    B = bm(q)
    assert unital.secant_census(B, abb(q).p_inf).count == q * q


def test_tits_census_drops_off_the_special_point():
    U = bm(8, "suzuki-tits")
    P = abb(8).p_inf
    assert unital.secant_census(U, P).count == 64
    other = int(U.points[U.points != P][0])
    assert unital.secant_census(U, other).count < 64


@pytest.mark.parametrize("q", [3, 4])
def test_onan_empty_on_classical(q):
    assert unital.onan_search(hermitian(q), int(hermitian(q).points[3]))["count"] == 0
    assert unital.onan_search(bm(q), abb(q).p_inf)["count"] == 0


def test_onan_q2_total_is_zero():
    assert unital.onan_total(hermitian(2)) == 0


def test_onan_finds_configurations_off_p_inf_on_tits():
    U = bm(8, "suzuki-tits")
    P = int(U.points[U.points != abb(8).p_inf][0])
    res = unital.onan_search(U, P, limit=3)
    assert res["count"] > 0
    for cfg in res["configurations"]:
        pts = cfg["points"]
        assert len(set(pts)) == 6 and all(x in U for x in pts)
        assert len(set(cfg["lines"])) == 4
        for l in cfg["lines"]:
            assert sum(x in U.plane.line_pts[l] for x in pts) == 3


@pytest.mark.parametrize("q", [3, 4, 5])
def test_is_classical_recovers_matrix(q):
    c = ctx(q)
    rng = np.random.default_rng(100 + q)
    H = unital.random_hermitian_matrix(c, rng)
    U = unital.hermitian_unital(c, abb(q).plane, H)
    G = unital.is_classical(U)
    assert G is not None
    # recovered up to a nonzero F_q scalar
    nz = np.flatnonzero(H.ravel())[0]
    s = c.big.div(int(G.ravel()[nz]), int(H.ravel()[nz]))
    assert c.in_subfield(s) and np.array_equal(c.big.mul(H, s), G)


def test_tits_is_not_classical():
    assert unital.is_classical(bm(8, "suzuki-tits")) is None


@pytest.mark.parametrize("q", [3, 4])
def test_counting_lemma(q):
    for U in all_bm(q):
        rows = unital.counting_lemma_census(U, abb(q).p_inf)
        assert len(rows) == q * q * (q * q - 1) // 2
        for r in rows:
            limit = 2 * q + 2 if r["kind"] == "tangent" else 2 * q + 1
            assert r["meet"] <= limit


def all_unitals_pg24():
    """Every 9-point subset of PG(2,4) meeting each line in 1 or 3 points."""
    pl = abb(2).plane
    inc = np.zeros((pl.N, pl.N), dtype=np.int8)
    np.put_along_axis(inc, pl.line_pts, 1, axis=1)
    combos = np.array(list(combinations(range(pl.N), 9)), dtype=np.int8)
    M = np.zeros((len(combos), pl.N), dtype=np.int8)
    np.put_along_axis(M, combos.astype(np.int64), 1, axis=1)
    hits = M @ inc.T
    good = ((hits == 1) | (hits == 3)).all(axis=1)
    return combos[good]


@pytest.mark.slow
def test_every_unital_of_pg24_is_classical():
    found = all_unitals_pg24()
    assert len(found) == 280  # |PGL(3,4)| / |PGU(3,2)| = 60480 / 216
    c, pl = ctx(2), abb(2).plane
    for pts in found:
        U = unital.validate_unital(c, pl, pts)
        assert unital.is_classical(U) is not None


def test_tits_size_and_classical_corollary_matrix():
    U = bm(8, "suzuki-tits")
    assert U.size == 513
    res = pipeline.corollary_check(hermitian(3), int(hermitian(3).points[0]))
    assert res["verdict"] == "classical" and res["classical"] is not None
