import json

import numpy as np
import pytest
from _shared import abb, ctx, hermitian, pg3

from unital_forge import cache, slabels
from unital_forge.io import (
    FormatError,
    format_labeled,
    format_points,
    parse_labeled,
    parse_points,
)


@pytest.mark.parametrize("q", [3, 4])
def test_points_round_trip(q):
    U = hermitian(q)
    text = format_points(ctx(q), U.plane, U.points, comment="h")
    assert text.startswith("# h\n")
    assert np.array_equal(np.sort(parse_points(text, ctx(q), U.plane)), U.points)
    sp = pg3(q)
    pts = np.arange(0, sp.N, 5)
    back = parse_points(format_points(ctx(q), sp, pts, "small"), ctx(q), sp, "small")
    assert np.array_equal(np.sort(back), pts)


def test_points_accept_any_scaling():
    c = ctx(3)
    pl = abb(3).plane
    assert parse_points("02:00:00\n", c, pl)[0] == pl.ids([1, 0, 0])


@pytest.mark.parametrize("text", ["1:0\n", "1:0:zz\n", "00:00:00\n"])
def test_points_format_errors(text):
    with pytest.raises(FormatError):
        parse_points(text, ctx(3), abb(3).plane)


def test_labeled_round_trip():
    c = ctx(4)
    S = slabels.random_closure_set(4, np.random.default_rng(3), family="random")
    T = parse_labeled(format_labeled(c, S), c)
    assert T.key() == S.key()
    for bad in ("", "4\n", "3 0\n0 0 1\n", "4 0\n0 0\n"):
        with pytest.raises(FormatError):
            parse_labeled(bad, c)


def test_cache_store_and_load(tmp_path):
    A = abb(3)
    p = cache.store_abb(A, tmp_path)
    B = cache.load_abb(ctx(3), tmp_path)
    assert B is not None and p.exists()
    assert np.array_equal(B.spread, A.spread)
    assert np.array_equal(B.plane.line_pts, A.plane.line_pts)
    assert cache.abb_hash(B) == cache.abb_hash(A)
    assert B.p_inf == A.p_inf


def test_cache_absent_then_built(tmp_path):
    assert cache.load_abb(ctx(3), tmp_path) is None
    A = cache.get_abb(ctx(3), tmp_path)
    assert cache.path_for(ctx(3), tmp_path).exists()
    assert cache.abb_hash(A) == cache.abb_hash(abb(3))


def test_cache_content_is_deterministic(tmp_path):
    # zip member timestamps may differ; the hashed tables may not
    cache.store_abb(abb(3), tmp_path / "a")
    cache.store_abb(abb(3), tmp_path / "b")
    a = cache.load_abb(ctx(3), tmp_path / "a")
    b = cache.load_abb(ctx(3), tmp_path / "b")
    assert cache.abb_hash(a) == cache.abb_hash(b) == cache.abb_hash(abb(3))


def test_stale_version_warns_and_rebuilds(tmp_path):
    p = cache.store_abb(abb(3), tmp_path)
    with np.load(p) as z:
        arrays = {k: z[k] for k in z.files if k != "header"}
        header = json.loads(bytes(z["header"]).decode())
    header["version"] = cache.FORMAT_VERSION - 1
    np.savez(p, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8), **arrays)
    with pytest.warns(UserWarning, match="stale cache"):
        assert cache.load_abb(ctx(3), tmp_path) is None
    with pytest.warns(UserWarning):
        A = cache.get_abb(ctx(3), tmp_path)
    assert cache.abb_hash(A) == cache.abb_hash(abb(3))
    assert cache.load_abb(ctx(3), tmp_path) is not None


def test_corrupt_cache_raises(tmp_path):
    p = cache.store_abb(abb(3), tmp_path)
    p.write_bytes(b"not a zip file")
    with pytest.raises(cache.CacheError, match="corrupt"):
        cache.load_abb(ctx(3), tmp_path)


def test_tampered_cache_fails_hash(tmp_path):
    p = cache.store_abb(abb(3), tmp_path)
    with np.load(p) as z:
        arrays = {k: z[k].copy() for k in z.files}
    arrays["spread"][0, 0], arrays["spread"][0, 1] = arrays["spread"][0, 1], arrays["spread"][0, 0]
    np.savez(p, **arrays)
    with pytest.raises(cache.CacheError, match="hash"):
        cache.load_abb(ctx(3), tmp_path)


def test_cache_key_depends_on_polynomials():
    from unital_forge.fields import build_field

    other = build_field(3, 1, (None, (1, 1, 2)))
    assert cache.cache_key(other) != cache.cache_key(ctx(3))
