"""Baer sublines, subplanes and conics.

In PG(2, q^2) the big field is F_{q^2} and its subfield F_q is the code
range ``0..q-1``, so a Baer subline through a, b, c is the set of points
``x*u + y*w`` with (x : y) in PG(1, q), where u ~ a, w ~ b are scaled so that
``u + w ~ c``.  This is the normalization sending (a, b, c) to
(infinity, 0, 1) on PG(1, q^2), done directly on representatives.
"""

from __future__ import annotations

from math import isqrt
from typing import TYPE_CHECKING

import numpy as np

from .projective import ProjectiveSpace, combine

if TYPE_CHECKING:
    from .abb import AbbModel


class BaerError(ValueError):
    pass


def _subfield_order(plane: ProjectiveSpace) -> int:
    q = isqrt(plane.Q)
    if q * q != plane.Q:
        raise BaerError("Baer substructures need a plane of square order")
    return q


def combination_coeffs(F, a, b, c):
    """Scalars (alpha, beta) with c = alpha*a + beta*b, or None."""
    for i, j in ((0, 1), (0, 2), (1, 2)):
        det = F.sub(F.mul(a[i], b[j]), F.mul(a[j], b[i]))
        if det:
            alpha = F.div(F.sub(F.mul(c[i], b[j]), F.mul(c[j], b[i])), det)
            beta = F.div(F.sub(F.mul(a[i], c[j]), F.mul(a[j], c[i])), det)
            lhs = F.add(F.mul(alpha, a), F.mul(beta, b))
            return (int(alpha), int(beta)) if np.array_equal(lhs, c) else None
    return None


def subline_frame(plane: ProjectiveSpace, a: int, b: int, c: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectors (u, w) with u ~ a, w ~ b and u + w ~ c."""
    if len({a, b, c}) < 3:
        raise BaerError("need three distinct points")
    F = plane.F
    A, B, C = plane.coords[a], plane.coords[b], plane.coords[c]
    ab = combination_coeffs(F, A, B, C)
    if ab is None or 0 in ab:
        raise BaerError("points are not collinear")
    return F.mul(ab[0], A), F.mul(ab[1], B)


def _pg1_coeffs(q: int) -> np.ndarray:
    return np.array([[1, t] for t in range(q)] + [[0, 1]], dtype=np.int64)


def _pg2_coeffs(q: int) -> np.ndarray:
    rows = [[1, x, y] for x in range(q) for y in range(q)]
    rows += [[0, 1, y] for y in range(q)] + [[0, 0, 1]]
    return np.array(rows, dtype=np.int64)


def baer_subline_through(plane: ProjectiveSpace, a: int, b: int, c: int) -> np.ndarray:
    q = _subfield_order(plane)
    u, w = subline_frame(plane, a, b, c)
    return np.unique(plane.ids(combine(plane.F, _pg1_coeffs(q), np.array([u, w]))))


def is_baer_subline(plane: ProjectiveSpace, B) -> bool:
    q = _subfield_order(plane)
    B = np.unique(np.asarray(B, dtype=np.int64))
    if len(B) != q + 1:
        return False
    try:
        regen = baer_subline_through(plane, int(B[0]), int(B[1]), int(B[2]))
    except BaerError:
        return False
    return np.array_equal(regen, B)


def baer_subplane_through(plane: ProjectiveSpace, b1, b2) -> np.ndarray:
    """The Baer subplane containing two sublines that share exactly one point."""
    q = _subfield_order(plane)
    b1 = np.unique(np.asarray(b1, dtype=np.int64))
    b2 = np.unique(np.asarray(b2, dtype=np.int64))
    if not (is_baer_subline(plane, b1) and is_baer_subline(plane, b2)):
        raise BaerError("inputs must be Baer sublines")
    common = np.intersect1d(b1, b2)
    if len(common) != 1:
        raise BaerError(f"sublines share {len(common)} points, need exactly one")
    P = int(common[0])
    o1 = [int(x) for x in b1 if x != P][:2]
    o2 = [int(x) for x in b2 if x != P][:2]
    u1, w1 = subline_frame(plane, P, o1[0], o1[1])
    u2, w2 = subline_frame(plane, P, o2[0], o2[1])
    F = plane.F
    # u2 = mu * u1 for some mu; rescaling b2's frame by 1/mu keeps its point set
    i = int(np.flatnonzero(u1)[0])
    mu = F.div(u2[i], u1[i])
    w2 = F.mul(F.inv(mu), w2)
    basis = np.array([u1, w1, w2])
    if plane.span(vecs=basis).dim != 2:  # pragma: no cover - excluded by the sharing test
        raise BaerError("sublines lie on one line")
    return np.unique(plane.ids(combine(F, _pg2_coeffs(q), basis)))


def is_baer_conic(abb: AbbModel, C) -> bool:
    """True iff C is the image of an external Baer subline."""
    C = np.unique(np.asarray(C, dtype=np.int64))
    q = abb.q
    if len(C) != q + 1 or not abb.space.is_affine(C).all():
        return False
    pre = abb.to_plane(C)
    return is_baer_subline(abb.plane, pre)


def subplane_lines(plane: ProjectiveSpace, sub) -> list[np.ndarray]:
    """Traces on the subplane of the lines of PG(2, q^2) meeting it in q+1 points."""
    q = _subfield_order(plane)
    mask = np.zeros(plane.N, dtype=bool)
    mask[sub] = True
    hits = mask[plane.line_pts].sum(axis=1)
    return [plane.line_pts[l][mask[plane.line_pts[l]]] for l in np.flatnonzero(hits == q + 1)]
