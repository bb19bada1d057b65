"""The Andre/Bruck-Bose model of PG(2, q^2) inside PG(4, q).

Plane points are (x0 : x1 : x2) with l_inf = {x0 = 0}; the affine point
(1 : x : y) goes to (1 : x_0 : x_1 : y_0 : y_1) where x = x_0 + x_1 w.  The
point (0 : a : b) of l_inf goes to the spread line {(0, la, lb) : l in F_{q^2}}
of H_inf = {x0 = 0}.  The special point is P_inf = (0 : 0 : 1), whose spread
line is T = {(0, 0, 0, *, *)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import baer
from .fields import FieldCtx
from .projective import GeometryError, ProjectiveSpace, Subspace


class AbbError(ValueError):
    pass


@dataclass(eq=False)
class AbbModel:
    ctx: FieldCtx = field(repr=False)
    plane: ProjectiveSpace = field(repr=False)
    space: ProjectiveSpace = field(repr=False)
    ell_inf: np.ndarray = field(repr=False)  # plane ids of l_inf, sorted
    spread: np.ndarray = field(repr=False)  # (q^2+1, q+1): spread[i] <-> ell_inf[i]
    spread_index: np.ndarray = field(repr=False)  # space id -> spread line index, -1 if affine
    plane_to_space: np.ndarray = field(repr=False)  # affine plane id -> affine space id
    space_to_plane: np.ndarray = field(repr=False)
    p_inf: int = 0

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def T(self) -> np.ndarray:
        return self.spread_line_of(self.p_inf)

    @property
    def H_inf(self) -> np.ndarray:
        return np.arange(self.space.Q**4, self.space.N)

    def spread_line_of(self, pid: int) -> np.ndarray:
        i = np.searchsorted(self.ell_inf, pid)
        if i >= len(self.ell_inf) or self.ell_inf[i] != pid:
            raise AbbError(f"plane point {pid} is not on l_inf")
        return self.spread[i]

    def spread_subspace(self, pid: int) -> Subspace:
        return self.space.span(self.spread_line_of(pid))

    def to_space(self, pids) -> np.ndarray:
        """Affine plane points to affine space points."""
        pids = np.asarray(pids)
        if not self.plane.is_affine(pids).all():
            raise AbbError("points of l_inf map to spread lines, not points")
        return self.plane_to_space[pids]

    def to_plane(self, sids) -> np.ndarray:
        """Affine space points to affine plane points."""
        sids = np.asarray(sids)
        if not self.space.is_affine(sids).all():
            raise AbbError("points of H_inf have no affine preimage")
        return self.space_to_plane[sids]

    def ell_inf_point_of(self, sid: int) -> int:
        """The l_inf point whose spread line contains the H_inf point ``sid``."""
        i = self.spread_index[sid]
        if i < 0:
            raise AbbError("affine point is not on H_inf")
        return int(self.ell_inf[i])

    def map_point(self, obj, direction: str = "to_space"):
        if direction == "to_space":
            pid = int(obj)
            if self.plane.is_affine(pid):
                return int(self.plane_to_space[pid])
            return self.spread_line_of(pid)
        sid = int(obj)
        return int(self.to_plane([sid])[0])

    def map_secant_line(self, lid: int) -> Subspace:
        """The plane of PG(4, q) representing the plane line ``lid`` != l_inf."""
        if lid == 0:
            raise AbbError("l_inf has no affine image")
        pts = self.plane.line_pts[lid]
        aff = pts[self.plane.is_affine(pts)]
        return self.space.span(self.plane_to_space[aff])

    def transfer_subline(self, b) -> dict:
        """Space image of a tangent or external Baer subline."""
        b = np.unique(np.asarray(b, dtype=np.int64))
        if not baer.is_baer_subline(self.plane, b):
            raise AbbError("not a Baer subline")
        aff = b[self.plane.is_affine(b)]
        n_inf = len(b) - len(aff)
        if n_inf > 1:
            raise AbbError("subline lies on l_inf")
        imgs = self.plane_to_space[aff]
        if n_inf == 1:
            line = self.space.span(imgs)
            return {"kind": "tangent", "subspace": line, "points": line.points}
        return {"kind": "external", "subspace": self.space.span(imgs), "points": np.sort(imgs)}

    def subplane_image(self, sub) -> np.ndarray:
        """Space points of a Baer subplane: affine images plus spread lines at infinity."""
        sub = np.asarray(sub)
        aff = sub[self.plane.is_affine(sub)]
        parts = [self.plane_to_space[aff]] + [self.spread_line_of(int(x)) for x in sub[~self.plane.is_affine(sub)]]
        return np.unique(np.concatenate(parts))


@dataclass(eq=False)
class RuledCubic:
    directrix: np.ndarray  # space points of the spread line T'
    generators: np.ndarray  # (q+1, q) affine points, generators[i] through directrix[i]
    base_conic: np.ndarray
    base_plane: Subspace = field(repr=False)
    subplane: np.ndarray = field(repr=False)  # plane ids of the tangent Baer subplane

    @property
    def affine_points(self) -> np.ndarray:
        return np.unique(self.generators.ravel())

    @property
    def points(self) -> np.ndarray:
        return np.unique(np.concatenate([self.generators.ravel(), self.directrix]))


@dataclass(eq=False)
class SecantSubplane:
    """Two lines through one point of H_inf: the plane they span and its secant subplane."""

    plane: Subspace
    subplane: np.ndarray
    kind: str = "secant-subplane case"


def build_abb(ctx: FieldCtx, plane: ProjectiveSpace | None = None, space: ProjectiveSpace | None = None) -> AbbModel:
    q, Q = ctx.q, ctx.q2
    plane = plane or ProjectiveSpace(ctx.big, 2)
    space = space or ProjectiveSpace(ctx.small, 4)
    x = np.arange(Q)
    x0, x1 = ctx.split(x)
    xs, ys = np.divmod(np.arange(Q * Q), Q)
    plane_to_space = ((x0[xs] * q + x1[xs]) * q + x0[ys]) * q + x1[ys]
    space_to_plane = np.empty_like(plane_to_space)
    space_to_plane[plane_to_space] = np.arange(Q * Q)

    ell_inf = np.sort(plane.line_pts[0])
    spread = np.empty((Q + 1, q + 1), dtype=np.int64)
    spread_index = np.full(space.N, -1, dtype=np.int64)
    w = ctx.omega
    for i, pid in enumerate(ell_inf):
        _, a, b = plane.coords[pid]
        wa, wb = ctx.big.mul(w, a), ctx.big.mul(w, b)
        v1 = [0, *ctx.split(a), *ctx.split(b)]
        v2 = [0, *ctx.split(wa), *ctx.split(wb)]
        pts = space.span(vecs=np.array([v1, v2], dtype=np.int64)).points
        if len(pts) != q + 1:  # pragma: no cover
            raise GeometryError("spread element is not a line")
        spread[i] = pts
        spread_index[pts] = i
    for arr in (plane_to_space, space_to_plane, ell_inf, spread, spread_index):
        arr.setflags(write=False)
    p_inf = plane.ids([0, 0, 1])
    return AbbModel(ctx, plane, space, ell_inf, spread, spread_index, plane_to_space, space_to_plane, p_inf)


def _line_subline(abb: AbbModel, line: Subspace) -> np.ndarray:
    """Tangent Baer subline of the plane represented by a space line not in H_inf."""
    if len(line.points) != abb.q + 1 or line.dim != 1:
        raise AbbError("expected a line of PG(4,q)")
    aff = line.points[abb.space.is_affine(line.points)]
    inf = line.points[~abb.space.is_affine(line.points)]
    if len(inf) != 1:
        raise AbbError("line must meet H_inf in exactly one point")
    return np.unique(np.concatenate([abb.to_plane(aff), [abb.ell_inf_point_of(int(inf[0]))]]))


def ruled_cubic_of(abb: AbbModel, l1: Subspace, l2: Subspace):
    """The Baer ruled cubic through two space lines.

    Lines through distinct points of one spread line give a RuledCubic.  Lines
    through the same point of H_inf are the other legitimate case and return a
    SecantSubplane (tagged ``kind == "secant-subplane case"``) instead.
    """
    P1 = l1.points[~abb.space.is_affine(l1.points)]
    P2 = l2.points[~abb.space.is_affine(l2.points)]
    if len(P1) != 1 or len(P2) != 1:
        raise AbbError("each line must meet H_inf in exactly one point")
    s1, s2 = abb.spread_index[P1[0]], abb.spread_index[P2[0]]
    if s1 != s2:
        raise AbbError("P1 P2 is not a spread line")
    b1, b2 = _line_subline(abb, l1), _line_subline(abb, l2)
    if np.array_equal(b1, b2):
        raise AbbError("the two lines coincide")
    span = abb.space.span(np.concatenate([l1.points, l2.points]))
    if span.dim == 2 and np.isin(abb.spread[s1], span.points).all():
        raise AbbError("lines lie in a plane through a spread line")
    sub = baer.baer_subplane_through(abb.plane, b1, b2)
    if P1[0] == P2[0]:
        return SecantSubplane(span, sub)

    q = abb.q
    directrix = abb.spread[s1]
    aff = abb.to_space(sub[abb.plane.is_affine(sub)])
    mask = np.zeros(abb.space.N, dtype=bool)
    mask[aff] = True
    gens = np.empty((q + 1, q), dtype=np.int64)
    for i, v in enumerate(directrix):
        found = None
        for a in aff:
            pts = abb.space.line_points_of(int(v), int(a))
            on = pts[mask[pts]]
            if len(on) == q:
                found = on
                break
        if found is None:  # pragma: no cover
            raise AbbError("no generator through a directrix point")
        gens[i] = found
    if len(np.unique(gens)) != q * (q + 1):
        raise AbbError("generators are not pairwise disjoint")

    # base conic: an external subline of the subplane, i.e. a subplane line missing l_inf
    base = None
    for trace in baer.subplane_lines(abb.plane, sub):
        if abb.plane.is_affine(trace).all():
            base = np.sort(abb.to_space(trace))
            break
    base_plane = abb.space.span(base)
    if np.intersect1d(base_plane.points, directrix).size:
        raise AbbError("base plane meets the directrix")  # pragma: no cover
    for g in gens:
        if np.intersect1d(g, base).size != 1:
            raise AbbError("generator misses the base conic")  # pragma: no cover
    return RuledCubic(directrix, gens, base, base_plane, sub)
