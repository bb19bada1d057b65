"""PG(n, F) for small n: canonical point ids, spans, subspaces, quotients.

A point is stored by its normalized coordinate vector (leftmost nonzero
entry equal to 1).  Its id is ``offset[i] + sum(v[j] * Q**(n-j))`` over the
coordinates after the leading position ``i``; with this numbering the affine
points ``(1, *)`` come first, in base-Q order of their affine coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple

import numpy as np

from .fields import GF


class GeometryError(ValueError):
    pass


class ProjPoint(NamedTuple):
    id: int
    coords: tuple[int, ...]


def rref(F: GF, rows) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F; zero rows are dropped."""
    M = np.array(rows, dtype=np.int64).reshape(-1, np.shape(rows)[-1]).copy()
    pivots: list[int] = []
    r = 0
    for c in range(M.shape[1]):
        nz = [i for i in range(r, M.shape[0]) if M[i, c]]
        if not nz:
            continue
        M[[r, nz[0]]] = M[[nz[0], r]]
        M[r] = F.mul_t[F.inv_t[M[r, c]], M[r]]
        for i in range(M.shape[0]):
            if i != r and M[i, c]:
                M[i] = F.sub(M[i], F.mul_t[M[i, c], M[r]])
        pivots.append(c)
        r += 1
        if r == M.shape[0]:
            break
    return M[:r], pivots


def nullspace(F: GF, rows, ncols: int) -> np.ndarray:
    """Basis (as rows) of {x : rows @ x = 0}."""
    if len(rows) == 0:
        return np.eye(ncols, dtype=np.int64)
    R, piv = rref(F, rows)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = F.neg_t[R[i, f]]
        out.append(v)
    return np.array(out, dtype=np.int64).reshape(len(out), ncols)


def combine(F: GF, coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Rows of ``coeffs @ basis`` over F (coeffs shape (m, k), basis (k, d))."""
    out = np.zeros((coeffs.shape[0], basis.shape[1]), dtype=np.int64)
    for r in range(basis.shape[0]):
        out = F.add_t[out, F.mul_t[coeffs[:, r : r + 1], basis[r][None, :]]]
    return out


def mat_inv(F: GF, M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    R, piv = rref(F, np.hstack([M, np.eye(n, dtype=np.int64)]))
    if piv[:n] != list(range(n)):
        raise GeometryError("singular matrix")
    return R[:, n:]


@dataclass(frozen=True, eq=False)
class Subspace:
    """A projective subspace given by its RREF basis."""

    basis: np.ndarray = field(repr=False)
    pivots: tuple[int, ...]
    points: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[0] - 1

    def key(self) -> tuple:
        return tuple(map(int, self.basis.ravel()))

    def __contains__(self, pid) -> bool:
        i = np.searchsorted(self.points, pid)
        return bool(i < len(self.points) and self.points[i] == pid)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


class ProjectiveSpace:
    """PG(n, F) with dense point ids; line tables are built lazily."""

    def __init__(self, F: GF, n: int):
        if n < 1:
            raise GeometryError("dimension must be positive")
        self.F, self.n, self.Q = F, n, F.order
        Q = self.Q
        self.weights = Q ** np.arange(n, -1, -1, dtype=np.int64)
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        for i in range(n):
            self.offsets[i + 1] = self.offsets[i] + Q ** (n - i)
        self.N = int(self.offsets[n] + 1)
        blocks = []
        for i in range(n + 1):
            free = n - i
            tail = np.array(list(product(range(Q), repeat=free)), dtype=np.int64).reshape(Q**free, free)
            head = np.zeros((tail.shape[0], i + 1), dtype=np.int64)
            head[:, i] = 1
            blocks.append(np.hstack([head, tail]))
        self.coords = np.vstack(blocks)
        self.coords.setflags(write=False)
        self._line_pts = None
        self._line_through = None

    def __repr__(self) -> str:
        return f"PG({self.n},{self.Q})"

    # points
    def ids(self, vecs) -> np.ndarray:
        """Ids of the projective points spanned by each row of ``vecs``."""
        v = np.asarray(vecs, dtype=np.int64)
        single = v.ndim == 1
        v = v.reshape(-1, self.n + 1)
        nz = v != 0
        if not nz.any(axis=1).all():
            raise GeometryError("zero vector is not a projective point")
        lead = np.argmax(nz, axis=1)
        lv = v[np.arange(len(v)), lead]
        vn = self.F.mul_t[self.F.inv_t[lv][:, None], v]
        out = self.offsets[lead] + vn @ self.weights - self.weights[lead]
        return int(out[0]) if single else out

    def normalize_point(self, v) -> ProjPoint:
        pid = self.ids(v)
        return ProjPoint(pid, tuple(int(c) for c in self.coords[pid]))

    def is_affine(self, pid) -> np.ndarray:
        """True for points off the hyperplane x0 = 0."""
        return np.asarray(pid) < self.Q**self.n

    # subspaces
    def span(self, pids=(), vecs=None) -> Subspace:
        rows = [self.coords[int(i)] for i in np.atleast_1d(pids)]
        if vecs is not None:
            rows += [np.asarray(r, dtype=np.int64) for r in np.atleast_2d(vecs)]
        if not rows:
            raise GeometryError("span of the empty set")
        R, piv = rref(self.F, np.array(rows))
        if R.shape[0] == 0:
            raise GeometryError("span of zero vectors")
        return Subspace(R, tuple(piv), self._points_of_basis(R))

    def _points_of_basis(self, R: np.ndarray) -> np.ndarray:
        k = R.shape[0]
        coeffs = np.array(list(product(range(self.Q), repeat=k))[1:], dtype=np.int64)
        vecs = combine(self.F, coeffs, R)
        pts = np.unique(self.ids(vecs))
        pts.setflags(write=False)
        return pts

    def subspace_points(self, S: Subspace) -> np.ndarray:
        return S.points

    def hyperplane(self, dual) -> Subspace:
        """The hyperplane {x : dual . x = 0}."""
        return self.span(vecs=nullspace(self.F, [dual], self.n + 1))

    def meet(self, A: Subspace, B: Subspace) -> np.ndarray:
        return np.intersect1d(A.points, B.points)

    @staticmethod
    def subspace_size(Q: int, dim: int) -> int:
        return (Q ** (dim + 1) - 1) // (Q - 1)

    # lines
    def line_points_of(self, a: int, b: int) -> np.ndarray:
        if a == b:
            raise GeometryError("a line needs two distinct points")
        A, B = self.coords[a], self.coords[b]
        t = np.arange(self.Q)
        vecs = self.F.add_t[A[None, :], self.F.mul_t[t[:, None], B[None, :]]]
        return np.unique(np.concatenate([[b], self.ids(vecs)]))

    def _build_lines(self) -> None:
        if self.n == 2:
            # lines are dual points; the point set of line l is {x : l.x = 0}
            pts = np.empty((self.N, self.Q + 1), dtype=np.int64)
            for l in range(self.N):
                K = nullspace(self.F, [self.coords[l]], 3)
                t = np.arange(self.Q)
                vecs = self.F.add_t[K[0][None, :], self.F.mul_t[t[:, None], K[1][None, :]]]
                pts[l] = np.sort(np.concatenate([[self.ids(K[1])], self.ids(vecs)]))
            self._line_pts = pts
            self._line_through = None
        else:
            lt = np.full((self.N, self.N), -1, dtype=np.int32)
            lines = []
            for a in range(self.N):
                for b in np.flatnonzero(lt[a] < 0):
                    if b <= a or lt[a, b] >= 0:
                        continue
                    pts = self.line_points_of(a, int(b))
                    lt[np.ix_(pts, pts)] = len(lines)
                    lines.append(pts)
            np.fill_diagonal(lt, -1)
            self._line_pts = np.array(lines, dtype=np.int64)
            self._line_through = lt
        self._line_pts.setflags(write=False)

    @property
    def line_pts(self) -> np.ndarray:
        """(L, Q+1) array of the sorted point ids on each line."""
        if self._line_pts is None:
            self._build_lines()
        return self._line_pts

    @property
    def line_through(self) -> np.ndarray:
        """(N, N) table of line ids through point pairs (n >= 3 only)."""
        if self.n == 2:
            raise GeometryError("use line_of for planes")
        if self._line_through is None:
            self._build_lines()
        return self._line_through

    # plane-only helpers (lines are identified with dual points)
    def cross(self, a: int, b: int) -> np.ndarray:
        F = self.F
        x, y = self.coords[a], self.coords[b]
        return np.array(
            [
                F.sub(F.mul(x[1], y[2]), F.mul(x[2], y[1])),
                F.sub(F.mul(x[2], y[0]), F.mul(x[0], y[2])),
                F.sub(F.mul(x[0], y[1]), F.mul(x[1], y[0])),
            ],
            dtype=np.int64,
        )

    def line_of(self, a: int, b: int) -> int:
        if self.n != 2:
            raise GeometryError("line_of is defined for planes")
        if a == b:
            raise GeometryError("a line needs two distinct points")
        return self.ids(self.cross(a, b))

    def lines_through(self, pid: int) -> np.ndarray:
        """Lines of the plane through ``pid`` (by duality, the points of line pid)."""
        if self.n != 2:
            raise GeometryError("lines_through is defined for planes")
        return self.line_pts[pid]

    def quotient(self, S: Subspace) -> Quotient:
        return Quotient(self, S)


class Quotient:
    """PG(n, F)/S realized on the coordinates outside the pivots of S.

    The image of a point P not in S is its residue modulo the RREF rows of S,
    which is a canonical invariant of the subspace <S, P>.  Lifting an image
    point puts those coordinates back with zeros on the pivots, so lifts
    lie in a fixed complement that avoids S.
    """

    def __init__(self, ambient: ProjectiveSpace, S: Subspace):
        if S.dim >= ambient.n:
            raise GeometryError("quotient by the whole space")
        self.ambient, self.S = ambient, S
        self.free = [c for c in range(ambient.n + 1) if c not in S.pivots]
        self.target = ProjectiveSpace(ambient.F, ambient.n - S.dim - 1)

    def residue(self, vecs) -> np.ndarray:
        F = self.ambient.F
        v = np.atleast_2d(np.asarray(vecs, dtype=np.int64)).copy()
        for row, c in zip(self.S.basis, self.S.pivots):
            v = F.sub(v, F.mul_t[v[:, c : c + 1], row[None, :]])
        return v

    def image(self, pids) -> np.ndarray:
        pids = np.atleast_1d(pids)
        if np.isin(pids, self.S.points).any():
            raise GeometryError("point lies in the subspace being factored out")
        r = self.residue(self.ambient.coords[pids])
        return self.target.ids(r[:, self.free])

    def lift(self, qids) -> np.ndarray:
        qids = np.atleast_1d(qids)
        v = np.zeros((len(qids), self.ambient.n + 1), dtype=np.int64)
        v[:, self.free] = self.target.coords[qids]
        return self.ambient.ids(v)

    def fibre(self, qid: int) -> np.ndarray:
        """Points of <S, lift(qid)> outside S."""
        top = self.ambient.span(pids=np.concatenate([self.S.points[:1], self.lift([qid])]), vecs=self.S.basis)
        return np.setdiff1d(top.points, self.S.points)
