"""Labeled point sets S(U) in AG(2, q) and the configuration trichotomy.

Each line of a family L (space lines through points of T) spans a plane with
T, i.e. a point of the quotient plane PG(4, q)/T = PG(2, q); the line's
meeting point with T gives the label.  Affine points of the quotient are
(1 : x : y), stored as the index ``x*q + y``.  Lines are reported as the
sorted tuple of their q affine point indices, directions as the normalized
vector (dx, dy) of their point at infinity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cache
from itertools import combinations

import numpy as np

from .abb import AbbModel
from .fields import GF
from .projective import ProjectiveSpace, Quotient


class SlabelError(ValueError):
    pass


def default_k(q: int) -> int:
    return max(0, math.isqrt(q) // 2 - 2)


@dataclass(eq=False)
class LabeledSet:
    q: int
    points: np.ndarray  # (m, 2) affine coordinates, sorted by x*q + y
    labels: np.ndarray  # (m,), values in 1..q+1
    k: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        lab = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(pts) != len(lab):
            raise SlabelError("one label per point")
        if len(lab) and (lab.min() < 1 or lab.max() > self.q + 1):
            raise SlabelError("labels must lie in 1..q+1")
        if len(pts) and (pts.min() < 0 or pts.max() >= self.q):
            raise SlabelError("coordinates out of range")
        idx = pts[:, 0] * self.q + pts[:, 1]
        order = np.argsort(idx, kind="stable")
        if len(np.unique(idx)) != len(idx):
            raise SlabelError("repeated point")
        self.points, self.labels = pts[order], lab[order]

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def index(self) -> np.ndarray:
        return self.points[:, 0] * self.q + self.points[:, 1]

    def label_map(self) -> np.ndarray:
        """Length q^2 array: label of each affine point, 0 if absent."""
        out = np.zeros(self.q * self.q, dtype=np.int64)
        out[self.index] = self.labels
        return out

    def classes(self) -> dict[int, np.ndarray]:
        return {int(v): self.index[self.labels == v] for v in np.unique(self.labels)}

    def key(self) -> tuple:
        return (self.q, self.k, tuple(self.index.tolist()), tuple(self.labels.tolist()))

    @classmethod
    def from_map(cls, q: int, lab: np.ndarray, k: int = 0, meta=None) -> LabeledSet:
        idx = np.flatnonzero(lab)
        return cls(q, np.stack([idx // q, idx % q], axis=1), lab[idx], k, dict(meta or {}))


# ---------------------------------------------------------------- construction


def build_slabels(abb: AbbModel, L, k: int | None = None, T=None) -> LabeledSet:
    """S(L) in PG(4, q)/T; ``L`` is a sequence of space lines (Subspace)."""
    sp = abb.space
    T = abb.T if T is None else np.asarray(T)
    Tsub = sp.span(T)
    quo = Quotient(sp, Tsub)
    q = abb.q
    seen: dict[int, int] = {}
    pts, labs = [], []
    for n, line in enumerate(L):
        P = line.points
        inf = P[~sp.is_affine(P)]
        if len(inf) != 1:
            raise SlabelError(f"line {n} does not meet H_inf in exactly one point")
        on_T = np.flatnonzero(T == inf[0])
        if len(on_T) == 0:
            raise SlabelError(f"line {n} meets H_inf off T")
        x = int(P[sp.is_affine(P)][0])
        pi = int(quo.image([x])[0])
        if pi in seen:
            raise SlabelError(f"lines {seen[pi]} and {n} lie in one plane through T")
        seen[pi] = n
        c = quo.target.coords[pi]
        if c[0] != 1:  # pragma: no cover - affine x keeps a nonzero first coordinate
            raise SlabelError("image is not affine")
        pts.append((int(c[1]), int(c[2])))
        labs.append(int(on_T[0]) + 1)
    return LabeledSet(q, np.array(pts, dtype=np.int64).reshape(-1, 2), np.array(labs, dtype=np.int64), default_k(q) if k is None else k)


# ---------------------------------------------------------------- AG(2, q) geometry


@dataclass(frozen=True)
class _AG:
    q: int
    lines: np.ndarray  # (q^2+q, q) affine point indices, rows sorted
    dirs: np.ndarray  # (q^2+q,) direction id in 0..q
    dir_vec: np.ndarray  # (q+1, 2)


@cache
def _ag_from_field(F: GF) -> _AG:
    q = F.order
    pl = ProjectiveSpace(F, 2)
    lp, dirs = [], []
    inf_ids = {int(p): i for i, p in enumerate(sorted(pl.line_pts[0]))}
    for l in range(1, pl.N):
        row = pl.line_pts[l]
        aff = row[pl.is_affine(row)]
        lp.append(np.sort(aff))
        dirs.append(inf_ids[int(row[~pl.is_affine(row)][0])])
    dir_vec = pl.coords[sorted(pl.line_pts[0])][:, 1:]
    return _AG(q, np.array(lp), np.array(dirs), dir_vec)


_FIELDS: dict[int, GF] = {}


def register_field(F: GF) -> None:
    _FIELDS[F.order] = F


def _field(q: int) -> GF:
    if q not in _FIELDS:
        from .fields import field_for_q

        register_field(field_for_q(q).small)
    return _FIELDS[q]


def ag(q: int) -> _AG:
    return _ag_from_field(_field(q))


# ---------------------------------------------------------------- closure


def check_closure(S: LabeledSet):
    """(True, None) or (False, (Q, P1, P2, v)) with points as (x, y)."""
    G = ag(S.q)
    lab = S.label_map()
    M = lab[G.lines]  # (lines, q)
    cnt = np.zeros((len(G.lines), S.q + 2), dtype=np.int64)
    rows = np.repeat(np.arange(len(G.lines)), S.q)
    np.add.at(cnt, (rows, M.ravel()), 1)
    cnt[:, 0] = 0
    tot = cnt.sum(axis=1)
    bad = (cnt >= 2) & (tot[:, None] > cnt)
    if not bad.any():
        return True, None
    l, v = map(int, np.argwhere(bad)[0])
    members = G.lines[l]
    same = members[lab[members] == v]
    other = members[(lab[members] != v) & (lab[members] > 0)]
    xy = lambda i: (int(i) // S.q, int(i) % S.q)
    return False, (xy(other[0]), xy(same[0]), xy(same[1]), v)


def repair_closure(S: LabeledSet) -> LabeledSet:
    """Drop witness points until the closure property holds."""
    lab = S.label_map()
    while True:
        T = LabeledSet.from_map(S.q, lab, S.k, S.meta)
        ok, wit = check_closure(T)
        if ok:
            return T
        Q = wit[0]
        lab[Q[0] * S.q + Q[1]] = 0


# ---------------------------------------------------------------- classification


@dataclass
class ConfigReport:
    configuration: str
    labels: list
    ii: list
    iii: list
    bound: int
    bound_ok: bool | None
    flags: list

    @property
    def best_effort(self) -> bool:
        return bool(self.flags)

    def to_dict(self) -> dict:
        return {
            "configuration": self.configuration,
            "labels": self.labels,
            "ii": self.ii,
            "iii": self.iii,
            "bound": self.bound,
            "bound_ok": self.bound_ok,
            "flags": self.flags,
            "best_effort": self.best_effort,
        }


def iii_bound(q: int, size: int, k: int) -> int:
    eps = max(0, q * q - size)
    return q * q - eps - (k * k + k) * (k * k + k - 1) - 1


def _flags(S: LabeledSet, k: int, closure_ok: bool) -> list[str]:
    f = []
    if S.size < S.q * S.q - k * S.q:
        f.append("size")
    if not k < math.sqrt(S.q) - 1:
        f.append("k")
    if not closure_ok:
        f.append("closure")
    return f


def _finish(S, k, closure_ok, ii, iii) -> ConfigReport:
    labels = sorted(int(v) for v in np.unique(S.labels))
    ii.sort(key=lambda w: (w["labels"], w["lines"]))
    iii.sort(key=lambda w: (-w["size"], w["direction"]))
    if len(labels) == 1:
        config = "i"
    elif ii:
        config = "ii"
    elif iii:
        config = "iii"
    else:
        config = "none"
    bound = iii_bound(S.q, S.size, k)
    bound_ok = bool(iii[0]["size"] >= bound) if config == "iii" else None
    return ConfigReport(config, labels, ii, iii, bound, bound_ok, _flags(S, k, closure_ok))


def classify(S: LabeledSet, k: int | None = None, warn: bool = True) -> ConfigReport:
    k = S.k if k is None else k
    q = S.q
    G = ag(q)
    closure_ok = check_closure(S)[0]
    classes = S.classes()
    # collinear classes: the unique line holding every point of a class of size >= 2
    on_line = {}
    for v, pts in classes.items():
        if len(pts) < 2:
            continue
        hit = np.isin(G.lines, pts).sum(axis=1)
        full = np.flatnonzero(hit == len(pts))
        if len(full):
            on_line[v] = int(full[0])
    need = max(q - k, 2)
    ii = []
    for v1, v2 in combinations(sorted(on_line), 2):
        if len(classes[v1]) < need or len(classes[v2]) < need:
            continue
        l1, l2 = on_line[v1], on_line[v2]
        if G.dirs[l1] == G.dirs[l2]:
            continue
        meet = int(np.intersect1d(G.lines[l1], G.lines[l2])[0])
        ii.append(
            {
                "labels": [v1, v2],
                "lines": [G.lines[l1].tolist(), G.lines[l2].tolist()],
                "meet": [meet // q, meet % q],
            }
        )
    iii = []
    for d in range(q + 1):
        vs = sorted(v for v, l in on_line.items() if G.dirs[l] == d)
        if vs:
            iii.append(
                {
                    "direction": G.dir_vec[d].tolist(),
                    "labels": vs,
                    "size": int(sum(len(classes[v]) for v in vs)),
                }
            )
    rep = _finish(S, k, closure_ok, ii, iii)
    if warn and rep.flags:
        warnings.warn(f"classification outside the hypotheses ({', '.join(rep.flags)}); best-effort answer", stacklevel=2)
    return rep


def _oracle_lines(q: int, F: GF):
    """Every affine line as (point set, direction) from its equation a x + b y = c."""
    lines = {}
    for a in range(q):
        for b in range(q):
            if a == 0 and b == 0:
                continue
            # normalize (a, b) so the leading nonzero entry is 1
            s = F.inv(a if a else b)
            na, nb = int(F.mul(s, a)), int(F.mul(s, b))
            for c in range(q):
                pts = tuple(
                    sorted(x * q + y for x in range(q) for y in range(q) if F.add(F.mul(na, x), F.mul(nb, y)) == F.mul(s, c))
                )
                # direction (dx, dy) solves a dx + b dy = 0
                d = (0, 1) if nb == 0 else (1, int(F.neg(F.div(na, nb))))
                lines[pts] = d
    return sorted(lines.items())


@cache
def _oracle_incidence(q: int):
    F = _field(q)
    items = _oracle_lines(q, F)
    I = np.zeros((len(items), q * q), dtype=bool)
    for r, (pts, _) in enumerate(items):
        I[r, list(pts)] = True
    return items, I


def classify_oracle(S: LabeledSet, k: int | None = None) -> ConfigReport:
    """Brute force over all lines, label pairs and directions."""
    k = S.k if k is None else k
    q = S.q
    items, I = _oracle_incidence(q)
    idx = S.index.tolist()
    lab = dict(zip(idx, S.labels.tolist()))
    # closure, straight from the definition
    closure_ok = True
    for r in range(len(items)):
        on = [p for p in idx if I[r, p]]
        for v in {lab[p] for p in on}:
            if sum(lab[p] == v for p in on) >= 2 and any(lab[p] != v for p in on):
                closure_ok = False
    classes: dict[int, list[int]] = {}
    for p in idx:
        classes.setdefault(lab[p], []).append(p)
    carrier = {}
    for v, pts in classes.items():
        if len(pts) >= 2:
            for r in range(len(items)):
                if I[r, pts].all():
                    carrier[v] = r
                    break
    ii = []
    for v1 in sorted(classes):
        for v2 in sorted(classes):
            if v2 <= v1 or v1 not in carrier or v2 not in carrier:
                continue
            if min(len(classes[v1]), len(classes[v2])) < max(q - k, 2):
                continue
            r1, r2 = carrier[v1], carrier[v2]
            common = [p for p in range(q * q) if I[r1, p] and I[r2, p]]
            if len(common) == 1:
                ii.append({"labels": [v1, v2], "lines": [list(items[r1][0]), list(items[r2][0])], "meet": [common[0] // q, common[0] % q]})
    iii = []
    for d in sorted({dd for _, dd in items}):
        vs = [v for v in sorted(carrier) if items[carrier[v]][1] == d]
        if vs:
            iii.append({"direction": list(d), "labels": vs, "size": sum(len(classes[v]) for v in vs)})
    return _finish(S, k, closure_ok, ii, iii)


def verify_report(S: LabeledSet, rep: ConfigReport) -> bool:
    """Re-check a report's witnesses against the definitions."""
    q = S.q
    for w in rep.ii:
        v1, v2 = w["labels"]
        for v, line in zip((v1, v2), w["lines"]):
            cls = S.index[S.labels == v]
            if not set(cls.tolist()) <= set(line):
                return False
        m = w["meet"][0] * q + w["meet"][1]
        if not (m in w["lines"][0] and m in w["lines"][1]):
            return False
    for w in rep.iii:
        dx, dy = w["direction"]
        for v in w["labels"]:
            cls = S.index[S.labels == v]
            F = _field(q)
            x0, y0 = divmod(int(cls[0]), q)
            for p in cls[1:]:
                x, y = divmod(int(p), q)
                ex, ey = int(F.sub(x, x0)), int(F.sub(y, y0))
                if F.sub(F.mul(ex, dy), F.mul(ey, dx)) != 0:
                    return False
    return not (rep.configuration == "i" and len(np.unique(S.labels)) != 1)


# ---------------------------------------------------------------- random instances


FAMILIES = ("single", "two-lines", "parallel", "random", "mixed")


def random_closure_set(q: int, rng: np.random.Generator, family: str | None = None, k: int | None = None) -> LabeledSet:
    """A random labeled set, repaired until it has the closure property.

    With ``k`` unset the slack is drawn from {0, 1}: two full lines through a
    common point lose that point in the repair, so configuration (ii) needs k >= 1.
    """
    G = ag(q)
    k = int(rng.integers(0, 2)) if k is None else k
    family = family or FAMILIES[int(rng.integers(len(FAMILIES)))]
    lab = np.zeros(q * q, dtype=np.int64)
    labels = rng.permutation(np.arange(1, q + 2))
    if family == "single":
        n = int(rng.integers(1, q * q + 1))
        lab[rng.choice(q * q, n, replace=False)] = labels[0]
    elif family in ("two-lines", "mixed"):
        l1 = int(rng.integers(len(G.lines)))
        cands = np.flatnonzero(G.dirs != G.dirs[l1])
        l2 = int(rng.choice(cands))
        fill = rng.random() < 0.5
        if fill:
            rest = rng.choice(q * q, int(rng.integers(0, q * q)), replace=False)
            lab[rest] = rng.choice(labels[2:], len(rest))
        lab[G.lines[l1]] = labels[0]
        lab[G.lines[l2]] = labels[1]
        if family == "mixed":
            d = G.dirs[l1]
            for l in rng.choice(np.flatnonzero(G.dirs == d), 2, replace=False):
                pts = G.lines[l]
                sel = pts[rng.random(q) < 0.5]
                lab[sel] = labels[2 + int(rng.integers(q - 1))]
        drop = rng.random(q * q) < rng.random() * 0.3
        if family == "two-lines":
            drop[G.lines[l1]] = drop[G.lines[l2]] = False
        lab[drop] = 0
    elif family == "parallel":
        d = int(rng.integers(q + 1))
        ls = np.flatnonzero(G.dirs == d)
        for j, l in enumerate(rng.permutation(ls)[: int(rng.integers(2, q + 1))]):
            pts = G.lines[l]
            lab[pts[rng.random(q) < 0.8]] = labels[j % (q + 1)]
        extra = rng.random(q * q) < 0.2
        lab[extra & (lab == 0)] = rng.choice(labels, int((extra & (lab == 0)).sum()))
    else:
        n = int(rng.integers(1, q * q + 1))
        nl = int(rng.integers(1, q + 2))
        sel = rng.choice(q * q, n, replace=False)
        lab[sel] = rng.choice(labels[:nl], n)
    S = LabeledSet.from_map(q, lab, k, {"family": family})
    return repair_closure(S)
