"""Text formats for point sets and labeled sets.

Point-set files hold one point per line as colon-separated field elements
(``c0:c1:c2`` in the plane, written as base-p digit strings); ``#`` starts a
comment.  Labeled-set files start with a header ``q k`` followed by
``x y label`` lines.
"""

from __future__ import annotations

import numpy as np

from .fields import FieldCtx, FieldError
from .projective import GeometryError, ProjectiveSpace
from .report import point_str
from .slabels import LabeledSet


class FormatError(ValueError):
    pass


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            yield n, s


def parse_points(text: str, ctx: FieldCtx, space: ProjectiveSpace, level: str = "big") -> np.ndarray:
    rows = []
    for n, s in _lines(text):
        parts = s.split(":")
        if len(parts) != space.n + 1:
            raise FormatError(f"line {n}: expected {space.n + 1} coordinates, got {len(parts)}")
        try:
            rows.append([ctx.from_str(p.strip(), level) for p in parts])
        except FieldError as e:
            raise FormatError(f"line {n}: {e}") from e
    if not rows:
        return np.zeros(0, dtype=np.int64)
    try:
        return space.ids(np.array(rows, dtype=np.int64))
    except GeometryError as e:
        raise FormatError(str(e)) from e


def format_points(ctx: FieldCtx, space: ProjectiveSpace, pids, level: str = "big", comment: str | None = None) -> str:
    out = [f"# {comment}"] if comment else []
    out += [point_str(ctx, space.coords[int(p)], level) for p in np.sort(np.asarray(pids))]
    return "\n".join(out) + "\n"


def parse_labeled(text: str, ctx: FieldCtx) -> LabeledSet:
    it = _lines(text)
    try:
        n, head = next(it)
    except StopIteration:
        raise FormatError("empty labeled-set file") from None
    try:
        q, k = map(int, head.split())
    except ValueError:
        raise FormatError(f"line {n}: header must be 'q k'") from None
    if q != ctx.q:
        raise FormatError(f"file is over q={q}, field is q={ctx.q}")
    pts, labs = [], []
    for n, s in it:
        parts = s.split()
        if len(parts) != 3:
            raise FormatError(f"line {n}: expected 'x y label'")
        try:
            pts.append((ctx.from_str(parts[0], "small"), ctx.from_str(parts[1], "small")))
            labs.append(int(parts[2]))
        except (FieldError, ValueError) as e:
            raise FormatError(f"line {n}: {e}") from e
    return LabeledSet(q, np.array(pts, dtype=np.int64).reshape(-1, 2), np.array(labs, dtype=np.int64), k)


def format_labeled(ctx: FieldCtx, S: LabeledSet) -> str:
    out = [f"{S.q} {S.k}"]
    for (x, y), v in zip(S.points, S.labels):
        out.append(f"{ctx.to_str(int(x), 'small')} {ctx.to_str(int(y), 'small')} {int(v)}")
    return "\n".join(out) + "\n"
