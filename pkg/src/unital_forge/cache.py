"""On-disk cache of ABB models.

One ``.npz`` per field, named by a hash of (p, h, polys); the archive holds
the tables plus a JSON header with the format version and a content hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import warnings
import zipfile
from pathlib import Path

import numpy as np

from .abb import AbbModel, build_abb
from .fields import FieldCtx
from .projective import ProjectiveSpace

FORMAT_VERSION = 1
log = logging.getLogger(__name__)

_ARRAYS = ("big_add", "big_mul", "small_add", "small_mul", "line_pts", "ell_inf", "spread", "spread_index", "plane_to_space", "space_to_plane")


class CacheError(RuntimeError):
    pass


def default_dir() -> Path:
    env = os.environ.get("UNITAL_FORGE_CACHE")
    return Path(env) if env else Path.home() / ".cache" / "unital-forge"


def cache_key(ctx: FieldCtx) -> str:
    return hashlib.sha256(json.dumps(ctx.key(), sort_keys=True).encode()).hexdigest()[:16]


def _tables(abb: AbbModel) -> dict[str, np.ndarray]:
    c = abb.ctx
    return {
        "big_add": c.big.add_t,
        "big_mul": c.big.mul_t,
        "small_add": c.small.add_t,
        "small_mul": c.small.mul_t,
        "line_pts": abb.plane.line_pts,
        "ell_inf": abb.ell_inf,
        "spread": abb.spread,
        "spread_index": abb.spread_index,
        "plane_to_space": abb.plane_to_space,
        "space_to_plane": abb.space_to_plane,
    }


def content_hash(tables: dict[str, np.ndarray]) -> str:
    h = hashlib.sha256()
    for name in _ARRAYS:
        a = np.ascontiguousarray(tables[name], dtype=np.int64)
        h.update(name.encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def path_for(ctx: FieldCtx, directory=None) -> Path:
    return Path(directory or default_dir()) / f"abb-{cache_key(ctx)}.npz"


def store_abb(abb: AbbModel, directory=None) -> Path:
    path = path_for(abb.ctx, directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    tables = {k: np.asarray(v, dtype=np.int64) for k, v in _tables(abb).items()}
    header = {"version": FORMAT_VERSION, "key": abb.ctx.key(), "sha256": content_hash(tables)}
    tmp = path.with_suffix(".tmp.npz")
    # fixed member order; the content hash (not the zip bytes) is what is stable
    np.savez(tmp, header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8), **tables)
    os.replace(tmp, path)
    return path


def load_abb(ctx: FieldCtx, directory=None) -> AbbModel | None:
    """The cached model, or None if absent or stale; CacheError if corrupt."""
    path = path_for(ctx, directory)
    if not path.exists():
        return None
    try:
        with np.load(path) as z:
            header = json.loads(bytes(z["header"]).decode())
            tables = {k: z[k] for k in _ARRAYS if k in z.files}
    except (OSError, ValueError, KeyError, zipfile.BadZipFile, json.JSONDecodeError) as e:
        raise CacheError(f"corrupt cache file {path}: {e}") from e
    if header.get("version") != FORMAT_VERSION:
        warnings.warn(f"stale cache {path.name} (version {header.get('version')}), rebuilding", stacklevel=2)
        return None
    if header.get("key") != ctx.key() or len(tables) != len(_ARRAYS) or content_hash(tables) != header.get("sha256"):
        raise CacheError(f"cache file {path} fails its content hash")
    if not (np.array_equal(tables["big_add"], ctx.big.add_t) and np.array_equal(tables["big_mul"], ctx.big.mul_t)):
        raise CacheError(f"cache file {path} disagrees with the field tables")
    plane = ProjectiveSpace(ctx.big, 2)
    plane._line_pts = tables["line_pts"]
    space = ProjectiveSpace(ctx.small, 4)
    arrs = {k: tables[k] for k in ("ell_inf", "spread", "spread_index", "plane_to_space", "space_to_plane")}
    for a in list(arrs.values()) + [plane._line_pts]:
        a.setflags(write=False)
    return AbbModel(ctx, plane, space, p_inf=int(plane.ids([0, 0, 1])), **arrs)


def get_abb(ctx: FieldCtx, directory=None, use_cache: bool = True) -> AbbModel:
    if not use_cache:
        return build_abb(ctx)
    abb = load_abb(ctx, directory)
    if abb is not None:
        log.info("cache hit for q=%d: skipped spread rebuild", ctx.q)
        return abb
    log.info("cache miss for q=%d: building ABB model", ctx.q)
    abb = build_abb(ctx)
    try:
        store_abb(abb, directory)
    except OSError as e:  # pragma: no cover - read-only cache dirs
        log.warning("could not write cache: %s", e)
    return abb


def abb_hash(abb: AbbModel) -> str:
    return content_hash({k: np.asarray(v, dtype=np.int64) for k, v in _tables(abb).items()})
