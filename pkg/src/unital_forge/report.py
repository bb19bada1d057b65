"""Canonical JSON, hashing and point rendering for certificates."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .fields import FieldCtx

SCHEMA = "unital-forge/certificate/1"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def canonical_json(obj, indent: int | None = 2) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=indent, separators=(",", ": ") if indent else (",", ":"))


def sha256_json(obj) -> str:
    return hashlib.sha256(canonical_json(obj, indent=None).encode()).hexdigest()


def point_str(ctx: FieldCtx, coords, level: str = "big") -> str:
    return ":".join(ctx.to_str(int(c), level) for c in coords)


def points_digest(ctx: FieldCtx, space, pids, level: str = "big") -> str:
    """Hash of a point set, independent of the internal numbering."""
    lines = sorted(point_str(ctx, space.coords[int(p)], level) for p in np.asarray(pids).ravel())
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def stage(name: str, **data) -> dict:
    body = _plain(data)
    return {"name": name, **body, "sha256": sha256_json({"name": name, **body})}


def render_text(obj, indent: int = 0) -> str:
    """Compact human-readable rendering of a certificate-like dict."""
    pad = "  " * indent
    out = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not (isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v) and len(v) <= 12):
                out.append(f"{pad}{k}:")
                out.append(render_text(v, indent + 1))
            else:
                out.append(f"{pad}{k}: {json.dumps(_plain(v))}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                out.append(f"{pad}-")
                out.append(render_text(v, indent + 1))
            else:
                out.append(f"{pad}- {json.dumps(_plain(v))}")
    else:
        out.append(f"{pad}{json.dumps(_plain(obj))}")
    return "\n".join(out)
