"""Input checks shared by the functional API and the estimators."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .exceptions import SingularityError

ZONE_POWERS = {"far": 1, "mid": 2, "near": 3}


def check_points(x, t):
    """Broadcast positions (..., 3) and times to flat arrays.

    Returns ``(x, t, single)`` where ``single`` tells whether a single point
    was passed, so callers can squeeze their output.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != 3 or x.ndim != 2:
        raise ValueError(f"positions must have shape (n, 3), got {x.shape}")
    t = np.asarray(t, dtype=float)
    single = single and t.ndim == 0
    t = np.broadcast_to(t, (x.shape[0],)) if t.ndim == 0 else t.reshape(-1)
    if t.shape[0] != x.shape[0]:
        raise ValueError("positions and times have different lengths")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise ValueError("non-finite positions or times")
    if np.any(np.linalg.norm(x, axis=1) == 0):
        raise SingularityError("field point at the origin (x = 0)")
    return x, np.ascontiguousarray(t), single


def check_spacetime(X):
    """Split an (n, 4) array of (x, y, z, t) rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError(f"expected an (n, 4) array of (x, y, z, t), got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty input")
    return check_points(X[:, :3], X[:, 3])[:2]


def parse_zones(zones) -> frozenset:
    if isinstance(zones, str):
        zones = [z.strip() for z in zones.split(",") if z.strip()]
    zones = frozenset(zones)
    bad = zones - set(ZONE_POWERS)
    if bad or not zones:
        raise ValueError(f"zones must be a non-empty subset of near,mid,far; got {sorted(zones)}")
    return zones


def worker_count() -> int:
    cap = os.environ.get("LUMEN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"LUMEN_THREADS must be an integer, got {cap!r}") from None
    return n


def parallel_map(func, items):
    """Ordered map over ``items``; thread count capped by LUMEN_THREADS."""
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
