"""Shared plumbing: worker caps, seeded RNG, report serialization."""

import json
import os

import numpy as np

__version__ = "0.1.0"


def worker_cap(default=1):
    """Worker count cap from the SSL_THREADS environment variable.

    Sweeps that parallelize over seeds or grid chunks must not exceed this.
    """
    raw = os.environ.get("SSL_THREADS")
    if raw is None:
        return default
    try:
        cap = int(raw)
    except ValueError:
        return default
    return max(1, cap)


def make_rng(seed):
    """Single seeded generator; every randomized sweep draws from one of these."""
    return np.random.default_rng(seed)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def to_json(obj, **meta):
    """Serialize a report to JSON with full round-trip float precision.

    Python's repr of floats is the shortest string that round-trips, so the
    emitted text is bit-stable across runs with identical inputs.
    """
    payload = _jsonable(obj)
    if meta:
        payload = {"meta": _jsonable(meta), "report": payload}
    return json.dumps(payload, indent=2, sort_keys=True)
