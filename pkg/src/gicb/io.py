"""
Channel files, sweep ranges and deterministic CSV/JSON writers.

A channel file is JSON ``{"M": int, "H": [[...]], "P": [...], "noise": [...]}``
with raw gains, powers and optional noise variances; it is standardized on
load.  CSV numbers use 12 significant digits; JSON keys are sorted so equal
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel_model import InterferenceNetwork, standardize
from .errors import GICBError, InputError

__version__ = "0.1.0"
CSV_FORMAT = "%.12g"


def load_channel(path) -> InterferenceNetwork:
    """Read and standardize a channel file; raises ``InputError`` on any defect."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise InputError(f"channel file not found: {p}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read channel file {p}: {exc}") from None
    return channel_from_dict(doc)


def channel_from_dict(doc) -> InterferenceNetwork:
    if not isinstance(doc, dict) or "H" not in doc or "P" not in doc:
        raise InputError('channel description needs "H" and "P"')
    try:
        H = np.asarray(doc["H"], dtype=float)
        P = np.asarray(doc["P"], dtype=float)
        noise = doc.get("noise")
        noise = None if noise is None else np.asarray(noise, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"channel entries must be numeric: {exc}") from None
    if "M" in doc and (H.ndim != 2 or int(doc["M"]) != H.shape[0]):
        raise InputError(f'"M" = {doc["M"]} does not match H of shape {H.shape}')
    try:
        return standardize(H, P, noise)
    except GICBError as exc:
        raise InputError(str(exc)) from None


def two_user_channel(p1: float, p2: float, h12: float, h21: float) -> InterferenceNetwork:
    try:
        return InterferenceNetwork.two_user(p1, p2, h12, h21)
    except GICBError as exc:
        raise InputError(str(exc)) from None


def parse_range(text: str) -> np.ndarray:
    """``"a:b:step"`` to the inclusive grid ``a, a + step, ..., <= b``."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise InputError(f"range must look like start:stop:step, got {text!r}") from None
    if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(step)):
        raise InputError("range values must be finite")
    if step <= 0 or b < a:
        raise InputError(f"range {text!r} must be increasing with a positive step")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(n)


def format_number(x) -> str:
    return CSV_FORMAT % float(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return None
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def emit(text: str, path: Optional[str] = None):
    """Write ``text`` to ``path``, or to standard output when ``path`` is None."""
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None
