"""
Output helpers: JSON / CSV writers and yen rounding.

Floats are written with Python's shortest round-trip repr, so a value read
back from a report is bit-identical to the one computed. Yen figures are
additionally rounded half-up to 0.01 at the report boundary only.
"""

import json
import math
import sys
from dataclasses import asdict, is_dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
import pandas as pd

from lab.procurement import config


def round_yen(value, quantum=config.YEN_QUANTUM):
    """Half-up rounding to the yen quantum (0.01 by default)."""
    if value is None or not math.isfinite(value):
        return value
    return float(Decimal(repr(float(value))).quantize(Decimal(quantum), rounding=ROUND_HALF_UP))


def to_jsonable(obj):
    """Recursively convert numpy / pandas / dataclass values to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient="records"))
    if isinstance(obj, pd.Series):
        return to_jsonable(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    return obj


def dumps(document):
    return json.dumps(to_jsonable(document), indent=2)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return None
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n")
    return path


def write_json(document, out=None):
    return _emit(dumps(document), out)


def write_csv(frame, out=None):
    return _emit(frame.to_csv(index=False), out)
