"""
CSV / JSON writers for run outputs.
"""

import json
import math
import os

import numpy as np
import pandas as pd

from config.settings import SCHEMA_VERSION


def _ensure_parent(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(df: pd.DataFrame, path: str, schema: str, verbose: bool = True) -> str:
    """
    Write a DataFrame as CSV with a versioned schema header line.

    Args:
        df: table to write
        path: target file
        schema: contract name, e.g. "region"

    Returns:
        str: path written
    """
    _ensure_parent(path)
    with open(path, 'w', newline='') as fh:
        fh.write(f"# schema: {schema} v{SCHEMA_VERSION}\n")
        df.to_csv(fh, index=False)

    if verbose:
        print(f"Wrote {len(df)} rows ({', '.join(df.columns)})")
        print(f"Data saved to: {path}")
    return path


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def to_jsonable(obj):
    """Convert numpy scalars/arrays, DataFrames and non-finite floats for json.dumps"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient='list'))
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps_report(payload: dict) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True)


def write_json(payload: dict, path: str, verbose: bool = True) -> str:
    _ensure_parent(path)
    with open(path, 'w') as fh:
        fh.write(dumps_report(payload))
        fh.write("\n")
    if verbose:
        print(f"Report saved to: {path}")
    return path
