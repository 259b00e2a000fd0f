"""Deterministic JSON output.

Reports are byte-comparable across runs: dictionaries are serialized in
insertion order (callers build them in a fixed order), floats use Python's
shortest round-trip repr, and files always end with a newline.
"""

import json

import numpy as np


def jsonable(value):
    """Recursively convert numpy scalars/arrays to plain Python values."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    return value


def dumps(doc) -> str:
    return json.dumps(jsonable(doc), indent=2, ensure_ascii=False) + "\n"


def write(doc, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
