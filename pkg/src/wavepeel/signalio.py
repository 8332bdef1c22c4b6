"""Signal files: single-column CSV of reals or a JSON array."""

import json
from pathlib import Path

import numpy as np


def read_signal(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError(f"{path}: expected a JSON array")
        return np.asarray(data, dtype=float)
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            values.append(float(body))
        except ValueError:
            if not values and lineno == 1:
                continue  # header row
            raise ValueError(f"{path}:{lineno}: not a number: {body!r}") from None
    return np.asarray(values, dtype=float)


def format_signal(values, fmt="csv"):
    vals = [float(v) for v in np.asarray(values, dtype=float).ravel()]
    if fmt == "json":
        return json.dumps(vals) + "\n"
    return "".join(f"{v!r}\n" for v in vals)


def write_signal(path, values):
    path = Path(path)
    fmt = "json" if path.suffix.lower() == ".json" else "csv"
    path.write_text(format_signal(values, fmt))
