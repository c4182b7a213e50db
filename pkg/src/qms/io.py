"""Reproducibility helpers: config digests, CSV tables and run manifests."""
import csv
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def config_digest(config):
    """SHA-256 of the canonical JSON form of ``config``."""
    blob = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_csv(path, header, rows, units=None):
    """Write a CSV whose first line is a ``# units:`` comment when given."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        if units:
            fh.write("# units: " + ", ".join(f"{k}={v}" for k, v in units.items()) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path):
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]


def versions():
    from . import __version__, kernels
    return {
        "qms": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "kernel_backend": kernels.BACKEND,
    }


def write_manifest(path, config, seed=None, wall_time=None, outputs=(), extra=None):
    record = {
        "config": _canonical(config),
        "config_digest": config_digest(config),
        "seed": seed,
        "wall_time_s": wall_time,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "versions": versions(),
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        record.update(_canonical(extra))
    Path(path).write_text(json.dumps(record, indent=2) + "\n")
    return record
