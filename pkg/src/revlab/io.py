"""Atomic CSV/JSON writers and the profile CSV reader."""
from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .spectral import GridProfile

CSV_HEADER = "x,re,im"


def _atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def profile_csv_text(profile: GridProfile) -> str:
    table = np.column_stack([profile.x, profile.samples.real, profile.samples.imag])
    buf = io.StringIO()
    np.savetxt(buf, table, fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")
    return buf.getvalue()


def write_profile_csv(path, profile: GridProfile) -> Path:
    return _atomic_write(path, profile_csv_text(profile))


def write_json(path, obj) -> Path:
    return _atomic_write(path, json.dumps(obj, indent=2) + "\n")


def read_profile_csv(path) -> GridProfile:
    """Read an ``x,re,im`` file; x must be the uniform grid 2 pi k / N."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}, got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected 3 columns")
    N = data.shape[0]
    grid = 2 * np.pi * np.arange(N) / N
    if not np.allclose(data[:, 0], grid, atol=1e-9):
        raise ValueError(f"{path}: x column is not the uniform grid on [0, 2pi)")
    return GridProfile(data[:, 1] + 1j * data[:, 2], {"initial": str(path)})
