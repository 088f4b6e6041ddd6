"""Plain-text field tables.

Format (one file plus a sidecar):

``<name>.csv``
    header ``t,x1,..,xn,y1,..,ym,u``; one row per (time, node) with the
    time index slowest and the spatial nodes in C order; every number is
    written with ``repr`` so it round-trips exactly.
``<name>.csv.meta``
    ``key=value`` lines: ``format``, ``config_hash``, ``n``, ``m``,
    ``shape`` (nt and the node count per axis, ``x``-separated).
"""
from __future__ import annotations

import io
import os

import numpy as np

from .reports import atomic_write

FORMAT = "kimuralab-field-1"


def field_table(times, axes, values, n: int, m: int) -> str:
    names = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{l + 1}" for l in range(m)] + ["u"]
    mesh = np.meshgrid(times, *axes, indexing="ij")
    cols = [g.ravel() for g in mesh] + [np.asarray(values, dtype=float).ravel()]
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    for row in zip(*cols):
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def write_field_csv(field, path, config_hash: str | None = None) -> None:
    """Write a SpaceTimeField or SampledField to ``path`` and its sidecar."""
    grid = getattr(field, "grid", None)
    axes = getattr(field, "axes", None) or grid.axes
    n = getattr(field, "n", None)
    n = grid.n if n is None else n
    m = getattr(field, "m", None)
    m = grid.m if m is None else m
    h = config_hash if config_hash is not None else getattr(field, "config_hash", "")
    atomic_write(path, field_table(field.times, axes, field.values, n, m))
    shape = "x".join(str(s) for s in np.shape(field.values))
    meta = f"format={FORMAT}\nconfig_hash={h}\nn={n}\nm={m}\nshape={shape}\n"
    atomic_write(os.fspath(path) + ".meta", meta)


def read_field_csv(path):
    """Read a field table back as a :class:`kimuralab.holder.SampledField`."""
    from .holder import SampledField

    meta = {}
    mpath = os.fspath(path) + ".meta"
    if os.path.exists(mpath):
        with open(mpath) as fh:
            for line in fh:
                if "=" in line:
                    k, v = line.rstrip("\n").split("=", 1)
                    meta[k] = v
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = sum(1 for h in header if h.startswith("x"))
    m = sum(1 for h in header if h.startswith("y"))
    if header[0] != "t" or header[-1] != "u" or len(header) != n + m + 2:
        raise ValueError(f"unexpected header {header}")
    times = np.unique(data[:, 0])
    axes = [np.unique(data[:, 1 + k]) for k in range(n + m)]
    shape = (len(times), *(len(a) for a in axes))
    if int(np.prod(shape)) != data.shape[0]:
        raise ValueError("table is not a full tensor grid")
    f = SampledField(times, axes, data[:, -1].reshape(shape), n, m)
    f.meta = meta
    return f
