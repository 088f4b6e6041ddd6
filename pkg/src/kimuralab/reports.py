"""Experiment reports and their plain-text serialisation."""
from __future__ import annotations

import io
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any


def fmt(v: Any) -> str:
    """Round-trip decimal formatting for table output."""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass
class VerifyReport:
    """Outcome of one experiment.

    ``measured`` holds named reals; ``passed`` is decided from them and the
    tolerance by the experiment, and ``applicable`` is False when the
    quantity being tested is undefined (e.g. a 0/0 ratio).
    """

    name: str
    inputs: str
    measured: dict = field(default_factory=dict)
    passed: bool = True
    tolerance: dict = field(default_factory=dict)
    runtime: float = 0.0
    applicable: bool = True
    notes: str = ""
    table: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "N/A"
        return "PASS" if self.passed else "FAIL"

    def summary_line(self) -> str:
        key = ", ".join(f"{k}={v:.6g}" for k, v in list(self.measured.items())[:4]
                        if isinstance(v, (int, float)))
        return f"{self.status} {self.name} [{self.inputs}] {key}".rstrip()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("quantity,value\n")
        buf.write(f"experiment,{self.name}\n")
        buf.write(f"config_hash,{self.inputs}\n")
        buf.write(f"status,{self.status}\n")
        for k, v in self.measured.items():
            buf.write(f"{k},{fmt(v)}\n")
        for k, v in self.tolerance.items():
            buf.write(f"tol:{k},{fmt(v)}\n")
        return buf.getvalue()

    def table_csv(self) -> str:
        """Refinement / sweep rows, if the experiment produced any."""
        if not self.table:
            return ""
        cols = list(self.table[0].keys())
        lines = [",".join(cols)]
        for row in self.table:
            lines.append(",".join(fmt(row.get(c, "")) for c in cols))
        return "\n".join(lines) + "\n"
