"""Result records and their persistence as CSV plus a JSON sidecar."""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy

OUTPUT_ENV = "CYLAB_OUTPUT"


def module_versions() -> dict[str, str]:
    from .. import KERNEL_BACKEND, __version__

    return {"cylab": __version__, "kernels": KERNEL_BACKEND, "numpy": np.__version__,
            "scipy": scipy.__version__, "python": platform.python_version()}


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


@dataclass
class ResultRecord:
    """Rows and summary of one experiment run.

    ``passed`` is None for experiments without a pass/fail check.
    """

    experiment: str
    config_hash: str
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    censored: int = 0
    wall_clock: float = 0.0
    versions: dict = field(default_factory=module_versions)
    passed: bool | None = None

    def sidecar(self) -> dict:
        return _plain({"experiment": self.experiment, "config_hash": self.config_hash,
                       "summary": self.summary, "censored": self.censored,
                       "wall_clock": self.wall_clock, "versions": self.versions,
                       "passed": self.passed, "rows": len(self.rows)})


class Timer:
    """Context manager storing elapsed wall-clock seconds in ``elapsed``."""

    def __enter__(self):
        self._t0 = time.perf_counter()
        self.elapsed = 0.0
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self._t0
        return False


def output_root(explicit: str | os.PathLike | None = None) -> Path:
    """``explicit`` if given, else ``$CYLAB_OUTPUT``, else ``./cylab-output``."""
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ENV, "cylab-output"))


def write_record(record: ResultRecord, root: str | os.PathLike | None = None) -> tuple[Path, Path]:
    """Write ``<experiment>-<hash>.csv`` and the matching ``.json`` sidecar.

    Every CSV row carries the config hash.
    """
    out = output_root(root)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{record.experiment}-{record.config_hash}"
    csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
    keys: list[str] = ["config_hash"]
    for row in record.rows:
        keys.extend(k for k in row if k not in keys)
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in record.rows:
            w.writerow({"config_hash": record.config_hash, **_plain(row)})
    json_path.write_text(json.dumps(record.sidecar(), indent=2, sort_keys=True))
    return csv_path, json_path
