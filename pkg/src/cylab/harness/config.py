"""Experiment configuration: INI-style ``key = value`` files with sections.

Every run records a short hash of its resolved configuration so that output
files can be matched to the exact settings that produced them.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

DEFAULTS: dict[str, dict[str, str]] = {
    "run": {"seed": "20240601", "output": ""},
    "geometry": {"d": "2", "N": "3"},
    "potential": {"N_values": "3,5", "tol": "1e-10"},
    "walk": {"samples": "100000", "k": "1", "schedule_budget": "100000", "alpha": "0.01"},
    "disconnect": {"replicates": "100", "N_values": "6,10,14", "budget_multiplier": "64"},
    "interlace": {"sets": "singleton,edge-pair,box-2x2x1", "u_values": "0.5,1.0",
                  "samples": "10000", "guard": "20"},
    "sprinkling": {"N": "32", "A_radius": "2", "C_radius": "8", "u_prime": "1.0",
                   "factors": "1,1.05,1.1,1.25,1.5,2", "samples": "10000", "guard": "20"},
    "percolation": {"u_grid": "1,2,3,4,5,6,7,8", "scales": "2,4,8", "samples": "200",
                    "z": "2.0", "bisection_steps": "6"},
    "limitlaw": {"u": "1.0", "m": "200", "replicates": "10000", "theta": "0.5,1,2",
                 "s": "0.05,0.1,0.2,0.5,1"},
    "theorem41": {"N_values": "6,10,14", "replicates": "200", "u": "", "delta_fraction": "0.5",
                  "budget_multiplier": "64"},
    "corollary46": {"N": "14", "replicates": "200", "u": "", "sweep": "0.5,0.75,1.0,1.25,1.5",
                    "budget_multiplier": "64"},
}


@dataclass
class Config:
    """Resolved configuration; values are kept as strings and parsed on access."""

    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    def get(self, section: str, key: str, default: str | None = None) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            if default is None:
                raise KeyError(f"missing config value {section}.{key}") from None
            return default

    def get_int(self, section: str, key: str) -> int:
        return int(float(self.get(section, key)))

    def get_float(self, section: str, key: str) -> float:
        return float(self.get(section, key))

    def get_list(self, section: str, key: str, cast=float) -> list:
        raw = self.get(section, key, "")
        return [cast(v) for v in raw.replace(";", ",").split(",") if v.strip()]

    def set(self, section: str, key: str, value: Any) -> None:
        self.sections.setdefault(section, {})[key] = str(value)

    def to_dict(self) -> dict[str, dict[str, str]]:
        return {s: dict(sorted(kv.items())) for s, kv in sorted(self.sections.items())}

    def hash(self) -> str:
        return config_hash(self.to_dict())

    def dumps(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read_dict(self.to_dict())
        from io import StringIO

        buf = StringIO()
        parser.write(buf)
        return buf.getvalue()


def config_hash(cfg: Mapping[str, Mapping[str, str]]) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form."""
    canon = json.dumps({s: dict(sorted(v.items())) for s, v in sorted(cfg.items())},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> Config:
    """Defaults, then the file at ``path``, then ``section.key=value`` overrides."""
    cfg = Config({s: dict(kv) for s, kv in DEFAULTS.items()})
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        if not parser.read(path):
            raise FileNotFoundError(path)
        for sec in parser.sections():
            for k, v in parser.items(sec):
                cfg.set(sec, k, v)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"override must look like section.key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        sec, key = lhs.split(".", 1)
        cfg.set(sec.strip(), key.strip(), value.strip())
    return cfg
