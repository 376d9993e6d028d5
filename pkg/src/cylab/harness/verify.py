"""Tagged verification battery.

Levels:

``exact``
    Linear-algebra identities, oracle agreements and transform checks. Only
    fixed seeds are used, so the report is identical on every run.
``mc-fast``
    Small Monte Carlo checks of the distributional laws, the vacancy formula
    and the disconnection search, plus the tampering probe that perturbs
    ``h_N`` by one. Must finish within ``budget_seconds``.
``mc-full``
    The same Monte Carlo checks at full sample sizes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import disconnect, kernels, limitlaw, potential, walk
from ..lattice import Geometry
from ..rng import stream
from .config import Config, load_config
from .experiments import (run_interlace_sim, run_limitlaw_eval, run_potential_check,
                          run_sprinkling, run_walk_sim)

LEVELS = ("exact", "mc-fast", "mc-full")


@dataclass
class Entry:
    name: str
    statistic: float
    threshold: str
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<40s} {self.statistic:.6g}  ({self.threshold})"


@dataclass
class Report:
    level: str
    entries: list[Entry] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, name: str, statistic: float, threshold: str, passed: bool) -> None:
        self.entries.append(Entry(name, float(statistic), threshold, bool(passed)))

    def text(self) -> str:
        lines = [e.line() for e in self.entries]
        lines.append(f"{'PASS' if self.passed else 'FAIL'}  level {self.level} "
                     f"({sum(e.passed for e in self.entries)}/{len(self.entries)}, "
                     f"{self.wall_clock:.1f} s)")
        return "\n".join(lines)


def _exact(report: Report, cfg: Config) -> None:
    rec = run_potential_check(cfg)
    for row in rec.rows:
        label = row["identity"] + (f" N={row['N']}" if "N" in row else f" {row['layout']}")
        report.add(label, row["residual"], "< 1e-10", row["residual"] < 1e-10)
    g0 = float(potential.lattice_green(np.zeros(3), 3))
    cap = potential.capacity_bigbox([(0, 0, 0)])
    report.add("cap({0}) big-box vs 1/g(0)", abs(cap.value - 1 / g0), "< 1e-5",
               abs(cap.value - 1 / g0) < 1e-5)
    eq = potential.equilibrium_lattice([(0, 0, 0), (1, 0, 0)])
    bb = potential.capacity_bigbox([(0, 0, 0), (1, 0, 0)])
    report.add("pair capacity solve vs big-box", abs(eq.value - bb.value), "< 1e-5",
               abs(eq.value - bb.value) < 1e-5)
    lim = abs(float(limitlaw.zeta_laplace(1e-9, 1.0)) - 1)
    report.add("zeta transform at theta->0", lim, "< 1e-10", lim < 1e-10)
    th = np.array([0.3, 1.0, 2.5])
    scal = float(np.max(np.abs(limitlaw.zeta_laplace(th, 2.0) - limitlaw.zeta_laplace(2 * th, 1.0))))
    report.add("zeta transform scaling", scal, "< 1e-12", scal < 1e-12)
    s = np.array([0.05, 0.2, 0.5, 1.0])
    gap = float(np.max(np.abs(limitlaw.zeta_tail(s) - limitlaw.zeta_tail(s, method="talbot"))))
    report.add("zeta tail stehfest vs talbot", gap, "< 1e-3", gap < 1e-3)
    # fixed-seed oracle agreements
    g = Geometry.cylinder(2, 3)
    agree = 0
    for i in range(20):
        rng = stream(0, "verify-sets", i)
        S = [(int(a), int(b), int(c)) for a, b, c in
             zip(rng.integers(0, 3, 30), rng.integers(0, 3, 30), rng.integers(0, 10, 30))]
        agree += disconnect.disconnects(S, g) == disconnect.disconnects_unionfind(S, g)
    report.add("disconnects BFS vs union-find (20 sets)", 20 - agree, "== 0", agree == 20)
    bad = 0
    for i in range(10):
        run = walk.WalkRun(g, (0, 0, 0), stream(0, "verify-tn", i))
        res = disconnect.disconnection_time(g, budget=10 ** 6, run=run)
        bad += res.time != disconnect.disconnection_time_scan(run, 10 ** 6)
    report.add("T_N binary search vs scan (10 paths)", bad, "== 0", bad == 0)
    report.add(f"kernel backend: {kernels.BACKEND}", 0, "info", True)


def _mc(report: Report, cfg: Config, fast: bool) -> None:
    cfg = Config({s: dict(kv) for s, kv in cfg.sections.items()})
    if fast:
        for key, val in [("walk.samples", 10000), ("interlace.samples", 2000),
                         ("sprinkling.samples", 2000), ("limitlaw.replicates", 1000)]:
            sec, k = key.split(".")
            cfg.set(sec, k, val)
    rec = run_walk_sim(cfg)
    alpha = cfg.get_float("walk", "alpha")
    for row in rec.rows:
        report.add(f"{row['law']} chi-square p", row["p_value"], f"> {alpha}", row["p_value"] > alpha)
    probe_cfg = Config({s: dict(kv) for s, kv in cfg.sections.items()})
    probe_cfg.set("walk", "samples", min(cfg.get_int("walk", "samples"), 10000))
    tampered = run_walk_sim(probe_cfg, h_offset=1).rows[1]["p_value"]
    report.add("tamper probe: h_N + 1 detected", tampered, f"< {alpha}", tampered < alpha)
    rec = run_interlace_sim(cfg)
    for row in rec.rows:
        report.add(f"vacancy {row['set']} u={row['u']} |z|", abs(row["z"]), "<= 3", row["within_3se"])
    rec = run_sprinkling(cfg)
    pf = rec.summary["passing_factor"]
    report.add("sprinkling passing factor", pf if pf is not None else math.inf, "exists",
               pf is not None)
    rec = run_limitlaw_eval(cfg)
    for row in rec.rows:
        if row["check"] == "mc-richardson":
            report.add(f"zeta bias-corrected transform theta={row['theta']} |z|", abs(row["z"]),
                       "<= 3", row["ok"])
        elif row["check"] == "mc-raw":
            report.add(f"zeta raw m={row['m']} transform theta={row['theta']} |z| (info)",
                       abs(row["z"]), "info", True)


def verify_suite(level: str = "exact", cfg: Config | None = None,
                 budget_seconds: float = 300.0) -> Report:
    """Run the battery at ``level`` and return the report (failures are entries)."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    cfg = load_config() if cfg is None else cfg
    report = Report(level)
    t0 = time.perf_counter()
    _exact(report, cfg)
    if level != "exact":
        _mc(report, cfg, fast=level == "mc-fast")
    report.wall_clock = time.perf_counter() - t0
    if level == "mc-fast":
        report.add("mc-fast wall clock (s)", report.wall_clock, f"<= {budget_seconds}",
                   report.wall_clock <= budget_seconds)
    return report
