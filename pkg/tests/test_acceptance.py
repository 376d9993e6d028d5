"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line.

The lines are printed as they are produced and repeated in the pytest
terminal summary under "acceptance criteria". Runtime is dominated by the
visit-count sampling, the crossing scan that supplies the plug-in level and
the sprinkling comparison (about 10 minutes in total on one core).
"""

import math

import pytest

from cylab import disconnect, walk
from cylab.harness import experiments as ex
from cylab.harness.config import load_config
from cylab.harness.io import write_record
from cylab.lattice import Geometry
from cylab.rng import stream

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def cfg():
    return load_config()


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def potential_record(cfg):
    return ex.run_potential_check(cfg)


@pytest.fixture(scope="module")
def plug_in_level(cfg, outdir):
    """Upper end of the crossing-decay bracket, computed once for criteria 8 and 9."""
    rec, est = ex.run_percolation_scan(cfg)
    write_record(rec, outdir)
    return est


def test_criterion_01_green_sum_identity(potential_record, acceptance_log):
    rows = [r for r in potential_record.rows if r["identity"] == "green-sum"]
    worst = max(r["residual"] for r in rows)
    ok = sorted(r["N"] for r in rows) == [3, 5] and worst < 1e-10 and potential_record.wall_clock < 60
    acceptance_log(1, "killed Green-sum identity, d=2, N in {3,5}", ok,
                   f"max residual {worst:.2e} (< 1e-10), {potential_record.wall_clock:.1f} s (< 60 s)")
    assert ok


def test_criterion_02_entrance_law(potential_record, acceptance_log):
    row = next(r for r in potential_record.rows if r["identity"] == "entrance-law")
    ok = row["residual"] < 1e-10 and row["N"] == 3
    acceptance_log(2, "entrance law of a random 3-point set, N=3", ok,
                   f"residual {row['residual']:.2e} (< 1e-10), K={row['K']}")
    assert ok


def test_criterion_03_one_dimensional_identities(potential_record, acceptance_log):
    rows = [r for r in potential_record.rows if r["identity"] == "escape-1d"]
    worst = max(r["residual"] for r in rows)
    ok = len(rows) == 5 and worst < 1e-12
    acceptance_log(3, "one-dimensional escape and hitting identities, 5 layouts", ok,
                   f"max residual {worst:.2e} (< 1e-12)")
    assert ok


def test_criterion_04_vacancy_formula(cfg, outdir, acceptance_log):
    rec = ex.run_interlace_sim(cfg)
    write_record(rec, outdir)
    worst = max(abs(r["z"]) for r in rec.rows)
    ok = (bool(rec.passed) and len(rec.rows) == 6 and min(r["samples"] for r in rec.rows) >= 10_000
          and rec.wall_clock < 600)
    acceptance_log(4, "vacancy probability exp(-u cap K), 3 sets x 2 levels", ok,
                   f"max |z| {worst:.2f} (<= 3), {rec.rows[0]['samples']} samples, "
                   f"{rec.wall_clock:.0f} s (< 600 s)")
    assert ok


def test_criterion_05_distributional_laws(cfg, outdir, acceptance_log):
    rec = ex.run_walk_sim(cfg)
    write_record(rec, outdir)
    rho, visits = rec.rows
    ok = (rho["p_value"] > 0.01 and visits["p_value"] > 0.01
          and rho["samples"] >= 100_000 and visits["samples"] + visits["censored"] >= 100_000)
    acceptance_log(5, "skeleton increments and visit-count law, chi-square", ok,
                   f"p = {rho['p_value']:.3f} (n={rho['samples']}) and {visits['p_value']:.3f} "
                   f"(n={visits['samples']}, censored {visits['censored']}); need > 0.01")
    assert ok


def test_criterion_06_limit_law_consistency(cfg, outdir, acceptance_log):
    rec = ex.run_limitlaw_eval(cfg)
    write_record(rec, outdir)
    by = {r["check"]: r for r in rec.rows if r["check"] in ("theta->0", "scaling")}
    raw = [r for r in rec.rows if r["check"] == "mc-raw"]
    corrected = [r for r in rec.rows if r["check"] == "mc-richardson"]
    exact_ok = by["theta->0"]["ok"] and by["scaling"]["ok"]
    raw_ok = all(r["ok"] for r in raw)
    ok = exact_ok and raw_ok and rec.wall_clock < 600
    zs = ", ".join(f"theta={r['theta']:g}: z={r['z']:+.1f}" for r in raw)
    zc = ", ".join(f"{r['z']:+.2f}" for r in corrected)
    acceptance_log(6, "limit-law transform, scaling and walk estimator (m=200, 1e4 reps)", ok,
                   f"theta->0 and scaling {'ok' if exact_ok else 'bad'}; raw estimator {zs} "
                   f"(need |z| <= 3); bias-corrected m/4m z = {zc}; {rec.wall_clock:.0f} s")
    assert ok, ("the raw walk estimator carries an O(m^-1/2) discretisation bias that exceeds "
                "3 standard errors at m=200 with 1e4 replicates; see the decision ledger")


def test_criterion_07_disconnection_search(acceptance_log):
    g = Geometry.cylinder(2, 3)
    budget = 10 ** 7
    mismatches = bad_prefix = 0
    for i in range(100):
        run = walk.WalkRun(g, (0, 0, 0), stream(7, "acceptance-tn", i))
        res = disconnect.disconnection_time(g, budget=budget, run=run)
        scan = disconnect.disconnection_time_scan(run, budget)
        mismatches += res.time is None or res.time != scan
        if res.time is not None:
            trace = [tuple(int(c) for c in p) for p in run.coords[: res.time + 1]]
            bad_prefix += disconnect.disconnects(trace[:-1], g) or not disconnect.disconnects(trace, g)
    ok = mismatches == 0 and bad_prefix == 0
    acceptance_log(7, "binary-search T_N equals scan and is exact, 100 replicates N=3", ok,
                   f"{mismatches} mismatches, {bad_prefix} prefix violations")
    assert ok


def test_criterion_08_level_time_trend(cfg, outdir, plug_in_level, acceptance_log):
    u = plug_in_level.upper
    if not math.isfinite(u):
        acceptance_log(8, "event probability trend over N", False,
                       "no finite plug-in level from the crossing scan")
        pytest.fail("crossing scan gave no finite upper end")
    rec = ex.run_theorem41(cfg, u=u, u_source=f"crossing-scan upper end {plug_in_level.interval}")
    write_record(rec, outdir)
    Ns = cfg.get_list("theorem41", "N_values", int)
    parts = [f"N={N}: {rec.summary[f'N={N}']['p']:.3f} "
             f"[{rec.summary[f'N={N}']['ci'][0]:.3f}, {rec.summary[f'N={N}']['ci'][1]:.3f}]"
             for N in Ns]
    reps = cfg.get_int("theorem41", "replicates")
    ok = bool(rec.passed) and Ns == [6, 10, 14] and reps >= 200 and rec.wall_clock < 7200
    acceptance_log(8, "P[T_N > inf_z gamma] nonincreasing over N within 95% CIs", ok,
                   f"u={u:.3f}, delta={rec.summary['delta']:.3f}; " + "; ".join(parts)
                   + f"; censored {rec.censored}; {rec.wall_clock:.0f} s")
    assert ok


def test_criterion_09_tail_comparison(cfg, outdir, plug_in_level, acceptance_log):
    u = plug_in_level.upper
    if not math.isfinite(u):
        acceptance_log(9, "tail of T_N/N^4 against the limit law", False,
                       "no finite plug-in level from the crossing scan")
        pytest.fail("crossing scan gave no finite upper end")
    rec = ex.run_corollary46(cfg, u=u, u_source="crossing-scan upper end")
    csv_path, json_path = write_record(rec, outdir)
    table = "; ".join(f"s={r['s']:.3f}: {r['empirical_tail']:.3f} vs {r['analytic_tail']:.3f} "
                      f"+/- {r['mc_error']:.3f}" for r in rec.rows)
    sweep = ", ".join(f"u={e['u']:.2f}:{'dominated' if e['dominated'] else 'not dominated'}"
                      for e in rec.summary["sweep"])
    dominated = bool(rec.passed)
    acceptance_log(9, "tail of T_N/N^4 at N=14 against the limit-law bound (soft)", dominated,
                   f"u={u:.3f}; {table}; sweep {sweep}",
                   tag=None if dominated else "SOFT-FAIL")
    # a soft criterion: a failure is acceptable only with the report and sweep attached
    assert json_path.exists() and len(rec.summary["sweep"]) >= 3
    assert cfg.get_int("corollary46", "N") == 14 and len(rec.rows) == 3


def test_criterion_10_sprinkling(cfg, outdir, acceptance_log):
    rec = ex.run_sprinkling(cfg)
    write_record(rec, outdir)
    pf = rec.summary["passing_factor"]
    failing = sorted({r["factor"] for r in rec.rows if not r["holds"]})
    ok = pf is not None
    acceptance_log(10, "truncated occupancy dominated after sprinkling", ok,
                   f"passing factor {pf} over grid {cfg.get('sprinkling', 'factors')}; "
                   f"factors with a violation: {failing or 'none'}; {rec.rows[0]['slack']:.2e} slack")
    assert ok
