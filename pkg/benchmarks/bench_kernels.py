"""Compare the compiled and pure-Python kernel backends on identical inputs.

Run with ``python benchmarks/bench_kernels.py [--repeat R]``. Each kernel is
called on the same random input in both backends; results are asserted equal
and the median wall-clock time per call is reported with the speed-up.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from cylab import kernels


def _cases(rng: np.random.Generator) -> dict:
    D = 3
    moves3 = rng.integers(0, 2 * D, size=200_000, dtype=np.uint8)
    moves1 = rng.integers(0, 2, size=1_000_000, dtype=np.uint8)
    movescyl = rng.integers(0, 6, size=500_000, dtype=np.uint8)
    fv = rng.integers(0, 10_000, size=(40, 100), dtype=np.int64)

    def lattice_walk(mod):
        pos = np.zeros(D, dtype=np.int64)
        rec_t = np.empty(len(moves3) + 1, dtype=np.int64)
        rec_pos = np.empty((len(moves3) + 1, D), dtype=np.int64)
        out = mod.lattice_walk(pos, moves3, 10**6, 6, np.zeros(1, dtype=np.uint8), False, 0,
                               rec_t, rec_pos, 0)
        return out, pos.tolist(), rec_t[: out[2]].sum()

    def local_time_hit(mod):
        counts = np.zeros(4001, dtype=np.int64)
        return mod.local_time_hit(0, moves1, counts, 2000, 10**9), counts.sum()

    def slab_exit(mod):
        state = np.array([0, 0], dtype=np.int64)
        return mod.cylinder_slab_exit(state, movescyl, 10, 2, -10**6, 10**6), state.tolist()

    def slab_crossing(mod):
        return [mod.slab_crossing(fv, t, 10, 2) for t in range(0, 10_000, 500)]

    return {"lattice_walk": lattice_walk, "local_time_hit": local_time_hit,
            "cylinder_slab_exit": slab_exit, "slab_crossing": slab_crossing}


def _time(fn, mod, repeat: int) -> tuple[float, object]:
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(mod)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend can be timed")
    cases = _cases(np.random.default_rng(12345))
    print(f"{'kernel':<20s} {'python (s)':>12s} {'compiled (s)':>13s} {'speed-up':>9s}")
    for name, fn in cases.items():
        t_py, out_py = _time(fn, kernels.get_backend("python"), args.repeat)
        if "compiled" in backends:
            t_c, out_c = _time(fn, kernels.get_backend("compiled"), args.repeat)
            assert repr(out_c) == repr(out_py), f"{name}: backends disagree"
            print(f"{name:<20s} {t_py:12.4f} {t_c:13.4f} {t_py / t_c:8.1f}x")
        else:
            print(f"{name:<20s} {t_py:12.4f} {'-':>13s} {'-':>9s}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
