"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--paths 200]

Both backends consume identical inputs and random streams, so outputs are
checked for equality alongside the timings.
"""
import argparse
import time

import numpy as np

from dengue_seir.kernels import backends, pack
from dengue_seir.model import ModelParams, initial_state
from dengue_seir.stochastic import path_rng


def best_of(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def cases(paths):
    p = ModelParams()
    q = pack(p)
    y0 = initial_state(p, 50.0).as_array()
    qc = pack(p.replace(N=1e6))

    def ctmc(mod):
        return [mod.ctmc_path(qc, 999_999, 0, 1, 0, 0.0, 100, 1825.0, path_rng(0, i))[:3]
                for i in range(paths)]

    return {
        "ODE RK4, 365 days, h=0.1": lambda mod: mod.seir_rk4(q, y0, 0.0, 365, 10)[0],
        "monodromy, one period, h=0.05": lambda mod: mod.log_monodromy_radius(q, 1.05, 0.05),
        f"CTMC, {paths} paths to OL=100": ctmc,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--paths", type=int, default=200)
    args = ap.parse_args()
    mods = backends()
    if "compiled" not in mods:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':34s}" + "".join(f"{name:>12s}" for name in mods) + f"{'speedup':>10s}  match")
    for label, fn in cases(args.paths).items():
        res = {name: best_of(lambda: fn(mod), args.repeat) for name, mod in mods.items()}
        row = f"{label:34s}" + "".join(f"{res[n][0] * 1e3:10.2f}ms" for n in mods)
        if "compiled" in res:
            speed = res["python"][0] / res["compiled"][0]
            a, b = res["python"][1], res["compiled"][1]
            same = np.array_equal(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
            row += f"{speed:9.1f}x  {'yes' if same else 'NO'}"
        print(row)


if __name__ == "__main__":
    main()
