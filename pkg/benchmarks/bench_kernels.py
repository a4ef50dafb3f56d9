"""Numba vs numpy timings for the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

The backend is switched through CANTORGAUGE_BACKEND between runs; numba
kernels are compiled once before timing.  Both backends must return the
same numbers, which is checked on every run.
"""
import argparse
import json
import os
import time

import numpy as np

from cantorgauge import gauge as G
from cantorgauge._accel import BACKEND_ENV
from cantorgauge.catalog import make_Cp, make_Cpn
from cantorgauge.core import level_geometry
from cantorgauge.kernels import dp_cover


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases(args):
    cp = make_Cp(2).spec
    cpn = make_Cpn(2, 3).spec
    for level in args.geometry_levels:
        yield f"geometry cp level {level}", lambda lv=level: level_geometry(cp, lv).length_hi
    yield "geometry cpn(n=3) level 8", lambda: level_geometry(cpn, 8).length_hi
    for d in args.dp_levels:
        g = level_geometry(cp, d)
        arrays = (g.length_lo, g.length_hi, g.between_lo, g.between_hi, g.left_lo, g.left_hi)
        for h in (G.power(0.5), G.weighted_power(0.5)):
            yield f"cover DP {h.tag} N={2 ** d}", lambda a=arrays, hh=h: dp_cover(*a, hh)[1]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--geometry-levels", type=int, nargs="+", default=[12, 16])
    p.add_argument("--dp-levels", type=int, nargs="+", default=[8, 10])
    p.add_argument("--json", default=None)
    args = p.parse_args(argv)

    rows = []
    print(f"{'case':<32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for name, fn in cases(args):
        os.environ[BACKEND_ENV] = "numba"
        fn()  # compile
        t_nb, out_nb = best_of(fn, args.repeat)
        os.environ[BACKEND_ENV] = "numpy"
        t_np, out_np = best_of(fn, args.repeat)
        same = bool(np.allclose(out_nb, out_np, rtol=1e-12, atol=0))
        rows.append({"case": name, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb,
                     "agree": same})
        flag = "" if same else "  MISMATCH"
        print(f"{name:<32} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>7.1f}x{flag}")
    os.environ.pop(BACKEND_ENV, None)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
