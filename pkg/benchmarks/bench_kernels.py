"""Numba vs pure-numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times each kernel in both backends on the same inputs (after one warm-up
call for the JIT) and, separately, a whole survival series run in a
subprocess with RELDECAY_DISABLE_NUMBA set and unset.
"""
import argparse
import os
import subprocess
import sys
import timeit
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from reldecay import _kernels as K  # noqa: E402
from reldecay._accel import HAVE_NUMBA  # noqa: E402

SERIES_SNIPPET = """
import time
from reldecay import breit_wigner, TimeGrid, survival_momentum
d = breit_wigner(1.0, 1e-3, 0.0)
g = TimeGrid.log(d.tau, 1e3, 400)
survival_momentum(d, 1.7320508075688772, TimeGrid.log(d.tau, 10, 3))  # warm-up / JIT
t0 = time.perf_counter()
survival_momentum(d, 1.7320508075688772, g)
print(time.perf_counter() - t0)
"""


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(-300, 300, 20_000)
    coef = rng.normal(size=(200, 20))
    c = rng.uniform(-1, 1, 200)
    h = rng.uniform(1e-4, 1e-1, 200)
    vals, ph = rng.normal(size=1 << 20), rng.uniform(0, 1e4, 1 << 20)
    return [
        ("sph_jn_table 20k x 20", lambda f: f(x, 20), K.sph_jn_table_numba, K.sph_jn_table_numpy),
        ("filon_sum 200 panels", lambda f: f(coef, c, h, 2.5e3), K.filon_sum_numba, K.filon_sum_numpy),
        ("phase_sum 1M samples", lambda f: f(vals, ph), K.phase_sum_numba, K.phase_sum_numpy),
    ]


def bench(repeat):
    print(f"{'kernel':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, call, fn_numba, fn_numpy in cases():
        row = []
        for fn in (fn_numba, fn_numpy):
            call(fn)
            row.append(min(timeit.repeat(lambda: call(fn), number=1, repeat=repeat)) * 1e3)
        print(f"{name:<26}{row[0]:>12.3f}{row[1]:>12.3f}{row[1] / row[0]:>10.1f}")


def bench_series():
    env = dict(os.environ, PYTHONPATH=str(ROOT / "src"))
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env["RELDECAY_DISABLE_NUMBA"] = flag
        res = subprocess.run([sys.executable, "-c", SERIES_SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip())
    print(f"survival_momentum, 400 log-spaced points: numba {out['numba']:.3f} s, "
          f"numpy {out['numpy']:.3f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        sys.exit("numba is unavailable or disabled; nothing to compare")
    bench(args.repeat)
    bench_series()
