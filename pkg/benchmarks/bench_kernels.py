"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--sweep]

Prints the best-of-N wall time per kernel and backend and checks that the
two backends agree.  ``--sweep`` also times the bundled fig3 sweep end to
end under each backend (separate processes, since the backend is chosen
at import).  Exits 1 if the compiled extension is not built.
"""

import argparse
import hashlib
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from secrecy_relay import kernels
from secrecy_relay.channels import Topology, gains_from_topology


def cases(g):
    t, p1, p2 = g.as_tuple(), g.p1, g.p2
    cm = np.sqrt(p1 / p2)
    c201 = np.linspace(-cm, cm, 201)
    p201 = np.linspace(0, p1, 201)
    a = np.linspace(0, 4, 21)
    b = np.linspace(-4, 4, 21)
    gm = np.linspace(0, np.sqrt(2 * p2), 21)
    q = np.linspace(0, 2 * p1, 21)
    rho = np.linspace(-1, 1, 201)
    s = np.linspace(0, 1, 21)
    return {
        "df_values 201x201": lambda k: k.df_values(c201, p201, t, p1, p2, False),
        "df_profile 201": lambda k: k.df_profile(c201, t, p1, p2),
        "bound_profile 201": lambda k: k.bound_profile(c201, t, p1, p2),
        "bound_values 201x21": lambda k: k.bound_values(rho, s, t, p1, p2),
        "af_values 21^4": lambda k: k.af_values(a, b, gm, q, t, p1, p2),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sweep", action="store_true", help="also time the full fig3 sweep")
    args = ap.parse_args(argv)
    try:
        cy = kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return 1
    py = kernels.get_backend("numpy")
    g = gains_from_topology(Topology().with_relay(0.3), p1=1.0, p2=8.0)

    print(f"{'kernel':<22}{'cython ms':>12}{'numpy ms':>12}{'speedup':>10}  max |diff|")
    for name, fn in cases(g).items():
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        a, b = fn(cy), fn(py)
        a, b = (a[0], b[0]) if isinstance(a, tuple) else (a, b)
        ok = np.isnan(a) == np.isnan(b)
        diff = float(np.nanmax(np.abs(a - b))) if ok.all() else float("inf")
        print(f"{name:<22}{1e3 * t_cy:>12.3f}{1e3 * t_py:>12.3f}{t_py / t_cy:>9.1f}x  {diff:.2e}")
    if args.sweep:
        print()
        for label, pure in (("cython", "0"), ("numpy", "1")):
            env = dict(os.environ, SECRECY_RELAY_PURE_PYTHON=pure)
            t0 = time.perf_counter()
            out = subprocess.run(
                [sys.executable, "-m", "secrecy_relay.cli", "sweep", "--config", "bundled:fig3.json"],
                capture_output=True, env=env, check=True,
            ).stdout
            dt = time.perf_counter() - t0
            print(f"fig3 sweep, {label:<7}{dt:8.2f} s  sha256 {hashlib.sha256(out).hexdigest()[:16]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
