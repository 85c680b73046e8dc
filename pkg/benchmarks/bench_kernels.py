"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]

For each kernel the script checks that both backends agree and reports the
best-of-N wall time per call and the speedup.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import timeit

import numpy as np

from artifact import _kernels
from artifact.qde import relation_coefficients
from artifact.rings import make_torus_params


def cases():
    tp = make_torus_params(3, [0.1, 0.37 + 0.2j, -0.45])
    z = tp.zarr
    w = np.exp(2j * np.pi * z)
    logq = 3 * (math.log(2.0) - 2j * math.pi * 0.05)
    Y0 = np.eye(3, dtype=complex)
    ln0 = np.zeros(3, dtype=complex)
    coefs = relation_coefficients(tp)
    return {
        "cgamma": lambda b: b.cgamma(0.3 - 2.7j),
        "jackson_apply": lambda b: b.jackson_apply(z, w, logq, 1e-12, 500),
        "dp45_extend": lambda b: b.dp45_extend(Y0, ln0, 1.0, 3.0, 0.05, coefs, 1e-10, 1e-12,
                                               1e-2, 1e2, False),
    }


def agree(a, b) -> float:
    a = a[0] if isinstance(a, tuple) else a
    b = b[0] if isinstance(b, tuple) else b
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def run(repeat: int = 5):
    py, cy = _kernels.python_backend, _kernels.compiled_backend
    if cy is None:
        print("compiled backend not built; only the fallback is available", file=sys.stderr)
    rows = []
    for name, fn in cases().items():
        row = {"kernel": name}
        n = 20 if name != "cgamma" else 2000
        row["python_s"] = min(timeit.repeat(lambda: fn(py), number=n, repeat=repeat)) / n
        if cy is not None:
            row["compiled_s"] = min(timeit.repeat(lambda: fn(cy), number=n, repeat=repeat)) / n
            row["speedup"] = row["python_s"] / row["compiled_s"]
            row["max_rel_diff"] = agree(fn(cy), fn(py))
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    print(f"{'kernel':<15}{'python':>14}{'compiled':>14}{'speedup':>10}{'max rel diff':>15}")
    for r in rows:
        print(f"{r['kernel']:<15}{r['python_s'] * 1e6:>12.1f}us"
              f"{r.get('compiled_s', math.nan) * 1e6:>12.1f}us"
              f"{r.get('speedup', math.nan):>10.1f}{r.get('max_rel_diff', math.nan):>15.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
