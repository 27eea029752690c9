"""Time the compiled and numpy cosine kernels on estimator-sized inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from biasdens import _pykernels

try:
    from biasdens import _ckernels
except ImportError:
    _ckernels = None

# (n, jmax) pairs: sample sizes from the equivalence studies and the rate sweep, with the
# estimator's own cutoffs, plus one large case
CASES = [(25, 30), (44, 30), (500, 506), (3200, 1015), (20000, 2000)]


def _time(fn, repeat):
    fn()
    runs = timeit.repeat(fn, number=1, repeat=repeat)
    return min(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'n':>7}{'jmax':>7}{'numpy ms':>12}{'cython ms':>12}{'speedup':>9}{'max diff':>11}")
    for n, jmax in CASES:
        y = rng.uniform(0, 1, n)
        v = 1.0 / (0.1 + 0.9 * y)
        coeffs = rng.normal(size=jmax + 1) / (1 + np.arange(jmax + 1))
        x = np.linspace(0, 1, 8 * jmax + 1)
        for name, py, args_ in (("cosine_moments", _pykernels.cosine_moments, (y, v, jmax)),
                                ("cosine_series", _pykernels.cosine_series, (coeffs, x))):
            t_py = _time(lambda: py(*args_), args.repeat)
            line = f"{name:<16}{n:>7}{jmax:>7}{t_py * 1e3:>12.3f}"
            if _ckernels is not None:
                c = getattr(_ckernels, name)
                t_c = _time(lambda: c(*args_), args.repeat)
                diff = float(np.max(np.abs(c(*args_) - py(*args_))))
                line += f"{t_c * 1e3:>12.3f}{t_py / t_c:>9.1f}{diff:>11.1e}"
            print(line)


if __name__ == "__main__":
    main()
