"""Time the compiled and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--points 200000] [--vertices 512] [--repeat 3]

Both backends must return identical results; the script checks that before
reporting timings.
"""
import argparse
import time

import numpy as np

from knotlinks import kernels
from knotlinks.curves import SegmentGrid, make_tight_hopf
from knotlinks.inertia import uniform_block


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--vertices", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    link = make_tight_hopf(1.0, n_vertices=args.vertices)
    grid = SegmentGrid.build(link)
    lo, hi = link.bounding_box(pad=link.tube_radius)
    pts = lo + (hi - lo) * uniform_block(0, 0, args.points)
    c1, c2 = (c.vertices for c in link.components)

    backends = kernels.available()
    print(f"backends: {backends} (default: {kernels.BACKEND})")
    print(f"{'kernel':<12}{'backend':<10}{'seconds':>10}{'speedup':>10}")
    for name, call in [
        ("tube_mask", lambda b: grid.inside_mask(pts, link.tube_radius, backend=b)),
        ("gauss_sum", lambda b: kernels.get(b).gauss_sum(c1, c2)),
    ]:
        results = {b: best_of(lambda: call(b), args.repeat) for b in backends}
        outs = [np.asarray(r[1]) for r in results.values()]
        if not all(np.array_equal(outs[0], o) for o in outs[1:]):
            # summation order differs for the Gauss sum; allow rounding noise only
            assert np.allclose(outs[0], outs[1:], rtol=1e-9), name
        base = results["python"][0]
        for b, (t, _) in results.items():
            print(f"{name:<12}{b:<10}{t:>10.4f}{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
