"""Compare the compiled and numpy kernel backends on 480x832 frames.

    python benchmarks/bench_kernels.py [--repeat N] [--height H] [--width W]
"""

import argparse
import timeit

import numpy as np

from camforge import kernels
from camforge import pixel_effects as px


def cases(h, w, rng):
    img = rng.random((h, w, 3))
    flow = rng.normal(scale=4.0, size=(h, w, 2))
    radius = rng.uniform(0.5, 6.0, size=(h, w))
    grid = px.fisheye_grid(w, h, 0.8)
    return {
        "grid_sample_bicubic": lambda m: kernels.grid_sample_bicubic(img, grid, impl=m),
        "flow_blur(24)": lambda m: kernels.flow_blur(img, flow, 2.0, 24, impl=m),
        "bokeh_scatter(r<=6)": lambda m: kernels.bokeh_scatter(img, radius, impl=m),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--height", type=int, default=480)
    ap.add_argument("--width", type=int, default=832)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if len(backends) < 2:
        print("compiled backend not built; only timing the numpy fallback")
    names = list(backends)
    print(f"frame {args.height}x{args.width}, best of {args.repeat}, seconds")
    print(f"{'kernel':<26}" + "".join(f"{n:>10}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.height, args.width, np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for m in backends.values()]
        row = f"{label:<26}" + "".join(f"{t:>10.3f}" for t in times)
        if len(times) > 1:
            row += f"{times[-1] / times[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
