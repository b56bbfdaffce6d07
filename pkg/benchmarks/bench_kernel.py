"""Compiled kernel vs pure-Python walk on the fixture jobs.

    python benchmarks/bench_kernel.py [--repeat N] [--scale K]

``--scale`` multiplies the frame and divides delta, so the same curves are
walked with K times as many points. Segmentation is done once per job and
is not timed.
"""

import argparse
import statistics
import timeit
from pathlib import Path

from conicraster import cli, engine
from conicraster.segmentation import build_segments

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def time_walk(conic, segs, mode, backend, repeat):
    fn = lambda: [engine.run_segment(conic, s, mode, backend=backend) for s in segs]
    return statistics.median(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--scale", type=int, default=16)
    args = ap.parse_args(argv)
    if not engine.compiled_available():
        print("compiled kernel not built; only the pure-Python walk is available")
    print(f"{'job':<12}{'points':>9}{'pure us/pt':>13}{'compiled us/pt':>16}{'speedup':>9}")
    for path in sorted(FIXTURES.glob("*.job")):
        job = cli.parse_job(path.read_text())
        job.delta = job.delta / args.scale
        conic = job.conic
        segs = build_segments(conic, job.grid_frame, job.ccw, job.grid_arc())
        runs = [engine.run_segment(conic, s, job.mode, backend="python") for s in segs]
        n = sum(len(r.points) for r in runs)
        pure = time_walk(conic, segs, job.mode, "python", args.repeat) / n * 1e6
        line = f"{path.stem:<12}{n:>9}{pure:>13.3f}"
        if engine.compiled_available():
            comp_runs = [engine.run_segment(conic, s, job.mode, backend="compiled") for s in segs]
            assert [r.points for r in comp_runs] == [r.points for r in runs], path.stem
            comp = time_walk(conic, segs, job.mode, "compiled", args.repeat) / n * 1e6
            line += f"{comp:>16.3f}{pure / comp:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
