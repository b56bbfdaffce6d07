"""Batch front end: ``rasterize <job-file> [options]``.

A job file is line oriented ``key = value`` text::

    # ellipse, full frame
    conic = 1, 225, 0, 0, 0, -225      # A, B, D, I, J, M
    frame = -16, -2, 16, 2             # xmin, ymin, xmax, ymax
    delta = 1
    orientation = ccw
    mode = eight
    arc_start = 0, 0                   # optional, with arc_end
    arc_end = 7, 3
    outputs = points=out.txt, svg=out.svg, pgm=out.pgm
    tolerance = 1                      # optional
    n_s = 5

Exit status: 0 on success, 2 on a validation error, 3 when a segment walk
runs out of steps.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import engine, knuth_t, oracle
from .core import Conic, radius_of_curvature
from .curve import ConicCurve
from .errors import ConicError, ParseError, StepBudgetExceeded
from .segmentation import Frame, build_segments

KEYS = ("conic", "frame", "delta", "orientation", "mode", "arc_start", "arc_end",
        "outputs", "tolerance", "n_s")
OUTPUT_KINDS = ("points", "svg", "pgm")
SVG_SAMPLES = 2048


@dataclass
class Job:
    coeffs: tuple
    frame: Frame
    delta: Fraction = Fraction(1)
    orientation: str = "ccw"
    mode: str = engine.EIGHT
    arc_start: tuple | None = None
    arc_end: tuple | None = None
    outputs: dict = field(default_factory=dict)
    tolerance: Fraction | None = None
    n_s: Fraction = Fraction(5)
    trace: bool = False
    oracle: bool = False
    knuth: bool = False
    bench: int = 0

    @property
    def conic(self) -> Conic:
        """The conic in grid units with coprime integer coefficients."""
        return Conic.from_coefficients(self.coeffs, self.delta)

    @property
    def grid_frame(self) -> Frame:
        return self.frame.scaled(self.delta)

    @property
    def ccw(self) -> bool:
        return self.orientation == "ccw"

    def grid_arc(self):
        if self.arc_start is None:
            return None
        return tuple(tuple(c / self.delta for c in p) for p in (self.arc_start, self.arc_end))


def _rationals(text, n, lineno, col, key):
    parts = text.split(",")
    if len(parts) != n:
        raise ParseError(f"{key} needs {n} comma-separated numbers, got {len(parts)}", lineno, col)
    out = []
    for part in parts:
        try:
            out.append(Fraction(part.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{key}: not a rational number: {part.strip()!r}",
                             lineno, col + text.index(part) + len(part) - len(part.lstrip())) from None
    return tuple(out)


def parse_job(text: str) -> Job:
    """Parse and validate a job description."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1)
        key_part, value = line.split("=", 1)
        key = key_part.strip()
        kcol = len(key_part) - len(key_part.lstrip()) + 1
        vcol = len(key_part) + 2 + len(value) - len(value.lstrip())
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno, kcol)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", lineno, kcol)
        seen[key] = (value.strip(), lineno, vcol)

    for key in ("conic", "frame"):
        if key not in seen:
            raise ParseError(f"missing required key {key!r}")

    def get(key):
        return seen[key]

    v, ln, col = get("conic")
    coeffs = _rationals(v, 6, ln, col, "conic")
    v, ln, col = get("frame")
    fr = _rationals(v, 4, ln, col, "frame")
    try:
        frame = Frame(*fr)
    except ValueError:
        raise ParseError("frame must satisfy xmin < xmax and ymin < ymax", ln, col) from None
    job = Job(coeffs, frame)

    if "delta" in seen:
        v, ln, col = get("delta")
        (job.delta,) = _rationals(v, 1, ln, col, "delta")
        if job.delta <= 0:
            raise ParseError("delta must be positive", ln, col)
    if "orientation" in seen:
        v, ln, col = get("orientation")
        if v not in ("cw", "ccw"):
            raise ParseError("orientation must be 'cw' or 'ccw'", ln, col)
        job.orientation = v
    if "mode" in seen:
        v, ln, col = get("mode")
        if v not in (engine.EIGHT, engine.FOUR):
            raise ParseError("mode must be 'eight' or 'four'", ln, col)
        job.mode = v
    if ("arc_start" in seen) != ("arc_end" in seen):
        key = "arc_end" if "arc_start" in seen else "arc_start"
        raise ParseError(f"missing {key!r} (arc_start and arc_end go together)")
    if "arc_start" in seen:
        v, ln, col = get("arc_start")
        job.arc_start = _rationals(v, 2, ln, col, "arc_start")
        v, ln, col = get("arc_end")
        job.arc_end = _rationals(v, 2, ln, col, "arc_end")
    if "outputs" in seen:
        v, ln, col = get("outputs")
        for item in v.split(","):
            name, eq, path = item.partition("=")
            name = name.strip()
            if not eq or name not in OUTPUT_KINDS or not path.strip():
                raise ParseError(f"outputs entries are kind=path with kind in {OUTPUT_KINDS}",
                                 ln, col + v.index(item))
            job.outputs[name] = path.strip()
    if "tolerance" in seen:
        v, ln, col = get("tolerance")
        (job.tolerance,) = _rationals(v, 1, ln, col, "tolerance")
        if job.tolerance <= 0:
            raise ParseError("tolerance must be positive", ln, col)
    if "n_s" in seen:
        v, ln, col = get("n_s")
        (job.n_s,) = _rationals(v, 1, ln, col, "n_s")
        if job.n_s <= 0:
            raise ParseError("n_s must be positive", ln, col)

    ConicCurve(job.conic)  # DegenerateConic / NoRealLocus
    return job


# --- running -----------------------------------------------------------------

@dataclass
class JobReport:
    segments: list
    runs: list
    stats: engine.Stats
    warnings: list = field(default_factory=list)
    max_rho: float | None = None
    knuth: list = field(default_factory=list)  # (segment index, differing points, t cost, engine cost)

    @property
    def points(self) -> int:
        return sum(len(r.points) for r in self.runs)


def _fmt(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return repr(float(c))


def user_points(run, delta) -> list[tuple[Fraction, Fraction]]:
    return [(p.x * delta, p.y * delta) for p in run.points]


def points_text(report: JobReport, delta) -> str:
    blocks = []
    for run in report.runs:
        blocks.append("\n".join(f"{_fmt(x)} {_fmt(y)}" for x, y in user_points(run, delta)))
    return "\n\n".join(blocks) + "\n"


def read_points(text: str) -> list[list[tuple[Fraction, Fraction]]]:
    """Inverse of :func:`points_text`."""
    out = []
    for block in text.strip("\n").split("\n\n"):
        out.append([tuple(Fraction(c) for c in line.split()) for line in block.splitlines()])
    return out


def min_radius(conic: Conic, seg, samples=256) -> float:
    """Smallest radius of curvature along a segment, in grid units."""
    curve = oracle.curve_of(conic)
    ts = np.linspace(seg.t_start, seg.t_end, samples)
    xs, ys = curve.point(seg.branch_id, ts)
    return min(abs(radius_of_curvature(conic, (float(x), float(y)))) for x, y in zip(xs, ys))


def sampling_warning(job: Job, segments) -> str | None:
    """Text of the undersampling warning, or None when the grid is fine enough."""
    if not segments:
        return None
    conic = job.conic
    r_min = min(min_radius(conic, s) for s in segments) * float(job.delta)
    limit = r_min / float(job.n_s)
    if job.tolerance is not None:
        limit = min(limit, math.sqrt(2) * float(job.tolerance))
    if float(job.delta) > limit * (1 + 1e-9):
        return (f"warning: delta {_fmt(job.delta)} exceeds the sampling limit {limit:.6g} "
                f"(smallest radius of curvature {r_min:.6g}, n_s {_fmt(job.n_s)})")
    return None


def run_job(job: Job, base_dir: Path | None = None) -> JobReport:
    """Segment, digitize and write every requested output."""
    conic = job.conic
    segs = build_segments(conic, job.grid_frame, job.ccw, job.grid_arc())
    runs = [engine.run_segment(conic, s, job.mode, trace=job.trace) for s in segs]
    total = engine.Stats()
    for r in runs:
        total += r.stats
    report = JobReport(segs, runs, total)
    warn = sampling_warning(job, segs)
    if warn:
        report.warnings.append(warn)
    if job.oracle:
        report.max_rho = max(oracle.footpoint(conic, p, s).rho
                             for s, r in zip(segs, runs) for p in r.points) * float(job.delta)
    if job.knuth:
        for k, (s, r) in enumerate(zip(segs, runs)):
            t_points, _ = knuth_t.run_t(conic, None, s)
            diff = len(set(t_points) ^ set(r.points))
            costs = (oracle.path_cost(conic, s, t_points), oracle.path_cost(conic, s, r.points)) \
                if job.oracle else (None, None)
            report.knuth.append((k, diff) + costs)
    base = base_dir or Path.cwd()
    if "points" in job.outputs:
        (base / job.outputs["points"]).write_text(points_text(report, job.delta))
    if "svg" in job.outputs:
        (base / job.outputs["svg"]).write_text(render_svg(job, report))
    if "pgm" in job.outputs:
        (base / job.outputs["pgm"]).write_bytes(render_pgm(job, report))
    return report


def stats_text(report: JobReport) -> str:
    st = report.stats
    lines = [f"segments {len(report.segments)}", f"points {report.points}",
             f"steps {st.steps}", f"m_valid {st.m_valid}", f"h_valid {st.h_valid}",
             f"v_valid {st.v_valid}", f"ooc_rule {st.ooc_rule}",
             f"potential_ooa {st.potential_ooa}", f"forced {st.forced}"]
    if report.max_rho is not None:
        lines.append(f"max_rho {report.max_rho:.9f}")
    for k, diff, t_cost, e_cost in report.knuth:
        line = f"knuth segment {k} differing_points {diff}"
        if t_cost is not None:
            line += f" t_cost {t_cost:.9f} engine_cost {e_cost:.9f}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def trace_text(report: JobReport) -> str:
    lines = []
    for k, run in enumerate(report.runs):
        for n, tr in enumerate(run.traces or []):
            x, y = tr.p_a.x, tr.p_a.y
            flags = (" ooc" if tr.ooc_rule else "") + (" potential_ooa" if tr.potential_ooa else "")
            lines.append(f"seg {k} step {n} from {_fmt(x)},{_fmt(y)} rule {tr.rule} "
                         f"move {tr.move[0]},{tr.move[1]}{flags}")
    return "\n".join(lines) + ("\n" if lines else "")


# --- renders -------------------------------------------------------------------

def render_pgm(job: Job, report: JobReport) -> bytes:
    """Binary P5 bitmap, one pixel per grid cell; row 0 holds the lowest y."""
    x0, y0, x1, y1 = job.grid_frame.grid_bounds()
    w, h = x1 - x0 + 1, y1 - y0 + 1
    img = bytearray(w * h)
    for run in report.runs:
        for p in run.points:
            gx, gy = p.grid_xy()
            if x0 <= gx <= x1 and y0 <= gy <= y1:
                img[(gy - y0) * w + (gx - x0)] = 255
    return f"P5\n{w} {h}\n255\n".encode("ascii") + bytes(img)


def render_svg(job: Job, report: JobReport) -> str:
    fr, dl = job.frame, float(job.delta)
    xmin, ymin, xmax, ymax = (float(c) for c in (fr.xmin, fr.ymin, fr.xmax, fr.ymax))
    pad = dl
    curve = oracle.curve_of(job.conic)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'viewBox="{xmin - pad:g} {-(ymax + pad):g} {xmax - xmin + 2 * pad:g} {ymax - ymin + 2 * pad:g}">',
             f'<rect x="{xmin:g}" y="{-ymax:g}" width="{xmax - xmin:g}" height="{ymax - ymin:g}" '
             f'fill="none" stroke="#bbb" stroke-width="{0.02 * dl:g}"/>']
    for seg in report.segments:
        ts = np.linspace(seg.t_start, seg.t_end, SVG_SAMPLES)
        xs, ys = curve.point(seg.branch_id, ts)
        pts = " ".join(f"{x * dl:.5g},{-y * dl:.5g}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="{0.04 * dl:g}"/>')
    side = 0.8 * dl
    for run in report.runs:
        for p in run.points:
            x, y = float(p.x) * dl, float(p.y) * dl
            parts.append(f'<rect class="pt" x="{x - side / 2:.6g}" y="{-y - side / 2:.6g}" '
                         f'width="{side:g}" height="{side:g}" fill="#d62728" fill-opacity="0.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- benchmark -----------------------------------------------------------------

def _median_time(fn, reps):
    times = []
    for _ in range(max(reps, 1)):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench(job: Job, repetitions: int = 5) -> dict:
    """Per-point wall-clock cost of the engine against oracle marching.

    Segmentation is done once up front; both sides time only the walk.
    """
    conic = job.conic
    segs = build_segments(conic, job.grid_frame, job.ccw, job.grid_arc())
    n_points = sum(len(engine.run_segment(conic, s, job.mode).points) for s in segs)

    def walk(backend):
        return lambda: [engine.run_segment(conic, s, job.mode, backend=backend) for s in segs]

    t_engine = _median_time(walk(None), repetitions)
    t_pure = _median_time(walk("python"), repetitions)
    t_compiled = _median_time(walk("compiled"), repetitions) if engine.compiled_available() else None
    t_base = _median_time(lambda: [oracle.oracle_march(conic, s, job.mode) for s in segs],
                          repetitions)
    rep = {
        "points": n_points,
        "repetitions": max(repetitions, 1),
        "engine_per_point": t_engine / n_points,
        "baseline_per_point": t_base / n_points,
        "pure_per_point": t_pure / n_points,
        "compiled_per_point": None if t_compiled is None else t_compiled / n_points,
        "points_per_second": n_points / t_engine if t_engine > 0 else math.inf,
    }
    rep["ratio"] = rep["engine_per_point"] / rep["baseline_per_point"]
    return rep


def bench_text(rep: dict) -> str:
    lines = [f"bench points {rep['points']} repetitions {rep['repetitions']}",
             f"bench engine_per_point {rep['engine_per_point']:.3e} s",
             f"bench baseline_per_point {rep['baseline_per_point']:.3e} s",
             f"bench ratio {rep['ratio']:.4g}",
             f"bench points_per_second {rep['points_per_second']:.4g}",
             f"bench pure_per_point {rep['pure_per_point']:.3e} s"]
    if rep["compiled_per_point"] is not None:
        lines.append(f"bench compiled_per_point {rep['compiled_per_point']:.3e} s")
    return "\n".join(lines) + "\n"


# --- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rasterize", description="Digitize a conic described by a job file.")
    ap.add_argument("job", help="job file (key = value lines)")
    ap.add_argument("--trace", action="store_true", help="print one line per step")
    ap.add_argument("--oracle", action="store_true", help="report the largest distance to the curve")
    ap.add_argument("--knuth", action="store_true", help="compare each segment with Knuth's T loop")
    ap.add_argument("--bench", type=int, metavar="N", default=0, help="time N repetitions")
    for kind in OUTPUT_KINDS:
        ap.add_argument(f"--{kind}", metavar="PATH", help=f"write the {kind} output here")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = Path(args.job)
    try:
        job = parse_job(path.read_text())
    except OSError as exc:
        print(f"rasterize: {exc}", file=sys.stderr)
        return 2
    except (ConicError, ValueError) as exc:
        print(f"rasterize: {path}: {exc}", file=sys.stderr)
        return 2
    job.trace, job.oracle, job.knuth, job.bench = args.trace, args.oracle, args.knuth, args.bench
    # paths from the job file are relative to it, paths from the command line to the cwd
    for kind in OUTPUT_KINDS:
        if job.outputs.get(kind):
            job.outputs[kind] = str(path.parent / job.outputs[kind])
        if getattr(args, kind):
            job.outputs[kind] = getattr(args, kind)
    try:
        report = run_job(job, Path.cwd())
        sys.stdout.write(stats_text(report))
        if job.trace:
            sys.stdout.write(trace_text(report))
        for w in report.warnings:
            print(w, file=sys.stderr)
        if job.bench:
            sys.stdout.write(bench_text(bench(job, job.bench)))
    except StepBudgetExceeded as exc:
        print(f"rasterize: {exc}", file=sys.stderr)
        return 3
    except (ConicError, ValueError) as exc:
        print(f"rasterize: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
