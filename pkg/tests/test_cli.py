import math
import shutil
from fractions import Fraction
from pathlib import Path

import pytest

from conicraster import cli, engine
from conicraster.core import HalfPoint, gradient
from conicraster.engine import StepState
from conicraster.errors import DegenerateConic, NoRealLocus, ParseError

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def job_of(name, **extra):
    job = cli.parse_job((FIXTURES / f"{name}.job").read_text())
    for k, v in extra.items():
        setattr(job, k, v)
    return job


# --- parsing -------------------------------------------------------------------

def test_parse_ellipse():
    job = cli.parse_job("conic = 1,225,0,0,0,-225\nframe = -16,-2,16,2\n")
    assert job.coeffs == (1, 225, 0, 0, 0, -225)
    assert job.delta == 1 and job.orientation == "ccw" and job.mode == "eight"
    assert job.conic.det == -50625


def test_parse_rationals_and_options():
    job = cli.parse_job(
        "# comment\n"
        "conic = -160, -921, 767/2, -52, 249/2, 0  # thin\n"
        "frame = -10, -5, 10, 5\n"
        "delta = 1/2\n"
        "orientation = cw\n"
        "mode = four\n"
        "arc_start = 0, 0\n"
        "arc_end = 7, 3\n"
        "outputs = points=a.txt, svg=a.svg\n"
        "tolerance = 3/4\n"
        "n_s = 8\n")
    assert job.coeffs[2] == Fraction(767, 2)
    assert job.delta == Fraction(1, 2) and not job.ccw and job.mode == "four"
    assert job.grid_arc() == ((0, 0), (14, 6))
    assert job.outputs == {"points": "a.txt", "svg": "a.svg"}
    assert job.tolerance == Fraction(3, 4) and job.n_s == 8


def test_degenerate_rejected():
    with pytest.raises(DegenerateConic):
        cli.parse_job("conic = 1,1,1,0,0,0\nframe = 0,0,1,1\n")


def test_empty_locus_rejected():
    with pytest.raises(NoRealLocus):
        cli.parse_job("conic = 1,1,0,0,0,1\nframe = 0,0,1,1\n")


def test_missing_frame_names_the_key():
    with pytest.raises(ParseError, match="frame"):
        cli.parse_job("conic = 1,1,0,0,0,-25\n")


@pytest.mark.parametrize("text,line,col", [
    ("conic = 1,1,0,0,0,-25\nframe = 0,0,1,1\ncolour = red\n", 3, 1),
    ("conic = 1,1,0,0,0,-25\nframe = 0,0,1,1\nframe = 0,0,2,2\n", 3, 1),
    ("conic = 1,1,0,0,0,-25\nframe = 0,0,1,1\ndelta = 0\n", 3, 9),
    ("conic = 1,1,0,0,x,-25\nframe = 0,0,1,1\n", 1, 17),
    ("conic = 1,1,0,0,0\nframe = 0,0,1,1\n", 1, 9),
    ("conic = 1,1,0,0,0,-25\nframe = 0,0,1,1\n  mode = six\n", 3, 10),
    ("conic = 1,1,0,0,0,-25\nframe = 1,0,0,1\n", 2, 9),
    ("conic = 1,1,0,0,0,-25\nframe = 0,0,1,1\nnonsense\n", 3, 1),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as info:
        cli.parse_job(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_arc_keys_go_together():
    with pytest.raises(ParseError, match="arc_end"):
        cli.parse_job("conic = 1,1,0,0,0,-25\nframe = -9,-9,9,9\narc_start = 5,0\n")


# --- running -------------------------------------------------------------------

def test_ellipse_run():
    rep = cli.run_job(job_of("ellipse"))
    assert len(rep.segments) == 4
    assert rep.stats.ooc_rule == 0
    assert not rep.warnings or "sampling" in rep.warnings[0]


def test_thin_arc_uses_ooc_rule_and_reaches_end():
    job = job_of("thin")
    rep = cli.run_job(job)
    assert rep.stats.ooc_rule > 0
    assert rep.runs[-1].points[-1] == HalfPoint.grid(7, 3)


def test_sampling_warning():
    assert cli.sampling_warning(job_of("circle25"), cli.run_job(job_of("circle25")).segments) is None
    job = job_of("ellipse")
    segs = cli.run_job(job).segments
    # the vertex radius 1/15 is far below n_s grid steps
    assert "exceeds the sampling limit" in cli.sampling_warning(job, segs)
    job = job_of("circle25", tolerance=Fraction(1, 2))
    assert cli.sampling_warning(job, segs) is not None  # sqrt(2)/2 < 1


def test_sampling_limit_is_inclusive():
    # radius 5, n_s 5 gives the limit 1 = delta exactly
    job = job_of("circle25")
    assert cli.sampling_warning(job, cli.run_job(job).segments) is None
    job.n_s = Fraction(51, 10)
    assert cli.sampling_warning(job, cli.run_job(job).segments) is not None


def test_delta_scales_points():
    fine = cli.parse_job("conic = 1,1,0,0,0,-25\nframe = -10,-10,10,10\ndelta = 1/2\n")
    rep = cli.run_job(fine)
    pts = [p for run in rep.runs for p in cli.user_points(run, fine.delta)]
    assert (Fraction(5), Fraction(0)) in pts
    assert all(x.denominator in (1, 2) for x, _ in pts)
    assert max(abs(math.hypot(x, y) - 5) for x, y in pts) <= 0.5


def _replay_stats(conic, seg, points, mode):
    stats = engine.Stats()
    for p, q in zip(points, points[1:]):
        g = gradient(conic, p + (seg.s_x, seg.s_y))
        nxt, tr = engine.step(StepState(p, g.gx, g.gy, seg), conic, seg, mode)
        assert nxt == q
        stats.steps += 1
        if tr.rule == "forced":
            stats.forced += 1
            continue
        stats.m_valid += tr.measurements["M"].valid
        if mode == engine.EIGHT:
            stats.h_valid += tr.measurements["H"].valid
            stats.v_valid += tr.measurements["V"].valid
        stats.ooc_rule += tr.ooc_rule
        stats.potential_ooa += tr.potential_ooa
    return stats


@pytest.mark.parametrize("name", ["circle25", "ellipse", "hyperbola", "thin", "knuth"])
def test_points_round_trip(name, tmp_path):
    job = job_of(name, outputs={"points": "p.txt"})
    rep = cli.run_job(job, tmp_path)
    blocks = cli.read_points((tmp_path / "p.txt").read_text())
    assert len(blocks) == len(rep.segments)
    total = engine.Stats()
    for seg, block in zip(rep.segments, blocks):
        pts = [HalfPoint.from_xy(x / job.delta, y / job.delta) for x, y in block]
        total += _replay_stats(job.conic, seg, pts, job.mode)
    assert total == rep.stats


@pytest.mark.parametrize("name", ["circle25", "ellipse", "hyperbola", "thin"])
def test_renders_contain_the_points(name, tmp_path):
    job = job_of(name, outputs={"svg": "a.svg", "pgm": "a.pgm"})
    rep = cli.run_job(job, tmp_path)
    cells = {p.grid_xy() for run in rep.runs for p in run.points}
    assert (tmp_path / "a.svg").read_text().count('class="pt"') == rep.points
    data = (tmp_path / "a.pgm").read_bytes()
    magic, dims, maxval, body = data.split(b"\n", 3)
    w, h = map(int, dims.split())
    assert magic == b"P5" and maxval == b"255" and len(body) == w * h
    assert sum(b == 255 for b in body) == len(cells)
    assert set(body) <= {0, 255}


def test_pgm_row_zero_is_lowest_y():
    job = cli.parse_job("conic = 1,1,0,0,0,-4\nframe = 0,0,2,2\norientation = ccw\n")
    rep = cli.run_job(job)
    body = cli.render_pgm(job, rep).split(b"\n", 3)[3]
    assert body[0 * 3 + 2] == 255  # (2, 0)
    assert body[2 * 3 + 0] == 255  # (0, 2)
    assert body[0] == 0


# --- entry point -----------------------------------------------------------------

def test_main_success(tmp_path, capsys):
    shutil.copy(FIXTURES / "ellipse.job", tmp_path / "e.job")
    code = cli.main([str(tmp_path / "e.job"), "--trace", "--oracle", "--knuth",
                     "--points", str(tmp_path / "e.txt"), "--pgm", str(tmp_path / "e.pgm")])
    out = capsys.readouterr().out
    assert code == 0
    assert "segments 4" in out and "ooc_rule 0" in out and "max_rho" in out
    assert "knuth segment 0" in out and "seg 0 step 0" in out
    assert (tmp_path / "e.txt").exists() and (tmp_path / "e.pgm").exists()


def test_main_job_outputs_are_relative_to_job(tmp_path, monkeypatch):
    (tmp_path / "c.job").write_text((FIXTURES / "circle25.job").read_text() + "outputs = points=c.txt\n")
    monkeypatch.chdir(FIXTURES)
    assert cli.main([str(tmp_path / "c.job")]) == 0
    assert (tmp_path / "c.txt").exists()


def test_main_validation_errors(tmp_path, capsys):
    bad = tmp_path / "bad.job"
    bad.write_text("conic = 1,1,1,0,0,0\nframe = 0,0,1,1\n")
    assert cli.main([str(bad)]) == 2
    assert cli.main([str(tmp_path / "missing.job")]) == 2
    bad.write_text("conic = 1,1,0,0,0,-25\n")
    assert cli.main([str(bad)]) == 2
    assert "frame" in capsys.readouterr().err


def test_main_budget_exit_code(monkeypatch):
    monkeypatch.setattr(engine, "step_budget", lambda seg: 1)
    assert cli.main([str(FIXTURES / "circle25.job")]) == 3


def test_bench_single_repetition():
    rep = cli.bench(job_of("ellipse"), 1)
    assert rep["repetitions"] == 1 and rep["points"] > 0
    assert rep["points_per_second"] > 0
    assert rep["engine_per_point"] < rep["baseline_per_point"]
    text = cli.bench_text(rep)
    assert "points_per_second" in text and "ratio" in text
