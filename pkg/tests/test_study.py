import numpy as np
import pytest
from hypothesis import given, strategies as st

from holderdsm import ConfigError, parse_config, run_study
from holderdsm.study import CSV_COLUMNS, format_config, summarize


def test_defaults():
    cfg = parse_config("problem=identity\ndelta=1e-2")
    assert (cfg.d, cfg.c, cfg.b, cfg.C, cfg.zeta) == (3.0, 1.0, 0.5, 1.5, 0.9)
    assert cfg.delta == (1e-2,)


def test_delta_list_and_comments():
    cfg = parse_config("# sweep\nproblem = psd2  # singular\ndelta=1e-2,1e-3\nubar=0,5\n")
    assert cfg.delta == (1e-2, 1e-3) and cfg.ubar == (0.0, 5.0)


@pytest.mark.parametrize("text,line,fragment", [
    ("problem=identity\ndelta=1e-2\nb=1.5", 3, "b must lie"),
    ("problem=identity\ndelta=", 2, "empty"),
    ("problem=identity\ndelta=1e-2\ncolour=red", 3, "unknown key"),
    ("problem=identity\njunk\ndelta=1e-2", 2, "key=value"),
    ("problem=identity\ndelta=1e-3,1e-2", 2, "decreasing"),
    ("problem=identity\ndelta=1e-2\nseeds=x", 3, "bad value"),
    ("problem=nothing\ndelta=1e-2", 1, "unknown problem"),
    ("problem=identity\ndelta=0.9\nC=1\nzeta=1", 2, "exceed"),
    ("problem=psd2\ndelta=1e-2\nubar=1,2,3", 3, "dimension"),
    ("problem=identity\ndelta=1e-2\nd=1\ninit_checks=true", 3, "eq46"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.lineno == line
    assert str(exc.value).startswith(f"line {line}:")
    assert fragment in str(exc.value)


def test_missing_problem():
    with pytest.raises(ConfigError):
        parse_config("delta=1e-2")


@given(st.lists(st.floats(1e-6, 0.5), min_size=1, max_size=4, unique=True),
       st.floats(1.0, 5.0), st.floats(0.1, 0.9), st.integers(1, 5))
def test_format_parse_round_trip(deltas, d, b, seeds):
    deltas = sorted(deltas, reverse=True)
    text = "problem=identity\ndelta=" + ",".join(repr(x) for x in deltas)
    text += f"\nd={d!r}\nb={b!r}\nseeds={seeds}\nC=2\n"
    try:
        cfg = parse_config(text)
    except ConfigError:
        return
    assert parse_config(format_config(cfg)) == cfg


def _strip_wall(text):
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


def test_study_csv_and_determinism(tmp_path):
    text = "problem=identity\ndelta=1e-1,1e-2\nseeds=2\n"
    cfg = parse_config(text)
    rows = run_study(cfg, tmp_path / "a.csv")
    run_study(cfg, tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_text()
    b = (tmp_path / "b.csv").read_text()
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert _strip_wall(a) == _strip_wall(b)
    assert [(r.delta, r.seed) for r in rows] == [(0.1, 0), (0.1, 1), (0.01, 0), (0.01, 1)]
    for r in rows:
        target = cfg.C * r.delta ** cfg.zeta
        assert r.status == "ok"
        assert abs(r.discrepancy_at_stop - target) <= 1e-8 * target
        assert r.init_cert.startswith("eq29")
    assert float(a.splitlines()[1].split(",")[2]) == rows[0].t_delta


def test_parallel_matches_serial(tmp_path):
    base = "problem=holder075\ndelta=1e-1,1e-2\nseeds=2\n"
    r1 = run_study(parse_config(base))
    r2 = run_study(parse_config(base + "workers=2\n"))
    key = lambda r: (r.delta, r.seed, r.t_delta, r.error)
    assert [key(r) for r in r1] == [key(r) for r in r2]


def test_failures_recorded_not_raised():
    rows = run_study(parse_config("problem=identity\ndelta=1e-1,1e-4\nseeds=1\nT_max=500"))
    assert rows[0].status == "ok"
    assert rows[1].status == "failed:StoppingTimeout" and np.isnan(rows[1].t_delta)


def test_identity_study_converges():
    cfg = parse_config("problem=identity\ndelta=1e-1,1e-2,1e-3,1e-4\nd=4\nb=0.9\n")
    s = summarize(run_study(cfg))
    t = [v[0] for v in s.values()]
    e = [v[1] for v in s.values()]
    assert np.all(np.diff(t) > 0) and np.all(np.diff(e) < 0)


def test_shifted_study_measures_to_nearest_solution():
    cfg = parse_config("problem=psd2\nubar=0,5\ndelta=1e-1,1e-2,1e-3\nd=4\nb=0.9\n")
    s = summarize(run_study(cfg))
    e = [v[1] for v in s.values()]
    assert np.all(np.diff(e) < 0)
