import io

import pytest

from gmemi.cli import EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_OK, EXIT_VERIFY, main
from gmemi.experiments.curves import CURVE_FIELDS
from gmemi.experiments.sweep import AGGREGATE_FIELDS, DETAIL_FIELDS

SMALL = ("scenario = block-sparse\nmodel = gme-lop, lop\nn = 24\nd = 18\nsnr_db = 30\ntrials = 2\n"
         "lambda = 0.5\nalpha = 3\ntheta = 0.8\nthreshold = 1e-5\nmax_iters = {iters}\n")


def _cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_solve_ok(tmp_path):
    det, agg = tmp_path / "d.csv", tmp_path / "a.csv"
    code = main(["solve", "--config", _cfg(tmp_path, SMALL.format(iters=20000)),
                 "--detail", str(det), "--aggregate", str(agg), "--deterministic"])
    assert code == EXIT_OK
    lines = det.read_text().splitlines()
    assert lines[0] == ",".join(DETAIL_FIELDS) and len(lines) == 5
    assert all(line.split(",")[-1] == "0.0" for line in lines[1:])
    assert agg.read_text().splitlines()[0] == ",".join(AGGREGATE_FIELDS)


def test_solve_to_stdout(tmp_path):
    out = io.StringIO()
    assert main(["solve", "--config", _cfg(tmp_path, SMALL.format(iters=20000))], out=out) == EXIT_OK
    assert out.getvalue().startswith(",".join(DETAIL_FIELDS))


def test_nonconverged_exit_code_still_writes(tmp_path):
    det = tmp_path / "d.csv"
    code = main(["solve", "--config", _cfg(tmp_path, SMALL.format(iters=3)), "--detail", str(det)])
    assert code == EXIT_NONCONVERGED
    assert len(det.read_text().splitlines()) == 5


@pytest.mark.parametrize("text", ["scenario = block-sparse\n", "scenario = x\nmodel = lop\n",
                                  "scenario = block-sparse\nmodel = lop\nbogus = 1\n"])
def test_config_errors_exit_2(tmp_path, text):
    assert main(["solve", "--config", _cfg(tmp_path, text)]) == EXIT_CONFIG
    assert main(["check", "--config", _cfg(tmp_path, text)]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_check_ok(tmp_path):
    out = io.StringIO()
    assert main(["check", "--config", _cfg(tmp_path, SMALL.format(iters=100))], out=out) == EXIT_OK
    text = out.getvalue()
    assert "lambda_min(Q)" in text and "FAIL" not in text


def test_check_detects_violation(tmp_path, monkeypatch):
    import gmemi.cli as cli

    monkeypatch.setattr(cli, "verify_overall_convexity", lambda Q, tol=0.0: (False, -1.0))
    out = io.StringIO()
    assert main(["check", "--config", _cfg(tmp_path, SMALL.format(iters=100))], out=out) == EXIT_VERIFY
    assert "FAIL" in out.getvalue()


def test_bench_small(tmp_path):
    det = tmp_path / "d.csv"
    code = main(["bench", "block-sparse", "--n", "24", "--d", "18", "--trials", "1",
                 "--max-iters", "20000", "--detail", str(det)])
    assert code in (EXIT_OK, EXIT_NONCONVERGED)
    rows = det.read_text().splitlines()[1:]
    assert sorted(r.split(",")[1] for r in rows) == ["gme-lop", "lop"]


def test_curve(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curve", "tgv", "--r-steps", "3", "--n", "20", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CURVE_FIELDS) and len(lines) == 4
    assert main(["curve", "tgv", "--alpha", "1.5"]) == EXIT_CONFIG


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["bench", "nowhere"])
    assert exc.value.code == 2
