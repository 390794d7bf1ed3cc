import csv
import io
import json

import pytest

from walkcum.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["theory", "--q", "notanint"])
    assert exc.value.code == EXIT_USAGE
    code, _, err = _run(capsys, "theory")
    assert code == EXIT_USAGE and "regime" in err


def test_theory_table(capsys):
    code, out, _ = _run(capsys, "theory", "--regime", "Y2", "--s", "1", "--q", "2", "--orders", "1,2")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["k"]) for r in rows] == [1, 2]
    assert float(rows[1]["value"]) == pytest.approx(73.224, abs=5e-4)


def test_theory_bound_exit_status(capsys):
    code, out, _ = _run(capsys, "theory", "--bound", "--q", "2", "--orders", "1,2,3", "--format", "json")
    assert code == EXIT_OK and len(json.loads(out)) == 3
    code, _, _ = _run(capsys, "theory", "--bound", "--q", "3", "--orders", "2")
    assert code == EXIT_FAIL


def test_enumerate(capsys):
    code, out, _ = _run(capsys, "enumerate", "--k", "2", "--q", "2")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    cell = [r for r in rows if (r["E"], r["V"]) == ("3", "4")]
    assert cell and cell[0]["count"] == "8"
    code, out, _ = _run(capsys, "enumerate", "--k", "3", "--q", "2", "--alphabet")
    assert json.loads(out)["alphabet"] == ["0", "a1", "b1", "c1"]
    code, _, _ = _run(capsys, "enumerate", "--k", "9", "--q", "3")
    assert code == EXIT_USAGE


def test_sample_and_graph_out(capsys, tmp_path):
    g = tmp_path / "g.txt"
    code, out, _ = _run(capsys, "sample", "--N", "101", "--c", "5", "--R", "4", "--replicas", "3",
                        "--regime", "Y1", "--graph-out", str(g))
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3 and g.read_text().startswith("# N=101")
    code, _, err = _run(capsys, "sample", "--N", "100", "--c", "5", "--R", "4")
    assert code == EXIT_USAGE and "odd" in err


def test_experiment_and_report(capsys, tmp_path):
    cfg = tmp_path / "plan.cfg"
    cfg.write_text("regime = Y2\ns = 1\nN = 201\nreplicas = 60\norders = 1,2\n")
    out = tmp_path / "res.json"
    code, text, _ = _run(capsys, "experiment", "--config", str(cfg), "--out", str(out))
    assert code in (EXIT_OK, EXIT_FAIL)
    assert (tmp_path / "res.csv").exists() and out.exists()
    code2, csv_text, _ = _run(capsys, "report", str(out))
    assert code2 == code
    assert csv_text.splitlines()[0].startswith("schema,regime,statistic")
    bad = tmp_path / "bad.cfg"
    bad.write_text("mystery = 1\n")
    code, _, _ = _run(capsys, "experiment", "--config", str(bad))
    assert code == EXIT_USAGE
