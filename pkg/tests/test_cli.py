"""End-to-end CLI behavior through main(argv)."""

import json
import subprocess
import sys

from adaptrec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# recover
# ---------------------------------------------------------------------------


def test_recover_explicit_point(capsys):
    code, out, err = run(capsys, "recover", "--m", "1", "--eps", "0.5",
                         "--x", "0")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "trial,x,x_hat,error,queries"
    assert lines[1].startswith("0,0,0,0,")


def test_recover_csv_rfc4180_line_endings(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _, _ = run(capsys, "recover", "--m", "2", "--eps", "1",
                     "--trials", "3", "--out-csv", str(path))
    assert code == 0
    data = path.read_bytes()
    assert data.count(b"\r\n") == 4
    assert b"\n" not in data.replace(b"\r\n", b"")


def test_recover_deterministic_across_workers(tmp_path, capsys):
    arts = {}
    for workers in ("1", "2"):
        csv_p = tmp_path / f"w{workers}.csv"
        tr_p = tmp_path / f"w{workers}.jsonl"
        code, _, _ = run(capsys, "recover", "--m", "2", "--eps", "0.25",
                         "--trials", "8", "--seed", "3",
                         "--workers", workers,
                         "--out-csv", str(csv_p), "--transcripts", str(tr_p))
        assert code == 0
        arts[workers] = (csv_p.read_bytes(), tr_p.read_bytes())
    assert arts["1"] == arts["2"]
    first = json.loads(arts["1"][1].splitlines()[0])
    assert first["trial"] == 0
    assert first["kind"] in ("colors", "sep")


def test_recover_float64_mode(capsys):
    # leading-minus values take the joined --flag=value spelling
    code, out, _ = run(capsys, "recover", "--m", "2", "--eps", "0.5",
                       "--mode", "float64", "--trials", "4", "--box=-2,2")
    assert code == 0
    assert len(out.splitlines()) == 5


def test_recover_usage_errors(capsys):
    code, _, err = run(capsys, "recover", "--eps", "1")
    assert code == 2 and "error:" in err
    code, _, err = run(capsys, "recover", "--m", "2", "--eps", "1",
                       "--x", "0")
    assert code == 2
    code, _, err = run(capsys, "recover", "--m", "1", "--eps", "1",
                       "--box", "5,1")
    assert code == 2
    code, _, err = run(capsys, "recover", "--m", "1", "--eps", "0")
    assert code == 2


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------


def test_config_file_supplies_options(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# recovery run\nm = 1\neps = 0.5\ntrials = 3\n")
    code, out, _ = run(capsys, "recover", "--config", str(cfg))
    assert code == 0
    assert len(out.splitlines()) == 4


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 1\neps = 0.5\ntrials = 9\n")
    code, out, _ = run(capsys, "recover", "--config", str(cfg),
                       "--trials", "2")
    assert code == 0
    assert len(out.splitlines()) == 3


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 1\neps = 1\nbogus = 7\n")
    code, _, err = run(capsys, "recover", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_config_rejects_malformed_lines(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m 1\n")
    code, _, err = run(capsys, "recover", "--config", str(cfg))
    assert code == 2 and "key=value" in err


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def test_render_to_stdout(capsys):
    code, out, _ = run(capsys, "render")
    assert code == 0
    assert out.startswith('<?xml version="1.0"')
    assert out.count('<g fill="') == 2


def test_render_bytes_stable(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        code, _, _ = run(capsys, "render", "--window", "0,2,0,2",
                         "--px-per-unit", "100", "--out", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_render_usage_errors(capsys):
    code, _, _ = run(capsys, "render", "--window", "0,1,2")
    assert code == 2
    code, _, _ = run(capsys, "render", "--window", "1,0,0,1")
    assert code == 2


# ---------------------------------------------------------------------------
# widths
# ---------------------------------------------------------------------------


def test_widths_small_run(tmp_path, capsys):
    csv_p = tmp_path / "w.csv"
    json_p = tmp_path / "w.json"
    code, _, _ = run(capsys, "widths", "--d", "16", "--n", "4",
                     "--trials", "5", "--out-csv", str(csv_p),
                     "--out-json", str(json_p))
    assert code == 0
    assert len(csv_p.read_text().splitlines()) == 6
    summary = json.loads(json_p.read_text())
    (rep,) = summary["reports"]
    assert rep["beats_benchmark"] is True
    assert rep["max_queries"] <= rep["query_budget"] == 5
    assert rep["m"] == 4


def test_widths_usage_errors(capsys):
    code, _, _ = run(capsys, "widths", "--n", "6", "--d", "16",
                     "--trials", "1")
    assert code == 2
    code, _, _ = run(capsys, "widths", "--ratio", "2", "--trials", "1")
    assert code == 2


# ---------------------------------------------------------------------------
# lipschitz
# ---------------------------------------------------------------------------


def test_lipschitz_single_functionals(capsys):
    code, out, _ = run(capsys, "lipschitz", "--m", "1",
                       "--functional", "colors:1", "--pairs", "500")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "check,m,detail,value,threshold,pass"
    assert len(rows) == 2 and rows[1].endswith("True")
    code, out, _ = run(capsys, "lipschitz", "--m", "1",
                       "--functional", "sep:2", "--pairs", "500")
    assert code == 0


def test_lipschitz_all_functionals_exact(capsys):
    code, out, _ = run(capsys, "lipschitz", "--m", "1", "--functional",
                       "all", "--pairs", "60", "--mode", "exact")
    assert code == 0
    # three color subsets plus two separating scores
    assert len(out.splitlines()) == 6


def test_lipschitz_usage_error(capsys):
    code, _, _ = run(capsys, "lipschitz", "--m", "1",
                     "--functional", "nope:1")
    assert code == 2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_exhaustive_line(capsys):
    code, out, _ = run(capsys, "verify", "--m", "1", "--queries", "20",
                       "--pairs", "200", "--trials", "20")
    assert code == 0
    rows = out.splitlines()
    checks = {r.split(",")[0] for r in rows[1:]}
    assert {"separation-constant", "separation", "diameter",
            "distance-agreement", "lipschitz"} <= checks
    assert all(r.endswith("True") for r in rows[1:])


def test_verify_fuzz_above_grid_limit(capsys):
    code, out, err = run(capsys, "verify", "--m", "4", "--pairs", "300",
                         "--trials", "30")
    assert code == 0
    assert "sampling checks" in err
    rows = out.splitlines()
    checks = {r.split(",")[0] for r in rows[1:]}
    assert {"lipschitz", "recovery-error", "query-budget", "stability"} <= checks


# ---------------------------------------------------------------------------
# process-level entry
# ---------------------------------------------------------------------------


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "adaptrec.cli", "recover", "--m", "1",
         "--eps", "1", "--x", "0.25"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "trial,x,x_hat,error,queries"
