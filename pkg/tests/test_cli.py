import json
import subprocess
import sys

import pytest

from cyclicfrob.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_count_json(capsys):
    code, out, _ = run(capsys, "count", "--q", "3", "--r", "2", "--g", "1")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["rows"][0]["count"] == 144
    assert all(c["status"] == "PASS" for c in report["checks"])


def test_count_csv_and_g_list(capsys):
    code, out, _ = run(capsys, "count", "--q", "7", "--r", "3", "--g-list", "1,2", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("g,branch,k,count")
    assert sum(",all," in ln for ln in lines) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["count", "--q", "5", "--r", "3", "--g", "1"],
        ["count", "--q", "6", "--r", "5", "--g", "2"],
        ["count", "--q", "7", "--r", "3", "--g", "1", "--g-list", "1,x"],
        ["density", "--q", "7", "--r", "3", "--g", "2", "--alpha", "0.6"],
        ["density", "--q", "7", "--r", "3", "--g", "2"],
        ["density", "--q", "7", "--r", "3", "--g", "2", "--testfn", "nope.csv"],
        ["count", "--q", "13", "--r", "4", "--g", "2"],
    ],
)
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("cyclicfrob:")


def test_support_error_names_grid_point(capsys):
    _, _, err = run(capsys, "density", "--q", "7", "--r", "3", "--g", "2", "--alpha", "0.6")
    assert "n/2g = 2/4" in err


def test_prime_power_field_is_accepted(capsys):
    code, out, _ = run(capsys, "count", "--q", "4", "--r", "3", "--g", "1")
    assert code == 0
    assert json.loads(out)["rows"][0]["count"] > 0


def test_verify_all_checks_pass(capsys, tmp_path):
    target = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--q", "7", "--r", "3", "--g", "2", "--n-max", "6", "--out", str(target))
    assert code == 0 and out == ""
    report = json.loads(target.read_text())
    names = [c["name"] for c in report["checks"]]
    assert any("partition" in n for n in names)
    assert any("a0 identity" in n for n in names)
    assert all(c["status"] == "PASS" for c in report["checks"])
    traces = {row["n"]: row for row in report["rows"] if row["kind"] == "trace"}
    assert traces[3]["avg_scaled"] == "0"
    assert traces[6]["avg_scaled"] == "4"


def test_verify_float_mode(capsys):
    code, out, _ = run(capsys, "verify", "--q", "7", "--r", "3", "--g", "1", "--n-max", "3", "--mode", "float")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert all("/" not in str(row.get("prediction_main", "")) for row in rows)


def test_sampled_runs_are_reproducible(capsys):
    argv = ["verify", "--q", "7", "--r", "3", "--g", "2", "--n-max", "3", "--sample", "300", "--seed", "5"]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    assert first != run(capsys, *argv[:-1], "6")[1]


def test_density_csv(capsys):
    code, out, _ = run(capsys, "density", "--q", "7", "--r", "3", "--g", "2", "--alpha", "0.45")
    assert code == 0
    header, row = out.splitlines()[:2]
    assert header.split(",")[:3] == ["g", "lhs", "lhs_eigen"]
    assert row.startswith("2,")


def test_density_even_has_no_refined_rhs(capsys):
    code, out, _ = run(capsys, "density", "--q", "5", "--r", "2", "--g", "2", "--testfn", "fejer-even", "--alpha", "1.0", "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["rhs_refined"] is None and row["rhs_ks"] is not None


def test_density_table(capsys, tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("x,fhat\n0,1\n1/4,0.5\n")
    code, out, _ = run(capsys, "density", "--q", "7", "--r", "3", "--g", "2", "--testfn", str(p), "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["lhs_eigen"] is None


def test_jobs_match_serial(capsys):
    base = ["count", "--q", "7", "--r", "3", "--g-list", "1,2,3"]
    serial = json.loads(run(capsys, *base)[1])
    parallel = json.loads(run(capsys, *base, "--jobs", "2")[1])
    assert serial["rows"] == parallel["rows"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyclicfrob.cli", "count", "--q", "3", "--r", "2", "--g", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0]["count"] == 144
