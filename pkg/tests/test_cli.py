import csv
import io
import json

import pytest

from qbl import cli, enumeration, expsums, geometry, reporting


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("QBL_CACHE_DIR", str(tmp_path / "qcache"))
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_count_bound_one(capsys):
    code, out, _ = run(capsys, "count", "--bound", "1")
    assert code == 0
    assert '"canonical_count": 24' in out
    doc = json.loads(out)
    assert doc["schema_version"] == reporting.SCHEMA_VERSION
    assert set(doc) >= {"schema_version", "command", "params", "result", "provenance"}
    assert set(doc["provenance"]) == {"code_version", "elapsed_seconds", "threads"}
    assert doc["result"]["canonical_count"] == 24


def test_env_var_picks_cache_dir(capsys, isolated):
    run(capsys, "count", "--bound", "5")
    assert (isolated / "qcache" / reporting.CACHE_FILE).exists()
    assert not (isolated / "cache").exists()


def test_cache_flag_overrides_env(capsys, isolated):
    run(capsys, "count", "--bound", "5", "--cache", str(isolated / "other"))
    assert (isolated / "other" / reporting.CACHE_FILE).exists()


def test_cache_hit_skips_enumerator(capsys):
    before = enumeration.CALLS["count_points"]
    code, first, err1 = run(capsys, "count", "--bound", "777")
    assert code == 0 and "cache hit" not in err1
    assert enumeration.CALLS["count_points"] == before + 1
    code, second, err2 = run(capsys, "count", "--bound", "777")
    assert code == 0 and "cache hit" in err2
    assert enumeration.CALLS["count_points"] == before + 1
    a, b = json.loads(first), json.loads(second)
    assert reporting.strip_timing(a) == reporting.strip_timing(b)


def test_no_cache_recomputes(capsys, isolated):
    before = enumeration.CALLS["count_points"]
    run(capsys, "count", "--bound", "10", "--no-cache")
    run(capsys, "count", "--bound", "10", "--no-cache")
    assert enumeration.CALLS["count_points"] == before + 2
    assert not (isolated / "qcache").exists()


def test_reports_reproduce_modulo_timing(capsys):
    _, a, _ = run(capsys, "series", "--x", "1,2,3,-5", "--prime-bound", "200", "--no-cache")
    _, b, _ = run(capsys, "series", "--x", "1,2,3,-5", "--prime-bound", "200", "--no-cache")
    da, db = json.loads(a), json.loads(b)
    assert reporting.strip_timing(da) == reporting.strip_timing(db)
    # after blanking the timing fields the bytes agree too
    for d in (da, db):
        d["created_at"] = ""
        d["provenance"]["elapsed_seconds"] = 0.0
    assert reporting.dumps_json(da) == reporting.dumps_json(db)


def test_torn_cache_line_is_ignored(capsys, isolated):
    run(capsys, "count", "--bound", "3")
    path = isolated / "qcache" / reporting.CACHE_FILE
    with path.open("a") as fh:
        fh.write('{"fingerprint": "abc", "resu')
    code, out, err = run(capsys, "count", "--bound", "3")
    assert code == 0 and "cache hit" in err


def test_series_csv_columns(capsys):
    code, out, _ = run(capsys, "series", "--x", "1,2,3,-5", "--prime-bound", "50",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["p", "factor", "method", "r_used"]
    assert [int(r["p"]) for r in rows][:4] == [2, 3, 5, 7]
    methods = {int(r["p"]): r["method"] for r in rows}
    # bad primes divide 2 * 1 * 2 * 3 * (-5)
    assert {p for p, m in methods.items() if m == "lifted"} == {2, 3, 5}
    assert set(methods.values()) == {"lifted", "good_closed"}


def test_csv_reals_carry_17_digits(capsys):
    _, out, _ = run(capsys, "count", "--bound", "1000", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert len(row["predicted"].replace(".", "").replace("e+", "").lstrip("0")) >= 16
    _, js, _ = run(capsys, "count", "--bound", "1000")
    assert float(row["predicted"]) == json.loads(js)["result"]["predicted"]


def test_tau_estimate_round_trip():
    t = geometry.TauEstimate(value=247.50725900629388, method="via_rho",
                             abs_error_bound=6.757332483266777e-05, sample_budget=123456)
    doc = reporting.build_report("constants", {}, {"estimates": [t]}, 0.5, 1)
    back = reporting.parse_report(reporting.dumps_json(doc))["result"]["estimates"][0]
    assert geometry.TauEstimate(**back) == t
    assert format(back["value"], ".17g") == format(t.value, ".17g")


def test_constants_both_overlap(capsys):
    code, out, _ = run(capsys, "constants", "--method", "both", "--tol", "1e-3", "--no-cache")
    assert code == 0
    res = json.loads(out)["result"]
    ests = [geometry.TauEstimate(**e) for e in res["estimates"]]
    assert [e.method for e in ests] == ["via_rho", "via_sigma"]
    assert res["consistent"] and ests[0].consistent_with(ests[1])
    lo = max(e.value - e.abs_error_bound for e in ests)
    hi = min(e.value + e.abs_error_bound for e in ests)
    assert lo <= hi


def test_fiber_y_report(capsys):
    code, out, _ = run(capsys, "fiber-y", "--y", "1,1,1,1", "--radius", "3")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["minima"] == [1, 1, 1]
    # x in [-3,3]^4 with x1+x2+x3+x4 = 0, counted directly
    from itertools import product
    want = sum(1 for x in product(range(-3, 4), repeat=4) if sum(x) == 0)
    assert res["count"] == want


def test_fiber_x_report(capsys):
    code, out, _ = run(capsys, "fiber-x", "--x", "1,1,1,-1", "--ybound", "1", "--no-cache")
    assert code == 0
    assert json.loads(out)["result"]["count"] == 12


def test_out_file(capsys, isolated):
    target = isolated / "r.json"
    code, out, _ = run(capsys, "count", "--bound", "1", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["canonical_count"] == 24


# ------------------------------------------------------------ exit codes

def test_exit_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "quick")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["passed"] and len(res["checks"]) == 12


def test_exit_1_on_corrupted_psi(capsys, monkeypatch):
    # break only the closed form; the brute-force route stays honest
    real = expsums.euler_phi
    monkeypatch.setattr(expsums, "euler_phi", lambda n: real(n) + 1)
    code, out, _ = run(capsys, "verify", "--suite", "quick")
    assert code == 1
    checks = {c["name"]: c["passed"] for c in json.loads(out)["result"]["checks"]}
    assert checks["psi_values"] is False


@pytest.mark.parametrize("argv", [
    ["count"],
    ["count", "--bound", "0"],
    ["count", "--bound", "-4"],
    ["count", "--bound", "abc"],
    ["count", "--bound", str(2 ** 63)],
    ["count", "--bound", "5", "--split", "diagonal"],
    ["count", "--bound", "5", "--frobnicate"],
    ["count", "--bound", "5", "--format", "xml"],
    ["count", "--bound", "5", "--threads", "0"],
    ["fiber-x", "--x", "1,2,3", "--ybound", "3"],
    ["fiber-x", "--x", "1,2,3,4,5", "--ybound", "3"],
    ["fiber-x", "--x", "1,0,3,-4", "--ybound", "3"],
    ["fiber-x", "--x", "1,2,3,-4", "--ybound", "3", "--tol", "-1"],
    ["fiber-y", "--y", "0,0,0,0", "--radius", "2"],
    ["fiber-y", "--y", "1,x,1,1", "--radius", "2"],
    ["series", "--x", "1,1,-1,-1"],
    ["constants", "--method", "monte-carlo"],
    ["verify", "--suite", "huge"],
    ["launch"],
    [],
])
def test_exit_2_usage(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_exit_2_unwritable_out(capsys, isolated):
    bad = isolated / "missing" / "dir" / "r.json"
    code, _, err = run(capsys, "count", "--bound", "1", "--out", str(bad))
    assert code == 2 and "cannot write" in err


def test_negative_vector_arguments(capsys):
    code, out, _ = run(capsys, "fiber-x", "--x", "-1,1,1,1", "--ybound", "1", "--no-cache")
    assert code == 0
    assert json.loads(out)["params"]["x"] == [-1, 1, 1, 1]


def test_exit_3_unreachable_tolerance(capsys):
    code, _, err = run(capsys, "fiber-x", "--x", "1,2,3,-5", "--ybound", "3",
                       "--tol", "1e-30", "--no-cache")
    assert code == 3
    assert "numerical failure" in err


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "qbl", "count", "--bound", "1", "--no-cache"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["result"]["canonical_count"] == 24
