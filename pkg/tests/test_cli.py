import json
import math

import pytest

from topostab.cli import main
from topostab.io import loads


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def two_points(tmp_path):
    p = tmp_path / "two.csv"
    p.write_text("0,0\n1,0\n")
    return str(p)


def test_verify_flags_paper_violation(two_points, capsys):
    code, out, _ = run(["verify", "--input", two_points, "--scale", "3,3", "--dims", "0"], capsys)
    assert code == 0
    (r,) = json.loads(out)["reports"]
    assert r["measured_bottleneck"] == 1.5
    assert r["holds_paper"] is False and r["regime_contains_one"] is False
    assert r["holds_corrected"] is True and r["bound_corrected"] == 2.0


def test_diagram_and_distance(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["diagram", "--generate", "circle:n=12,seed=7", "--out", str(a)]) == 0
    assert main(["diagram", "--generate", "circle:n=12,seed=7,radius=1.1", "--out", str(b)]) == 0
    da = json.loads(a.read_text())
    assert [d["dim"] for d in da["diagrams"]] == [0, 1]
    assert len(da["diagrams"][1]["pairs"]) >= 1
    code, out, _ = run(["distance", "--diagram-a", str(a), "--diagram-b", str(b), "--wasserstein-p", "2"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    assert res[0]["distances"][0]["metric"] == "bottleneck"
    assert res[0]["distances"][1] == {"metric": "wasserstein", "p": 2.0, "value": res[0]["distances"][1]["value"]}


def test_distance_infinite(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text('{"dim": 1, "pairs": [], "essential": [1.0]}')
    b.write_text('{"dim": 1, "pairs": [[0, 1]], "essential": []}')
    code, out, _ = run(["distance", "--diagram-a", str(a), "--diagram-b", str(b), "--dims", "1"], capsys)
    assert code == 0
    assert json.loads(out)["results"][0]["distances"][0]["value"] == "inf"


def test_bound_cumulative(capsys):
    code, out, _ = run(["bound", "--scale", "1,1.1", "--scale", "1,1.2", "--diam", "1"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["cumulative"]["bound_paper"] == pytest.approx(0.32, abs=1e-15)


def test_optimize(capsys):
    code, out, _ = run(
        ["optimize", "--n", "2", "--diam", "200", "--epsilon", "5", "--strategy", "boundary-spread"], capsys
    )
    assert code == 0
    res = json.loads(out)["result"]
    assert res["factors"] == [1.0, 1.025] and res["bound_at_solution"] == 5.0


def test_iterate(capsys):
    code, out, _ = run(
        ["iterate", "--generate", "gaussian-blobs:n=12,dim=2,seed=3", "--scale", "1,1.1", "--scale", "1,1.2"], capsys
    )
    assert code == 0
    data = json.loads(out)
    assert data["composed"] == [1.0, pytest.approx(1.32)]
    assert all(r["holds_paper"] and r["holds_corrected"] for r in data["reports"])


def test_case_studies(capsys):
    code, out, _ = run(["case-study-rgb", "--epsilon", "10"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["rgb_cube"]["diameter"] == pytest.approx(441.673, abs=1e-3)
    assert data["rgb_cube"]["variability_cap"] == pytest.approx(0.022641, abs=1e-6)
    assert all(r["within_epsilon"] for r in data["verification"])
    code, out, _ = run(["case-study-multimodal"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["assignment"]["group_factors"] == [1.0, 1.025] and data["bound"] == 5.0
    assert data["range_equalization"]["feasible"] is False
    assert all(r["within_epsilon"] for r in data["verification"])


def test_rgb_from_ppm(tmp_path, capsys):
    ppm = tmp_path / "img.ppm"
    ppm.write_text("P3\n2 1\n255\n50 60 40 200 180 220\n")
    code, out, _ = run(["case-study-rgb", "--input", str(ppm), "--epsilon", "5"], capsys)
    assert code == 0
    img = json.loads(out)["image"]
    assert img["diameter"] == pytest.approx(math.sqrt(69300))
    assert img["worked_example"]["printed_diameter"] == 263.02


def test_montecarlo(capsys):
    code, out, _ = run(["montecarlo", "--n", "3", "--trials", "2000", "--seed", "5"], capsys)
    assert code == 0
    data = loads(out)
    assert abs(data["mean_variability"] - 0.5) <= 3 * data["std_error"]
    assert set(data) >= {"mean_variability", "std_error", "expected_bound", "trials", "seed"}


def test_trials_csv_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["trials", "--trials", "6", "--seed", "9", "--mode", "any", "--format", "csv"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert "measured_bottleneck" in header and "trial" in header


def test_trials_outside_regime_never_breaks_corrected(tmp_path):
    out = tmp_path / "t.json"
    assert main(["trials", "--trials", "20", "--seed", "2", "--mode", "above-one", "--dims", "0", "--out", str(out)]) == 0
    agg = json.loads(out.read_text())["aggregates"]
    assert agg["outside"]["corrected_violations"] == 0
    assert agg["contains_one"]["paper_violations"] == 0
    assert agg["outside"]["paper_violations"] > 0


def test_cloud_round_trip_reproduces_diagrams(tmp_path):
    for fmt, suffix in (("csv", ".csv"), ("json", ".json")):
        cloud = tmp_path / f"cloud{suffix}"
        assert main(["cloud", "--generate", "gaussian-blobs:n=15,dim=3,seed=1", "--format", fmt, "--out", str(cloud)]) == 0
        d1, d2 = tmp_path / "d1.json", tmp_path / "d2.json"
        assert main(["diagram", "--generate", "gaussian-blobs:n=15,dim=3,seed=1", "--out", str(d1)]) == 0
        assert main(["diagram", "--input", str(cloud), "--out", str(d2)]) == 0
        assert json.loads(d1.read_text())["diagrams"] == json.loads(d2.read_text())["diagrams"]


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--input", "missing.csv", "--scale", "1,1"],
        ["verify", "--generate", "circle:n=5", "--scale", "1,-1"],
        ["verify", "--generate", "circle:n=5", "--scale", "1,1", "--dims", "3"],
        ["optimize", "--n", "2", "--diam", "0", "--epsilon", "1"],
        ["trials", "--trials", "0"],
        ["verify", "--generate", "circle:n=5"],
        ["nonsense-command"],
        ["verify", "--bogus-flag"],
    ],
)
def test_validation_errors_exit_1(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 1
    assert err


def test_budget_exit_2(capsys):
    code, _, err = run(["diagram", "--generate", "grid:per_axis=9,dim=2", "--dims", "0,1"], capsys)
    assert code == 2 and "budget" in err


def test_ragged_csv_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("0,0\n1,2\n3\n")
    code, _, err = run(["diagram", "--input", str(p)], capsys)
    assert code == 1 and ":3:" in err


def test_unwritable_output(capsys):
    code, _, err = run(["optimize", "--n", "2", "--diam", "3", "--out", "/nonexistent/dir/x.json"], capsys)
    assert code != 0 and err
