import csv
import json

import pytest

from renyi_exhaust.cli import main
from renyi_exhaust.report import InconsistentResults, MissingInput, build_report


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_matrix_build(tmp_path):
    out = tmp_path / "a4.json"
    assert main(["matrix", "build", "--m", "4", "--rho", "1", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["m"] == 4 and len(d["entries"]) == 5
    assert float(d["entries"][0][1]["lo"]) == -1.0
    assert (tmp_path / "a4.csv").exists()


def test_certify_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["spectral", "certify", "--m", "12", "--out", str(p), "--no-timestamp"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_density_trace(tmp_path):
    out, trace = tmp_path / "f.json", tmp_path / "t.csv"
    assert main(["density", "iterate", "--m", "24", "--tol", "1e-10", "--out", str(out),
                 "--trace", str(trace), "--no-timestamp"]) == 0
    rows = _read_csv(trace)
    assert list(rows[0]) == ["stage", "C_s", "R_half", "sup_diff", "residual"]
    assert float(rows[-1]["sup_diff"]) < 1e-10
    d = json.loads(out.read_text())
    assert set(d) == {"ell", "a", "C", "R_half"}


def test_bad_decimal_rejected():
    with pytest.raises(SystemExit):
        main(["density", "iterate", "--tol", "1,5", "--out", "-"])


def test_sim_and_report(tmp_path):
    cert, sim, rep = tmp_path / "c.json", tmp_path / "s.csv", tmp_path / "r.json"
    main(["spectral", "certify", "--m", "20", "--out", str(cert), "--no-timestamp"])
    assert main(["sim", "run", "--length", "1e5", "--stages", "9", "--seed", "1", "--out", str(sim)]) == 0
    rows = _read_csv(sim)
    assert list(rows[0]) == ["stage", "car_length", "gap_count", "uncovered", "ratio"]
    assert main(["report", "--cert", str(cert), "--sim", str(sim), "--out", str(rep), "--no-timestamp"]) == 0
    d = json.loads(rep.read_text())
    assert d["consistent"] and d["density"]["status"] == "absent"


def test_report_inconsistent_exit(tmp_path):
    cert, sim = tmp_path / "c.json", tmp_path / "s.csv"
    main(["spectral", "certify", "--m", "12", "--out", str(cert), "--no-timestamp"])
    main(["sim", "run", "--length", "1e4", "--stages", "2", "--out", str(sim)])
    assert main(["report", "--cert", str(cert), "--sim", str(sim), "--out", str(tmp_path / "r.json")]) == 1


def test_measure_orbit(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["measure", "orbit", "--x", "1.3", "--steps", "6", "--bins", "1024", "--m", "24",
                 "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert len(rows) == 7 and rows[0]["atom_count"] == "1"
    assert float(rows[-1]["distance_to_fstar"]) < float(rows[1]["distance_to_fstar"])


def test_report_requires_cert():
    with pytest.raises(MissingInput):
        build_report(None)


def test_report_density_mismatch(cert20):
    with pytest.raises(InconsistentResults) as exc:
        build_report(cert20, {"C": "0.25"}, timestamp=False)
    assert exc.value.failed == ["density"]
