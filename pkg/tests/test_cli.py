import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from pantograph.cli import (
    FieldSpec,
    ProfileSpec,
    parse_field_spec,
    parse_profile_spec,
    run,
)
from pantograph import ValidationError


def call(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


REPORT_KEYS = {"roots", "extrema", "lyapunov", "ratio", "regularity", "meta"}


class TestSpecs:
    def test_parse(self):
        assert parse_field_spec("linear:2") == FieldSpec("linear", (2.0,))
        assert parse_field_spec("affine:1,5") == FieldSpec("affine", (1.0, 5.0))
        assert parse_field_spec("poly:0,0,0,1") == FieldSpec("poly", (0.0, 0.0, 0.0, 1.0))
        assert parse_profile_spec("const:3.5") == ProfileSpec("const", (3.5,))

    @pytest.mark.parametrize("text", [
        "linear", "linear:", "linear:1,2", "affine:1", "cubic:1", "poly:nan",
        "poly:1,inf", "poly:" + ",".join(["1"] * 18), "linear:abc",
    ])
    def test_bad_field(self, text):
        with pytest.raises(ValidationError):
            parse_field_spec(text)

    @pytest.mark.parametrize("text", ["const:1,2", "linear:1", "poly:x"])
    def test_bad_profile(self, text):
        with pytest.raises(ValidationError):
            parse_profile_spec(text)

    finite = st.floats(allow_nan=False, allow_infinity=False)

    @given(st.one_of(
        st.tuples(st.just("linear"), st.tuples(finite)),
        st.tuples(st.just("affine"), st.tuples(finite, finite)),
        st.tuples(st.just("poly"), st.lists(finite, min_size=1, max_size=17).map(tuple)),
    ))
    def test_field_roundtrip(self, kind_coeffs):
        spec = FieldSpec(*kind_coeffs)
        assert parse_field_spec(str(spec)) == spec

    @given(st.one_of(
        st.tuples(st.just("const"), st.tuples(finite)),
        st.tuples(st.just("poly"), st.lists(finite, min_size=1, max_size=17).map(tuple)),
    ))
    def test_profile_roundtrip(self, kind_coeffs):
        spec = ProfileSpec(*kind_coeffs)
        assert parse_profile_spec(str(spec)) == spec

    def test_poly_profile_derivative(self):
        prof = parse_profile_spec("poly:1,2,3").to_profile()
        assert prof.eta(2.0) == 17.0 and prof.eta_deriv(2.0) == 14.0


class TestSolve:
    def test_csv_header_and_first_row(self):
        code, out, _ = call("solve", "--q", "0.5", "--a", "0", "--x0", "1", "--field", "linear:1",
                            "--t-end", "5", "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,x,dx"
        assert lines[1] == "0,1,1"
        t, x, dx = lines[-1].split(",")
        assert float(t) == 5.0

    def test_seventeen_digits(self):
        _, out, _ = call("solve", "--q", "0.5", "--x0", "1", "--field", "linear:1", "--t-end", "1")
        row = out.splitlines()[-1].split(",")
        assert len(row[1].replace(".", "").lstrip("0")) == 17

    def test_profile_json(self):
        code, out, _ = call("solve", "--q", "0.5", "--a", "1", "--profile", "const:1", "--field", "linear:1",
                            "--t-end", "4", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert doc["t"][0] == 1.0 and doc["x"][-1] == pytest.approx(5.0, abs=1e-12)  # x = t on [1, 2], 2 + (t^2 - 4) / 4 on [2, 4]
        assert doc["meta"]["config"]["steps_per_segment"] == 64
        assert doc["meta"]["profile"] == "const:1.0"

    def test_out_file(self, tmp_path):
        target = tmp_path / "sol.csv"
        code, out, _ = call("solve", "--q", "0.5", "--x0", "1", "--field", "linear:-1", "--t-end", "2",
                            "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text().startswith("t,x,dx\n")

    def test_validation_errors(self):
        assert call("solve", "--q", "0.5", "--field", "linear:1", "--t-end", "2")[0] == 2
        assert call("solve", "--q", "1.5", "--x0", "1", "--field", "linear:1", "--t-end", "2")[0] == 2
        assert call("solve", "--q", "0.5", "--x0", "1", "--field", "quad:1", "--t-end", "2")[0] == 2
        code, _, err = call("solve", "--bogus")
        assert code == 2 and "usage" in err
        assert call("frobnicate")[0] == 2

    def test_numerical_failure(self):
        code, _, err = call("solve", "--q", "0.5", "--a", "1", "--profile", "const:10",
                            "--field", "poly:" + ",".join(["0"] * 16 + ["1"]), "--t-end", "50")
        assert code == 3 and "numerical" in err


class TestOtherCommands:
    def test_series(self):
        code, out, _ = call("series", "--q", "0.5", "--lambda", "1", "--t", "1")
        assert code == 0
        assert float(out) == pytest.approx(2.2714925, abs=1e-7)

    def test_series_json(self):
        _, out, _ = call("series", "--q", "0.5", "--lambda", "1", "--t", "1", "--x0", "2", "--format", "json")
        doc = json.loads(out)
        assert doc["value"] == pytest.approx(4.542985111, abs=1e-9)
        assert doc["meta"]["tol"] == 1e-15

    def test_env_tolerance(self, monkeypatch):
        monkeypatch.setenv("PANTO_SEED_TOL", "1e-3")
        _, out, _ = call("series", "--q", "0.5", "--lambda", "1", "--t", "1", "--format", "json")
        doc = json.loads(out)
        assert doc["meta"]["tol"] == 1e-3
        assert doc["value"] != 2.2714925555010614
        monkeypatch.setenv("PANTO_SEED_TOL", "-1")
        assert call("series", "--q", "0.5", "--lambda", "1", "--t", "1")[0] == 2

    def test_regularity(self):
        assert call("regularity", "--q", "0.5", "--a", "1", "--l", "0", "--t", "5")[1] == "3\n"
        _, out, _ = call("regularity", "--q", "0.5", "--a", "1", "--t", "1.5", "--format", "json")
        doc = json.loads(out)
        assert set(doc) == REPORT_KEYS
        assert doc["regularity"][0]["continuous_derivatives"] == 1
        assert call("regularity", "--q", "0.5", "--a", "1", "--t", "2")[0] == 2

    def test_roots(self):
        _, out, _ = call("roots", "--q", "0.5", "--x0", "1", "--field", "linear:-1", "--t-end", "30")
        lines = out.splitlines()
        assert lines[0] == "root" and 0 < float(lines[1]) <= 2.0
        _, out, _ = call("roots", "--q", "0.5", "--x0", "1", "--field", "linear:-1", "--t-end", "30",
                         "--format", "json")
        doc = json.loads(out)
        assert set(doc) == REPORT_KEYS
        assert doc["extrema"][0]["kind"] == "min"

    def test_lyapunov(self):
        _, out, _ = call("lyapunov", "--q", "0.5", "--x0", "1", "--field", "linear:1", "--t-end", "100",
                         "--times", "10,100")
        lines = out.splitlines()
        assert lines[0] == "t,lyapunov,ratio" and len(lines) == 3
        _, out, _ = call("lyapunov", "--q", "0.5", "--x0", "1", "--field", "linear:1", "--t-end", "100",
                         "--format", "json", "--num", "5")
        doc = json.loads(out)
        assert set(doc) == REPORT_KEYS and len(doc["lyapunov"]) == 5

    def test_reconstruct(self):
        code, out, _ = call("reconstruct", "--q", "0.5", "--a", "2", "--profile", "poly:0,1",
                            "--field", "linear:1")
        assert code == 0
        rows = [tuple(map(float, line.split(","))) for line in out.splitlines()[1:]]
        assert rows[0][0] == 0.5 and rows[-1][0] == 1.0
        assert all(x == 1.0 for _, x in rows)

    def test_reconstruct_iterated_json(self):
        _, out, _ = call("reconstruct", "--q", "0.5", "--a", "1", "--profile", "poly:0.5,1",
                         "--field", "linear:1", "--levels", "2", "--format", "json")
        doc = json.loads(out)
        assert doc["levels_completed"] == 1
        assert doc["diagnostic"].startswith("level 2 refused")

    def test_reconstruct_incompatible(self):
        code, _, err = call("reconstruct", "--q", "0.5", "--a", "1", "--profile", "const:1", "--field", "linear:1")
        assert code == 2 and "magnitude" in err

    def test_oscillate(self):
        _, out, _ = call("oscillate", "--lambda", "1", "--q", "0.5", "--t-end", "50", "--format", "json")
        doc = json.loads(out)
        assert set(doc) == REPORT_KEYS
        assert len(doc["roots"]) >= 3
        assert len(doc["meta"]["magnitude_ratios"]) == len(doc["extrema"]) - 1
        _, out, _ = call("oscillate", "--lambda", "1", "--q", "0.5", "--t-end", "50")
        assert out.splitlines()[0] == "kind,t,x"

    def test_sweep(self):
        args = ["sweep", "--grid", "q=0.25,0.5", "lambda=-1,1", "--t-end", "10"]
        _, out, _ = call(*args)
        records = [json.loads(line) for line in out.splitlines()]
        assert [(r["q"], r["lambda"]) for r in records] == [(0.25, -1), (0.25, 1), (0.5, -1), (0.5, 1)]
        assert all(REPORT_KEYS <= set(r) for r in records)
        assert [r["meta"]["index"] for r in records] == [0, 1, 2, 3]
        _, parallel, _ = call(*args, "--jobs", "2")
        assert parallel == out

    def test_sweep_csv_and_errors(self):
        _, out, _ = call("sweep", "--grid", "q=0.5", "lambda=-1", "--t-end", "10", "--format", "csv")
        assert out.splitlines()[0] == "q,lambda,n_roots,first_root,max_abs_extremum,lyapunov_end"
        assert call("sweep", "--grid", "q=0.5", "mu=1", "--t-end", "10")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pantograph", "series", "--q", "0.5", "--lambda", "1", "--t", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout == "2.2714925555010614\n"
