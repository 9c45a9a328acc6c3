import json
import math

import pytest

from spectral_corner import SpecError
from spectral_corner.cli import RunConfig, main, run

from .conftest import SLIT_SQUARE_DOC
from .oracles import SQUARE_ZETA_PRIME0

SQUARE_DOC = {"kind": "rectangle", "params": {"a": 1.0, "b": 1.0}}
DISK_DOC = {"kind": "disk", "params": {"R": 1.0}}


@pytest.fixture()
def square_doc(tmp_path):
    p = tmp_path / "square.json"
    p.write_text(json.dumps(SQUARE_DOC))
    return str(p)


@pytest.fixture()
def disk_doc(tmp_path):
    p = tmp_path / "disk.json"
    p.write_text(json.dumps(DISK_DOC))
    return str(p)


def run_json(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out


class TestArtifacts:
    def test_spectrum_json_stamps(self, square_doc, capsys):
        code, out = run_json(["spectrum", "--domain", square_doc,
                              "--eigs", "10"], capsys)
        assert code == 0
        doc = json.loads(out.out)
        assert doc["command"] == "spectrum"
        assert len(doc["input_hash"]) == 64
        assert doc["version"]
        assert "error" in doc["result"]
        assert doc["result"]["eigenvalues"][0] == pytest.approx(
            2 * math.pi ** 2)

    def test_byte_identical_reruns(self, square_doc, tmp_path, capsys):
        outs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            code = main(["fit", "--domain", square_doc, "--eigs", "200",
                         "--seed", "3", "--out", str(path)])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_csv_headers_and_parseable_numbers(self, square_doc, capsys):
        code, out = run_json(["trace", "--domain", square_doc,
                              "--eigs", "100", "--format", "csv"], capsys)
        assert code == 0
        lines = out.out.strip().splitlines()
        assert lines[0].startswith("# version,")
        assert lines[1].startswith("# input_hash,")
        assert lines[2] == "t,trace,error"
        for line in lines[3:]:
            t, tr, err = line.split(",")
            assert float(tr) > 0 and float(err) >= 0
        assert float(t) > 0

    def test_input_hash_tracks_config(self, square_doc, tmp_path):
        texts = []
        for seed in ("0", "1"):
            path = tmp_path / f"s{seed}.json"
            main(["mc", "--domain", square_doc, "--samples", "500",
                  "--steps", "16", "--seed", seed, "--out", str(path)])
            texts.append(json.loads(path.read_text()))
        assert texts[0]["input_hash"] != texts[1]["input_hash"]

    def test_every_row_carries_error_field(self, square_doc, capsys):
        for argv in (["trace", "--domain", square_doc, "--eigs", "100"],
                     ["fit", "--domain", square_doc, "--eigs", "100"],
                     ["wedge", "--alpha", "1.0", "--t", "0.05"],
                     ["mc", "--domain", square_doc, "--samples", "500",
                      "--steps", "16"]):
            code, out = run_json(argv, capsys)
            assert code == 0
            result = json.loads(out.out)["result"]
            if "rows" in result:
                assert all("error" in row or "a_remainder" in row
                           for row in result["rows"])
            else:
                assert "error" in result


class TestCommands:
    def test_zdet_square_matches_oracle(self, square_doc, capsys):
        code, out = run_json(["zdet", "--domain", square_doc,
                              "--eigs", "100"], capsys)
        assert code == 0
        result = json.loads(out.out)["result"]
        assert result["zeta_prime0"] == pytest.approx(SQUARE_ZETA_PRIME0,
                                                      abs=1e-6)
        assert result["zdet"] == pytest.approx(
            math.exp(-SQUARE_ZETA_PRIME0), rel=1e-6)

    def test_zeta_values(self, square_doc, capsys):
        code, out = run_json(["zeta", "--domain", square_doc, "--eigs", "100",
                              "--s", "2.0"], capsys)
        assert code == 0
        row = json.loads(out.out)["result"]["values"][0]
        assert row["route"] == "continued"

    def test_anomaly_constant_sigma(self, square_doc, capsys):
        code, out = run_json(["anomaly", "--domain", square_doc,
                              "--sigma", "0.3"], capsys)
        assert code == 0
        result = json.loads(out.out)["result"]
        assert result["passed"]
        assert result["rhs"] == pytest.approx(0.15, abs=1e-10)

    def test_wedge_bounds_hold(self, capsys):
        code, out = run_json(["wedge", "--alpha", "0.5", "2.0", "3.0",
                              "--eps", "1.0", "--t", "0.05", "0.1"], capsys)
        assert code == 0
        rows = json.loads(out.out)["result"]["rows"]
        assert len(rows) == 6
        assert all(r["pass"] for r in rows)


class TestFailures:
    def test_invalid_domain_doc_exits_2(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"kind": "hexagon", "params": {}}))
        code, out = run_json(["spectrum", "--domain", str(p)], capsys)
        assert code == 2
        err = json.loads(out.err)
        assert err["error"]["kind"] == "spec"

    def test_missing_domain_exits_2(self, capsys):
        code, out = run_json(["spectrum"], capsys)
        assert code == 2

    def test_missing_file_exits_2(self, capsys):
        code, out = run_json(["spectrum", "--domain", "/no/such/file.json"],
                             capsys)
        assert code == 2

    def test_numerical_failure_exits_3(self, disk_doc, capsys):
        code, out = run_json(["trace", "--domain", disk_doc, "--eigs", "50",
                              "--t-min", "1e-6", "--t-max", "1e-5"], capsys)
        assert code == 3
        err = json.loads(out.err)
        assert err["error"]["kind"] == "numerical"
        assert err["error"]["stage"]

    def test_bad_flag_values_exit_2(self, square_doc, capsys):
        code, out = run_json(["trace", "--domain", square_doc,
                              "--tol", "-1"], capsys)
        assert code == 2


class TestRunConfig:
    def test_direct_invocation(self, square_doc, tmp_path):
        out = tmp_path / "direct.json"
        cfg = RunConfig(command="spectrum", domain=square_doc, eigs=10,
                        out=str(out))
        assert run(cfg) == 0
        doc = json.loads(out.read_text())
        assert doc["result"]["count"] >= 10

    def test_validation(self):
        with pytest.raises(SpecError):
            RunConfig(command="frobnicate")
        with pytest.raises(SpecError):
            RunConfig(command="trace", format="xml")
        with pytest.raises(SpecError):
            RunConfig(command="trace", grid_h=-0.1)
