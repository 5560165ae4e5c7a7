import csv
import io
import json
import math

import numpy as np
import pytest

from gicb import __version__
from gicb import two_user as tu
from gicb.channel_model import InterferenceNetwork
from gicb.cli import REGION_COLUMNS, SWEEP_COLUMNS, main

IN_REGIME_ARGS = ["--p1", "10", "--p2", "20", "--h12", "0.2", "--h21", "0.3"]
OUT_REGIME_ARGS = ["--p1", "7", "--p2", "7", "--h12", str(math.sqrt(0.2)), "--h21", str(math.sqrt(0.2))]


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


@pytest.fixture(scope="module")
def in_regime_region(tmp_path_factory):
    path = tmp_path_factory.mktemp("region") / "in_regime.csv"
    assert main(["region", *IN_REGIME_ARGS, "--out", str(path)]) == 0
    return path.read_text()


@pytest.fixture(scope="module")
def out_regime_region(tmp_path_factory):
    path = tmp_path_factory.mktemp("region") / "out_regime.csv"
    assert main(["region", *OUT_REGIME_ARGS, "--out", str(path)]) == 0
    return path.read_text()


class TestExitCodes:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, ["bounds", "--channel", str(tmp_path / "nope.json")])
        assert code == 2 and "not found" in err

    def test_malformed_file(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run(capsys, ["bounds", "--channel", str(p)])[0] == 2

    def test_zero_direct_gain(self, capsys, tmp_path):
        p = tmp_path / "zero.json"
        p.write_text(json.dumps({"H": [[0, 0.1], [0.1, 1]], "P": [1, 1]}))
        assert run(capsys, ["bounds", "--channel", str(p)])[0] == 2

    def test_missing_parameters(self, capsys):
        assert run(capsys, ["bounds", "--p1", "1"])[0] == 2

    def test_unknown_command(self, capsys):
        assert run(capsys, ["frobnicate"])[0] == 2

    def test_strong_interference(self, capsys):
        code, _, err = run(capsys, ["bounds", "--p1", "1", "--p2", "1", "--h12", "1.5", "--h21", "0.2"])
        assert code == 3 and "weak interference" in err

    @pytest.mark.parametrize("rng", ["0:60", "60:0:5", "0:60:-5", "a:b:c"])
    def test_bad_range(self, capsys, rng):
        assert run(capsys, ["threshold-sweep", "--snr-db-range", rng])[0] == 2

    @pytest.mark.parametrize("tol", ["0", "-1e-6"])
    def test_bad_tolerance(self, capsys, tol):
        assert run(capsys, ["verify", "--tol", tol])[0] == 2

    @pytest.mark.parametrize("cmd", ["bounds", "network-bounds", "verify"])
    def test_csv_refused_for_json_reports(self, capsys, cmd):
        assert run(capsys, [cmd, "--format", "csv"])[0] == 2

    def test_network_file_with_wrong_m(self, capsys, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"M": 3, "H": [[1, 0.1], [0.1, 1]], "P": [1, 1]}))
        assert run(capsys, ["network-bounds", "--channel", str(p)])[0] == 2


@pytest.mark.slow
class TestBounds:
    def test_in_regime_report(self, capsys):
        code, out, _ = run(capsys, ["bounds", *IN_REGIME_ARGS])
        doc = json.loads(out)
        assert code == 0
        assert doc["version"] == __version__
        assert set(doc["tolerances"]) >= {"psd", "mutual_information", "region_containment"}
        assert doc["low_interference"]["holds"] is True
        assert doc["low_interference"]["value"] == pytest.approx(0.92)
        sc = doc["sum_capacity"]
        assert sc["established"] and sc["value"] == pytest.approx(3.1198, abs=1e-4)
        assert len(doc["etw_constraints"]) == 7
        assert len(doc["epi_boundary"]) == 512

    def test_out_regime_report_from_file(self, capsys, tmp_path):
        p = tmp_path / "out_regime.json"
        p.write_text(json.dumps({"M": 2, "H": [[1, math.sqrt(0.2)], [math.sqrt(0.2), 1]], "P": [7, 7]}))
        code, out, _ = run(capsys, ["bounds", "--channel", str(p)])
        sc = json.loads(out)["sum_capacity"]
        assert code == 0 and not sc["established"] and sc["value"] is None
        assert sc["inner"] < sc["outer"]

    def test_raw_channel_is_standardized(self, capsys, tmp_path):
        p = tmp_path / "raw.json"
        p.write_text(json.dumps({"H": [[2, 0.4], [0.6, 2]], "P": [2.5, 5], "noise": [1, 1]}))
        code, out, _ = run(capsys, ["network-bounds", "--channel", str(p)])
        doc = json.loads(out)
        assert code == 0 and doc["channel"]["P"] == pytest.approx([10.0, 20.0])
        assert doc["tin_sum_rate"] == pytest.approx(3.1198, abs=1e-4)


class TestRegion:
    def test_columns(self, in_regime_region):
        header, table = read_csv(in_regime_region)
        assert tuple(header) == REGION_COLUMNS
        assert table.shape == (512, 6)
        assert table[0, 0] == 0.0 and table[-1, 0] == pytest.approx(0.5 * math.log2(11))

    @pytest.mark.parametrize("which", ["in_regime_region", "out_regime_region"])
    def test_pointwise_ordering(self, which, request):
        _, t = read_csv(request.getfixturevalue(which))
        hk, etw, bc, epi = t[:, 2], t[:, 3], t[:, 4], t[:, 5]
        assert np.all(hk <= epi + 1e-9)
        assert np.all(epi <= np.minimum(etw, bc) + 1e-9)
        assert np.all(t[:, 1] <= hk + 1e-9)

    def test_in_regime_touches_tin(self, in_regime_region):
        _, t = read_csv(in_regime_region)
        r1, r2 = tu.tin_rates(InterferenceNetwork.two_user(10, 20, 0.2, 0.3))
        k = np.searchsorted(t[:, 0], r1)
        # the TIN corner lies between grid points k-1 and k; the outer curve passes within a step
        step = t[1, 0] - t[0, 0]
        assert t[k - 1, 5] >= r2 - 1e-9
        assert t[k, 5] <= r2 + 2 * step

    def test_out_regime_strict_gap(self, out_regime_region):
        _, t = read_csv(out_regime_region)
        hk, epi = t[:, 2], t[:, 5]
        # both curves sit at the single-user rate for small R1
        inside = np.isfinite(hk) & (hk < 0.5 * math.log2(8) - 1e-6)
        assert inside.sum() > 400
        assert np.all(epi[inside] > hk[inside] + 1e-9)
        mid = (t[:, 0] > 0.5) & (t[:, 0] < 1.4)
        assert np.all(epi[mid] - hk[mid] > 0.1)

    def test_zero_interference_rectangle(self, capsys):
        code, out, _ = run(capsys, ["region", "--p1", "3", "--p2", "15", "--h12", "0", "--h21", "0"])
        _, t = read_csv(out)
        c2 = 0.5 * math.log2(16)
        assert code == 0
        for col in (3, 4, 5):
            np.testing.assert_allclose(t[:, col], c2, atol=1e-9)

    def test_json_variant(self, capsys):
        code, out, _ = run(capsys, ["region", "--p1", "3", "--p2", "15", "--h12", "0", "--h21", "0",
                                    "--format", "json"])
        doc = json.loads(out)
        assert code == 0 and doc["columns"] == list(REGION_COLUMNS) and len(doc["rows"]) == 512


class TestThresholdSweep:
    def test_default_two_user(self, capsys):
        code, out, _ = run(capsys, ["threshold-sweep", "--snr-db-range", "0:60:5"])
        header, t = read_csv(out)
        assert code == 0 and tuple(header) == SWEEP_COLUMNS["two-user"]
        assert t.shape == (13, 2)
        assert np.all(np.diff(t[:, 1]) > 0)
        slope = (t[-1, 1] - t[-3, 1]) / (t[-1, 0] - t[-3, 0])
        assert slope == pytest.approx(1 / 3, abs=0.01)

    @pytest.mark.slow
    def test_three_user_columns(self, capsys, monkeypatch):
        monkeypatch.setenv("GICB_THREADS", "4")
        code, out, _ = run(capsys, ["threshold-sweep", "--mode", "three-user-sym",
                                    "--snr-db-range", "0:30:10"])
        header, t = read_csv(out)
        assert code == 0 and tuple(header) == SWEEP_COLUMNS["three-user-sym"]
        assert t.shape == (4, 3)
        assert t[1, 1] > t[1, 2] + 1.0

    @pytest.mark.slow
    def test_byte_identical_across_thread_counts(self, tmp_path, monkeypatch):
        outputs = []
        for threads in ("1", "3", "3"):
            monkeypatch.setenv("GICB_THREADS", threads)
            p = tmp_path / f"sweep{len(outputs)}.json"
            assert main(["threshold-sweep", "--mode", "three-user-sym", "--snr-db-range", "5:20:5",
                         "--format", "json", "--out", str(p)]) == 0
            outputs.append(p.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]
        doc = json.loads(outputs[0])
        assert doc["version"] == __version__ and "tolerances" in doc
        assert len(doc["witnesses"]) == 4


class TestNetworkBounds:
    def test_three_user_symmetric(self, capsys):
        code, out, _ = run(capsys, ["network-bounds", "--mode", "three-user-sym", "--p1", "7",
                                    "--h12", "0.2"])
        doc = json.loads(out)
        sec = doc["three_user_symmetric"]
        assert code == 0 and sec["feasible"]
        assert sec["witness_sum_bound"] == pytest.approx(sec["sum_capacity"], abs=1e-9)
        assert doc["vector_genie_sum_bound"] >= doc["tin_sum_rate"]

    def test_many_to_one_file(self, capsys, tmp_path):
        p = tmp_path / "m1.json"
        p.write_text(json.dumps({"M": 3, "H": [[1, .6, .6], [0, 1, 0], [0, 0, 1]], "P": [1, 1, 1]}))
        code, out, _ = run(capsys, ["network-bounds", "--channel", str(p)])
        sec = json.loads(out)["many_to_one"]
        assert code == 0 and sec["condition"] == pytest.approx(0.72)
        assert sec["sum_capacity"]["value"] == pytest.approx(1.33060, abs=1e-5)

    def test_byte_identical(self, capsys):
        argv = ["network-bounds", "--mode", "three-user-sym", "--p1", "7", "--h12", "0.2"]
        first = run(capsys, argv)[1]
        assert run(capsys, argv)[1] == first


class TestVerifyCommand:
    def test_default(self, capsys):
        code, out, _ = run(capsys, ["verify"])
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["failures"] == []

    def test_custom_tolerance(self, capsys, tmp_path):
        p = tmp_path / "v.json"
        assert main(["verify", "--tol", "1e-6", "--out", str(p)]) == 0
        doc = json.loads(p.read_text())
        assert doc["tolerances"]["override"] == 1e-6
        assert all(r["tol"] == 1e-6 for r in doc["properties"] if r["name"] == "epi_equality")
