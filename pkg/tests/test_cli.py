import csv
import io
import json
import math

import numpy as np
import pytest

from rieszlab.cli import main
from rieszlab.constants import lambda1


def _rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    assert "\r" not in text
    return text, list(csv.reader(io.StringIO(text)))


@pytest.fixture(scope="module")
def spectrum_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "square.json"
    assert main(["spectrum", "--domain", "rect:1x1", "--m", "1", "--basis", "sine:32x32", "--k", "350",
                 "--out", str(path)]) == 0
    return path


class TestConstants:
    def test_massless_row(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["constants", "--d", "2", "--mu", "0", "--out", str(out)]) == 0
        _, rows = _rows(out)
        assert rows[0] == ["d", "mu", "lambda1", "lambda2", "c_d", "method", "residual"]
        assert float(rows[1][2]) == pytest.approx(0.0265258238, abs=5e-11)
        assert float(rows[1][3]) > 0

    def test_mass_one_row_json(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["constants", "--d", "2", "--mu", "1", "--format", "json", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data[0]["lambda1"] == pytest.approx(0.1061032954, abs=5e-11)

    def test_seventeen_digits_round_trip(self, tmp_path):
        out = tmp_path / "c.csv"
        main(["constants", "--d", "2", "--mu", "1", "--out", str(out)])
        _, rows = _rows(out)
        assert float(rows[1][2]) == lambda1(2, 1.0)

    def test_d1_rejected(self, capsys):
        assert main(["constants", "--d", "1"]) == 2
        assert "d must be >= 2" in capsys.readouterr().err

    def test_negative_mu(self):
        assert main(["constants", "--d", "2", "--mu", "-1"]) == 2

    def test_usage_error(self):
        assert main(["constants"]) == 2


class TestPhaseShift:
    def test_columns(self, tmp_path):
        out = tmp_path / "p.csv"
        assert main(["phase-shift", "--lam", "1", "10000", "--out", str(out)]) == 0
        _, rows = _rows(out)
        assert rows[0] == ["omega", "lam", "theta", "theta_prime"]
        assert float(rows[1][2]) == pytest.approx(0.24067399254693642, abs=1e-15)
        assert abs(float(rows[2][2]) - math.pi / 8) < 2e-4

    def test_bad_lam(self):
        assert main(["phase-shift", "--lam", "0"]) == 2


class TestEigenfunction:
    def test_schema_and_bounds(self, tmp_path):
        out = tmp_path / "e.csv"
        assert main(["eigenfunction", "--omega", "1", "--lam", "2", "--t-max", "20", "--samples", "401",
                     "--out", str(out)]) == 0
        text, rows = _rows(out)
        assert text.splitlines()[0] == "t,theta,G,F"
        data = np.array(rows[1:], dtype=float)
        assert data.shape == (401, 4)
        assert np.all(np.diff(data[:, 0]) > 0)
        assert np.all(np.abs(data[:, 3]) <= 2.0)
        assert abs(data[0, 3]) < 1e-4

    def test_bad_samples(self):
        assert main(["eigenfunction", "--lam", "1", "--samples", "1"]) == 2


class TestSpectrum:
    def test_square(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["spectrum", "--domain", "rect:1x1", "--m", "1", "--basis", "sine:24x24", "--k", "60",
                     "--out", str(out)]) == 0
        ev = np.array(json.loads(out.read_text())["eigenvalues"])
        assert ev.shape == (60,) and np.all(ev > 0) and np.all(np.diff(ev) >= 0)

    def test_byte_identical_rerun(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            assert main(["spectrum", "--domain", "rect:1x1", "--m", "1", "--basis", "sine:24x24", "--k", "60",
                         "--out", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_unknown_domain(self, capsys):
        assert main(["spectrum", "--domain", "hexagon:1", "--k", "5"]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_basis(self):
        assert main(["spectrum", "--domain", "rect:1x1", "--basis", "wavelet:3"]) == 2


class TestVerify:
    def test_riesz(self, spectrum_file, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["verify", "--spectrum", str(spectrum_file), "--statistic", "riesz", "--out", str(out)]) == 0
        _, rows = _rows(out)
        assert rows[0] == ["lambda", "N", "R", "prediction", "residual"]
        assert all(math.isfinite(float(r[-1])) for r in rows[1:])
        assert "berezin_check PASS" in capsys.readouterr().err

    def test_heat(self, spectrum_file, tmp_path, capsys):
        out = tmp_path / "h.csv"
        assert main(["verify", "--spectrum", str(spectrum_file), "--statistic", "heat", "--out", str(out)]) == 0
        assert "PASS" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["verify", "--spectrum", str(bad)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--spectrum", str(tmp_path / "absent.json")]) == 2

    def test_bad_window(self, spectrum_file):
        assert main(["verify", "--spectrum", str(spectrum_file), "--window", "5,2"]) == 2


class TestHeatTrace:
    def test_strict_tail_fails_with_status_one(self, spectrum_file):
        # 350 eigenvalues leave a visible tail at t = 0.08; strict mode must refuse.
        assert main(["heat-trace", "--spectrum", str(spectrum_file)]) == 1

    def test_weyl_tail(self, spectrum_file, tmp_path):
        out = tmp_path / "z.csv"
        assert main(["heat-trace", "--spectrum", str(spectrum_file), "--tail", "weyl", "--out", str(out)]) == 0
        _, rows = _rows(out)
        assert rows[0] == ["t", "Z", "prediction", "residual"] and len(rows) == 14

    def test_bad_range(self, spectrum_file):
        assert main(["heat-trace", "--spectrum", str(spectrum_file), "--t-min", "0.3", "--t-max", "0.1"]) == 2
