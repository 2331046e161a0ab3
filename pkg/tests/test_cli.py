import json
import math
import os

import numpy as np
import pytest

from truncmean.cli import run


@pytest.fixture()
def zeros_file(tmp_path):
    p = tmp_path / "zeros.txt"
    p.write_text("# constant sample\n" + "0.0\n" * 1000, encoding="ascii")
    return str(p)


@pytest.fixture()
def gauss_file(tmp_path):
    rng = np.random.default_rng(8)
    p = tmp_path / "gauss.txt"
    p.write_text("\n".join(repr(float(v)) for v in rng.normal(size=1000)) + "\n",
                 encoding="ascii")
    return str(p)


def manifest_of(text):
    line = text.splitlines()[0]
    assert line.startswith("# manifest ")
    return json.loads(line[len("# manifest "):])


def replay(text):
    return run(manifest_of(text)["argv"])


class TestEstimate:
    def test_constant_sample_iterated(self, zeros_file):
        code, text = run(["estimate", "--input", zeros_file, "--method",
                          "iterated", "--v0", "1", "--delta0", "1", "--eps",
                          "1e-6", "--seed", "7", "--jitter", "off"])
        assert code == 0
        assert "point          = 0.0" in text
        hw = float(next(l for l in text.splitlines()
                        if l.startswith("half_width")).split("=")[1])
        assert 0.0 < hw < math.inf

    def test_replay_is_byte_identical(self, gauss_file):
        argv = ["estimate", "--input", gauss_file, "--method",
                "iterated-empirical", "--v0", "1", "--eps", "1e-3",
                "--seed", "3", "--format", "csv"]
        code1, t1 = run(argv)
        code2, t2 = replay(t1)
        assert (code1, code2) == (0, 0)
        assert t1 == t2

    def test_parse_error_exits_2(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("1.0\nnot-a-number\n", encoding="ascii")
        code, text = run(["estimate", "--input", str(p), "--method",
                          "truncated", "--v0", "1"])
        assert code == 2
        assert "not-a-number" in text

    def test_missing_file_exits_2(self):
        code, _ = run(["estimate", "--input", "/nonexistent", "--method",
                       "truncated", "--v0", "1"])
        assert code == 2

    def test_last_step_infeasible_exits_3(self, gauss_file):
        # eps2 far below the feasibility threshold at tiny beta
        code, text = run(["estimate", "--input", gauss_file, "--method",
                          "last-step", "--v0", "1", "--eps2", "1e-200",
                          "--eps1", "1e-3", "--beta", "100"])
        assert code == 3
        assert "infeasible" in text

    def test_kurtosis_no_root_exits_4(self, zeros_file):
        code, text = run(["estimate", "--input", zeros_file, "--method",
                          "kurtosis", "--c", "3", "--eps", "0.01"])
        assert code == 4
        assert "no root" in text

    def test_kurtosis_on_data(self, tmp_path):
        rng = np.random.default_rng(12)
        p = tmp_path / "g2.txt"
        p.write_text("\n".join(repr(float(v)) for v in rng.normal(size=2000)) + "\n")
        code, text = run(["estimate", "--input", str(p), "--method",
                          "kurtosis", "--c", "3", "--eps", "0.01",
                          "--seed", "5", "--format", "csv"])
        assert code == 0
        assert "variance_interval" in text

    def test_lepski_flags_theoretical(self, gauss_file):
        code, text = run(["estimate", "--input", gauss_file, "--method",
                          "lepski", "--eps", "1e-3"])
        assert code == 0
        assert "theoretical-only" in text


class TestCurves:
    def test_header_and_columns(self):
        code, text = run(["curves", "--n", "1000", "--curves",
                          "chebyshev,gaussian-benchmark",
                          "--eps-grid", "0.05,0.01,0.001"])
        assert code == 0
        lines = text.splitlines()
        assert lines[1] == "epsilon,chebyshev,gaussian-benchmark"
        for row in lines[2:]:
            e, ch, gb = (float(t) for t in row.split(","))
            assert ch > gb  # Chebyshev exceeds the benchmark at small eps

    def test_unknown_curve_exits_2(self):
        code, _ = run(["curves", "--n", "100", "--curves", "no-such-curve"])
        assert code == 2

    def test_empty_grid_header_only(self):
        code, text = run(["curves", "--n", "100", "--curves", "chebyshev",
                          "--eps-grid", ""])
        assert code == 0
        assert text.splitlines()[1] == "epsilon,chebyshev"
        assert len(text.splitlines()) == 2

    def test_infeasible_cells_are_inf(self):
        code, text = run(["curves", "--n", "1000", "--curves",
                          "lower-kurtosis", "--eps-grid", "0.1,0.01"])
        assert code == 0
        rows = text.splitlines()[2:]
        assert rows[0].endswith(",inf")  # 0.1 > 1/(4e)
        assert not rows[1].endswith(",inf")

    def test_replay_byte_exact(self):
        argv = ["curves", "--n", "300", "--v0", "1", "--curves",
                "iterated-empirical,last-step,chebyshev",
                "--eps-grid", "1e-2,1e-4,1e-6,1e-8"]
        _, t1 = run(argv)
        _, t2 = replay(t1)
        assert t1 == t2

    def test_plot_renders_png(self, tmp_path):
        out = str(tmp_path / "c.csv")
        code, _ = run(["curves", "--n", "200", "--curves", "chebyshev",
                       "--eps-grid", "0.1,0.01", "--out", out, "--plot"])
        assert code == 0
        assert os.path.exists(out)
        with open(out + ".png", "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


class TestSimulate:
    def test_zero_replicates(self):
        code, text = run(["simulate", "--dist", "gaussian", "--n", "20",
                          "--method", "empirical-chebyshev", "--eps", "0.05",
                          "--replicates", "0"])
        assert code == 0
        assert "replicate,estimate,half_width,miss" in text

    def test_worker_count_excluded_from_manifest(self):
        argv = ["simulate", "--dist", "gaussian", "--n", "30", "--method",
                "iterated-empirical", "--eps", "0.01", "--replicates", "20",
                "--seed", "5"]
        _, t1 = run(argv + ["--workers", "1"])
        _, t4 = run(argv + ["--workers", "4"])
        assert t1 == t4
        assert "--workers" not in json.dumps(manifest_of(t1)["argv"])
        _, t_replay = replay(t1)
        assert t_replay == t1

    def test_three_point_misses(self):
        code, text = run(["simulate", "--dist", "three-point", "--n", "100",
                          "--eta", "0.12", "--method", "empirical-chebyshev",
                          "--eps", "0.02", "--v0", "1", "--replicates", "400",
                          "--seed", "9"])
        assert code == 0
        summary = json.loads(text.splitlines()[-1][len("# summary "):])
        assert summary["replicates"] == 400


def test_lower_bounds_table():
    code, text = run(["lower-bounds", "--n", "1000", "--eps-grid",
                      "1e-2,1e-4,1e-6"])
    assert code == 0
    for row in text.splitlines()[2:]:
        e, ch, lv, ku, lk = (float(t) for t in row.split(","))
        assert lv <= ch
        assert lk <= ku
