import json
import re
import time

import numpy as np
import pytest

from qstockwell import quat
from qstockwell.cli import main
from qstockwell.io import read_field, read_pgm
from qstockwell.qft import check_convolution_hypothesis
from qstockwell.stockwell import StockwellField


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QSW_THREADS", raising=False)

    def call(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return call


def test_gen_gaussian(run, tmp_path):
    code, out, _ = run("gen", "gaussian", "--sigma", 1, "-o", "g.qsw")
    assert code == 0
    f = read_field(tmp_path / "g.qsw")
    assert f.shape == (64, 64)
    assert np.array_equal(f.samples[32, 32], [1.0, 0.0, 0.0, 0.0])


def test_gen_from_rgb_raster(run, tmp_path):
    rng = np.random.default_rng(4)
    pixels = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    (tmp_path / "img.ppm").write_bytes(b"P6\n8 8\n255\n" + pixels.tobytes())
    code, _, _ = run("gen", "rgb-image", "--image", "img.ppm", "-o", "img.csv")
    assert code == 0
    f = read_field(tmp_path / "img.csv")
    assert f.shape == (8, 8)
    assert not np.any(f.samples[..., 0])
    assert np.allclose(f.samples[..., 1:], pixels / 255.0, rtol=0, atol=1e-15)


def test_generated_dog_window_passes_hypothesis_after_reload(run, tmp_path):
    assert run("gen", "admissible_dog", "--alpha", 0.5, "--beta", 2, "-o", "dog.qsw")[0] == 0
    assert check_convolution_hypothesis(read_field(tmp_path / "dog.qsw")).passed


def test_qft_commands(run, tmp_path):
    run("gen", "gaussian", "--sigma", 1, "-o", "g.qsw")
    assert run("qft", "g.qsw", "-o", "G.qsw")[0] == 0
    G = read_field(tmp_path / "G.qsw")
    u, v = G.mesh()
    # closed-form spectrum, which peaks at 1 in the centre
    assert np.max(np.abs(G.samples[..., 0] - np.exp(-(u**2 + v**2) / 2))) < 1e-6
    assert abs(G.samples[..., 0].max() - np.exp(-(u[31, 0] ** 2 + v[0, 31] ** 2) / 2)) < 1e-6

    assert run("qft", "G.qsw", "--inverse", "-o", "back.qsw")[0] == 0
    back, g = read_field(tmp_path / "back.qsw"), read_field(tmp_path / "g.qsw")
    assert back.axes == g.axes
    assert np.max(np.abs(back.samples - g.samples)) < 1e-8

    assert run("qft", "g.qsw", "--direct", "-o", "Gd.qsw")[0] == 0
    Gd = read_field(tmp_path / "Gd.qsw")
    assert np.max(np.abs(Gd.samples - G.samples)) / np.max(np.abs(Gd.samples)) < 1e-10


def test_stockwell_round_trip_reports_error(run, tmp_path):
    run("gen", "gaussian", "--sigma", 0.7, "-N", 32, "-L", 4, "-o", "g.qsw")
    code, _, _ = run(
        "stockwell", "g.qsw", "--window", "gaussian_unit:sigma=0.5", "--xi-grid", "dual", "--b-extent", 8, "-o", "S.qsw"
    )
    assert code == 0
    code, out, _ = run("istockwell", "S.qsw", "--reference", "g.qsw", "-o", "r.qsw")
    assert code == 0
    err = float(re.search(r"relative L2 error: (\S+)", out).group(1))
    assert err <= 1e-3


def test_zero_input_gives_zero_coefficients(run, tmp_path):
    run("gen", "gaussian", "--amplitude", 0, "-N", 16, "-L", 4, "-o", "z.qsw")
    assert run("stockwell", "z.qsw", "--xi-extent", 2, "--xi-count", 4, "-o", "S.qsw")[0] == 0
    S = read_field(tmp_path / "S.qsw")
    assert isinstance(S, StockwellField) and not np.any(S.coeffs)


def test_energy_map_peaks_at_signal_location(run, tmp_path):
    run("gen", "gaussian", "--sigma", 0.5, "--center", "1.5,-1", "-N", 32, "-L", 4, "-o", "g.qsw")
    code, out, _ = run(
        "stockwell", "g.qsw", "--window", "gaussian_unit:sigma=0.5", "--xi-extent", 2, "--xi-count", 4,
        "-o", "S.qsw", "--energy-map", "m.pgm", "--map-slice", "3,3",
    )
    assert code == 0 and "energy map" in out
    pixels = read_pgm(tmp_path / "m.pgm")
    row, col = np.unravel_index(np.argmax(pixels), pixels.shape)
    # b-grid equals the signal grid: start -4, step 0.25
    assert (-4 + 0.25 * row, -4 + 0.25 * col) == (1.5, -1.0)
    assert (tmp_path / "m.pgm.minmax.txt").exists()


def test_direct_flag_and_fast_refusal(run, tmp_path):
    run("gen", "gaussian", "-N", 16, "-L", 4, "-o", "g.qsw")
    run("gen", "gaussian", "--center", "0.5,0", "-N", 16, "-L", 4, "-o", "odd.qsw")
    code, _, err = run("stockwell", "g.qsw", "--window", "odd.qsw", "--fast", "--xi-extent", 2, "--xi-count", 2, "-o", "S.qsw")
    assert code == 2 and "convolution hypothesis" in err
    code, out, _ = run("stockwell", "g.qsw", "--window", "odd.qsw", "--xi-extent", 2, "--xi-count", 2, "-o", "S.qsw")
    assert code == 0 and "direct" in out


def test_admissibility_command(run):
    code, out, _ = run("admissibility")
    assert code == 0 and "admissible" in out
    code, out, _ = run("admissibility", "--window", "gaussian_unit:sigma=1")
    assert code == 1 and "divergent" in out


def test_verify_qft_defaults(run, tmp_path):
    t0 = time.perf_counter()
    code, out, _ = run("verify", "--suite", "qft", "--report", "qft.json")
    assert time.perf_counter() - t0 < 60
    assert code == 0
    report = json.loads((tmp_path / "qft.json").read_text())
    assert report["passed"] and all(r["passed"] for r in report["records"])
    assert set(report["records"][0]) >= {"name", "lhs", "rhs", "margin", "passed"}


def test_verify_coarse_grid_fails_with_resolution_label(run, tmp_path):
    code, out, _ = run("verify", "-N", 16, "--report", "r.json")
    assert code == 1
    records = json.loads((tmp_path / "r.json").read_text())["records"]
    plancherel = [r for r in records if r["name"].startswith("plancherel energy ratio")]
    assert plancherel and not plancherel[0]["passed"] and plancherel[0]["label"] == "resolution"
    assert all(r["label"] == "resolution" for r in records if not r["passed"])


def test_verify_uncertainty_suite(run):
    code, out, _ = run("verify", "--suite", "uncertainty")
    assert code == 0
    for name in ("beckner", "heisenberg(p=2,q=2)", "local(alpha=1,p=2)", "donoho-stark(alpha=0.297)", "lieb-concentration(p=4"):
        assert re.search(r"PASS\s+uncertainty\s+" + re.escape(name), out), name


def test_config_file_and_flag_precedence(run, tmp_path):
    (tmp_path / "run.cfg").write_text("N = 16\nL = 4\nformat = csv\n")
    assert run("gen", "gaussian", "--config", "run.cfg", "-N", 32, "-o", "g.out")[0] == 0
    f = read_field(tmp_path / "g.out")
    assert f.shape == (32, 32) and f.axis_x.start == -4.0
    assert (tmp_path / "g.out").read_text().startswith("x1,x2,qr,qi,qj,qk")


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "gaussian", "-N", 24, "-o", "x.qsw"],
        ["gen", "gaussian", "-L", -1, "-o", "x.qsw"],
        ["gen", "gaussian", "--threads", 0, "-o", "x.qsw"],
        ["gen", "mystery", "-o", "x.qsw"],
        ["qft", "missing.qsw", "-o", "x.qsw"],
        ["verify", "--suite", "nonsense"],
        ["verify", "--config", "missing.cfg"],
        ["stockwell", "missing.qsw", "-o", "x.qsw"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(run, argv):
    assert run(*argv)[0] == 2


def test_bad_config_key_exits_2(run, tmp_path):
    (tmp_path / "bad.cfg").write_text("colour = blue\n")
    code, _, err = run("verify", "--config", "bad.cfg")
    assert code == 2 and "colour" in err


def test_bad_thread_variable_exits_2(run, monkeypatch):
    monkeypatch.setenv("QSW_THREADS", "many")
    assert run("verify", "--suite", "qft")[0] == 2


def test_malformed_input_file_exits_2(run, tmp_path):
    (tmp_path / "bad.qsw").write_bytes(b"QSW1garbage")
    assert run("qft", "bad.qsw", "-o", "x.qsw")[0] == 2


def test_help_exits_0(run):
    assert run("--help")[0] == 0
