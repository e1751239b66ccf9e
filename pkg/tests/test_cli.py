import csv
import re

import numpy as np
import pytest

from lgi_decay import cli


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    assert all(len(r) == len(header) for r in body)
    return header, np.array(body, dtype=float)


def max_from_summary(out):
    return float(re.search(r"max_C\d=([-0-9.e+]+)", out).group(1))


class TestConfig:
    def test_file_and_overrides(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# bath\ngamma = 0.3\nlambda=2  # width\nc0 = 0.6,0\nc1_0 = 0,0.8\n")
        cfg = cli.build_config(cfg_file, ["--gamma", "0.2", "--tau-points=10"], tmp_path)
        assert cfg["gamma"] == 0.2
        assert cfg["lambda"] == 2.0
        assert cfg["c1_0"] == 0.8j
        assert cfg.tau_grid.size == 10

    def test_default_tau_grid(self, tmp_path):
        cfg = cli.build_config(None, [], tmp_path)
        grid = cfg.tau_grid
        assert grid.size == 400 and grid[0] > 0 and grid[-1] == pytest.approx(2 * np.pi)

    @pytest.mark.parametrize("text,needle", [
        ("gamma = 0.1\nbogus = 3\n", "bogus"),
        ("gamma 0.1\n", "key = value"),
        ("lambda = five\n", "lambda"),
        ("c0 = 1,2,3\n", "c0"),
    ])
    def test_malformed_file(self, tmp_path, capsys, text, needle):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text(text)
        code, _, err = run(capsys, "amplitude", "--config", cfg_file, "--out", tmp_path)
        assert code == 1
        assert needle in err

    @pytest.mark.parametrize("argv", [["--gamma", "-1"], ["--c0", "0.7"], ["--order", "5"],
                                      ["--method", "euler"], ["--dt"], ["stray"]])
    def test_invalid_values(self, tmp_path, capsys, argv):
        code, _, err = run(capsys, "lgi", "--out", tmp_path, *argv)
        assert code == 1
        assert "config error" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run(capsys, "lgi", "--config", tmp_path / "nope.cfg")
        assert code == 1


class TestAmplitude:
    def test_no_coupling(self, tmp_path, capsys):
        code, _, _ = run(capsys, "amplitude", "--gamma", "0", "--t-max", "5", "--out", tmp_path)
        assert code == 0
        header, data = read_csv(tmp_path / "amplitude.csv")
        assert header == ["t", "re_G", "im_G", "abs_G"]
        assert np.all(data[:, 3] == 1.0)

    def test_weak_coupling_decays(self, tmp_path, capsys):
        code, _, _ = run(capsys, "amplitude", "--gamma", "0.01", "--lambda", "5", "--t-max", "20",
                         "--out", tmp_path)
        assert code == 0
        _, data = read_csv(tmp_path / "amplitude.csv")
        absg = data[:, 3]
        assert np.all(np.diff(absg) <= 1e-12)
        assert absg[-1] < absg[0]

    @pytest.mark.parametrize("method", ["ode-reduction", "volterra-trapezoid"])
    def test_numerical_methods(self, tmp_path, capsys, method):
        code, _, _ = run(capsys, "amplitude", "--method", method, "--t-max", "2", "--gamma", "0.5",
                         "--out", tmp_path / method)
        assert code == 0
        _, num = read_csv(tmp_path / method / "amplitude.csv")
        run(capsys, "amplitude", "--t-max", "2", "--gamma", "0.5", "--out", tmp_path / "ref")
        _, ref = read_csv(tmp_path / "ref" / "amplitude.csv")
        assert np.max(np.abs(num[:, 1:3] - ref[:, 1:3])) < 1e-6

    def test_solver_failure_exit_code(self, tmp_path, capsys):
        code, _, err = run(capsys, "amplitude", "--method", "ode-reduction", "--dt", "1.0",
                           "--gamma", "0.5", "--out", tmp_path)
        assert code == 2
        assert "step size" in err


class TestLgi:
    def test_closed_system_summary(self, tmp_path, capsys):
        code, out, _ = run(capsys, "lgi", "--gamma", "0", "--out", tmp_path)
        assert code == 0
        assert re.match(r"max_C4=\S+ at tau=\S+; violation_intervals=\[.*\]", out.strip())
        assert max_from_summary(out) == pytest.approx(2 * np.sqrt(2), abs=1e-4)
        header, data = read_csv(tmp_path / "lgi_scan.csv")
        assert header == ["tau", "C21", "C32", "C43", "C41", "C4"]
        assert data.shape == (400, 6)

    def test_strong_coupling_short_violation(self, tmp_path, capsys):
        code, out, _ = run(capsys, "lgi", "--gamma", "0.5", "--lambda", "5", "--out", tmp_path)
        assert code == 0
        _, data = read_csv(tmp_path / "lgi_scan.csv")
        violating = data[data[:, -1] > 2, 0]
        assert violating.size == 0 or violating.max() < 1.0

    def test_order3_from_zero(self, tmp_path, capsys):
        code, out, _ = run(capsys, "lgi", "--order", "3", "--tau-min", "0", "--tau-points", "50",
                           "--out", tmp_path)
        assert code == 0
        header, data = read_csv(tmp_path / "lgi_scan.csv")
        assert header == ["tau", "C21", "C32", "C31", "C3"]
        assert data[0, 0] == 0 and data[0, -1] == 1.0
        assert out.startswith("max_C3=")

    def test_numerical_propagator(self, tmp_path, capsys):
        run(capsys, "lgi", "--gamma", "0.3", "--tau-points", "40", "--out", tmp_path / "a")
        code, _, _ = run(capsys, "lgi", "--gamma", "0.3", "--tau-points", "40",
                         "--method", "volterra-trapezoid", "--out", tmp_path / "v")
        assert code == 0
        _, a = read_csv(tmp_path / "a" / "lgi_scan.csv")
        _, v = read_csv(tmp_path / "v" / "lgi_scan.csv")
        assert np.max(np.abs(a - v)) < 1e-5

    def test_deterministic(self, tmp_path, capsys):
        for d in ("x", "y"):
            run(capsys, "lgi", "--gamma", "0.1", "--delta", "3", "--out", tmp_path / d)
        assert (tmp_path / "x" / "lgi_scan.csv").read_bytes() == \
            (tmp_path / "y" / "lgi_scan.csv").read_bytes()


class TestFigure:
    def _maxima(self, tmp_path, fig, param, values):
        out = []
        for v in values:
            _, data = read_csv(tmp_path / f"{fig}_{param}_{v:g}.csv")
            out.append(data)
        return out

    def test_fig1(self, tmp_path, capsys):
        code, out, _ = run(capsys, "figure", "fig1", "--out", tmp_path)
        assert code == 0
        assert sorted(p.name for p in tmp_path.glob("*.csv")) == sorted(
            f"fig1_gamma_{g:g}.csv" for g in (0.01, 0.1, 0.3, 0.5))
        maxima = [d[:, -1].max() for d in self._maxima(tmp_path, "fig1", "gamma", (0.01, 0.1, 0.3, 0.5))]
        assert all(b < a for a, b in zip(maxima, maxima[1:]))
        script = tmp_path / "fig1_plot.py"
        compile(script.read_text(), str(script), "exec")
        assert "axhline(2.0" in script.read_text()

    def test_fig2(self, tmp_path, capsys):
        assert run(capsys, "figure", "fig2", "--out", tmp_path)[0] == 0
        last = []
        for data in self._maxima(tmp_path, "fig2", "lambda", (1, 5, 10, 40)):
            last.append(data[data[:, -1] > 2, 0].max())
        assert all(b < a for a, b in zip(last, last[1:]))

    def test_fig3(self, tmp_path, capsys):
        assert run(capsys, "figure", "--figure", "fig3", "--out", tmp_path)[0] == 0
        maxima = [d[:, -1].max() for d in self._maxima(tmp_path, "fig3", "delta", (0, 5, 10, 50))]
        assert all(b >= a for a, b in zip(maxima, maxima[1:]))
        assert maxima[-1] > maxima[0]

    def test_unknown_figure(self, tmp_path, capsys):
        code, _, err = run(capsys, "figure", "fig9", "--out", tmp_path)
        assert code == 1
        assert "fig9" in err

    def test_thread_cap(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("LGI_DECAY_THREADS", "1")
        assert run(capsys, "figure", "fig1", "--out", tmp_path / "one")[0] == 0
        monkeypatch.setenv("LGI_DECAY_THREADS", "4")
        assert run(capsys, "figure", "fig1", "--out", tmp_path / "four")[0] == 0
        for p in (tmp_path / "one").glob("*.csv"):
            assert p.read_bytes() == (tmp_path / "four" / p.name).read_bytes()
        monkeypatch.setenv("LGI_DECAY_THREADS", "many")
        assert run(capsys, "figure", "fig1", "--out", tmp_path / "bad")[0] == 1


class TestOracleCheck:
    def test_no_coupling_passes(self, tmp_path, capsys):
        code, out, _ = run(capsys, "oracle-check", "--gamma", "0", "--n-modes", "200",
                           "--out", tmp_path)
        assert code == 0
        assert "PASS" in out
        assert float(re.search(r"max_c1_err=(\S+)", out).group(1)) < 1e-15
        header, data = read_csv(tmp_path / "oracle_check.csv")
        assert header == ["t", "re_c1_oracle", "im_c1_oracle", "re_c1_analytic",
                          "im_c1_analytic", "abs_err"]
        assert np.all(data[:, -1] < 1e-15)

    def test_under_resolved_fails(self, tmp_path, capsys):
        code, out, err = run(capsys, "oracle-check", "--n-modes", "10", "--gamma", "0.5",
                             "--out", tmp_path)
        assert code == 2
        assert "FAIL" in out and "increase n_modes" in err

    @pytest.mark.slow
    def test_defaults_pass(self, tmp_path, capsys):
        code, out, _ = run(capsys, "oracle-check", "--gamma", "0.5", "--lambda", "5",
                           "--out", tmp_path)
        assert code == 0
        c1_err = float(re.search(r"max_c1_err=(\S+)", out).group(1))
        assert c1_err <= 1e-3
