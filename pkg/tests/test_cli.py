import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hbench import __version__
from hbench.cli import main
from hbench.noisy import channel_to_json, dephasing_channel


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["fig-mse", "--k", ""],
        ["fig-conv", "--M", ""],
        ["bounds", "nonsense"],
        ["bounds", "pi-minimax", "N=3"],
        ["bounds", "pi-minimax", "N=3", "lambda=1", "delta=1", "bogus=2"],
        ["bounds", "pi-minimax", "N=abc"],
        ["phase", "--N-max", "0"],
        ["noisy", "--channel", "dephasing"],
        ["noisy"],
        ["multi", "--model", "multiphase"],
        ["no-such-command"],
        ["phase", "--format", "xml"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2
        assert out == ""

    def test_missing_parameter_named(self, capsys):
        code, _, err = run(capsys, "bounds", "mean-energy", "E=10")
        assert code == 2 and "delta" in err

    @pytest.mark.parametrize("argv", [
        ["noisy", "--channel", "lossy", "--eta", "1.5"],
        ["multi", "--model", "su2", "--theta-norm", "4"],
        ["bounds", "pi-minimax", "N=-1", "lambda=1", "delta=1"],
    ])
    def test_computational_failures(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 3 and out == "" and err

    def test_missing_channel_file(self, capsys, tmp_path):
        path = tmp_path / "absent.json"
        code, _, err = run(capsys, "noisy", "--channel-file", str(path))
        assert code == 3 and str(path) in err

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "hbench.cli", "bounds", "bad"], capture_output=True, text=True)
        assert proc.returncode == 2


class TestOutputs:
    def test_phase(self, capsys):
        code, out, _ = run(capsys, "phase")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 100
        assert float(rows[-1]["N2_cost"]) == pytest.approx(math.pi**2, rel=0.05)
        assert out.splitlines()[0] == "N,cost,N2_cost"
        assert "\r" not in out

    def test_bounds_json(self, capsys):
        code, out, _ = run(capsys, "bounds", "pi-minimax", "N=1000", "lambda=1", "delta=1")
        rep = json.loads(out)
        assert code == 0 and rep["informative"] is True
        code, out, _ = run(capsys, "bounds", "mean-energy", "E=10", "delta=1")
        assert json.loads(out)["informative"] is False

    def test_gradient_optional_hbar(self, capsys):
        code, out, _ = run(capsys, "bounds", "gradient", "N_pr=1", "t=1", "gamma=1", "L_x=1", "hbar=1")
        assert code == 0 and json.loads(out)["value"] == pytest.approx(4 * math.pi**2)

    def test_noisy_ordering(self, capsys):
        code, out, _ = run(capsys, "noisy", "--channel", "dephasing", "--p", "0.25", "--n", "10")
        by = {r["bound_name"]: float(r["value"]) for r in rows_of(out)}
        assert code == 0
        assert by["parallel"] <= by["adaptive-iterative"] <= min(by["adaptive-closed-1"], by["adaptive-closed-2"])

    def test_noisy_channel_file(self, capsys, tmp_path):
        path = tmp_path / "ch.json"
        path.write_text(json.dumps(channel_to_json(dephasing_channel(0.25), 0.0)))
        code, out, _ = run(capsys, "noisy", "--channel-file", str(path), "--n", "3")
        code2, out2, _ = run(capsys, "noisy", "--channel", "dephasing", "--p", "0.25", "--n", "3")
        assert code == code2 == 0
        a = [float(r["value"]) for r in rows_of(out)]
        b = [float(r["value"]) for r in rows_of(out2)]
        assert a == pytest.approx(b, rel=1e-8)

    def test_multi(self, capsys):
        code, out, _ = run(capsys, "multi", "--model", "multiphase", "--p", "4", "--N", "100")
        rows = rows_of(out)
        assert code == 0 and len(rows) == 6
        assert {r["model"] for r in rows} == {"multiphase"}
        code, out, _ = run(capsys, "multi", "--model", "two-point", "--format", "json")
        assert len(json.loads(out)) == 4

    def test_fig_conv_small(self, capsys):
        code, out, _ = run(capsys, "fig-conv", "--M", "2,1", "--k-grid", "100,10", "--n-samples", "5", "--repetitions", "4")
        rows = rows_of(out)
        assert code == 0
        assert [(int(r["M"]), int(r["k"])) for r in rows] == [(1, 10), (1, 100), (2, 10), (2, 100)]
        for r in rows:
            if r["M"] == "1":
                assert float(r["cr"]) == 1 / int(r["k"])

    def test_fig_mse_default(self, capsys):
        code, out, _ = run(capsys, "fig-mse")
        rows = rows_of(out)
        assert code == 0
        ml = [r for r in rows if r["estimator"] == "ml" and r["k"] == "100" and float(r["theta"]) == 0.5]
        assert float(ml[0]["mse"]) == pytest.approx(0.01, rel=0.1)
        lue = {(r["theta0"], r["k"]) for r in rows if r["estimator"] == "locally-unbiased"}
        assert lue == {("0.0", "100"), ("1.0", "100")}


class TestFiles:
    def test_deterministic_files_and_sidecar(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["fig-mse", "--n-samples", "500", "--seed", "9", "--out", str(a)]) == 0
        assert main(["fig-mse", "--n-samples", "500", "--seed", "9", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["command"] == "fig-mse" and meta["seed"] == 9 and meta["version"] == __version__
        assert capsys.readouterr().out == ""
        assert not [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["fig-mse", "--n-samples", "200", "--seed", "1", "--out", str(a)])
        main(["fig-mse", "--n-samples", "200", "--seed", "2", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_unwritable_path(self, capsys, tmp_path):
        target = tmp_path / "missing-dir" / "out.csv"
        code, _, err = run(capsys, "phase", "--N-max", "3", "--out", str(target))
        assert code == 3 and "missing-dir" in err
