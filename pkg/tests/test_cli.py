import json
import math

import pytest
from click.testing import CliRunner

from xypurify.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestRoundCommand:
    def test_at_operational_time(self, runner):
        result = run_ok(runner, ["round", "--f", "0.75", "--fprime", "0.75",
                                 "--at-T"])
        payload = json.loads(result.stdout)
        assert payload["fidelity"] == pytest.approx(0.8277, abs=5e-4)
        assert payload["success_probability"] == pytest.approx(0.1324, abs=5e-4)

    def test_perfect_inputs(self, runner):
        result = run_ok(runner, ["round", "--f", "1", "--fprime", "1", "--at-T"])
        payload = json.loads(result.stdout)
        assert payload["fidelity"] == pytest.approx(1.0, abs=1e-9)

    def test_zero_time_returns_stationary_fidelity(self, runner):
        result = run_ok(runner, ["round", "--f", "0.75", "--fprime", "0.75",
                                 "--jt0", "0"])
        payload = json.loads(result.stdout)
        assert payload["fidelity"] == pytest.approx(0.75, abs=1e-9)

    def test_validation_error_exit_code(self, runner):
        result = runner.invoke(main, ["round", "--f", "1.5", "--fprime", "0.75",
                                      "--at-T"])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip().splitlines()[-1])
        assert err["error"] == "DomainError"

    def test_mutually_exclusive_time_flags(self, runner):
        result = runner.invoke(main, ["round", "--f", "0.75", "--fprime", "0.75"])
        assert result.exit_code == 2

    def test_csv_format(self, runner):
        result = run_ok(runner, ["round", "--f", "0.75", "--fprime", "0.75",
                                 "--at-T", "--format", "csv"])
        lines = result.output.strip().splitlines()
        assert len(lines) == 2
        assert "fidelity" in lines[0]


class TestFig5Command:
    def test_panel_a_contains_peak(self, runner, tmp_path):
        out = tmp_path / "a.csv"
        run_ok(runner, ["fig5", "--panel", "a", "--jt-steps", "121",
                        "--output", str(out)])
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "jt0,fidelity"
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        best = max(rows, key=lambda r: r[1])
        assert best[1] == pytest.approx(0.8277, abs=5e-4)
        assert best[0] == pytest.approx(math.pi / 6, abs=0.02)

    def test_panel_b_solid_above_dashed(self, runner, tmp_path):
        out = tmp_path / "b.csv"
        run_ok(runner, ["fig5", "--panel", "b", "--f-steps", "9",
                        "--output", str(out)])
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "f,xy_one_round,cnot_one_round,scheme_c_two_rounds"
        for ln in lines[1:]:
            _, xy, base, _ = map(float, ln.split(","))
            assert xy > base

    def test_panel_c_perfect_corner(self, runner, tmp_path):
        out = tmp_path / "c.csv"
        run_ok(runner, ["fig5", "--panel", "c", "--f-min", "0.6", "--f-max",
                        "1.0", "--f-steps", "5", "--output", str(out)])
        lines = out.read_text().strip().splitlines()
        last = lines[-1].split(",")
        assert float(last[0]) == 1.0 and float(last[1]) == 1.0
        assert float(last[2]) == pytest.approx(1.0, abs=1e-12)


class TestFig6Command:
    def test_columns_and_first_round(self, runner, tmp_path):
        out = tmp_path / "f6.csv"
        run_ok(runner, ["fig6", "--f-steps", "5", "--n-max", "4",
                        "--output", str(out)])
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "f,n,F_n,F_hat,F_bar,P_succ,fixed_point"
        from xypurify import closed_form_general
        for ln in lines[1:]:
            f, n, fn, fhat, fbar, _, _ = map(float, ln.split(","))
            if n == 1:
                assert fn == pytest.approx(closed_form_general(f, f).fidelity,
                                           abs=1e-9)
                assert fbar == pytest.approx(fhat, abs=1e-12)

    def test_contains_comparison_rows(self, runner, tmp_path):
        out = tmp_path / "f6.csv"
        run_ok(runner, ["fig6", "--f-steps", "3", "--n-max", "4",
                        "--output", str(out)])
        ns = {int(float(ln.split(",")[1]))
              for ln in out.read_text().strip().splitlines()[1:]}
        assert {1, 4} <= ns

    def test_deterministic_bytes(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_ok(runner, ["fig6", "--f-steps", "4", "--n-max", "4",
                        "--output", str(a)])
        run_ok(runner, ["fig6", "--f-steps", "4", "--n-max", "4",
                        "--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_numeric_format_12_digits(self, runner, tmp_path):
        out = tmp_path / "f6.csv"
        run_ok(runner, ["fig6", "--f-steps", "3", "--n-max", "4",
                        "--output", str(out)])
        cell = out.read_text().strip().splitlines()[1].split(",")[2]
        mantissa = cell.replace("-", "").replace(".", "").lstrip("0")
        assert len(mantissa) <= 12
        assert "," not in cell and cell.count(".") <= 1


class TestValidateCavityCommand:
    def test_default_geometry_report(self, runner):
        result = run_ok(runner, ["validate-cavity", "--delta", "50",
                                 "--ell", "1.0"])
        payload = json.loads(result.stdout)
        assert payload["geometry"]["d_over_w"] == pytest.approx(1.14317, abs=1e-4)
        assert payload["c_matrix"][0][1] == pytest.approx(1.0, abs=1e-6)
        assert payload["agreement"]["distance_full_mean"] < 0.05
        assert 0.4 < payload["distance_halving_ratio"] < 0.6

    def test_low_detuning_rejected(self, runner):
        result = runner.invoke(main, ["validate-cavity", "--delta", "5",
                                      "--ell", "1.0"])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip().splitlines()[-1])
        assert err["error"] == "GeometryError"
        assert "adiabatic" in err["message"]

    def test_force_overrides_detuning_gate(self, runner):
        result = runner.invoke(main, ["validate-cavity", "--delta", "15",
                                      "--ell", "1.0", "--force"])
        assert result.exit_code == 0

    def test_infeasible_offset(self, runner):
        result = runner.invoke(main, ["validate-cavity", "--delta", "50",
                                      "--ell", "0.3"])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip().splitlines()[-1])
        assert err["error"] == "GeometryError"

    def test_trajectory_dump(self, runner, tmp_path):
        traj = tmp_path / "traj.csv"
        run_ok(runner, ["validate-cavity", "--delta", "50", "--ell", "1.0",
                        "--dump-trajectory", str(traj)])
        lines = traj.read_text().strip().splitlines()
        assert lines[0].startswith("t,re_c0,im_c0")
        assert len(lines) > 100


class TestMonteCarloCommand:
    def make_config(self, tmp_path, **overrides):
        cfg = {"schema_version": 1, "f": 0.75, "target_rounds": 3,
               "seed": 99, "trials": 400}
        cfg.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_byte_identical_given_seed(self, runner, tmp_path):
        path = self.make_config(tmp_path)
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        run_ok(runner, ["montecarlo", "--config", str(path), "--output",
                        str(out_a)])
        run_ok(runner, ["montecarlo", "--config", str(path), "--output",
                        str(out_b)])
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_stats_contents(self, runner, tmp_path):
        path = self.make_config(tmp_path)
        result = run_ok(runner, ["montecarlo", "--config", str(path)])
        payload = json.loads(result.stdout)
        assert payload["trials"] == 400
        assert payload["mean_attempts"] > 0
        analytic = payload["expected_attempts_analytic"]
        assert abs(payload["mean_attempts"] - analytic) / analytic < 0.15

    def test_unreachable_target_exit_2(self, runner, tmp_path):
        path = self.make_config(tmp_path, target_rounds=None,
                                target_fidelity=0.95)
        path.write_text(path.read_text().replace('"target_rounds": null, ', ""))
        result = runner.invoke(main, ["montecarlo", "--config", str(path)])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip().splitlines()[-1])
        assert "fixed" in err["message"]

    def test_unknown_keys_rejected(self, runner, tmp_path):
        path = self.make_config(tmp_path, bogus=1)
        result = runner.invoke(main, ["montecarlo", "--config", str(path)])
        assert result.exit_code == 2

    def test_schema_version_required(self, runner, tmp_path):
        path = self.make_config(tmp_path)
        raw = json.loads(path.read_text())
        del raw["schema_version"]
        path.write_text(json.dumps(raw))
        result = runner.invoke(main, ["montecarlo", "--config", str(path)])
        assert result.exit_code == 2

    def test_trials_csv(self, runner, tmp_path):
        path = self.make_config(tmp_path, trials=50)
        csv_path = tmp_path / "trials.csv"
        run_ok(runner, ["montecarlo", "--config", str(path), "--trials-csv",
                        str(csv_path)])
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "trial,attempts"
        assert len(lines) == 51
