import math

import pytest

from eventready import cli
from eventready.optimizer import SweepRow


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    record = dict(line.split("=", 1) for line in out.splitlines() if "=" in line)
    return code, record, err


class TestProbability:
    def test_bellpair(self, capsys):
        code, rec, _ = run(capsys, "probability", "--kind", "bellpair", "--r", "0.5", "--v", "1", "--theta1", "0", "--theta2", "45", "--eta", "1")
        assert code == 0 and float(rec["value"]) == pytest.approx(0.25)
        assert rec["s"] == "0.5" and rec["rho"] == "1"
        assert rec["manifest.subcommand"] == "probability" and "manifest.timestamp" in rec

    def test_fourfold(self, capsys):
        code, rec, _ = run(capsys, "probability", "--kind", "fourfold", "--r", "0.5", "--theta1", "45", "--theta2", "135", "--theta1p", "90", "--theta2p", "0")
        assert code == 0 and float(rec["value"]) == pytest.approx(0.0625)
        assert {"A", "B", "phi_deg", "v"} <= set(rec)

    @pytest.mark.parametrize("kind", ["singles1", "singles2", "partial"])
    def test_other_kinds(self, capsys, kind):
        code, rec, _ = run(capsys, "probability", "--kind", kind, "--r", "0.5", "--theta1", "10", "--theta2", "70")
        assert code == 0 and 0 <= float(rec["value"]) <= 1

    def test_geometry(self, capsys):
        code, rec, _ = run(capsys, "probability", "--r", "0.3", "--theta1", "10", "--theta2", "70", "--z1", "0", "--z2", "0.25", "--L", "1", "--dz", "0.5")
        assert code == 0
        assert float(rec["phi_deg"]) == pytest.approx(90)
        assert float(rec["v"]) == pytest.approx(4 / math.pi**2)

    def test_missing_r(self, capsys):
        code, _, err = run(capsys, "probability", "--theta1", "0", "--theta2", "45")
        assert code == 1 and "--r" in err

    def test_geometry_and_v_conflict(self, capsys):
        code, _, err = run(capsys, "probability", "--r", "0.5", "--theta1", "0", "--theta2", "4", "--v", "1", "--z1", "0", "--z2", "0", "--L", "1", "--dz", "0")
        assert code == 1 and "--v" in err

    def test_incomplete_geometry(self, capsys):
        code, _, err = run(capsys, "probability", "--r", "0.5", "--theta1", "0", "--theta2", "4", "--z1", "0")
        assert code == 1 and "--z2" in err

    def test_bad_kind_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["probability", "--kind", "nonsense"])
        assert exc.value.code == 1

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# bell pair\nkind = bellpair\nr = 0.5\ntheta1 = 0\ntheta2 = 45\neta = 0.5\n")
        code, rec, _ = run(capsys, "probability", "--config", str(cfg))
        assert code == 0 and float(rec["value"]) == pytest.approx(0.0625)
        # command line overrides the file
        code, rec, _ = run(capsys, "probability", "--config", str(cfg), "--eta", "1")
        assert float(rec["value"]) == pytest.approx(0.25)

    def test_config_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        code, _, err = run(capsys, "probability", "--config", str(cfg))
        assert code == 1 and "bogus" in err


class TestThreshold:
    def test_symmetric(self, capsys):
        code, rec, _ = run(capsys, "threshold", "--v", "1", "--rho", "1")
        assert code == 0 and float(rec["eta_min"]) == pytest.approx(0.8284, abs=1e-3)
        assert {"theta1_deg", "theta2_deg", "theta1p_deg", "theta2p_deg"} <= set(rec)

    def test_nonmaximal(self, capsys):
        code, rec, _ = run(capsys, "threshold", "--v", "1", "--rho", "0.01")
        assert code == 0 and float(rec["eta_min"]) == pytest.approx(0.67, abs=0.01)

    def test_no_violation(self, capsys):
        code, rec, _ = run(capsys, "threshold", "--v", "0", "--rho", "1")
        assert code == 3 and rec["result"] == "no violation"

    def test_missing(self, capsys):
        code, _, err = run(capsys, "threshold", "--v", "1")
        assert code == 1 and "--rho" in err


class TestSweep:
    def test_single_point(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        code, rec, _ = run(capsys, "sweep", "--v-min", "1", "--v-steps", "1", "--rho-min", "1", "--rho-steps", "1", "--out", str(out), "--workers", "1")
        assert code == 0 and rec["rows"] == "1"
        lines = out.read_text().splitlines()
        assert lines[0] == "v,rho,R,eta_min,theta1_deg,theta2_deg,theta1p_deg,theta2p_deg"
        assert len(lines) == 2
        manifest = (tmp_path / "s.csv.manifest").read_text()
        assert "manifest.subcommand=sweep" in manifest

    def test_round_trip_and_closure(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        run(capsys, "sweep", "--v-min", "0", "--v-max", "1", "--v-steps", "2", "--rho-min", "0.5", "--rho-max", "1", "--rho-steps", "2", "--out", str(out), "--workers", "1")
        text = out.read_text()
        rows = cli.read_sweep_csv(out)
        assert [(r.v, r.rho) for r in rows] == [(0, 0.5), (0, 1), (1, 0.5), (1, 1)]
        # v = 0 rows: empty fields, not NaN text
        assert text.splitlines()[1].endswith(",,,,,") and "nan" not in text.lower()
        again = tmp_path / "again.csv"
        cli.sweep_rows_to_csv(rows, again)
        assert again.read_text() == text
        from eventready.core_model import BeamSplitter
        from eventready.inequalities import min_efficiency

        for row in rows[2:]:
            value = min_efficiency(row.angles, BeamSplitter.from_rho(row.rho), row.v)
            assert value == pytest.approx(row.eta_min, abs=1e-9)

    def test_header_checked(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("v,rho\n")
        with pytest.raises(ValueError):
            cli.read_sweep_csv(bad)

    def test_bad_steps(self, capsys, tmp_path):
        code, _, err = run(capsys, "sweep", "--v-steps", "0", "--out", str(tmp_path / "x.csv"))
        assert code == 1 and "--v-steps" in err

    def test_missing_out(self, capsys):
        code, _, err = run(capsys, "sweep")
        assert code == 1 and "--out" in err


class TestVerify:
    def test_pass(self, capsys):
        code, rec, _ = run(capsys, "verify")
        assert code == 0 and rec["result"] == "pass" and float(rec["max_abs_diff"]) < 1e-12

    def test_perturbed_fails(self, capsys):
        code, rec, _ = run(capsys, "verify", "--n", "20", "--perturb")
        assert code == 2 and rec["result"] == "fail"

    def test_zero(self, capsys):
        code, _, err = run(capsys, "verify", "--n", "0")
        assert code == 1 and "--n" in err


class TestSimulate:
    def test_record(self, capsys, tmp_path):
        out = tmp_path / "tally.txt"
        args = ("simulate", "--r", "0.5", "--theta1", "0", "--theta2", "112.5", "--n", "20000", "--seed", "3", "--out", str(out))
        code, rec, _ = run(capsys, *args)
        assert code == 0
        for key in ("v", "rho", "R", "eta", "seed", "n_trials", "block11.n_emitted", "block11.counts.a.b", "block22.singles.d1",
                    "block11.postselected.a.b", "proper.p11", "ch.loopholefree", "ch.ratio"):
            assert key in rec, key
        assert float(rec["ch.loopholefree"]) > 0
        assert float(rec["manifest.theta1_alt"]) == pytest.approx(45)
        # deterministic given the manifest, apart from the timestamp
        code, rec2, _ = run(capsys, *args)
        rec.pop("manifest.timestamp"), rec2.pop("manifest.timestamp")
        assert rec == rec2
        assert "proper.p11=" in out.read_text()

    def test_low_efficiency(self, capsys):
        code, rec, _ = run(capsys, "simulate", "--r", "0.5", "--theta1", "0", "--theta2", "112.5", "--eta", "0.1", "--n", "20000")
        assert code == 0 and float(rec["ch.loopholefree"]) < 0 < float(rec["ch.ratio"])

    def test_zero_trials(self, capsys):
        code, _, err = run(capsys, "simulate", "--r", "0.5", "--theta1", "0", "--theta2", "1", "--n", "0")
        assert code == 1 and "--n" in err


class TestHardy:
    def test_found(self, capsys):
        code, rec, _ = run(capsys, "hardy", "--r", "0.2", "--v", "1")
        assert code == 0 and rec["result"] == "found" and rec["violating"] == "true"
        assert float(rec["residual1"]) < 1e-6 and float(rec["p_zero"]) < 1e-6

    def test_not_found(self, capsys):
        code, rec, _ = run(capsys, "hardy", "--r", "0.3", "--v", "0")
        assert code == 3 and rec["result"] == "not found"

    def test_bad_r(self, capsys):
        code, _, err = run(capsys, "hardy", "--r", "1.5")
        assert code == 1 and "--r" in err


def test_format():
    assert cli.fmt(None) == ""
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(True) == "true"
    assert cli.fmt(3) == "3"


def test_csv_round_trip_exact(tmp_path):
    rows = [
        SweepRow(0.6, 0.1, 0.1 / 1.1, 0.851234567890123, (0.1, 0.2, 0.3, 0.4)),
        SweepRow(0.0, 1.0, 0.5, None, None),
    ]
    path = tmp_path / "r.csv"
    cli.sweep_rows_to_csv(rows, path)
    back = cli.read_sweep_csv(path)
    assert back[1] == rows[1]
    assert cli.fmt(back[0].eta_min) == cli.fmt(rows[0].eta_min)
    assert [cli.fmt(math.degrees(a)) for a in back[0].angles] == [cli.fmt(math.degrees(a)) for a in rows[0].angles]


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "eventready", "probability", "--kind", "bellpair", "--r", "0.5", "--theta1", "0", "--theta2", "45"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "value=0.25" in proc.stdout
