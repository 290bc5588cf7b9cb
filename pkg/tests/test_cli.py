"""CLI contract tests: exit codes, reproducibility, file schemas."""

import csv
import json

import pytest

from levyheat.cli import main, parse_f_expression, parse_range, parse_region
from levyheat.levy import ParseError

GOOD_CONFIG = """\
d = 1
alpha = 1.0
t = 1.0
m = 0.0
mode = noncompensated
family = pareto
beta = 3.0
seed = 7
"""


@pytest.fixture()
def config(tmp_path):
    path = tmp_path / "model.cfg"
    path.write_text(GOOD_CONFIG)
    return str(path)


class TestParsers:
    def test_logspace_range(self):
        r = parse_range("1:100:logspace:3")
        assert r == pytest.approx([1.0, 10.0, 100.0])

    def test_linspace_range(self):
        assert parse_range("0:1:linspace:3") == pytest.approx([0, 0.5, 1.0])

    def test_comma_list(self):
        assert parse_range("2,4, 8") == pytest.approx([2.0, 4.0, 8.0])

    def test_bad_range(self):
        with pytest.raises(ParseError):
            parse_range("1:100:geom:3")
        with pytest.raises(ParseError):
            parse_range("5:1:logspace:3")

    def test_f_expression(self):
        f = parse_f_expression("2*r^1.5*(log r)^0.5")
        assert (f.C, f.a, f.p) == (2.0, 1.5, 0.5)
        f = parse_f_expression("r^2")
        assert (f.C, f.a, f.p) == (1.0, 2.0, 0.0)
        with pytest.raises(ParseError):
            parse_f_expression("exp(r)")

    def test_region(self):
        ball = parse_region("ball:1.5", 1)
        assert ball.radius == 1.5
        box = parse_region("box:-1:1", 1)
        assert box.volume() == 2.0
        with pytest.raises(ParseError):
            parse_region("disk:1", 1)


class TestValidate:
    def test_all_hold_exit_zero(self, config, tmp_path):
        out = str(tmp_path / "val.json")
        assert main(["validate", config, "--out", out]) == 0
        payload = json.loads(open(out).read())
        assert payload["all_hold"]
        assert payload["conditions"]["SolutionExists"]["holds"]

    def test_byte_identical_bundles(self, config, tmp_path):
        outs = []
        for name in ("v1.json", "v2.json"):
            out = str(tmp_path / name)
            main(["validate", config, "--out", out])
            outs.append(open(out, "rb").read())
        assert outs[0] == outs[1]

    def test_failing_condition_exit_two(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(GOOD_CONFIG.replace("beta = 3.0", "beta = 0.5"))
        out = str(tmp_path / "val.json")
        assert main(["validate", str(cfg), "--out", out]) == 2
        payload = json.loads(open(out).read())
        assert not payload["conditions"]["SolutionExists"]["holds"]

    def test_malformed_exit_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        assert main(["validate", str(cfg)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_missing_file_exit_one(self, tmp_path):
        assert main(["validate", str(tmp_path / "nope.cfg")]) == 1


class TestTailsCommand:
    def test_closed_value_row(self, config, tmp_path):
        out = str(tmp_path / "tau.csv")
        assert main(["tails", config, "--kind", "Tau", "--r", "2,4,8",
                     "--out", out]) == 0
        rows = list(csv.DictReader(open(out)))
        assert float(rows[0]["value"]) == pytest.approx(11 / 16)

    def test_logspace_row_count(self, config, tmp_path):
        out = str(tmp_path / "tau.csv")
        assert main(["tails", config, "--kind", "Tau",
                     "--r", "1:1e6:logspace:50", "--out", out]) == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 50

    def test_hypothesis_refusal_exit_two(self, tmp_path):
        # beta = 0.35 < d/(d+alpha) = 0.4 for alpha = 1.5: eta diverges
        cfg15 = tmp_path / "a15.cfg"
        cfg15.write_text(GOOD_CONFIG.replace("alpha = 1.0", "alpha = 1.5")
                         .replace("beta = 3.0", "beta = 0.35"))
        out = str(tmp_path / "eta.csv")
        assert main(["tails", str(cfg15), "--kind", "Eta", "--r", "2,4",
                     "--out", out]) == 2


class TestMcTailCommand:
    def test_byte_identical_reruns(self, config, tmp_path):
        args = ["mc-tail", config, "--functional", "xbarA", "--n", "5000",
                "--seed", "7", "--region", "ball:1.0", "--r", "6,12",
                "--window", "1.5"]
        out1 = str(tmp_path / "a.csv")
        out2 = str(tmp_path / "b.csv")
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_env_seed_override(self, config, tmp_path, monkeypatch):
        out = str(tmp_path / "c.csv")
        monkeypatch.setenv("LEVYHEAT_SEED", "99")
        assert main(["mc-tail", config, "--functional", "xbarA", "--n", "500",
                     "--seed", "7", "--region", "ball:1.0", "--r", "6",
                     "--window", "1.5", "--out", out]) == 0
        man = json.loads(open(out + ".manifest.json").read())
        assert man["seed"] == 99

    def test_schema(self, config, tmp_path):
        out = str(tmp_path / "mc.csv")
        main(["mc-tail", config, "--functional", "xbarA", "--n", "2000",
              "--region", "ball:1.0", "--r", "6", "--window", "1.5",
              "--out", out])
        rows = list(csv.DictReader(open(out)))
        assert set(rows[0]) == {"r", "estimate", "stderr", "ci_lo", "ci_hi",
                                "trunc_mass", "trunc_bias"}
        assert float(rows[0]["ci_lo"]) <= float(rows[0]["estimate"]) \
            <= float(rows[0]["ci_hi"])


class TestSupGrowthCommand:
    def test_rows_and_monotone_f(self, config, tmp_path):
        out = str(tmp_path / "sg.csv")
        assert main(["sup-growth", config, "--radii", "2,4,8,16",
                     "--f", "r^1*(log r)^0.5", "--out", out]) == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 4
        fv = [float(r["f_of_radius"]) for r in rows]
        assert all(a <= b for a, b in zip(fv, fv[1:]))
        # grid supremum dominates the lattice supremum
        for r in rows:
            assert float(r["sup_grid"]) >= float(r["sup_lattice"]) - 1e-12


class TestClassifyCommand:
    def test_verdict_record(self, config, tmp_path):
        out = str(tmp_path / "cls.json")
        assert main(["classify", config, "--f", "r^1*(log r)^2",
                     "--out", out]) == 0
        rec = json.loads(open(out).read())
        assert "= 0 a.s." in rec["whole_space"]["statement"]
        assert rec["regime"]["whole_threshold"] == 1.0


class TestReportCommand:
    def test_empty(self, tmp_path):
        out = str(tmp_path / "rep.json")
        assert main(["report", "--out", out]) == 0
        rec = json.loads(open(out).read())
        assert rec["status"] == "pass" and rec["manifests"] == []

    def test_aggregates_and_fails(self, config, tmp_path):
        val_good = str(tmp_path / "good.json")
        main(["validate", config, "--out", val_good])
        cfg_bad = tmp_path / "bad.cfg"
        cfg_bad.write_text(GOOD_CONFIG.replace("beta = 3.0", "beta = 0.5"))
        val_bad = str(tmp_path / "bad.json")
        main(["validate", str(cfg_bad), "--out", val_bad])
        out = str(tmp_path / "rep.json")
        assert main(["report", val_good, val_bad, "--out", out]) == 0
        rec = json.loads(open(out).read())
        assert rec["status"] == "fail"
        assert any(not c["holds"] for c in rec["checks"])
        assert any(c["holds"] for c in rec["checks"])

    def test_mixed_with_classify(self, config, tmp_path):
        val = str(tmp_path / "val.json")
        main(["validate", config, "--out", val])
        cls = str(tmp_path / "cls.json")
        main(["classify", config, "--f", "r^2", "--out", cls])
        out = str(tmp_path / "rep.json")
        assert main(["report", val, cls, "--out", out]) == 0
        rec = json.loads(open(out).read())
        names = {c["name"] for c in rec["checks"]}
        assert any(n.startswith("whole_space:") for n in names)
        assert rec["status"] == "pass"


class TestManifest:
    def test_references_output_hash(self, config, tmp_path):
        import hashlib
        out = str(tmp_path / "tau.csv")
        main(["tails", config, "--kind", "Tau", "--r", "2,4", "--out", out])
        man = json.loads(open(out + ".manifest.json").read())
        digest = hashlib.sha256(open(out, "rb").read()).hexdigest()
        assert man["outputs"]["tau.csv"] == digest
        assert man["config"]["params"]["beta"] == 3.0
