import json
from pathlib import Path

import pytest

from smallfdr.cli import main

FIXTURE = Path(__file__).parent / "data" / "abundance_20protein.csv"


def write_pvalues(path, pairs):
    lines = ["id,p"] + [f"{label},{p}" for label, p in pairs]
    path.write_text("\n".join(lines) + "\n")


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestLfdrCommand:
    def test_hand_trace(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.01), ("b", 0.04), ("c", 0.2), ("d", 0.5)])
        code, out, _ = run(["lfdr", src, "--estimator", "mle"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "id,p,rank,raw_lfdr,monotone_lfdr"
        assert lines[1] == "a,0.01,1,0.08,0.08"
        assert lines[2] == "b,0.04,2,0.5,0.5"
        assert lines[3] == "c,0.2,3,1,1"
        assert lines[4] == "d,0.5,4,1,1"

    def test_single_row(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("only", 0.02)])
        code, out, _ = run(["lfdr", src, "--estimator", "corrected"], capsys)
        assert code == 0
        assert out.strip().splitlines()[1] == "only,0.02,1,1,1"

    def test_no_monotone_column_copies_raw(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.01), ("b", 0.04), ("c", 0.2), ("d", 0.5)])
        code, out, _ = run(["lfdr", src, "--estimator", "mle", "--no-monotone"], capsys)
        assert code == 0
        for line in out.strip().splitlines()[1:]:
            cells = line.split(",")
            assert cells[3] == cells[4]

    def test_deterministic_bytes(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [(f"h{i}", p) for i, p in enumerate(
            [0.01, 0.02, 0.04, 0.2, 0.33, 0.5, 0.51, 0.8]
        )])
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            code, _, _ = run(
                ["lfdr", src, "--estimator", "mean", "--seed", "7", "--out", out],
                capsys,
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_manifest_and_json_mirror(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.01), ("b", 0.4)])
        out = tmp_path / "res.csv"
        code, _, _ = run(["lfdr", src, "--out", out, "--json"], capsys)
        assert code == 0
        manifest = json.loads((tmp_path / "res.csv.manifest.json").read_text())
        assert manifest["command"] == "lfdr"
        assert manifest["parameters"]["estimator"] == "corrected"
        assert str(src) in manifest["inputs"]
        assert manifest["inputs"][str(src)].startswith("sha256:")
        mirror = json.loads((tmp_path / "res.json").read_text())
        assert mirror[0]["id"] == "a"

    def test_parse_failure_exit_code(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        src.write_text("id,p\na,2.5\n")
        code, _, err = run(["lfdr", src], capsys)
        assert code == 3
        assert "line 2" in err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code, _, err = run(["lfdr", tmp_path / "nope.csv"], capsys)
        assert code == 3


class TestBhCommand:
    def test_two_rejections(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.01), ("b", 0.02), ("c", 0.5)])
        code, out, _ = run(["bh", src, "--q", "0.05"], capsys)
        assert code == 0
        assert "rejections: 2" in out
        assert "rejected_ids: a,b" in out
        assert "mle_lfdr_at_median_rank: 0.03" in out

    def test_empty_rejection_set(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.99), ("b", 0.99), ("c", 0.99)])
        code, out, _ = run(["bh", src, "--q", "0.05"], capsys)
        assert code == 0
        assert "rejections: 0" in out
        assert "mle_lfdr_at_median_rank: not applicable" in out

    def test_boundary_rejection(self, tmp_path, capsys):
        # p_(1) exactly q / N with N = 2; halving is float-exact
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.025), ("b", 0.9)])
        code, out, _ = run(["bh", src, "--q", "0.05"], capsys)
        assert code == 0
        assert "rejections: 1" in out
        assert "rejected_ids: a" in out

    def test_out_table(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.01), ("b", 0.02), ("c", 0.5)])
        out = tmp_path / "rej.csv"
        code, _, _ = run(["bh", src, "--q", "0.05", "--out", out], capsys)
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "id,p,rank,rejected"
        assert lines[1].startswith("a,") and lines[1].endswith(",1")
        assert lines[3].endswith(",0")

    def test_bad_q(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.5)])
        code, _, err = run(["bh", src, "--q", "1.5"], capsys)
        assert code == 2


class TestSimulateCommand:
    def test_minimal_run_well_formed(self, tmp_path, capsys):
        code, out, _ = run(
            [
                "simulate",
                "--pi0-grid", "0.9",
                "--n-grid", "2",
                "--reps", "1",
                "--seed", "5",
            ],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "pi0,n,estimator,rmse,conservatism_proportion,bias,replicates"
        assert len(lines) == 4  # three estimators
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[0] == "0.9" and cells[1] == "2" and cells[6] == "1"

    def test_identical_seeds_identical_bytes(self, tmp_path, capsys):
        args = [
            "simulate", "--pi0-grid", "0.5,1.0", "--n-grid", "2,4",
            "--reps", "3", "--seed", "11",
        ]
        out1 = tmp_path / "m1.csv"
        out2 = tmp_path / "m2.csv"
        assert run(args + ["--out", out1], capsys)[0] == 0
        assert run(args + ["--out", out2], capsys)[0] == 0
        assert out1.read_bytes() == out2.read_bytes()
        manifest = json.loads((tmp_path / "m1.csv.manifest.json").read_text())
        assert manifest["parameters"]["replicates"] == 3

    def test_invalid_grid_is_usage_error(self, tmp_path, capsys):
        code, _, err = run(["simulate", "--pi0-grid", "1.7"], capsys)
        assert code == 2
        code, _, err = run(["simulate", "--n-grid", "abc"], capsys)
        assert code == 2
        code, _, err = run(["simulate", "--estimators", "magic"], capsys)
        assert code == 2


class TestCoverageExactCommand:
    def test_known_cell(self, tmp_path, capsys):
        code, out, _ = run(
            [
                "coverage-exact", "--n", "1",
                "--alpha-grid", "0.05",
                "--pi-grid", "0.8",
                "--estimator", "mle",
            ],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "alpha,pi,coverage"
        assert lines[1] == "0.05,0.8,0.2"

    def test_corrected_cells_at_least_half(self, capsys):
        code, out, _ = run(
            ["coverage-exact", "--n", "2", "--estimator", "corrected"], capsys
        )
        assert code == 0
        for line in out.strip().splitlines()[1:]:
            coverage = line.split(",")[2]
            if coverage:
                assert float(coverage) >= 0.5 - 1e-12

    def test_infeasible_cells_left_empty(self, capsys):
        code, out, _ = run(
            [
                "coverage-exact", "--n", "1",
                "--alpha-grid", "0.5",
                "--pi-grid", "0.1,0.9",
                "--estimator", "mle",
            ],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "0.5,0.1,"
        assert lines[2].startswith("0.5,0.9,") and lines[2].split(",")[2] != ""


class TestTtestCommand:
    def test_fixture_pipeline_end_to_end(self, tmp_path, capsys):
        pvals = tmp_path / "p.csv"
        code, _, _ = run(["ttest", FIXTURE, "--out", pvals], capsys)
        assert code == 0
        lines = pvals.read_text().strip().splitlines()
        assert lines[0] == "id,p" and len(lines) == 21
        code, out, _ = run(["lfdr", pvals, "--estimator", "corrected"], capsys)
        assert code == 0
        rows = out.strip().splitlines()[1:]
        monotone = [float(r.split(",")[4]) for r in rows]
        assert len(monotone) == 20
        assert all(0.0 <= v <= 1.0 for v in monotone)
        assert monotone == sorted(monotone)

    def test_identical_groups_all_one(self, tmp_path, capsys):
        src = tmp_path / "a.csv"
        src.write_text(
            "feature,a:case,b:case,c:control,d:control\n"
            "f1,1.0,2.0,1.0,2.0\n"
            "f2,3.0,4.0,3.0,4.0\n"
        )
        pvals = tmp_path / "p.csv"
        code, _, _ = run(["ttest", src, "--out", pvals], capsys)
        assert code == 0
        for line in pvals.read_text().strip().splitlines()[1:]:
            assert line.endswith(",1")
        code, out, _ = run(["lfdr", pvals, "--estimator", "mle"], capsys)
        assert code == 0
        for line in out.strip().splitlines()[1:]:
            assert line.split(",")[4] == "1"

    def test_missing_group_label_fails(self, tmp_path, capsys):
        src = tmp_path / "a.csv"
        src.write_text("feature,a:case,b:case\nf1,1.0,2.0\n")
        code, _, err = run(["ttest", src], capsys)
        assert code == 3
        assert "control" in err

    def test_transform_none(self, tmp_path, capsys):
        src = tmp_path / "a.csv"
        src.write_text(
            "feature,a:case,b:case,c:control,d:control\nf1,1.0,2.0,3.0,4.0\n"
        )
        code, out, _ = run(["ttest", src, "--transform", "none"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "id,p"


class TestGlobalBehavior:
    def test_unknown_command_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_env_var_seed(self, tmp_path, capsys, monkeypatch):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.2), ("b", 0.4)])
        out = tmp_path / "r.csv"
        monkeypatch.setenv("SMALLFDR_SEED", "123")
        code, _, _ = run(["lfdr", src, "--out", out], capsys)
        assert code == 0
        manifest = json.loads((tmp_path / "r.csv.manifest.json").read_text())
        assert manifest["parameters"]["seed"] == 123

    def test_bad_env_var_seed(self, tmp_path, capsys, monkeypatch):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.2)])
        monkeypatch.setenv("SMALLFDR_SEED", "twelve")
        code, _, err = run(["lfdr", src], capsys)
        assert code == 2

    def test_twelve_significant_digits(self, tmp_path, capsys):
        src = tmp_path / "p.csv"
        write_pvalues(src, [("a", 0.123456789012345), ("b", 0.9)])
        code, out, _ = run(["lfdr", src, "--estimator", "mle"], capsys)
        assert code == 0
        assert "0.123456789012" in out
