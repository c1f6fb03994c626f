import json

import pytest

from trustcal.cli import main
from trustcal.datastore import read_trials


def run_cli(args):
    return main(args)


class TestSimulate:
    def test_row_count_and_determinism(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--condition", "overconfidence", "--agents", "20",
                "--trials", "50", "--seed", "7"]
        assert run_cli(args + ["--out", str(out1)]) == 0
        assert run_cli(args + ["--out", str(out2)]) == 0
        assert out1.read_text() == out2.read_text()
        records = read_trials(out1)
        assert len(records) == 1000
        assert len({r.participant_id for r in records}) == 20

    def test_zero_agents_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli(["simulate", "--condition", "standard", "--agents", "0",
                     "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2

    def test_unknown_condition_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli(["simulate", "--condition", "wild", "--agents", "1",
                     "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2

    def test_explicit_params_file(self, tmp_path):
        params = {
            "b0": 0.6, "w0": 0.69,
            "alpha_b_correct": 0.29, "alpha_b_wrong": 0.46,
            "alpha_w_correct": 0.55, "alpha_w_wrong": 0.05,
        }
        pfile = tmp_path / "params.json"
        pfile.write_text(json.dumps(params))
        out = tmp_path / "t.csv"
        run_cli(["simulate", "--condition", "standard", "--agents", "3",
                 "--params", str(pfile), "--out", str(out), "--seed", "1"])
        assert len(read_trials(out)) == 150


class TestFit:
    @pytest.fixture()
    def small_csv(self, tmp_path):
        out = tmp_path / "trials.csv"
        run_cli(["simulate", "--condition", "standard", "--agents", "2",
                 "--trials", "30", "--seed", "3", "--out", str(out)])
        return out

    def test_map_writes_per_participant_results(self, small_csv, tmp_path):
        summary = tmp_path / "map.json"
        assert run_cli(["fit", "--input", str(small_csv), "--method", "map",
                        "--out-summary", str(summary), "--seed", "1"]) == 0
        doc = json.loads(summary.read_text())
        assert len(doc) == 2
        for entry in doc.values():
            assert set(entry) == {"params", "log_posterior_at_mode", "converged", "n_evaluations"}
            assert all(0 < entry["params"][k] < 1 for k in entry["params"] if k.startswith("alpha"))

    def test_mcmc_writes_draws_and_summary(self, small_csv, tmp_path):
        draws, summary = tmp_path / "draws.csv", tmp_path / "summary.json"
        assert run_cli(["fit", "--input", str(small_csv), "--method", "mcmc",
                        "--chains", "2", "--samples", "200", "--warmup", "100",
                        "--seed", "1", "--out-draws", str(draws),
                        "--out-summary", str(summary)]) == 0
        doc = json.loads(summary.read_text())
        assert "diagnostics" in doc and "parameters" in doc
        assert {"max_rhat", "min_ess", "ok"} <= set(doc["diagnostics"])
        header = draws.read_text().splitlines()[0]
        assert header.startswith("chain,iteration,")

    def test_missing_input_nonzero_exit(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run_cli(["fit", "--input", str(tmp_path / "none.csv"),
                     "--out-summary", str(tmp_path / "s.json")])
        assert exc.value.code == 1

    def test_invalid_input_nonzero_exit(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("participant_id,condition\nx,standard\n")
        with pytest.raises(SystemExit) as exc:
            run_cli(["fit", "--input", str(bad), "--out-summary", str(tmp_path / "s.json")])
        assert exc.value.code == 1


class TestRecover:
    def test_report_covers_all_parameter_families(self, tmp_path):
        out = tmp_path / "rec.json"
        assert run_cli(["recover", "--agents", "15", "--trials", "40",
                        "--seed", "2", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        corr = doc["runs"]["40"]["correlations"]
        assert set(corr) == {
            "b0", "w0", "alpha_b_correct", "alpha_b_wrong", "alpha_w_correct", "alpha_w_wrong",
        }
        assert all(-1 <= v <= 1 for v in corr.values())


class TestReport:
    @pytest.fixture()
    def learner_csv(self, tmp_path):
        params = {
            "b0": 0.6, "w0": 0.69,
            "alpha_b_correct": 0.29, "alpha_b_wrong": 0.46,
            "alpha_w_correct": 0.55, "alpha_w_wrong": 0.05,
        }
        pfile = tmp_path / "params.json"
        pfile.write_text(json.dumps(params))
        out = tmp_path / "trials.csv"
        run_cli(["simulate", "--condition", "overconfidence", "--agents", "40",
                 "--params", str(pfile), "--out", str(out), "--seed", "5"])
        return out

    def test_report_shows_learning_and_omits_trajectories(self, learner_csv, tmp_path):
        out = tmp_path / "report.json"
        figdir = tmp_path / "figs"
        assert run_cli(["report", "--input", str(learner_csv), "--out", str(out),
                        "--figures-dir", str(figdir)]) == 0
        doc = json.loads(out.read_text())
        assert "trajectories" not in doc
        section = doc["conditions"]["overconfidence"]
        blocks = section["blocks"]
        assert blocks[-1]["accuracy"] > blocks[0]["accuracy"]
        assert section["model_fit"] is not None  # simulated records carry v
        assert (figdir / "fig3_accuracy.csv").exists()
        assert (figdir / "fig4_hrfar.csv").exists()
        assert not (figdir / "fig6_trajectories.csv").exists()

    def test_report_deterministic(self, learner_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["report", "--input", str(learner_csv), "--out", str(a)])
        run_cli(["report", "--input", str(learner_csv), "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_report_with_draws_adds_trajectories(self, tmp_path):
        trials = tmp_path / "t.csv"
        run_cli(["simulate", "--condition", "standard", "--agents", "2",
                 "--trials", "25", "--seed", "4", "--out", str(trials)])
        draws = tmp_path / "d.csv"
        summary = tmp_path / "s.json"
        run_cli(["fit", "--input", str(trials), "--method", "mcmc",
                 "--chains", "2", "--samples", "200", "--warmup", "100",
                 "--seed", "1", "--out-draws", str(draws), "--out-summary", str(summary)])
        out = tmp_path / "r.json"
        figdir = tmp_path / "figs"
        run_cli(["report", "--input", str(trials), "--draws", str(draws),
                 "--out", str(out), "--figures-dir", str(figdir)])
        doc = json.loads(out.read_text())
        assert "standard" in doc["trajectories"]
        band = doc["trajectories"]["standard"]
        assert len(band["b_mean"]) == 26
        assert (figdir / "fig6_trajectories.csv").exists()
