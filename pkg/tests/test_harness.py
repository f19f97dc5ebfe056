"""Scenario harness outputs, determinism, and the command line."""

from __future__ import annotations

import json
from dataclasses import replace

import pytest
from click.testing import CliRunner

from nudgesim import (
    CascadeConfig,
    ConfigError,
    GameConfig,
    Scenario,
    binary_to_finite,
    builtin_suite,
    load_scenarios,
    run_scenario,
    run_suite,
    verify_certificates,
)
from nudgesim.cli import main
from nudgesim.harness import SUITE_NAMES
from conftest import CASE_LAMBDA_BAR

TINY_CASCADE = dict(n0=10, p0=10, friend_mean=10.0, share_prob=0.5, steps=60)


def tiny_scenario(name: str = "tiny", **overrides) -> Scenario:
    kwargs = dict(
        name=name,
        game=GameConfig(0.05, 0.05, 0.6),
        cascade=CascadeConfig(**TINY_CASCADE),
        replications=4,
        seed=11,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)


class TestScenario:
    def test_defaults(self):
        scenario = Scenario(name="x", game=GameConfig(0.05, 0.05, 0.6))
        assert scenario.replications == 200
        assert scenario.seed == 7
        assert scenario.cascade.steps == 500

    def test_name_required(self):
        with pytest.raises(ConfigError):
            Scenario(name="", game=GameConfig(0.05, 0.05, 0.6))

    def test_replications_positive(self):
        with pytest.raises(ConfigError):
            Scenario(name="x", game=GameConfig(0.05, 0.05, 0.6), replications=0)

    @pytest.mark.parametrize("chosen", [0.0, 1.0, -0.2])
    def test_chosen_lambda_must_be_interior(self, chosen):
        with pytest.raises(ConfigError):
            Scenario(name="x", game=GameConfig(0.05, 0.05, 0.6), chosen_lambda=chosen)

    def test_chosen_lambda_capped(self):
        with pytest.raises(ConfigError, match="exceeds"):
            Scenario(name="x", game=GameConfig(0.05, 0.05, 0.6), chosen_lambda=0.9)


class TestBuiltinSuites:
    def test_table1_names(self):
        names = [s.name for s in builtin_suite("table1")]
        assert names == [
            "table1-case1", "table1-case2", "table1-case3", "table1-case4",
        ]

    def test_table2_holds_feasible_efforts(self):
        for scenario in builtin_suite("table2"):
            assert scenario.chosen_lambda is not None
            case = scenario.name.split("-")[1].split(".")[0]
            assert scenario.chosen_lambda <= CASE_LAMBDA_BAR[case] + 1e-12

    def test_unknown_suite_rejected(self):
        with pytest.raises(ConfigError, match="table1"):
            builtin_suite("table9")


class TestLoadScenarios:
    def test_round_trip(self, tmp_path):
        doc = {
            "scenarios": [
                {
                    "name": "custom",
                    "k": 0.8,
                    "eps0": 0.1,
                    "eps1": 0.2,
                    "chosen_lambda": 0.2,
                    "replications": 12,
                    "seed": 3,
                    "cascade": {"steps": 100, "friend_mean": 20.0},
                }
            ]
        }
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps(doc))
        scenarios = load_scenarios(path)
        assert len(scenarios) == 1
        assert scenarios[0].game.k == 0.8
        assert scenarios[0].chosen_lambda == 0.2
        assert scenarios[0].cascade.steps == 100
        assert scenarios[0].cascade.n0 == 50

    @pytest.mark.parametrize(
        "doc, fragment",
        [
            ([], "scenarios"),
            ({"scenarios": {}}, "array"),
            ({"scenarios": [{"name": "x", "k": 0.6, "eps0": 0.1}]}, "missing"),
            (
                {
                    "scenarios": [
                        {"name": "x", "k": 0.6, "eps0": 0.1, "eps1": 0.1, "typo": 1}
                    ]
                },
                "unknown scenario keys",
            ),
            (
                {
                    "scenarios": [
                        {
                            "name": "x", "k": 0.6, "eps0": 0.1, "eps1": 0.1,
                            "cascade": {"stepz": 4},
                        }
                    ]
                },
                "unknown cascade keys",
            ),
        ],
    )
    def test_malformed_documents_rejected(self, tmp_path, doc, fragment):
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ConfigError, match=fragment):
            load_scenarios(path)

    def test_unreadable_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenarios(tmp_path / "absent.json")


class TestRunScenario:
    def test_cap_scenario_fields(self):
        result = run_scenario(tiny_scenario())
        assert result.scenario == "tiny"
        assert result.effort == pytest.approx(result.lambda_bar)
        assert sorted(result.tags) == ["sig0", "sig1"]
        for tag in result.tags.values():
            assert tag["analytic_trend"] == pytest.approx(1.0 - tag["belief"])
            assert tag["replications"] == 4
        assert result.mixture["analytic_trend"] == pytest.approx(
            1.0 - result.effort
        )
        assert result.csv_path is None
        assert result.summary_path is None

    def test_held_effort_scenario_has_three_tags(self):
        result = run_scenario(tiny_scenario(chosen_lambda=0.3))
        assert list(result.tags) == ["sig0", "mid", "sig1"]
        assert result.tags["mid"]["belief"] == pytest.approx(0.3)
        assert result.effort == 0.3

    def test_summary_carries_no_environment_details(self):
        result = run_scenario(tiny_scenario())
        assert "backend" not in result.summary
        payload = json.dumps(result.summary)
        assert "/" not in payload.replace("\\/", "")

    def test_writes_scenario_directory(self, tmp_path):
        result = run_scenario(tiny_scenario(), out_dir=tmp_path)
        assert result.csv_path == tmp_path / "tiny" / "trajectories.csv"
        assert result.summary_path == tmp_path / "tiny" / "summary.json"
        header = result.csv_path.read_text().splitlines()[0]
        assert header == "replication_id,i,N,P,Z,eta,zbar,nbar"
        summary = json.loads(result.summary_path.read_text())
        assert summary == result.summary

    def test_csv_row_count(self, tmp_path):
        result = run_scenario(tiny_scenario(), out_dir=tmp_path)
        rows = result.csv_path.read_text().splitlines()
        expected = 2 * 4 * TINY_CASCADE["steps"]
        assert len(rows) == 1 + expected


@pytest.fixture(scope="module")
def benchmark_scenario():
    return replace(builtin_suite("table1")[0], replications=20)


class TestDeterminism:

    def test_outputs_byte_identical(self, tmp_path, benchmark_scenario):
        first = run_scenario(benchmark_scenario, out_dir=tmp_path / "a")
        second = run_scenario(benchmark_scenario, out_dir=tmp_path / "b")
        assert first.csv_path.read_bytes() == second.csv_path.read_bytes()
        assert first.summary_path.read_bytes() == second.summary_path.read_bytes()

    def test_first_event_row_is_frozen(self, tmp_path, benchmark_scenario):
        result = run_scenario(benchmark_scenario, out_dir=tmp_path)
        first_row = result.csv_path.read_text().splitlines()[1]
        assert first_row == "sig0-000,1,68,49,117,0.5811965811965812,117.0,68.0"

    def test_seed_changes_output(self):
        base = tiny_scenario()
        reseeded = replace(base, seed=12)
        assert (
            run_scenario(base).tags["sig0"]["mean_eta"]
            != run_scenario(reseeded).tags["sig0"]["mean_eta"]
        )

    def test_replication_prefix_stable_under_count(self):
        short = run_scenario(tiny_scenario())
        long = run_scenario(tiny_scenario(replications=8))
        assert short.tags["sig0"]["mean_zbar"] is not None
        assert long.tags["sig0"]["replications"] == 8


class TestRunSuite:
    def test_writes_suite_summary(self, tmp_path):
        scenarios = [tiny_scenario("s1"), tiny_scenario("s2", seed=13)]
        results = run_suite(scenarios, out_dir=tmp_path)
        assert len(results) == 2
        suite_doc = json.loads((tmp_path / "suite_summary.json").read_text())
        assert [row["scenario"] for row in suite_doc["scenarios"]] == ["s1", "s2"]
        assert (tmp_path / "s1" / "summary.json").exists()
        assert (tmp_path / "s2" / "trajectories.csv").exists()


class TestVerifyCertificates:
    def test_benchmark_suite_verifies(self):
        report = verify_certificates(builtin_suite("table1"))
        assert report["ok"]
        for row in report["scenarios"]:
            assert row["psi_ok"] and row["violation_ok"] and row["support_ok"]
            assert row["recheck_violation"] <= 1e-8

    def test_error_rows_do_not_mask_others(self):
        scenarios = [
            tiny_scenario(),
            Scenario(name="hopeless", game=GameConfig(0.45, 0.45, 0.6)),
        ]
        report = verify_certificates(scenarios)
        assert not report["ok"]
        by_name = {row["scenario"]: row for row in report["scenarios"]}
        assert by_name["tiny"]["ok"]
        assert "error" in by_name["hopeless"]
        assert "NoPositiveEffort" in by_name["hopeless"]["error"]


class TestCli:
    @pytest.fixture()
    def runner(self):
        return CliRunner()

    @pytest.fixture()
    def config_file(self, tmp_path):
        doc = {
            "scenarios": [
                {
                    "name": "tiny",
                    "k": 0.6,
                    "eps0": 0.05,
                    "eps1": 0.05,
                    "replications": 4,
                    "seed": 11,
                    "cascade": dict(TINY_CASCADE),
                }
            ]
        }
        path = tmp_path / "scenarios.json"
        path.write_text(json.dumps(doc))
        return path

    def test_run_with_config(self, runner, tmp_path, config_file):
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["run", "--config", str(config_file), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "tiny" in result.output
        assert "wrote 1 scenario directory" in result.output
        assert (out / "tiny" / "summary.json").exists()
        assert (out / "suite_summary.json").exists()

    def test_run_requires_exactly_one_source(self, runner, config_file):
        neither = runner.invoke(main, ["run"])
        both = runner.invoke(
            main, ["run", "--suite", "table1", "--config", str(config_file)]
        )
        assert neither.exit_code == 2
        assert both.exit_code == 2

    def test_run_rejects_bad_config(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"scenarios": [{"name": "x"}]}))
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 2
        assert "error:" in result.output

    def test_seed_flag_overrides_scenario(self, runner, tmp_path, config_file):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            ["run", "--config", str(config_file), "--out", str(out), "--seed", "55"],
        )
        assert result.exit_code == 0
        summary = json.loads((out / "tiny" / "summary.json").read_text())
        assert summary["seed"] == 55

    def test_seed_environment_beats_flag(self, runner, tmp_path, config_file):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            ["run", "--config", str(config_file), "--out", str(out), "--seed", "55"],
            env={"NUDGESIM_SEED": "123"},
        )
        assert result.exit_code == 0
        summary = json.loads((out / "tiny" / "summary.json").read_text())
        assert summary["seed"] == 123

    def test_run_with_numpy_backend(self, runner, tmp_path, config_file):
        out = tmp_path / "out"
        result = runner.invoke(
            main,
            ["run", "--config", str(config_file), "--out", str(out),
             "--backend", "numpy"],
        )
        assert result.exit_code == 0

    def test_verify_benchmark_suite(self, runner):
        result = runner.invoke(main, ["verify", "--suite", "table1"])
        assert result.exit_code == 0, result.output
        assert result.output.count(": ok") == 4

    def test_verify_reports_errors_with_exit_one(self, runner, tmp_path):
        doc = {"scenarios": [
            {"name": "hopeless", "k": 0.6, "eps0": 0.45, "eps1": 0.45}
        ]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["verify", "--config", str(path)])
        assert result.exit_code == 1
        assert "ERROR" in result.output

    def _game_document(self, tamper: bool) -> dict:
        game, triple = binary_to_finite(
            GameConfig(0.05, 0.05, 0.6), CASE_LAMBDA_BAR["case1"]
        )
        amat = triple.amat.copy()
        if tamper:
            amat[0] = 0.0
            amat[0, -1] = 1.0
        return {
            "theta": game.theta.tolist(),
            "d": game.dmat.tolist(),
            "r": game.rmat.tolist(),
            "s": game.smat.tolist(),
            "pi": triple.pimat.tolist(),
            "a": amat.tolist(),
            "u": triple.umat.tolist(),
        }

    def test_pbe_check_accepts_equilibrium(self, runner, tmp_path):
        path = tmp_path / "game.json"
        path.write_text(json.dumps(self._game_document(tamper=False)))
        result = runner.invoke(main, ["pbe-check", "--game", str(path)])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["receiver"]["ok"] is True

    def test_pbe_check_rejects_tampered_candidate(self, runner, tmp_path):
        path = tmp_path / "game.json"
        path.write_text(json.dumps(self._game_document(tamper=True)))
        result = runner.invoke(main, ["pbe-check", "--game", str(path)])
        assert result.exit_code == 1
        payload = json.loads(result.output)
        assert payload["receiver"]["ok"] is False

    def test_pbe_check_requires_candidate(self, runner, tmp_path):
        doc = self._game_document(tamper=False)
        for key in ("pi", "a", "u"):
            del doc[key]
        path = tmp_path / "game.json"
        path.write_text(json.dumps(doc))
        result = runner.invoke(main, ["pbe-check", "--game", str(path)])
        assert result.exit_code == 2

    def test_suite_names_registered(self):
        assert SUITE_NAMES == ("table1", "table2")
