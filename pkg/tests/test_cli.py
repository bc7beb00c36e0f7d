import json

import numpy as np
from click.testing import CliRunner

from deso import config
from deso.cli import cli, main
from deso.descriptor import DescriptorSystem
from deso.reference import example_config


def _write_config(tmp_path, example=1, **overrides):
    path = tmp_path / f"example{example}.json"
    path.write_text(json.dumps({**example_config(example), **overrides}))
    return path


def test_simulate_synthesize_estimate_verify(tmp_path):
    runner = CliRunner()
    cfg = _write_config(tmp_path)
    data = tmp_path / "data"

    result = runner.invoke(cli, ["simulate", "--config", str(cfg), "--out", str(data)])
    assert result.exit_code == 0, result.output
    assert "T=20" in result.output

    result = runner.invoke(cli, ["synthesize", "--dataset", str(data), "--out", str(data)])
    assert result.exit_code == 0, result.output
    assert (data / config.GAINS_FILE).exists()

    result = runner.invoke(
        cli,
        ["estimate", "--gains", str(data / config.GAINS_FILE), "--config", str(cfg), "--out", str(data)],
    )
    assert result.exit_code == 0, result.output
    assert (data / config.RUN_FILE).exists()

    result = runner.invoke(
        cli,
        ["verify", "--dataset", str(data / config.DATASET_FILE), "--config", str(cfg), "--out", str(data)],
    )
    assert result.exit_code == 0, result.output
    assert "MISMATCH" not in result.output
    assert json.loads((data / config.CHECKS_FILE).read_text())["all_agree"]


def test_repro_command(tmp_path):
    result = CliRunner().invoke(cli, ["repro", "1", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.output
    assert (tmp_path / config.SUMMARY_FILE).exists()


def test_montecarlo_command(tmp_path):
    result = CliRunner().invoke(
        cli,
        ["montecarlo", "--mode", "standard", "--trials", "2", "--seed", "3", "--out", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    assert "theorem2" in result.output


def test_exit_code_for_bad_arguments(tmp_path):
    assert main(["montecarlo", "--trials", "0", "--out", str(tmp_path)]) == config.EXIT_PARSE
    assert main(["repro", "3", "--out", str(tmp_path)]) == config.EXIT_PARSE


def test_exit_code_for_bad_config_keys(tmp_path):
    cfg = _write_config(tmp_path, horizon=10)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == config.EXIT_PARSE


def test_exit_code_for_missing_file(tmp_path):
    missing = tmp_path / "missing.json"
    assert main(["simulate", "--config", str(missing), "--out", str(tmp_path)]) == config.EXIT_IO


def test_exit_code_for_unexciting_input(tmp_path):
    cfg = _write_config(tmp_path, input_law={"law": "zero"})
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == config.EXIT_PE_EXHAUSTED


def test_exit_code_for_infeasible_synthesis(tmp_path):
    hidden = DescriptorSystem(
        E=np.diag([1.0, 1.0, 0.0]),
        A=np.diag([1.2, 0.5, 1.0]),
        B=np.ones((3, 1)),
        C=np.array([[0.0, 1.0, 1.0]]),
    )
    cfg = tmp_path / "hidden.json"
    cfg.write_text(json.dumps({"system": hidden.to_dict(), "T": 20, "seed": 0}))
    data = tmp_path / "data"
    assert main(["simulate", "--config", str(cfg), "--out", str(data)]) == config.EXIT_OK
    assert main(["synthesize", "--dataset", str(data), "--out", str(data)]) == config.EXIT_INFEASIBLE
    report = json.loads((data / config.REPORT_FILE).read_text())
    assert report["reason"] == "undetectable_family"
    assert not (data / config.GAINS_FILE).exists()


def test_exit_code_for_lti_config_without_inputs(tmp_path):
    document = example_config(4)
    del document["system"]["B0"]
    cfg = tmp_path / "no_b0.json"
    cfg.write_text(json.dumps(document))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")]) == config.EXIT_PARSE
