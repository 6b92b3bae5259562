"""CLI surface: config handling, exit codes, command wiring."""

import json

import pytest

from profilegen.cli import main
from profilegen.common import ConfigError
from profilegen.config import load_config

MINI_TOML = """
seed = 7
resolution_minutes = 60
raw_dir = "{raw}"
artifact_dir = "{artifacts}"
output_dir = "{out}"
factor_bins = 8
min_training_profiles = 16

[clusters]
load = 2

[corpus]
n_homes = 16
n_days = 14
resolution_minutes = 60
data_types = ["load"]

[train]
n_epochs = 2
batch_size = 32
population = 16
noise_dim = 4
generator_hidden = [8]
discriminator_hidden = [8]

[ingest]
n_segments = 2
[ingest.factors]
urban = 0.25
rural = 0.27
motorway = 0.32

[evaluate]
repetitions = 1

[generate]
n_homes = 1
n_days = 5
start_date = "2013-01-14"
data_types = ["load"]
"""


@pytest.fixture
def mini_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        MINI_TOML.format(
            raw=tmp_path / "raw", artifacts=tmp_path / "artifacts", out=tmp_path / "out"
        )
    )
    return path


def test_load_config_defaults_and_overrides(mini_config, tmp_path):
    cfg = load_config(mini_config)
    assert cfg.seed == 7 and cfg.factor_bins == 8
    assert cfg.train.n_epochs == 2
    cfg = load_config(mini_config, seed=99, out_dir=tmp_path / "elsewhere")
    assert cfg.seed == 99
    assert cfg.output_dir == tmp_path / "elsewhere"


def test_unknown_config_key_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("definitely_not_a_key = 1\n")
    with pytest.raises(ConfigError, match="definitely_not_a_key"):
        load_config(path)


def test_missing_factors_is_a_config_error(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text("seed = 1\n")
    cfg = load_config(path)
    with pytest.raises(ConfigError, match="factors"):
        cfg.consumption_factors()


def test_missing_config_file_exits_2(capsys):
    assert main(["--config", "/nonexistent/cfg.toml", "corpus"]) == 2
    assert "config error" in capsys.readouterr().err


def test_generate_without_artifacts_exits_3(mini_config, capsys):
    assert main(["--config", str(mini_config), "generate"]) == 3
    err = capsys.readouterr().err
    assert "missing artifact" in err


def test_prepare_without_corpus_exits_3(mini_config, capsys):
    assert main(["--config", str(mini_config), "prepare"]) == 3
    assert "load.csv" in capsys.readouterr().err


def test_full_mini_pipeline_round_trip(mini_config, tmp_path, capsys):
    for command in (["corpus"], ["prepare"], ["train"], ["generate"], ["evaluate"]):
        assert main(["--config", str(mini_config)] + command) == 0, command
    for figure in ("fill_compare", "clusters", "bands", "tstr", "factor_matrix"):
        assert main(["--config", str(mini_config), "plot", figure]) == 0

    out = tmp_path / "out"
    assert (out / "home_0000.csv").exists()
    assert (out / "eval_report.json").exists()
    assert (out / "manifest.json").exists()
    plots = out / "plots"
    svgs = sorted(p.name for p in plots.glob("*.svg"))
    assert len(svgs) >= 5
    header = (out / "home_0000.csv").read_text().splitlines()[0]
    assert header == "date,data_type,step,value_kwh,available"
    report = json.loads((out / "eval_report.json").read_text())
    assert 0.0 <= report["tstr_accuracy"] <= 1.0


def test_generate_reruns_byte_identical(mini_config, tmp_path):
    assert main(["--config", str(mini_config), "corpus"]) == 0
    assert main(["--config", str(mini_config), "prepare"]) == 0
    assert main(["--config", str(mini_config), "train"]) == 0
    assert main(["--config", str(mini_config), "generate"]) == 0
    first = (tmp_path / "out" / "home_0000.csv").read_bytes()
    assert main(["--config", str(mini_config), "generate"]) == 0
    assert (tmp_path / "out" / "home_0000.csv").read_bytes() == first
