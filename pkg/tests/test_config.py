"""Configuración persistente, parseo de grids y RunConfig."""

import json

import pytest

from src.config import OUTPUT_DIR_ENV, Config, RunConfig, parse_grid, parse_pairs, parse_values
from src.utils.numerics import QuadratureSpec


class TestConfig:
    def test_defaults_written_on_first_use(self, tmp_path):
        config = Config(config_dir=str(tmp_path))
        with open(tmp_path / Config.CONFIG_FILE, encoding='utf-8') as f:
            stored = json.load(f)
        assert stored == Config.DEFAULT_CONFIG
        assert config.get_horizon() == 100.0
        assert config.get_quadrature_spec() == QuadratureSpec()

    def test_missing_nested_keys_are_filled(self, tmp_path):
        (tmp_path / Config.CONFIG_FILE).write_text(
            json.dumps({"seed": 5, "quadrature": {"rel_tol": 1e-8}}), encoding='utf-8')
        config = Config(config_dir=str(tmp_path))
        assert config.get_seed() == 5
        spec = config.get_quadrature_spec()
        assert spec.rel_tol == 1e-8
        assert spec.abs_tol == Config.DEFAULT_CONFIG["quadrature"]["abs_tol"]

    def test_corrupt_file_falls_back_to_defaults(self, tmp_path):
        (tmp_path / Config.CONFIG_FILE).write_text("{not json", encoding='utf-8')
        assert Config(config_dir=str(tmp_path)).get_seed() == Config.DEFAULT_CONFIG["seed"]

    def test_setters_persist(self, tmp_path):
        config = Config(config_dir=str(tmp_path))
        config.set_seed(99)
        config.set_quadrature_tolerance(1e-9, 1e-11)
        reloaded = Config(config_dir=str(tmp_path))
        assert reloaded.get_seed() == 99
        assert reloaded.get_quadrature_spec().rel_tol == 1e-9

    def test_output_dir_environment_override(self, tmp_path, monkeypatch):
        config = Config(config_dir=str(tmp_path))
        config.set_output_dir("results")
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        assert config.get_output_dir() == "results"
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert config.get_output_dir() == str(tmp_path / "env")


class TestParsing:
    def test_log_grid(self):
        grid = parse_grid("0.01:30:60", log=True)
        assert len(grid) == 60
        assert grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(30.0)

    def test_linear_grid(self):
        assert parse_grid("0:1:5", log=False) == (0.0, 0.25, 0.5, 0.75, 1.0)
        assert parse_grid("2:2:1", log=False) == (2.0,)

    @pytest.mark.parametrize("text", ["1:2", "a:b:c", "2:1:5", "1:1:3", "1:2:0"])
    def test_invalid_grids(self, text):
        with pytest.raises(ValueError):
            parse_grid(text, log=False)

    def test_log_grid_needs_positive_start(self):
        with pytest.raises(ValueError):
            parse_grid("0:1:5", log=True)

    def test_values_and_pairs(self):
        assert parse_values("0, 0.5,1,") == (0.0, 0.5, 1.0)
        assert parse_pairs("0.33:0.3348,0.2361:0.2408") == ((0.33, 0.3348), (0.2361, 0.2408))
        with pytest.raises(ValueError):
            parse_values("1,x")
        with pytest.raises(ValueError):
            parse_pairs("0.3")


class TestRunConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(command="plot", seed=1, output_dir="out")
        with pytest.raises(ValueError):
            RunConfig(command="validate", seed=1, output_dir="out", dt=0.0)
        with pytest.raises(ValueError):
            RunConfig(command="validate", seed=1, output_dir="out", n=0)
        with pytest.raises(ValueError):
            RunConfig(command="figures", seed=1, output_dir="out", figure=4)
        with pytest.raises(ValueError):
            RunConfig(command="validate", seed=1, output_dir="out", corrupt_formula=0.0)

    def test_equal_configs_compare_equal(self):
        a = RunConfig(command="failure-prob", seed=1, output_dir="out", psi_grid=(0.5, 1.0))
        b = RunConfig(command="failure-prob", seed=1, output_dir="out", psi_grid=(0.5, 1.0))
        assert a == b
