"""Testes dos utilitários: configuração, escrita atômica, sementes e estatística."""

import math

import pytest

from utils import (
    ConfigError, ConfigManager, FileManager, csv_writer, derive_seeds, jsonl_writer,
    mean_and_stderr, read_csv, read_jsonl, spawn_rngs,
)

CONFIG = """\
run:
  seed: 7
  workers: 1
  output_dir: out
  progress: false

lemma1_check:
  beta: [0.5, 1.0]

gauge_verify:
  dd: [2]
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiments.yaml"
    path.write_text(CONFIG, encoding="utf-8")
    return path


class TestConfigManager:
    def test_section(self, config_file):
        config = ConfigManager(str(config_file))
        assert config.get_run()["seed"] == 7
        assert config.get_section("lemma1_check")["beta"] == [0.5, 1.0]

    def test_missing_key_has_line(self, config_file):
        """A mensagem aponta para a linha da seção no YAML."""
        config = ConfigManager(str(config_file))
        with pytest.raises(ConfigError) as info:
            config.get_section("gauge_verify")
        assert info.value.line == 10
        assert f"{config_file}:10:" in str(info.value)

    def test_wrong_type_points_at_key(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("run:\n  seed: sete\n  workers: 1\n  output_dir: o\n  progress: true\n",
                        encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            ConfigManager(str(path)).get_run()
        assert info.value.line == 2

    def test_missing_section(self, config_file):
        with pytest.raises(ConfigError):
            ConfigManager(str(config_file)).get_section("order_param")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigManager(str(tmp_path / "nada.yaml"))

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("run: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            ConfigManager(str(path))


class TestFileManager:
    """Escrita em .partial e renomeação."""

    def test_empty_csv_has_header(self, tmp_path):
        files = FileManager(str(tmp_path))
        files.write_partial("r.csv", csv_writer([], ["d", "p"]))
        assert files.partial_path("r.csv").exists()
        path = files.commit("r.csv")
        assert path.read_text(encoding="utf-8") == "d,p\n"
        assert not files.partial_path("r.csv").exists()

    def test_csv_cells(self, tmp_path):
        files = FileManager(str(tmp_path))
        files.write_partial("r.csv", csv_writer([{"d": 4, "p": 0.1, "ok": True, "x": None}],
                                                ["d", "p", "ok", "x"]))
        rows = read_csv(str(files.commit("r.csv")))
        assert rows == [{"d": "4", "p": "0.1", "ok": "true", "x": ""}]

    def test_jsonl(self, tmp_path):
        files = FileManager(str(tmp_path))
        records = [{"beta": 1.0, "holds": True}, {"beta": 2.0, "holds": False}]
        files.write_partial("r.jsonl", jsonl_writer(records))
        assert read_jsonl(str(files.commit("r.jsonl"))) == records

    def test_save_json(self, tmp_path):
        files = FileManager(str(tmp_path))
        files.save_json("m.json", {"status": "sucesso"})
        assert files.load_json("m.json") == {"status": "sucesso"}
        assert not files.partial_path("m.json").exists()

    def test_save_json_failure_keeps_previous(self, tmp_path):
        files = FileManager(str(tmp_path))
        files.save_json("m.json", {"status": "sucesso"})
        with pytest.raises(TypeError):
            files.save_json("m.json", {"status": object()})
        assert files.load_json("m.json") == {"status": "sucesso"}


class TestSeeds:
    def test_deterministic(self):
        assert derive_seeds(42, 5) == derive_seeds(42, 5)
        assert derive_seeds(42, 3) == derive_seeds(42, 5)[:3]
        assert derive_seeds(42, 0) == []

    def test_distinct(self):
        seeds = derive_seeds(1, 100)
        assert len(set(seeds)) == 100

    def test_spawned_generators_differ(self):
        a, b = spawn_rngs(3, 2)
        assert a.random() != b.random()


def test_mean_and_stderr():
    mean, err = mean_and_stderr([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert err == pytest.approx(math.sqrt(5 / 3 / 4))
    assert mean_and_stderr([5.0]) == (5.0, 0.0)
    assert all(math.isnan(v) for v in mean_and_stderr([]))
