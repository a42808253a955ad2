"""Testes de ponta a ponta do orquestrador (configuração pequena em tmp_path)."""

import json

import pytest

from orchestrator import (
    EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, LabOrchestrator, build_parser, load_step, main,
)
from utils import ConfigManager, read_csv, read_jsonl

RUN = """\
run:
  seed: 11
  workers: 1
  output_dir: {out}
  progress: false
"""

SECTIONS = """
lemma1_check:
  beta: [0.0, 1.0]

gauge_verify:
  d: [2]

order_param:
  d: [2]
  T: [0.5]
  samples: 1
  chains: 1
  burn_in: 0
  thin: 1
  alpha_c: null
  exact: true

disentangle_verify:
  L: [9]
  beta: 1.0
  c: null
  c_margin: 1.1
  trials: 5
"""


@pytest.fixture
def lab(tmp_path):
    out = tmp_path / "out"
    path = tmp_path / "experiments.yaml"
    path.write_text(RUN.format(out=out) + SECTIONS, encoding="utf-8")
    return path, out


def _run(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


class TestCommands:
    """Cada comando grava resultado, manifesto e log."""

    def test_lemma1_check(self, lab):
        config, out = lab
        assert _run(["lemma1-check", "--config", str(config)]) == EXIT_OK
        records = read_jsonl(str(out / "lemma1_check.jsonl"))
        assert [r["beta"] for r in records] == [0.0, 1.0]
        assert all(r["holds"] for r in records)
        manifest = json.loads((out / "lemma1_check.manifest.json").read_text(encoding="utf-8"))
        assert manifest["status"] == "sucesso"
        assert manifest["seed"] == 11
        assert len(manifest["task_seeds"]) == 2
        assert (out / "lab.log").exists()

    def test_gauge_verify(self, lab):
        config, out = lab
        assert _run(["gauge-verify", "--config", str(config)]) == EXIT_OK
        (record,) = read_jsonl(str(out / "gauge_verify.jsonl"))
        assert record["passed"] and record["kernel"]["primal"]["noncontractible_sectors"] == 3

    def test_order_param_exact(self, lab):
        config, out = lab
        assert _run(["order-param", "--config", str(config)]) == EXIT_OK
        (row,) = read_csv(str(out / "order_param.csv"))
        assert row["d"] == "2" and float(row["O_corrected"]) <= 1.0

    def test_output_override(self, lab, tmp_path):
        config, _ = lab
        other = tmp_path / "other"
        assert _run(["lemma1-check", "--config", str(config), "--output", str(other),
                     "--beta", "2.0"]) == EXIT_OK
        assert [r["beta"] for r in read_jsonl(str(other / "lemma1_check.jsonl"))] == [2.0]

    def test_same_seed_same_records(self, lab, tmp_path):
        config, _ = lab
        for name in ("a", "b"):
            _run(["disentangle-verify", "--config", str(config),
                  "--output", str(tmp_path / name), "--seed", "5"])
        a = read_jsonl(str(tmp_path / "a" / "disentangle_verify.jsonl"))
        b = read_jsonl(str(tmp_path / "b" / "disentangle_verify.jsonl"))
        assert a == b


class TestExitCodes:
    def test_missing_key(self, tmp_path):
        path = tmp_path / "experiments.yaml"
        path.write_text(RUN.format(out=tmp_path / "o") + "\nlemma1_check:\n  betas: [1.0]\n",
                        encoding="utf-8")
        assert _run(["lemma1-check", "--config", str(path)]) == EXIT_CONFIG

    def test_precondition(self, lab):
        config, _ = lab
        assert _run(["gauge-verify", "--config", str(config), "--d", "5"]) == EXIT_CONFIG

    def test_failed_summary(self, lab, monkeypatch):
        config, _ = lab
        orchestrator = LabOrchestrator("lemma1-check", ConfigManager(str(config)))
        monkeypatch.setattr(orchestrator.step, "summarize", lambda records, params: {"passed": False})
        assert orchestrator.run() == EXIT_INVARIANT

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["render-video"])


def _rates(table):
    return [{"d": d, "p": p, "fail_rate": rate}
            for d, curve in table.items() for p, rate in curve]


class TestSummaryGates:
    """O veredito das etapas reflete os critérios de aceitação."""

    def test_decode_without_crossing_fails(self):
        step = load_step("scripts/03_decode_threshold.py")
        records = _rates({4: [(0.01, 0.01), (0.05, 0.1)], 8: [(0.01, 0.02), (0.05, 0.2)]})
        summary = step.summarize(records, {})
        assert summary["p_star"] is None and not summary["passed"]

    def test_decode_non_monotone_subthreshold_fails(self):
        step = load_step("scripts/03_decode_threshold.py")
        records = _rates({
            4: [(0.01, 0.001), (0.03, 0.05), (0.05, 0.2)],
            6: [(0.01, 0.002), (0.03, 0.04), (0.05, 0.25)],
            8: [(0.01, 0.0), (0.03, 0.02), (0.05, 0.3)],
        })
        summary = step.summarize(records, {})
        assert 0.02 <= summary["p_star"] <= 0.06
        assert not summary["subthreshold_decreasing"] and not summary["passed"]

    def test_decode_passes(self):
        step = load_step("scripts/03_decode_threshold.py")
        records = _rates({
            4: [(0.01, 0.001), (0.03, 0.05), (0.05, 0.2)],
            6: [(0.01, 0.0005), (0.03, 0.04), (0.05, 0.25)],
            8: [(0.01, 0.0), (0.03, 0.02), (0.05, 0.3)],
        })
        summary = step.summarize(records, {})
        assert summary["p_star"] == pytest.approx(0.03 + 0.02 * 0.03 / 0.13)
        assert summary["passed"]

    def test_order_param_passes(self):
        step = load_step("scripts/02_order_param.py")
        records = [
            {"d": 4, "T": 0.0, "O_raw": 1.0, "O_corrected": 1.0, "stderr": 0.0},
            {"d": 8, "T": 0.0, "O_raw": 1.0, "O_corrected": 1.0, "stderr": 0.0},
            {"d": 8, "T": 1.0, "O_raw": 0.9, "O_corrected": 0.95, "stderr": 0.01},
            {"d": 4, "T": 2.0, "O_raw": 0.3, "O_corrected": 0.3, "stderr": 0.01},
            {"d": 8, "T": 2.0, "O_raw": 0.1, "O_corrected": 0.1, "stderr": 0.01},
        ]
        summary = step.summarize(records, {"alpha_c": None})
        assert summary["product_state_order"] == {"4": 0.5, "8": 0.5}
        assert summary["passed"]

    @pytest.mark.parametrize("row, check", [
        ({"d": 8, "T": 0.0, "O_raw": 1.0, "O_corrected": 0.999}, "T0_d8"),
        ({"d": 8, "T": 0.8, "O_raw": 0.8, "O_corrected": 0.85}, "ordem_d8_T0.8"),
        ({"d": 8, "T": 2.0, "O_raw": 0.4, "O_corrected": 0.4}, "decaimento_T2"),
    ])
    def test_order_param_failures(self, row, check):
        step = load_step("scripts/02_order_param.py")
        records = [
            {"d": 4, "T": 2.0, "O_raw": 0.3, "O_corrected": 0.3, "stderr": 0.01},
            dict(row, stderr=0.01),
        ]
        summary = step.summarize(records, {"alpha_c": None})
        assert summary["checks"][check] is False
        assert not summary["passed"]

    def test_loopgas_joint_mismatch_fails(self):
        step = load_step("scripts/01_loopgas_diag.py")
        hist = {"gamma": {"4:4": 100}, "gamma_prime": {"4:4": 100}}
        record = {
            "beta": 1.0, "acceptance_local": 0.5, "wrapping_fraction": 0.0, "specific_heat": 0.0,
            "joint_hist": hist, "weight_hist": {"gamma": {"4": 100}, "gamma_prime": {"4": 100}},
        }
        summary = step.summarize([record], {"d": 2})
        assert summary["por_beta"]["1.0"]["tv_joint_gamma"] > 0.5
        assert not summary["passed"]
