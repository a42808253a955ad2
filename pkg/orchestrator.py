#!/usr/bin/env python3
"""
orchestrator.py - Orquestrador central do laboratório

Executa um subcomando por vez: lê config/experiments.yaml, aplica as flags,
valida a grade inteira, roda as tarefas (em paralelo se workers > 1) e grava
resultados + manifesto de forma atômica.

Códigos de saída: 0 sucesso, 2 configuração/pré-condição, 3 invariante ou
verificação que falhou, 1 qualquer outro erro.
"""

import argparse
import importlib.util
import sys
from datetime import datetime
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional

from tqdm import tqdm

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT / "scripts"))

from utils import (  # noqa: E402
    LAB_VERSION, ConfigError, ConfigManager, FileManager, InvariantError,
    PreconditionError, csv_writer, derive_seeds, jsonl_writer, logger,
)

DEFAULT_CONFIG = ROOT / "config" / "experiments.yaml"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

_STEP_CACHE: Dict[str, Any] = {}


def load_step(script: str):
    """Importa uma etapa numerada (nomes começando com dígito)"""
    if script not in _STEP_CACHE:
        path = ROOT / script
        spec = importlib.util.spec_from_file_location(f"lab_{path.stem}", path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        _STEP_CACHE[script] = module
    return _STEP_CACHE[script]


def _run_task(payload) -> List[Dict[str, Any]]:
    script, task, seed = payload
    return load_step(script).run_task(task, seed)


class LabOrchestrator:
    """Coordena a execução de um subcomando do laboratório"""

    COMMANDS = {
        "loopgas-diag": {
            "num": 1,
            "secao": "loopgas_diag",
            "script": "scripts/01_loopgas_diag.py",
            "icon": "🔁",
            "descricao": "Diagnóstico das cadeias do gás de laços",
        },
        "order-param": {
            "num": 2,
            "secao": "order_param",
            "script": "scripts/02_order_param.py",
            "icon": "🧲",
            "descricao": "Parâmetro de ordem de membrana",
        },
        "decode-threshold": {
            "num": 3,
            "secao": "decode_threshold",
            "script": "scripts/03_decode_threshold.py",
            "icon": "🩹",
            "descricao": "Limiar da restauração por emparelhamento",
        },
        "gauge-verify": {
            "num": 4,
            "secao": "gauge_verify",
            "script": "scripts/04_gauge_verify.py",
            "icon": "🔀",
            "descricao": "Dualidades de gauge (simbólico)",
        },
        "disentangle-verify": {
            "num": 5,
            "secao": "disentangle_verify",
            "script": "scripts/05_disentangle_verify.py",
            "icon": "🧶",
            "descricao": "Circuito desemaranhador 2D",
        },
        "lemma1-check": {
            "num": 6,
            "secao": "lemma1_check",
            "script": "scripts/06_lemma1_check.py",
            "icon": "📐",
            "descricao": "Gibbs simétrico vs ensemble livre (denso)",
        },
    }

    def __init__(self, command: str, config: ConfigManager, output_dir: Optional[str] = None,
                 seed: Optional[int] = None, workers: Optional[int] = None):
        if command not in self.COMMANDS:
            raise ConfigError(f"comando desconhecido {command!r}")
        self.command = command
        self.info = self.COMMANDS[command]
        self.step = load_step(self.info["script"])
        self.config = config

        self.run_cfg = config.get_run()
        if seed is not None:
            self.run_cfg["seed"] = seed
        if workers is not None:
            self.run_cfg["workers"] = workers
        if self.run_cfg["workers"] < 1:
            raise config.error("workers deve ser ≥ 1", "run", "workers")

        self.output_dir = Path(output_dir or self.run_cfg["output_dir"])
        self.files = FileManager(str(self.output_dir))
        self.log_file = self.output_dir / "lab.log"
        self.start_time = datetime.now()
        self.results: Dict[str, Any] = {
            "comando": command,
            "versao": LAB_VERSION,
            "inicio": self.start_time.isoformat(),
            "seed": self.run_cfg["seed"],
        }

    @property
    def stem(self) -> str:
        return self.info["secao"]

    @property
    def result_file(self) -> str:
        return f"{self.stem}.{self.step.FORMAT}"

    def log(self, message: str):
        """Registra mensagem em log"""
        logger.info(message)
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(f"[{datetime.now().strftime('%H:%M:%S')}] {message}\n")

    def params(self, args: Optional[argparse.Namespace] = None) -> Dict[str, Any]:
        """Seção do comando com as flags aplicadas, já validada"""
        params = self.config.get_section(self.stem)
        if args is not None:
            params = self.step.apply_overrides(params, args)
        self.step.validate(params)
        return params

    def execute(self, params: Dict[str, Any]) -> List[Dict[str, Any]]:
        """Roda todas as tarefas; a ordem dos registros segue a das tarefas"""
        tasks = self.step.build_tasks(params)
        seeds = derive_seeds(self.run_cfg["seed"], len(tasks))
        self.results["task_seeds"] = seeds
        payloads = [(self.info["script"], task, seed) for task, seed in zip(tasks, seeds)]
        workers = min(self.run_cfg["workers"], max(len(tasks), 1))
        progress = dict(total=len(payloads), desc=self.command,
                        disable=not self.run_cfg["progress"])

        self.log(f"⏳ {len(tasks)} tarefas, {workers} worker(s)")
        if workers == 1:
            chunks = [_run_task(p) for p in tqdm(payloads, **progress)]
        else:
            with Pool(workers) as pool:
                chunks = list(tqdm(pool.imap(_run_task, payloads), **progress))
        return [record for chunk in chunks for record in chunk]

    def emit(self, records: List[Dict[str, Any]]) -> Path:
        """Grava os registros em .partial e renomeia só no sucesso"""
        if self.step.FORMAT == "csv":
            writer = csv_writer(records, self.step.COLUMNS)
        else:
            writer = jsonl_writer(records)
        self.files.write_partial(self.result_file, writer)
        return self.files.commit(self.result_file)

    def run(self, args: Optional[argparse.Namespace] = None) -> int:
        """Executa o comando e devolve o código de saída"""
        icon = self.info["icon"]
        logger.info("\n" + "=" * 60)
        logger.info(f"{icon} {self.info['descricao'].upper()}")
        logger.info("=" * 60)

        params = self.params(args)
        self.results["config"] = {"run": self.run_cfg, self.stem: params}
        self.log(f"{icon} Comando: {self.command}")
        self.log(f"Diretório: {self.output_dir}")

        try:
            records = self.execute(params)
            path = self.emit(records)
            summary = self.step.summarize(records, params)
        except Exception as e:
            self.log(f"✗ Erro em {self.command}: {e}")
            self.results["status"] = "erro"
            self.results["erro"] = f"{type(e).__name__}: {e}"
            self.save_results()
            raise

        self.results["artefato"] = path.name
        self.results["n_registros"] = len(records)
        self.results["resumo"] = summary
        passed = bool(summary.get("passed", True))
        self.results["status"] = "sucesso" if passed else "falhou"
        self.save_results()

        duration = (datetime.now() - self.start_time).total_seconds()
        if passed:
            self.log(f"✓ {self.command} concluído ({len(records)} registros, {duration:.0f}s)")
            return EXIT_OK
        self.log(f"✗ {self.command}: verificação falhou")
        return EXIT_INVARIANT

    def save_results(self):
        """Salva o manifesto em JSON"""
        self.results["fim"] = datetime.now().isoformat()
        self.files.save_json(f"{self.stem}.manifest.json", self.results)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=str(DEFAULT_CONFIG), help="Arquivo YAML de experimentos")
    common.add_argument("--output", help="Diretório de saída (padrão: run.output_dir)")
    common.add_argument("--seed", type=int, help="Semente mestre")
    common.add_argument("--workers", type=int, help="Número de processos")

    parser = argparse.ArgumentParser(description="Laboratório de ordem SPT térmica")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, info in LabOrchestrator.COMMANDS.items():
        step_parser = sub.add_parser(name, parents=[common], help=info["descricao"])
        load_step(info["script"]).add_arguments(step_parser)
    return parser


def main(argv: Optional[List[str]] = None):
    args = build_parser().parse_args(argv)
    try:
        config = ConfigManager(args.config)
        orchestrator = LabOrchestrator(args.command, config, args.output, args.seed, args.workers)
        code = orchestrator.run(args)
    except (ConfigError, PreconditionError) as e:
        logger.error(f"✗ Configuração inválida: {e}")
        code = EXIT_CONFIG
    except InvariantError as e:
        logger.error(f"✗ Invariante violada: {e}")
        code = EXIT_INVARIANT
    except Exception as e:
        logger.error(f"✗ Erro: {e}")
        code = EXIT_ERROR
    sys.exit(code)


if __name__ == "__main__":
    main()
