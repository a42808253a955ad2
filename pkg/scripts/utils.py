"""
utils.py - Funções compartilhadas do laboratório SPT térmico

Logging, arquivos de resultado, configuração YAML, exceções, sementes e
estatística usadas por todas as etapas.
"""

import csv
import json
import math
import os
import yaml
import numpy as np
from pathlib import Path
from typing import Dict, Any, Iterable, List, Optional, Sequence
import logging

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='[%(asctime)s] %(levelname)s: %(message)s',
    datefmt='%H:%M:%S'
)
logger = logging.getLogger(__name__)

LAB_VERSION = "0.3.0"


class LabError(Exception):
    """Erro base do laboratório"""


class ConfigError(LabError):
    """Configuração inválida, com âncora de linha no YAML"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class PreconditionError(LabError, ValueError):
    """Entrada fora do domínio de uma operação"""


class InvariantError(LabError):
    """Invariante violada durante a execução"""


class FileManager:
    """Gerencia os artefatos de saída de uma execução"""

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.output_dir / filename

    def partial_path(self, filename: str) -> Path:
        return self.output_dir / f"{filename}.partial"

    def write_partial(self, filename: str, writer) -> Path:
        """Escreve apenas o .partial (marcado como incompleto)"""
        partial = self.partial_path(filename)
        try:
            with open(partial, 'w', encoding='utf-8', newline='') as f:
                writer(f)
        except OSError as e:
            raise OSError(f"falha ao escrever {partial}: {e}") from e
        return partial

    def commit(self, filename: str) -> Path:
        final = self.path(filename)
        os.replace(self.partial_path(filename), final)
        logger.info(f"✓ Salvo: {final}")
        return final

    def save_json(self, filename: str, data: Dict[str, Any]) -> Path:
        """Salva JSON com indentação (via .partial)"""
        self.write_partial(filename, lambda f: json.dump(data, f, indent=2, ensure_ascii=False))
        return self.commit(filename)

    def load_json(self, filename: str) -> Dict[str, Any]:
        """Carrega JSON"""
        with open(self.path(filename), 'r', encoding='utf-8') as f:
            return json.load(f)


def csv_writer(records: Sequence[Dict[str, Any]], columns: Sequence[str]):
    """Writer de CSV com cabeçalho fixo (registro vazio gera só o cabeçalho)"""

    def write(f):
        out = csv.writer(f, lineterminator='\n')
        out.writerow(columns)
        for record in records:
            out.writerow([_format_cell(record.get(col)) for col in columns])

    return write


def jsonl_writer(records: Sequence[Dict[str, Any]]):
    """Writer de JSON-lines, um registro por linha"""

    def write(f):
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=False))
            f.write('\n')

    return write


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # repr é a menor string decimal que reconstrói o float
        return repr(value)
    return str(value)


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    """Lê um arquivo JSON-lines"""
    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def read_csv(path: str) -> List[Dict[str, str]]:
    """Lê um CSV gerado pelo laboratório"""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


class ConfigManager:
    """Gerencia a configuração de experimentos (config/experiments.yaml)"""

    SCHEMA: Dict[str, Dict[str, Any]] = {
        "run": {"seed": int, "workers": int, "output_dir": str, "progress": bool},
        "loopgas_diag": {
            "d": int, "beta": list, "sweeps": int, "burn_in": int,
            "chains": int, "winding_fraction": float,
        },
        "order_param": {
            "d": list, "T": list, "samples": int, "chains": int, "burn_in": int,
            "thin": int, "alpha_c": (float, type(None)), "exact": bool,
        },
        "decode_threshold": {"d": list, "p": list, "trials": int, "method": str},
        "gauge_verify": {"d": list},
        "disentangle_verify": {
            "L": list, "beta": float, "c": (float, type(None)),
            "c_margin": float, "trials": int,
        },
        "lemma1_check": {"beta": list},
    }

    def __init__(self, config_path: str = "config/experiments.yaml"):
        self.config_path = Path(config_path)
        self.data, self.lines = self._load_yaml(self.config_path)

    def _load_yaml(self, filepath: Path):
        """Carrega arquivo YAML junto com as linhas de cada chave"""
        if not filepath.exists():
            raise ConfigError("arquivo de configuração não encontrado", str(filepath))

        with open(filepath, 'r', encoding='utf-8') as f:
            text = f.read()

        try:
            data = yaml.safe_load(text) or {}
            node = yaml.compose(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"YAML inválido: {e}", str(filepath), line) from e

        if not isinstance(data, dict):
            raise ConfigError("a raiz deve ser um mapeamento de seções", str(filepath), 1)

        lines: Dict[tuple, int] = {}
        if node is not None and isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                section = key_node.value
                lines[(section,)] = key_node.start_mark.line + 1
                if isinstance(value_node, yaml.MappingNode):
                    for sub_key, _ in value_node.value:
                        lines[(section, sub_key.value)] = sub_key.start_mark.line + 1
        return data, lines

    def line_of(self, section: str, key: Optional[str] = None) -> Optional[int]:
        if key is not None and (section, key) in self.lines:
            return self.lines[(section, key)]
        return self.lines.get((section,))

    def error(self, message: str, section: str, key: Optional[str] = None) -> ConfigError:
        return ConfigError(message, str(self.config_path), self.line_of(section, key))

    def get_section(self, section: str) -> Dict[str, Any]:
        """Retorna uma seção validada contra o esquema"""
        if section not in self.data:
            raise ConfigError(f"seção obrigatória ausente [{section}]", str(self.config_path))
        values = self.data[section]
        if not isinstance(values, dict):
            raise self.error(f"seção [{section}] deve ser um mapeamento", section)

        for key, expected in self.SCHEMA.get(section, {}).items():
            if key not in values:
                raise self.error(f"chave obrigatória ausente '{key}' em [{section}]", section)
            value = values[key]
            if expected is float and isinstance(value, int) and not isinstance(value, bool):
                continue
            if isinstance(expected, tuple) and float in expected and isinstance(value, int):
                continue
            if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
                raise self.error(
                    f"chave '{key}' em [{section}] tem tipo inválido ({type(value).__name__})",
                    section, key,
                )
        return dict(values)

    def get_run(self) -> Dict[str, Any]:
        return self.get_section("run")


def derive_seeds(master_seed: int, n: int) -> List[int]:
    """Sementes por tarefa, independentes da ordem de execução"""
    if n == 0:
        return []
    state = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


def spawn_rngs(seed: int, n: int) -> List[np.random.Generator]:
    """Geradores independentes para n cadeias de uma mesma tarefa"""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def fsum_mean(values: Iterable[float]) -> float:
    values = list(values)
    if not values:
        return float('nan')
    return math.fsum(values) / len(values)


def mean_and_stderr(values: Iterable[float]) -> tuple[float, float]:
    """Média e erro padrão com soma compensada"""
    values = [float(v) for v in values]
    n = len(values)
    if n == 0:
        return float('nan'), float('nan')
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def binomial_stderr(rate: float, n: int) -> float:
    if n <= 0:
        return float('nan')
    return math.sqrt(max(rate * (1.0 - rate), 0.0) / n)

