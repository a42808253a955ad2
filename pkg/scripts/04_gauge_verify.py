#!/usr/bin/env python3
"""
04_gauge_verify.py - Verificação simbólica das dualidades de gauge (Etapa 4)

Input: seção [gauge_verify] de config/experiments.yaml
Output: gauge_verify.jsonl com o relatório de cada d (dualidades e núcleo)
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List

sys.path.insert(0, str(Path(__file__).parent))

from gauging import kernel_report, verify_dualities
from homology import get_lattice
from utils import PreconditionError, logger

NAME = "gauge-verify"
SECTION = "gauge_verify"
FORMAT = "jsonl"
SUPPORTED_D = (2, 3, 4)


def add_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--d", type=int, nargs='+', help="Lados da rede (2, 3 ou 4)")


def apply_overrides(params: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    if args.d is not None:
        params["d"] = list(args.d)
    return params


def validate(params: Dict[str, Any]):
    if not params["d"]:
        raise PreconditionError("grade vazia: [gauge_verify] d")
    for d in params["d"]:
        if d not in SUPPORTED_D:
            raise PreconditionError(f"gauge-verify aceita d ∈ {SUPPORTED_D} (recebido {d})")


def build_tasks(params: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [{"d": d} for d in params["d"]]


def run_task(task: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    lattice = get_lattice(task["d"])
    record = verify_dualities(lattice).to_record()
    kernels = kernel_report(lattice)
    record["kernel"] = {
        side: {
            "kernel_dim": k.kernel_dim,
            "symmetry_span_dim": k.symmetry_span_dim,
            "noncontractible_sectors": k.noncontractible_sectors,
            "kernel_equals_symmetry_span": k.kernel_equals_symmetry_span,
        }
        for side, k in kernels.items()
    }
    record["passed"] = record["passed"] and all(k.kernel_equals_symmetry_span for k in kernels.values())
    return [record]


def summarize(records: List[Dict[str, Any]], params: Dict[str, Any]) -> Dict[str, Any]:
    for r in records:
        icon = "✓" if r["passed"] else "✗"
        logger.info(f"  {icon} d={r['d']}: H_X→TC {r['trivial_to_toric']}, "
                    f"H_C→Hadamard {r['cluster_to_hadamard']}")
    return {"passed": all(r["passed"] for r in records)}


def main():
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from orchestrator import main as lab_main

    lab_main([NAME] + sys.argv[1:])


if __name__ == "__main__":
    main()
