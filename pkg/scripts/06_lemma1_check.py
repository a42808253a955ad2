#!/usr/bin/env python3
"""
06_lemma1_check.py - Distância entre o Gibbs simétrico e o ensemble livre (Etapa 6)

Input: seção [lemma1_check] de config/experiments.yaml
Output: lemma1_check.jsonl com {beta, p, distance, bound} em L=3
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List

sys.path.insert(0, str(Path(__file__).parent))

from disentangle2d import lemma1_gap, p_beta
from utils import PreconditionError, logger

NAME = "lemma1-check"
SECTION = "lemma1_check"
FORMAT = "jsonl"
L_DENSE = 3


def add_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--beta", type=float, nargs='+', help="Valores de β")


def apply_overrides(params: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    if args.beta is not None:
        params["beta"] = list(args.beta)
    return params


def validate(params: Dict[str, Any]):
    if not params["beta"]:
        raise PreconditionError("grade vazia: [lemma1_check] beta")
    for beta in params["beta"]:
        p_beta(float(beta))


def build_tasks(params: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [{"beta": float(beta)} for beta in params["beta"]]


def run_task(task: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    result = lemma1_gap(L_DENSE, task["beta"])
    return [{
        "beta": result.beta, "p": p_beta(result.beta), "N": result.N,
        "distance": result.distance, "bound": result.bound, "holds": result.holds,
    }]


def summarize(records: List[Dict[str, Any]], params: Dict[str, Any]) -> Dict[str, Any]:
    for r in records:
        icon = "✓" if r["holds"] else "✗"
        logger.info(f"  {icon} β={r['beta']}: ‖ρ - ρ_f‖₁ = {r['distance']:.3e} ≤ {r['bound']:.3e}")
    return {"passed": all(r["holds"] for r in records)}


def main():
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from orchestrator import main as lab_main

    lab_main([NAME] + sys.argv[1:])


if __name__ == "__main__":
    main()
