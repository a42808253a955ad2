#!/usr/bin/env python3
"""
05_disentangle_verify.py - Circuito desemaranhador no toro triangular (Etapa 5)

Input: seção [disentangle_verify] de config/experiments.yaml
Output: disentangle_verify.jsonl com um registro por L; o oráculo denso da
        estrela de 7 qubits vai para o manifesto
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from disentangle2d import (
    block_side, dense_oracle, validity_union_bound, p_beta, valid_probability, verify_configs,
)
from utils import PreconditionError, logger

NAME = "disentangle-verify"
SECTION = "disentangle_verify"
FORMAT = "jsonl"


def add_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--L", type=int, nargs='+', help="Lados do toro triangular")
    parser.add_argument("--beta", type=float, help="β do modelo 2D")
    parser.add_argument("--c", type=float, help="Constante c de l = ⌈(c ln L)^{1/2}⌉")
    parser.add_argument("--trials", type=int, help="Configurações amostradas por L")


def apply_overrides(params: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    for key in ("L", "beta", "c", "trials"):
        value = getattr(args, key)
        if value is not None:
            params[key] = list(value) if key == "L" else value
    return params


def validate(params: Dict[str, Any]):
    if not params["L"]:
        raise PreconditionError("grade vazia: [disentangle_verify] L")
    if params["trials"] <= 0:
        raise PreconditionError(f"trials deve ser > 0 (recebido {params['trials']})")
    if params["c"] is not None and params["c"] <= 0:
        raise PreconditionError(f"c deve ser > 0 (recebido {params['c']})")
    p_beta(params["beta"])
    for L in params["L"]:
        if L < 3:
            raise PreconditionError(f"L deve ser ≥ 3 (recebido {L})")


def build_tasks(params: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [
        {"L": L, "beta": params["beta"], "c": params["c"],
         "c_margin": params["c_margin"], "trials": params["trials"]}
        for L in params["L"]
    ]


def run_task(task: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    summary = verify_configs(
        task["L"], task["beta"], task["trials"], np.random.default_rng(seed),
        c=task["c"], c_margin=task["c_margin"],
    )
    p = p_beta(task["beta"])
    return [{
        "L": summary.L, "beta": summary.beta,
        "valid_fraction": summary.valid_fraction,
        "max_depth": summary.max_depth,
        "all_conjugations_ok": summary.all_conjugations_ok,
        "l": summary.l, "n_valid": summary.n_valid, "max_layers": summary.max_layers,
        "layer_bound": summary.layer_bound, "depth_bound": summary.depth_bound,
        "depth_ok": summary.depth_ok,
        "valid_probability": valid_probability(summary.L, summary.l, p),
        "validity_union_bound": validity_union_bound(summary.L, summary.l, p),
        "failures": summary.failures[:20],
        "seed": seed,
    }]


def summarize(records: List[Dict[str, Any]], params: Dict[str, Any]) -> Dict[str, Any]:
    oracle = dense_oracle()
    for r in records:
        icon = "✓" if r["all_conjugations_ok"] and r["depth_ok"] else "✗"
        logger.info(f"  {icon} L={r['L']} l={r['l']}: válidas {r['valid_fraction']:.3f}, "
                    f"camadas máx {r['max_layers']} ≤ {r['layer_bound']}, "
                    f"subcamadas máx {r['max_depth']} ≤ {r['depth_bound']}")
    logger.info(f"  {'✓' if oracle.passed else '✗'} oráculo denso (estrela de 7 qubits)")
    return {
        "block_side": {str(r["L"]): block_side(r["L"], params["beta"], params["c"], params["c_margin"])
                       for r in records},
        "dense_oracle": {"passed": oracle.passed, "checks": oracle.checks},
        "passed": oracle.passed and all(r["all_conjugations_ok"] and r["depth_ok"] for r in records),
    }


def main():
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from orchestrator import main as lab_main

    lab_main([NAME] + sys.argv[1:])


if __name__ == "__main__":
    main()
