#!/usr/bin/env python3
"""
03_decode_threshold.py - Taxa de erro lógico da restauração (Etapa 3)

Input: seção [decode_threshold] de config/experiments.yaml
Output: decode_threshold.csv com uma linha por ponto (d, p) e a estimativa
        do cruzamento p* no manifesto
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from restore import METHODS, P0_REFERENCE, logical_error_rate, threshold_crossing
from utils import PreconditionError, logger

NAME = "decode-threshold"
SECTION = "decode_threshold"
FORMAT = "csv"
P_STAR_WINDOW = (0.02, 0.06)
P_SUBTHRESHOLD = 0.01
COLUMNS = [
    "d", "p", "T_equiv", "n_trials", "fail_rate", "stderr", "method", "seed",
    "fail_rate_primal", "fail_rate_dual",
]


def add_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--d-list", type=int, nargs='+', dest="d_list", help="Lados da rede")
    parser.add_argument("--p-list", type=float, nargs='+', dest="p_list", help="Probabilidades de erro")
    parser.add_argument("--trials", type=int, help="Tentativas por ponto")
    parser.add_argument("--method", choices=METHODS, help="Decodificador")


def apply_overrides(params: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    if args.d_list is not None:
        params["d"] = list(args.d_list)
    if args.p_list is not None:
        params["p"] = list(args.p_list)
    if args.trials is not None:
        params["trials"] = args.trials
    if args.method is not None:
        params["method"] = args.method
    return params


def validate(params: Dict[str, Any]):
    if not params["d"] or not params["p"]:
        raise PreconditionError("grade vazia: [decode_threshold] d × p")
    if params["method"] not in METHODS:
        raise PreconditionError(f"método desconhecido {params['method']!r}")
    if params["trials"] <= 0:
        raise PreconditionError(f"trials deve ser > 0 (recebido {params['trials']})")
    for d in params["d"]:
        if d < 2:
            raise PreconditionError(f"d deve ser ≥ 2 (recebido {d})")
    for p in params["p"]:
        if not 0.0 <= p <= 0.5:
            raise PreconditionError(f"p deve estar em [0, 1/2] (recebido {p})")


def build_tasks(params: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [
        {"d": d, "p": float(p), "trials": params["trials"], "method": params["method"]}
        for d in params["d"]
        for p in params["p"]
    ]


def run_task(task: Dict[str, Any], seed: int) -> List[Dict[str, Any]]:
    rate = logical_error_rate(task["d"], task["p"], task["trials"], task["method"],
                              rng=np.random.default_rng(seed))
    return [{
        "d": rate.d, "p": rate.p, "T_equiv": rate.T_equiv, "n_trials": rate.n_trials,
        "fail_rate": rate.fail_rate, "stderr": rate.stderr, "method": rate.method,
        "seed": seed, "fail_rate_primal": rate.fail_rate_primal,
        "fail_rate_dual": rate.fail_rate_dual,
    }]


def summarize(records: List[Dict[str, Any]], params: Dict[str, Any]) -> Dict[str, Any]:
    """Cruzamento p* dentro da janela esperada e queda estrita com d abaixo do limiar"""
    curves: Dict[int, List] = {}
    for r in records:
        curves.setdefault(r["d"], []).append((r["p"], r["fail_rate"]))
    summary: Dict[str, Any] = {"p_star": None, "p0_reference": P0_REFERENCE, "passed": True}
    if len(curves) < 2:
        logger.info("  um único d: sem cruzamento a verificar")
        return summary

    p_star = threshold_crossing(curves)
    summary["p_star"] = p_star
    if p_star is None:
        logger.error("  ✗ nenhum cruzamento entre o menor e o maior d")
        summary["passed"] = False
    elif not P_STAR_WINDOW[0] <= p_star <= P_STAR_WINDOW[1]:
        logger.error(f"  ✗ p* ≈ {p_star:.4f} fora de {P_STAR_WINDOW}")
        summary["passed"] = False
    else:
        logger.info(f"  ✓ p* ≈ {p_star:.4f} (referência p(T₀) = {P0_REFERENCE:.4f})")

    low = sorted((r["d"], r["fail_rate"]) for r in records if np.isclose(r["p"], P_SUBTHRESHOLD))
    if len(low) >= 2:
        rates = [rate for _, rate in low]
        decreasing = all(b < a for a, b in zip(rates, rates[1:]))
        summary["subthreshold_decreasing"] = decreasing
        if decreasing:
            logger.info(f"  ✓ p={P_SUBTHRESHOLD}: taxa cai com d {rates}")
        else:
            logger.error(f"  ✗ p={P_SUBTHRESHOLD}: taxa não cai estritamente com d {rates}")
            summary["passed"] = False
    return summary


def main():
    sys.path.insert(0, str(Path(__file__).parent.parent))
    from orchestrator import main as lab_main

    lab_main([NAME] + sys.argv[1:])


if __name__ == "__main__":
    main()
