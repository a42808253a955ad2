"""
restore.py - Restauração da simetria 1-forma por correção de erros

O estado térmico sem proteção equivale a ruído Z i.i.d. com probabilidade
p = 1/(1 + e^{2β}) em cada qubit. As duas subredes são decodificadas de
forma independente:
  - arestas: defeitos em vértices (∂c₁), recuperação por caminhos de arestas
  - faces: defeitos em cubos (∂*c₁′), recuperação por caminhos de faces

Sucesso = resíduo c ⊕ γ homologicamente trivial nas duas subredes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.special import expit
from tqdm import trange

from homology import (
    DUAL, PRIMAL, Chain, CubicLattice, HomologyClass, dual_boundary, boundary,
    get_lattice, homology_class, is_cycle,
)
from utils import InvariantError, PreconditionError, binomial_stderr

logger = logging.getLogger(__name__)

METHODS = ("greedy", "exact")
T0_REFERENCE = 0.6


def nishimori_p(T: float) -> float:
    """Linha de Nishimori: p = 1/(1 + e^{2/T})"""
    if not T > 0:
        raise PreconditionError(f"T deve ser > 0 (recebido {T})")
    if math.isinf(T):
        return 0.5
    return float(expit(-2.0 / T))


def nishimori_T(p: float) -> float:
    """Inverso de nishimori_p: T = 2 / ln((1-p)/p)"""
    if not 0.0 <= p <= 0.5:
        raise PreconditionError(f"p deve estar em [0, 1/2] (recebido {p})")
    if p == 0.0:
        return 0.0
    if p == 0.5:
        return math.inf
    return 2.0 / math.log((1.0 - p) / p)


P0_REFERENCE = nishimori_p(T0_REFERENCE)


@dataclass
class NoiseSample:
    c1: Chain
    c1p: Chain
    p: float


@dataclass
class Syndrome:
    vertex_defects: np.ndarray
    cube_defects: np.ndarray
    noise: Optional[NoiseSample] = field(default=None, repr=False)

    @property
    def is_empty(self) -> bool:
        return len(self.vertex_defects) == 0 and len(self.cube_defects) == 0


@dataclass
class DecodeResult:
    recovery: Chain
    recovery_dual: Chain
    matching_weight: int
    residual_class: Optional[HomologyClass] = None
    residual_class_dual: Optional[HomologyClass] = None

    @property
    def success_primal(self) -> Optional[bool]:
        return None if self.residual_class is None else self.residual_class.is_trivial

    @property
    def success_dual(self) -> Optional[bool]:
        return None if self.residual_class_dual is None else self.residual_class_dual.is_trivial

    @property
    def success(self) -> Optional[bool]:
        if self.residual_class is None or self.residual_class_dual is None:
            return None
        return self.success_primal and self.success_dual


def sample_noise(lattice: CubicLattice, p: float, rng: np.random.Generator) -> NoiseSample:
    """Bernoulli(p) i.i.d. em 3d³ arestas e 3d³ faces"""
    if not 0.0 <= p <= 0.5:
        raise PreconditionError(f"p deve estar em [0, 1/2] (recebido {p})")
    c1 = (rng.random(lattice.n_edges) < p).astype(np.uint8)
    c1p = (rng.random(lattice.n_faces) < p).astype(np.uint8)
    return NoiseSample(Chain(1, PRIMAL, c1), Chain(2, DUAL, c1p), p)


def extract_syndrome(lattice: CubicLattice, noise: NoiseSample) -> Syndrome:
    vertex = boundary(lattice, noise.c1).indices()
    cube = dual_boundary(lattice, noise.c1p).indices()
    if len(vertex) % 2 or len(cube) % 2:
        raise InvariantError("número ímpar de defeitos no toro")
    return Syndrome(vertex, cube, noise)


# ----------------------------------------------------------------------
# Emparelhamento
# ----------------------------------------------------------------------
def torus_distances(lattice: CubicLattice, defects: np.ndarray) -> np.ndarray:
    """Matriz de distâncias taxicab com volta no toro"""
    xyz = lattice.cell_coords(defects)[:, :3]
    delta = np.abs(xyz[:, None, :] - xyz[None, :, :])
    return np.minimum(delta, lattice.d - delta).sum(axis=-1)


def greedy_matching(dist: np.ndarray) -> List[Tuple[int, int]]:
    """Pares por distância crescente; empates pelo índice (defeitos ordenados)"""
    n = dist.shape[0]
    i, j = np.triu_indices(n, k=1)
    order = np.lexsort((j, i, dist[i, j]))
    matched = np.zeros(n, dtype=bool)
    pairs = []
    for k in order:
        a, b = i[k], j[k]
        if matched[a] or matched[b]:
            continue
        matched[a] = matched[b] = True
        pairs.append((int(a), int(b)))
        if len(pairs) * 2 == n:
            break
    return pairs


def exact_matching(dist: np.ndarray) -> List[Tuple[int, int]]:
    """Emparelhamento perfeito de peso mínimo (networkx, grafo completo)"""
    n = dist.shape[0]
    G = nx.Graph()
    G.add_nodes_from(range(n))
    for a in range(n):
        for b in range(a + 1, n):
            G.add_edge(a, b, weight=int(dist[a, b]))
    matching = nx.min_weight_matching(G)
    pairs = sorted((min(a, b), max(a, b)) for a, b in matching)
    if len(pairs) * 2 != n:
        raise InvariantError(f"emparelhamento imperfeito ({len(pairs)} pares para {n} defeitos)")
    return pairs


def _walk(lattice: CubicLattice, start: int, end: int, cell_of_step) -> List[int]:
    """Células atravessadas indo de start a end: x, depois y, depois z"""
    d = lattice.d
    p = np.array(lattice.cell_coords([start])[0, :3])
    q = np.array(lattice.cell_coords([end])[0, :3])
    cells = []
    for o in range(3):
        forward = (q[o] - p[o]) % d
        step, n = (1, forward) if forward <= d - forward else (-1, d - forward)
        for _ in range(n):
            pos = lattice.index(*p)
            cells.append(cell_of_step(pos, o, step))
            p[o] = (p[o] + step) % d
    return cells


def primal_path(lattice: CubicLattice, u: int, v: int) -> List[int]:
    """Arestas de um caminho mínimo entre os vértices u e v"""
    d3 = lattice.d ** 3

    def edge(pos, o, step):
        base = pos if step > 0 else int(lattice.shift(pos, o, -1))
        return o * d3 + base

    return _walk(lattice, u, v, edge)


def dual_path(lattice: CubicLattice, a: int, b: int) -> List[int]:
    """Faces de um caminho mínimo entre os cubos a e b"""
    d3 = lattice.d ** 3

    def face(pos, o, step):
        base = int(lattice.shift(pos, o, 1)) if step > 0 else pos
        return o * d3 + base

    return _walk(lattice, a, b, face)


def _match(lattice: CubicLattice, defects: np.ndarray, method: str):
    if len(defects) % 2:
        raise InvariantError(f"número ímpar de defeitos ({len(defects)})")
    if len(defects) == 0:
        return [], 0
    defects = np.sort(defects)
    dist = torus_distances(lattice, defects)
    pairs = greedy_matching(dist) if method == "greedy" else exact_matching(dist)
    weight = int(sum(dist[a, b] for a, b in pairs))
    return [(int(defects[a]), int(defects[b])) for a, b in pairs], weight


def decode(lattice: CubicLattice, syndrome: Syndrome, method: str = "greedy") -> DecodeResult:
    """Recuperação por emparelhamento em cada subrede.

    Se o ruído de origem estiver anexado ao syndrome, calcula também as
    classes de homologia dos resíduos (sucesso = ambas triviais).
    """
    if method not in METHODS:
        raise PreconditionError(f"método desconhecido {method!r} (use {', '.join(METHODS)})")

    pairs, w_primal = _match(lattice, syndrome.vertex_defects, method)
    rec = np.zeros(lattice.n_edges, dtype=np.uint8)
    for u, v in pairs:
        for e in primal_path(lattice, u, v):
            rec[e] ^= 1

    pairs, w_dual = _match(lattice, syndrome.cube_defects, method)
    rec_dual = np.zeros(lattice.n_faces, dtype=np.uint8)
    for a, b in pairs:
        for f in dual_path(lattice, a, b):
            rec_dual[f] ^= 1

    result = DecodeResult(Chain(1, PRIMAL, rec), Chain(2, DUAL, rec_dual), w_primal + w_dual)
    noise = syndrome.noise
    if noise is not None:
        residual = noise.c1 ^ result.recovery
        residual_dual = noise.c1p ^ result.recovery_dual
        if not is_cycle(lattice, residual) or not is_cycle(lattice, residual_dual):
            raise InvariantError("resíduo após recuperação não é um ciclo")
        result.residual_class = homology_class(lattice, residual)
        result.residual_class_dual = homology_class(lattice, residual_dual)
    return result


# ----------------------------------------------------------------------
# Varreduras
# ----------------------------------------------------------------------
@dataclass
class ErrorRate:
    d: int
    p: float
    n_trials: int
    method: str
    fail_rate: float
    stderr: float
    fail_rate_primal: float
    fail_rate_dual: float

    @property
    def T_equiv(self) -> float:
        return nishimori_T(self.p)


def logical_error_rate(d: int, p: float, n_trials: int, method: str = "greedy",
                       rng: Optional[np.random.Generator] = None,
                       progress: bool = False) -> ErrorRate:
    """Fração de tentativas com erro lógico (combinada e por subrede)"""
    if n_trials <= 0:
        raise PreconditionError(f"n_trials deve ser > 0 (recebido {n_trials})")
    lattice = get_lattice(d)
    rng = rng if rng is not None else np.random.default_rng()
    fails = fails_primal = fails_dual = 0
    for _ in trange(n_trials, desc=f"decode d={d} p={p:.4g}", disable=not progress, leave=False):
        noise = sample_noise(lattice, p, rng)
        result = decode(lattice, extract_syndrome(lattice, noise), method)
        fails_primal += not result.success_primal
        fails_dual += not result.success_dual
        fails += not result.success
    rate = fails / n_trials
    return ErrorRate(
        d=d, p=p, n_trials=n_trials, method=method,
        fail_rate=rate, stderr=binomial_stderr(rate, n_trials),
        fail_rate_primal=fails_primal / n_trials, fail_rate_dual=fails_dual / n_trials,
    )


def threshold_crossing(curves: Dict[int, Sequence[Tuple[float, float]]]) -> Optional[float]:
    """p* onde rate(d_max) - rate(d_min) troca de sinal (interpolação linear)"""
    if len(curves) < 2:
        return None
    small = dict(curves[min(curves)])
    large = dict(curves[max(curves)])
    ps = sorted(set(small) & set(large))
    diff = [large[p] - small[p] for p in ps]
    for i in range(len(ps) - 1):
        if diff[i] < 0 <= diff[i + 1]:
            p0, p1 = ps[i], ps[i + 1]
            return p0 + (p1 - p0) * (-diff[i]) / (diff[i + 1] - diff[i])
    return None
