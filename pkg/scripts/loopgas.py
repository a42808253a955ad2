"""
loopgas.py - Ensemble de Gibbs simétrico como gás de laços (γ, γ′)

Pr(γ, γ′) ∝ exp(-β·E) com E = 2(|γ| + |γ′|), onde γ é um 1-ciclo primal
(arestas) e γ′ um 1-ciclo dual (faces). A distribuição fatora nas duas
subredes, então cada fator é amostrado/enumerado separadamente.

- Enumeração exata em d=2 (2¹⁷ ciclos por fator)
- Metropolis com movimentos locais (plaquetas) e de enrolamento (linhas retas)
- Varredura vetorizada em tabuleiro para d par
- Decomposição em laços e limite de Peierls para a cauda
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional

import numpy as np
from scipy.special import logsumexp
from tqdm import trange

from homology import (
    DUAL, PRIMAL, Chain, CubicLattice, cycle_space_basis, get_lattice,
    homology_class, is_dual_cycle, is_primal_cycle,
)
from utils import InvariantError, PreconditionError, mean_and_stderr

logger = logging.getLogger(__name__)

LOG5 = math.log(5.0)
# Temperatura crítica do modelo de gauge de Ising 3D (referência)
T_ISING_GAUGE = 1.31
T_PEIERLS = 2.0 / LOG5

LOCAL_FRACTION = 0.9


@dataclass
class LoopConfig:
    """Par (γ, γ′) de ciclos: γ em arestas, γ′ em faces"""

    gamma: Chain
    gamma_prime: Chain

    @classmethod
    def empty(cls, lattice: CubicLattice) -> "LoopConfig":
        return cls(Chain.empty(lattice, 1, PRIMAL), Chain.empty(lattice, 2, DUAL))

    def copy(self) -> "LoopConfig":
        return LoopConfig(self.gamma.copy(), self.gamma_prime.copy())

    def factor(self, name: str) -> Chain:
        return self.gamma if name == PRIMAL else self.gamma_prime

    def is_valid(self, lattice: CubicLattice) -> bool:
        return is_primal_cycle(lattice, self.gamma) and is_dual_cycle(lattice, self.gamma_prime)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoopConfig):
            return NotImplemented
        return self.gamma == other.gamma and self.gamma_prime == other.gamma_prime


@dataclass
class EnsembleParams:
    """Parâmetros de uma cadeia do ensemble"""

    beta: float
    d: int
    seed: int = 0
    sweeps: int = 1000
    burn_in: int = 1000
    winding_fraction: float = 1.0 - LOCAL_FRACTION

    def __post_init__(self):
        if not self.beta >= 0:
            raise PreconditionError(f"beta deve ser ≥ 0 (recebido {self.beta})")
        if self.d < 2:
            raise PreconditionError(f"d deve ser ≥ 2 (recebido {self.d})")
        if not 0.0 <= self.winding_fraction <= 1.0:
            raise PreconditionError(f"winding_fraction fora de [0, 1]: {self.winding_fraction}")

    @property
    def T(self) -> float:
        return 0.0 if math.isinf(self.beta) else (math.inf if self.beta == 0 else 1.0 / self.beta)

    @property
    def lattice(self) -> CubicLattice:
        return get_lattice(self.d)


@dataclass
class LoopDecomposition:
    loops: List[Chain]
    lengths: List[int]

    @property
    def largest(self) -> int:
        return max(self.lengths, default=0)

    def __len__(self) -> int:
        return len(self.loops)


def energy(cfg: LoopConfig) -> int:
    """E(γ, γ′) = 2(|γ| + |γ′|)"""
    return 2 * (cfg.gamma.weight + cfg.gamma_prime.weight)


# ----------------------------------------------------------------------
# Decomposição em laços
# ----------------------------------------------------------------------
def _cell_endpoints(lattice: CubicLattice, c: Chain) -> np.ndarray:
    if c.dim == 1:
        return lattice.edge_endpoints
    if c.dim == 2:
        return lattice.face_cubes
    raise PreconditionError(f"decompose_loops só aceita 1-ciclos (recebido {c!r})")


def extract_loop_cells(endpoints: np.ndarray, cells: np.ndarray) -> List[List[int]]:
    """Anda pelo multigrafo do suporte e destaca laços simples.

    Quando o caminho volta a um vértice já visitado, o trecho fechado vira
    um laço. Em grafos com todos os graus pares o caminho só trava vazio.
    """
    incident: Dict[int, List[int]] = {}
    for e in cells:
        u, v = endpoints[e]
        incident.setdefault(int(u), []).append(int(e))
        incident.setdefault(int(v), []).append(int(e))
    used = set()
    pointer = {v: 0 for v in incident}

    def next_cell(v: int) -> Optional[int]:
        lst = incident[v]
        while pointer[v] < len(lst) and lst[pointer[v]] in used:
            pointer[v] += 1
        return lst[pointer[v]] if pointer[v] < len(lst) else None

    loops: List[List[int]] = []
    for start in cells:
        if int(start) in used:
            continue
        u0 = int(endpoints[start][0])
        path_vertices = [u0]
        path_cells: List[int] = []
        position = {u0: 0}
        v = u0
        while True:
            e = next_cell(v)
            if e is None:
                if path_cells:
                    raise InvariantError("caminho sem saída ao decompor um ciclo")
                break
            used.add(e)
            a, b = (int(x) for x in endpoints[e])
            w = b if a == v else a
            path_cells.append(e)
            if w in position:
                k = position[w]
                loops.append(path_cells[k:])
                for x in path_vertices[k + 1:]:
                    position.pop(x, None)
                del path_vertices[k + 1:]
                del path_cells[k:]
                v = w
                if not path_cells:
                    break
            else:
                position[w] = len(path_vertices)
                path_vertices.append(w)
                v = w
    return loops


def decompose_loops(lattice: CubicLattice, c: Chain) -> LoopDecomposition:
    """Divide um ciclo em laços fechados disjuntos em células.

    O multigrafo é vértices/arestas para γ e cubos/faces para γ′.
    """
    if (c.side == PRIMAL and c.dim != 1) or (c.side == DUAL and c.dim != 2):
        raise PreconditionError(f"decompose_loops exige um 1-ciclo ({c!r})")
    if not (is_primal_cycle(lattice, c) if c.side == PRIMAL else is_dual_cycle(lattice, c)):
        raise PreconditionError("decompose_loops exige um ciclo")
    endpoints = _cell_endpoints(lattice, c)
    loops = [
        Chain.from_indices(lattice, c.dim, cells, side=c.side)
        for cells in extract_loop_cells(endpoints, c.indices())
    ]
    return LoopDecomposition(loops, [lp.weight for lp in loops])


def largest_loop(lattice: CubicLattice, c: Chain) -> int:
    """Comprimento do maior laço da decomposição (c deve ser ciclo)"""
    if c.is_empty():
        return 0
    loops = extract_loop_cells(_cell_endpoints(lattice, c), c.indices())
    return max(len(lp) for lp in loops)



# ----------------------------------------------------------------------
# Enumeração exata (d = 2)
# ----------------------------------------------------------------------
@lru_cache(maxsize=4)
def cycle_table(d: int, side: str) -> np.ndarray:
    """Todos os 1-ciclos de um fator como linhas de bits (compartilhada, só leitura)"""
    lattice = get_lattice(d)
    basis = np.array([b.support for b in cycle_space_basis(lattice, side)], dtype=np.int32)
    rank = basis.shape[0]
    codes = np.arange(2 ** rank, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(rank)) & 1).astype(np.int32)
    table = ((bits @ basis) % 2).astype(np.uint8)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=4)
def largest_loop_table(d: int, side: str) -> np.ndarray:
    """Maior laço de cada linha de cycle_table (não depende de β)"""
    lattice = get_lattice(d)
    dim = 1 if side == PRIMAL else 2
    table = cycle_table(d, side)
    logger.info(f"🧮 Decompondo {len(table)} ciclos ({side}, d={d})")
    largest = np.array([largest_loop(lattice, Chain(dim, side, row)) for row in table], dtype=np.int64)
    largest.setflags(write=False)
    return largest


def joint_key(weight: int, largest: int) -> str:
    """Chave do histograma conjunto (|c|, maior laço)"""
    return f"{int(weight)}:{int(largest)}"


class ExactFactor:
    """Tabela exata de um fator (γ ou γ′) sobre todo o espaço de ciclos"""

    def __init__(self, lattice: CubicLattice, side: str, beta: float):
        self.lattice = lattice
        self.side = side
        self.beta = beta
        self.supports = cycle_table(lattice.d, side)
        self.weights = self.supports.sum(axis=1).astype(np.int64)
        self.probs = self._boltzmann(self.weights, beta)

    @staticmethod
    def _boltzmann(weights: np.ndarray, beta: float) -> np.ndarray:
        if math.isinf(beta):
            probs = (weights == 0).astype(float)
            return probs / probs.sum()
        log_w = -2.0 * beta * weights
        return np.exp(log_w - logsumexp(log_w))

    @property
    def dim(self) -> int:
        return 1 if self.side == PRIMAL else 2

    def chain(self, i: int) -> Chain:
        return Chain(self.dim, self.side, self.supports[i])

    def largest_loops(self) -> np.ndarray:
        return largest_loop_table(self.lattice.d, self.side)

    def prob_largest_below(self, alpha: int) -> float:
        return float(np.sum(self.probs[self.largest_loops() < alpha]))

    def weight_marginal(self) -> Dict[int, float]:
        out: Dict[int, float] = {}
        for w in np.unique(self.weights):
            out[int(w)] = float(self.probs[self.weights == w].sum())
        return out

    def joint_marginal(self) -> Dict[str, float]:
        """Distribuição exata de (|c|, maior laço), chaves de joint_key"""
        pairs = np.stack([self.weights, self.largest_loops()], axis=1)
        keys, inverse = np.unique(pairs, axis=0, return_inverse=True)
        mass = np.bincount(inverse.ravel(), weights=self.probs, minlength=len(keys))
        return {joint_key(w, l): float(m) for (w, l), m in zip(keys, mass)}


@dataclass
class ExactEnsemble:
    beta: float
    d: int
    primal: ExactFactor
    dual: ExactFactor

    def factor(self, side: str) -> ExactFactor:
        return self.primal if side == PRIMAL else self.dual

    def tail_mass(self, alpha: int) -> float:
        """Pr(algum laço de comprimento ≥ α em γ ou γ′)"""
        return 1.0 - self.primal.prob_largest_below(alpha) * self.dual.prob_largest_below(alpha)


def exact_ensemble(params: EnsembleParams) -> ExactEnsemble:
    """Enumera Z₁ × Z₁* em d=2 (tabelas por fator, cada uma soma 1)"""
    if params.d != 2:
        raise PreconditionError(f"enumeração exata só em d=2 (recebido d={params.d})")
    lattice = params.lattice
    logger.info(f"🧮 Enumerando ensemble exato d=2, β={params.beta}")
    return ExactEnsemble(
        params.beta, params.d,
        ExactFactor(lattice, PRIMAL, params.beta),
        ExactFactor(lattice, DUAL, params.beta),
    )


def total_variation(p: Dict, q: Dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# ----------------------------------------------------------------------
# Limite de Peierls
# ----------------------------------------------------------------------
def peierls_tail(alpha: float, beta: float, d: int) -> float:
    """Cota superior para a massa de configurações com um laço ≥ α"""
    if not beta > LOG5 / 2:
        raise PreconditionError(f"limite de Peierls exige β > log(5)/2 (recebido {beta})")
    if math.isinf(beta):
        return 0.0
    gap = 2.0 * beta - LOG5
    c_prime = (12.0 / 5.0) / (1.0 - math.exp(-gap))
    return c_prime * d ** 3 * math.exp(-alpha * gap)


# ----------------------------------------------------------------------
# Movimentos de Metropolis
# ----------------------------------------------------------------------
class MoveSet:
    """Tabelas de movimentos de uma rede (compartilhadas, só leitura)"""

    def __init__(self, lattice: CubicLattice):
        self.lattice = lattice
        d, d3 = lattice.d, lattice.d ** 3
        B2 = lattice.boundary_2.tocsc()
        # cada face tem 4 arestas; cada aresta está em 4 faces
        self.face_edges = B2.indices.reshape(-1, 4).astype(np.int64)
        B2T = lattice.boundary_2.T.tocsc()
        self.edge_faces = B2T.indices.reshape(-1, 4).astype(np.int64)

        lines = []
        for o in range(3):
            a, b = CubicLattice.spanning(o)
            for s in range(d):
                for t in range(d):
                    xyz = np.zeros((d, 3), dtype=np.int64)
                    xyz[:, a], xyz[:, b] = s, t
                    xyz[:, o] = np.arange(d)
                    lines.append(o * d3 + lattice.position(xyz[:, 0], xyz[:, 1], xyz[:, 2]))
        # a linha primal de direção o e a pilha dual de normal o usam os mesmos índices
        self.lines = np.array(lines, dtype=np.int64)

        self.face_classes: List[np.ndarray] = []
        self.edge_classes: List[np.ndarray] = []
        if d % 2 == 0:
            xyz = lattice._xyz
            for o in range(3):
                a, b = CubicLattice.spanning(o)
                parity = (xyz[:, a] + xyz[:, b]) % 2
                for par in (0, 1):
                    cls = o * d3 + np.flatnonzero(parity == par)
                    self.face_classes.append(cls)
                    self.edge_classes.append(cls)

    def local_cells(self, side: str, site: int) -> np.ndarray:
        return self.face_edges[site] if side == PRIMAL else self.edge_faces[site]

    @property
    def n_local(self) -> int:
        return self.lattice.n_faces


@lru_cache(maxsize=16)
def get_moves(d: int) -> MoveSet:
    return MoveSet(get_lattice(d))


@dataclass
class Move:
    side: str
    kind: str
    cells: np.ndarray


@dataclass
class MoveTally:
    proposed: Counter = field(default_factory=Counter)
    accepted: Counter = field(default_factory=Counter)

    def record(self, kind: str, accepted: bool, n: int = 1, n_accepted: Optional[int] = None):
        self.proposed[kind] += n
        self.accepted[kind] += n_accepted if n_accepted is not None else int(accepted) * n

    def rate(self, kind: str) -> float:
        n = self.proposed[kind]
        return self.accepted[kind] / n if n else float('nan')


def metropolis_probability(delta_e: float, beta: float) -> float:
    """min(1, exp(-β·ΔE)) sem produzir inf·0"""
    if delta_e <= 0:
        return 1.0
    if math.isinf(beta):
        return 0.0
    return math.exp(-beta * delta_e)


def delta_energy(cfg: LoopConfig, move: Move) -> int:
    support = cfg.factor(move.side).support
    k = int(support[move.cells].sum())
    return 2 * (len(move.cells) - 2 * k)


def apply_move(cfg: LoopConfig, move: Move) -> LoopConfig:
    """XOR das células do movimento no fator correspondente (involução)"""
    chain = cfg.factor(move.side)
    chain.support[move.cells] ^= 1
    return cfg


def propose_move(moves: MoveSet, rng: np.random.Generator,
                 winding_fraction: float = 1.0 - LOCAL_FRACTION) -> Move:
    side = PRIMAL if rng.random() < 0.5 else DUAL
    if rng.random() < winding_fraction:
        line = int(rng.integers(len(moves.lines)))
        return Move(side, "winding", moves.lines[line])
    site = int(rng.integers(moves.n_local))
    return Move(side, "local", moves.local_cells(side, site))


def mcmc_step(cfg: LoopConfig, params: EnsembleParams, rng: np.random.Generator,
              tally: Optional[MoveTally] = None) -> LoopConfig:
    """Uma proposta de Metropolis; modifica cfg no lugar e o retorna"""
    moves = get_moves(params.d)
    move = propose_move(moves, rng, params.winding_fraction)
    accept = rng.random() < metropolis_probability(delta_energy(cfg, move), params.beta)
    if accept:
        apply_move(cfg, move)
    if tally is not None:
        tally.record(move.kind, accept)
    return cfg


def _accept_mask(delta: np.ndarray, beta: float, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(delta.shape)
    if math.isinf(beta):
        return delta <= 0
    with np.errstate(over='ignore'):
        return (delta <= 0) | (u < np.exp(-beta * np.maximum(delta, 0)))


def _class_update(support: np.ndarray, sites: np.ndarray, table: np.ndarray,
                  beta: float, rng: np.random.Generator) -> int:
    cells = table[sites]
    k = support[cells].sum(axis=1).astype(np.int64)
    delta = 2 * (4 - 2 * k)
    accept = _accept_mask(delta, beta, rng)
    flip = cells[accept].ravel()
    # movimentos da mesma classe não compartilham células
    support[flip] ^= 1
    return int(accept.sum())


def sweep(cfg: LoopConfig, params: EnsembleParams, rng: np.random.Generator,
          tally: Optional[MoveTally] = None) -> LoopConfig:
    """Uma varredura: 3d³ propostas locais por fator mais as de enrolamento.

    Para d par, as propostas locais de cada classe do tabuleiro são decididas
    em bloco, em ordem aleatória de classes. Depois delas, cada linha do
    fator é proposta com probabilidade ``winding_fraction``. Isso não é a
    mistura por proposta de mcmc_step (90/10), mas cada bloco é reversível
    para os pesos de Boltzmann, então a lei estacionária é a mesma.
    Para d ímpar cai em 2·3d³ chamadas de mcmc_step.
    """
    tally = tally if tally is not None else MoveTally()
    moves = get_moves(params.d)
    if not moves.face_classes:
        for _ in range(2 * moves.n_local):
            mcmc_step(cfg, params, rng, tally)
        return cfg

    for side, classes, table in ((PRIMAL, moves.face_classes, moves.face_edges),
                                 (DUAL, moves.edge_classes, moves.edge_faces)):
        support = cfg.factor(side).support
        for i in rng.permutation(len(classes)):
            sites = classes[i]
            n_acc = _class_update(support, sites, table, params.beta, rng)
            tally.record("local", True, n=len(sites), n_accepted=n_acc)

        chosen = np.flatnonzero(rng.random(len(moves.lines)) < params.winding_fraction)
        for line in rng.permutation(chosen):
            move = Move(side, "winding", moves.lines[line])
            accept = rng.random() < metropolis_probability(delta_energy(cfg, move), params.beta)
            if accept:
                apply_move(cfg, move)
            tally.record("winding", accept)
    return cfg


def sample_chain(params: EnsembleParams, rng: np.random.Generator, n_samples: int,
                 thin: int = 1, tally: Optional[MoveTally] = None,
                 progress: bool = False, check: bool = False) -> Iterator[LoopConfig]:
    """Gera n_samples configurações após burn_in varreduras (cópias)"""
    lattice = params.lattice
    cfg = LoopConfig.empty(lattice)
    tally = tally if tally is not None else MoveTally()
    for _ in trange(params.burn_in, desc=f"burn-in d={params.d}", disable=not progress, leave=False):
        sweep(cfg, params, rng, tally)
    for _ in trange(n_samples, desc=f"amostras d={params.d}", disable=not progress, leave=False):
        for _ in range(max(thin, 1)):
            sweep(cfg, params, rng, tally)
        if check and not cfg.is_valid(lattice):
            raise InvariantError("configuração deixou o setor simétrico")
        yield cfg.copy()


# ----------------------------------------------------------------------
# Diagnóstico de cadeia
# ----------------------------------------------------------------------
@dataclass
class ChainDiagnostics:
    d: int
    beta: float
    seed: int
    sweeps: int
    burn_in: int
    acceptance_local: float
    acceptance_winding: float
    mean_energy: float
    var_energy: float
    specific_heat: float
    wrapping_fraction: float
    largest_loop_hist: Dict[str, Dict[str, int]]
    joint_hist: Dict[str, Dict[str, int]]
    weight_hist: Dict[str, Dict[str, int]]

    def to_record(self) -> Dict:
        return {
            "d": self.d, "beta": self.beta, "seed": self.seed,
            "sweeps": self.sweeps, "burn_in": self.burn_in,
            "acceptance_local": self.acceptance_local,
            "acceptance_winding": self.acceptance_winding,
            "mean_energy": self.mean_energy, "var_energy": self.var_energy,
            "specific_heat": self.specific_heat,
            "wrapping_fraction": self.wrapping_fraction,
            "largest_loop_hist": self.largest_loop_hist,
            "joint_hist": self.joint_hist,
            "weight_hist": self.weight_hist,
        }


def _sorted_hist(counter: Counter) -> Dict[str, int]:
    return {str(k): v for k, v in sorted(counter.items())}


def diagnose_chain(params: EnsembleParams, rng: np.random.Generator,
                   progress: bool = False) -> ChainDiagnostics:
    """Roda uma cadeia e resume energia, aceitação e estatística de laços"""
    lattice = params.lattice
    tally = MoveTally()
    energies: List[float] = []
    wrapping = 0
    hist = {PRIMAL: Counter(), DUAL: Counter()}
    weights = {PRIMAL: Counter(), DUAL: Counter()}
    joint = {PRIMAL: Counter(), DUAL: Counter()}
    for cfg in sample_chain(params, rng, params.sweeps, tally=tally, progress=progress, check=True):
        energies.append(float(energy(cfg)))
        nontrivial = False
        for side in (PRIMAL, DUAL):
            chain = cfg.factor(side)
            largest = largest_loop(lattice, chain)
            hist[side][largest] += 1
            weights[side][chain.weight] += 1
            joint[side][(chain.weight, largest)] += 1
            nontrivial |= not homology_class(lattice, chain).is_trivial
        wrapping += int(nontrivial)

    mean_e, _ = mean_and_stderr(energies)
    n = len(energies)
    var_e = math.fsum((e - mean_e) ** 2 for e in energies) / n if n else float('nan')
    beta = params.beta
    n_cells = lattice.n_edges + lattice.n_faces
    c_v = (beta ** 2) * var_e / n_cells if not math.isinf(beta) else 0.0
    return ChainDiagnostics(
        d=params.d, beta=beta, seed=params.seed, sweeps=params.sweeps, burn_in=params.burn_in,
        acceptance_local=tally.rate("local"), acceptance_winding=tally.rate("winding"),
        mean_energy=mean_e, var_energy=var_e, specific_heat=c_v,
        wrapping_fraction=wrapping / n if n else float('nan'),
        largest_loop_hist={"gamma": _sorted_hist(hist[PRIMAL]), "gamma_prime": _sorted_hist(hist[DUAL])},
        joint_hist={
            "gamma": {joint_key(*k): v for k, v in sorted(joint[PRIMAL].items())},
            "gamma_prime": {joint_key(*k): v for k, v in sorted(joint[DUAL].items())},
        },
        weight_hist={"gamma": _sorted_hist(weights[PRIMAL]), "gamma_prime": _sorted_hist(weights[DUAL])},
    )
