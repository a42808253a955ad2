"""
disentangle2d.py - Modelo 2D no toro triangular: sinks e circuito desemaranhador

H(k) = -Σ k_v h_v com h_v = X_v ∏_{e ∈ Link₁(v)} CZ_e. Um vértice com k_v = 0
é um sink. Para uma configuração válida (um sink em cada quadrado da grade
P_l) o circuito em camadas leva H(k) a Σ k_v X_v; aqui ele é verificado
simbolicamente pelas regras de conjugação:

    U(v,w): h_v ↦ -Z_v Z_w        W(v,w): Z_v Z_w ↦ X_v

Os oráculos densos (estrela de 7 qubits e toro 3×3) conferem as próprias
regras e a distância ao ensemble livre com álgebra linear explícita.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from homology import TriLattice
from utils import InvariantError, PreconditionError

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
DEFAULT_C_MARGIN = 1.1


def p_beta(beta: float) -> float:
    """Probabilidade de sink: p_β = 2/(e^{2β} + 1)"""
    if not beta >= 0:
        raise PreconditionError(f"beta deve ser ≥ 0 (recebido {beta})")
    if math.isinf(beta) or 2 * beta > 700:
        return 0.0
    return 2.0 / (math.exp(2.0 * beta) + 1.0)


# ----------------------------------------------------------------------
# Configurações de sinks e grade
# ----------------------------------------------------------------------
@dataclass
class SinkConfig:
    L: int
    beta: float
    k: np.ndarray

    @property
    def weight(self) -> int:
        return int(self.k.sum())

    @property
    def sinks(self) -> np.ndarray:
        return np.flatnonzero(self.k == 0)

    def probability(self) -> float:
        """Pr(k) = (1-p)^{w(k)} p^{N-w(k)}"""
        p = p_beta(self.beta)
        n = self.k.size
        return (1.0 - p) ** self.weight * p ** (n - self.weight)


def sample_sinks(L: int, beta: float, rng: np.random.Generator) -> SinkConfig:
    """k_v = 1 com probabilidade 1 - p_β, independente por vértice"""
    p = p_beta(beta)
    k = (rng.random(L * L) >= p).astype(np.uint8)
    return SinkConfig(L, beta, k)


def default_c(p: float, margin: float = DEFAULT_C_MARGIN) -> float:
    """c = margem · (-2/ln(1-p)), acima do limiar da cota de validade"""
    if not 0.0 < p < 1.0:
        raise PreconditionError(f"default_c exige 0 < p < 1 (recebido {p})")
    return margin * (-2.0 / math.log(1.0 - p))


def block_side(L: int, beta: float, c: Optional[float] = None,
               c_margin: float = DEFAULT_C_MARGIN) -> int:
    """l = ⌈(c·ln L)^{1/2}⌉ limitado a [1, L]"""
    p = p_beta(beta)
    if c is None:
        if p >= 1.0:
            return 1
        if p <= 0.0:
            return L
        c = default_c(p, c_margin)
    side = math.ceil(math.sqrt(max(c, 0.0) * math.log(L)))
    return int(min(max(side, 1), L))


def block_sizes(L: int, l: int) -> List[int]:
    """Lados dos quadrados por eixo; o último absorve o resto"""
    nb = max(L // l, 1)
    return [l] * (nb - 1) + [L - l * (nb - 1)]


def block_index(x: int, L: int, l: int) -> int:
    nb = max(L // l, 1)
    return min(x // l, nb - 1)


def block_of(tri: TriLattice, v: int, l: int) -> Tuple[int, int]:
    x, y = tri.xy(v)
    return block_index(x, tri.L, l), block_index(y, tri.L, l)


def is_valid(cfg: SinkConfig, l: int) -> bool:
    """Cada quadrado de P_l contém pelo menos um sink"""
    tri = TriLattice(cfg.L)
    nb = max(cfg.L // l, 1)
    covered = np.zeros((nb, nb), dtype=bool)
    for v in cfg.sinks:
        covered[block_of(tri, int(v), l)] = True
    return bool(covered.all())


def valid_probability(L: int, l: int, p: float) -> float:
    """Pr(válida) = ∏_B (1 - (1-p)^{|B|}), exato para quadrados disjuntos"""
    sizes = block_sizes(L, l)
    out = 1.0
    for w in sizes:
        for h in sizes:
            out *= 1.0 - (1.0 - p) ** (w * h)
    return out


def validity_union_bound(L: int, l: int, p: float) -> float:
    """Cota da união: 1 - Σ_B (1-p)^{|B|}"""
    sizes = block_sizes(L, l)
    return 1.0 - math.fsum((1.0 - p) ** (w * h) for w in sizes for h in sizes)


def region_diameter(L: int, l: int) -> int:
    """Maior (w-1)+(h-1) entre os quadrados da grade"""
    largest = max(block_sizes(L, l))
    return 2 * (largest - 1)


# ----------------------------------------------------------------------
# Circuito
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Gate:
    kind: str  # "U" ou "W"
    target: int
    partner: int


@dataclass
class Circuit:
    """Camadas em ordem de aplicação; cada camada é a lista das suas
    subcamadas de uma só cor"""

    layers: List[List[List[Gate]]]
    shells: Dict[int, int] = field(default_factory=dict)
    sources: List[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_gates(self) -> int:
        return sum(len(sub) for layer in self.layers for sub in layer)

    def sublayers(self) -> Iterator[List[Gate]]:
        for layer in self.layers:
            yield from layer


def validate_layer(layer: Sequence[Gate]):
    """Alvos distintos e nenhum alvo servindo de parceiro na mesma camada"""
    targets = [g.target for g in layer]
    if len(set(targets)) != len(targets):
        raise InvariantError("dois portões da mesma camada têm o mesmo alvo")
    partners = {g.partner for g in layer}
    clash = partners.intersection(targets)
    if clash:
        raise InvariantError(f"vértice {min(clash)} é alvo e parceiro na mesma camada")


def choose_sources(cfg: SinkConfig, l: int) -> List[int]:
    """Um sink por quadrado: o de menor índice"""
    tri = TriLattice(cfg.L)
    chosen: Dict[Tuple[int, int], int] = {}
    for v in cfg.sinks:
        block = block_of(tri, int(v), l)
        if block not in chosen:
            chosen[block] = int(v)
    return sorted(chosen.values())


def build_circuit(cfg: SinkConfig, l: int) -> Circuit:
    """Camadas U de dentro para fora, depois camadas W de fora para dentro.

    As cascas V̄(j) vêm de uma BFS com várias fontes sobre o toro inteiro;
    o parceiro de v é o vizinho de menor índice na casca anterior. Só
    vértices com termo (k_v = 1) recebem portões. Cada camada sai dividida
    em subcamadas pela cor do alvo, e a profundidade conta subcamadas.
    """
    if not is_valid(cfg, l):
        raise PreconditionError("build_circuit exige uma configuração válida")
    tri = TriLattice(cfg.L)
    sources = choose_sources(cfg, l)
    dist = nx.multi_source_dijkstra_path_length(tri.graph, sources)
    depth = max(dist.values(), default=0)

    shells: Dict[int, List[Gate]] = {}
    for j in range(1, depth + 1):
        gates = []
        for v in sorted(u for u, dv in dist.items() if dv == j):
            if not cfg.k[v]:
                continue
            partner = min(w for w in tri.neighbors(v) if dist[w] == j - 1)
            gates.append((v, partner))
        shells[j] = gates

    layers: List[List[List[Gate]]] = []
    for j in range(1, depth + 1):
        if shells[j]:
            layers.append(sublayers(tri, [Gate("U", v, w) for v, w in shells[j]]))
    for j in range(depth, 0, -1):
        if shells[j]:
            layers.append(sublayers(tri, [Gate("W", v, w) for v, w in shells[j]]))
    for layer in layers:
        validate_layer([g for sub in layer for g in sub])
    return Circuit(layers, dict(dist), sources)


@lru_cache(maxsize=8)
def vertex_colors(L: int) -> Tuple[int, ...]:
    """3-coloração (x + y) mod 3 quando 3 | L; senão a gulosa do networkx"""
    tri = TriLattice(L)
    if L % 3 == 0:
        return tuple(sum(tri.xy(v)) % 3 for v in range(tri.n_vertices))
    greedy = nx.greedy_color(tri.graph, strategy="largest_first")
    return tuple(greedy[v] for v in range(tri.n_vertices))


def n_colors(L: int) -> int:
    return len(set(vertex_colors(L)))


def sublayers(tri: TriLattice, layer: Sequence[Gate]) -> List[List[Gate]]:
    """Agrupa os portões pela cor do alvo"""
    colors = vertex_colors(tri.L)
    groups: Dict[int, List[Gate]] = {}
    for gate in layer:
        groups.setdefault(colors[gate.target], []).append(gate)
    return [groups[c] for c in sorted(groups)]


# ----------------------------------------------------------------------
# Conjugação simbólica dos termos
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Term:
    kind: str  # "h", "ZZ" ou "X"
    owner: int
    partner: Optional[int] = None
    coeff: int = -1


class TermState:
    """Um termo por vértice dono, com índice reverso dos parceiros de ZZ"""

    def __init__(self, tri: TriLattice, terms: Dict[int, Term]):
        self.tri = tri
        self.terms = dict(terms)
        self.partner_of: Dict[int, Set[int]] = {}
        for t in self.terms.values():
            self._index(t)

    @classmethod
    def from_config(cls, cfg: SinkConfig) -> "TermState":
        tri = TriLattice(cfg.L)
        return cls(tri, {int(v): Term("h", int(v)) for v in np.flatnonzero(cfg.k)})

    def _index(self, t: Term):
        if t.kind == "ZZ":
            self.partner_of.setdefault(t.partner, set()).add(t.owner)

    def _unindex(self, t: Term):
        if t.kind == "ZZ":
            self.partner_of.get(t.partner, set()).discard(t.owner)

    def replace(self, t: Term):
        self._unindex(self.terms[t.owner])
        self.terms[t.owner] = t
        self._index(t)

    def touching(self, vertices) -> List[Term]:
        """Termos cujo dono está em ``vertices`` ou que usam um deles como parceiro"""
        owners = set()
        for v in vertices:
            if v in self.terms:
                owners.add(v)
            owners |= self.partner_of.get(v, set())
        return [self.terms[o] for o in sorted(owners)]

    def as_set(self) -> Set[Tuple]:
        return {(t.kind, t.owner, t.partner, t.coeff) for t in self.terms.values()}


def _u_commutes(tri: TriLattice, t: Term, v: int, w: int) -> bool:
    if t.kind == "h":
        return t.owner not in (v, w)
    if t.kind == "ZZ":
        return v not in (t.owner, t.partner)
    return t.owner not in (v, w) and t.owner not in tri.neighbors(v)


def _w_commutes(tri: TriLattice, t: Term, v: int, w: int) -> bool:
    if t.kind == "ZZ":
        return v not in (t.owner, t.partner)
    if t.kind == "X":
        return t.owner not in (v, w)
    return t.owner not in (v, w) and v not in tri.neighbors(t.owner)


def apply_gate(state: TermState, gate: Gate):
    """Reescreve o termo alvo e confere que o portão comuta com os demais"""
    tri, v, w = state.tri, gate.target, gate.partner
    target = state.terms.get(v)
    if gate.kind == "U":
        if target is not None:
            if target.kind != "h":
                raise InvariantError(f"U({v},{w}) encontrou termo {target.kind} em {v}")
            state.replace(Term("ZZ", v, w, -target.coeff))
        check, rule = [v, w] + tri.neighbors(v), _u_commutes
    elif gate.kind == "W":
        if target is not None:
            if target.kind != "ZZ" or target.partner != w:
                raise InvariantError(f"W({v},{w}) encontrou termo {target.kind} em {v}")
            state.replace(Term("X", v, None, target.coeff))
        check, rule = [v, w] + tri.neighbors(v), _w_commutes
    else:
        raise PreconditionError(f"portão desconhecido {gate.kind!r}")

    for t in state.touching(check):
        if t.owner == v:
            continue
        if not rule(tri, t, v, w):
            raise InvariantError(
                f"{gate.kind}({v},{w}) não comuta com o termo {t.kind} de {t.owner}"
            )


def conjugate_hamiltonian(cfg: SinkConfig, circuit: Circuit) -> TermState:
    """Aplica as regras camada por camada e devolve os termos finais"""
    state = TermState.from_config(cfg)
    for sub in circuit.sublayers():
        validate_layer(sub)
        for gate in sub:
            apply_gate(state, gate)
    return state


def is_disentangled(state: TermState, cfg: SinkConfig) -> bool:
    """Termos finais são exatamente {+X_v : k_v = 1}"""
    expected = {("X", int(v), None, 1) for v in np.flatnonzero(cfg.k)}
    return state.as_set() == expected


# ----------------------------------------------------------------------
# Oráculos densos
# ----------------------------------------------------------------------
def _bits(n: int) -> np.ndarray:
    states = np.arange(2 ** n)
    return (states[:, None] >> np.arange(n)) & 1


def _z_diag(bits: np.ndarray, *qubits: int) -> np.ndarray:
    return (-1.0) ** bits[:, list(qubits)].sum(axis=1)


def _x_matrix(n: int, qubits: Sequence[int]) -> np.ndarray:
    dim = 2 ** n
    mask = sum(1 << q for q in qubits)
    M = np.zeros((dim, dim))
    states = np.arange(dim)
    M[states ^ mask, states] = 1.0
    return M


def _term_matrix(n: int, v: int, link: Sequence[Tuple[int, int]]) -> np.ndarray:
    """X_v ∏ CZ_e sobre as arestas dadas"""
    bits = _bits(n)
    phase = np.ones(2 ** n)
    for a, b in link:
        phase *= (-1.0) ** (bits[:, a] * bits[:, b])
    return _x_matrix(n, [v]) @ np.diag(phase)


def _gate_matrix(A: np.ndarray) -> np.ndarray:
    """exp(π/4 · A) para A² = -I"""
    return (np.eye(A.shape[0]) + A) / math.sqrt(2.0)


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


@dataclass
class OracleReport:
    checks: Dict[str, float]
    tol: float = ORACLE_TOL

    @property
    def passed(self) -> bool:
        return all(err <= self.tol for err in self.checks.values())


def dense_oracle(partner: int = 1, tol: float = ORACLE_TOL) -> OracleReport:
    """Confere as regras de U e W na estrela de 7 qubits (centro 0, anel 1..6).

    h_l dos vértices do anel é truncado às arestas de Link₁(l) dentro da
    estrela.
    """
    n = 7
    if not 1 <= partner <= 6:
        raise PreconditionError("o parceiro deve ser um vértice do anel (1..6)")
    ring = list(range(1, 7))
    v, w = 0, partner
    bits = _bits(n)
    h_v = _term_matrix(n, v, [(ring[i], ring[(i + 1) % 6]) for i in range(6)])
    zz = np.diag(_z_diag(bits, v, w))
    x_v = _x_matrix(n, [v])
    U = _gate_matrix(h_v @ zz)
    W = _gate_matrix(x_v @ zz)
    S = _x_matrix(n, list(range(n)))

    checks = {
        "h_v^2 = I": _norm(h_v @ h_v - np.eye(2 ** n)),
        "U h_v U† = -ZZ": _norm(U @ h_v @ U.conj().T + zz),
        "W ZZ W† = X_v": _norm(W @ zz @ W.conj().T - x_v),
        "[U, S] = 0": _norm(U @ S - S @ U),
        "[W, S] = 0": _norm(W @ S - S @ W),
    }
    for i, l in enumerate(ring):
        if l == w:
            continue
        h_l = _term_matrix(n, l, [(v, ring[(i + 1) % 6]), (v, ring[(i - 1) % 6])])
        checks[f"[U, h_{l}] = 0"] = _norm(U @ h_l - h_l @ U)
        checks[f"[h_v, h_{l}] = 0"] = _norm(h_v @ h_l - h_l @ h_v)
        far = ring[(i + 2) % 6]
        zz_l = np.diag(_z_diag(bits, l, far))
        checks[f"[W, Z_{l}Z_{far}] = 0"] = _norm(W @ zz_l - zz_l @ W)
    return OracleReport(checks, tol)


def free_ensemble_bound(N: int, beta: float) -> float:
    """2q/(1+q) com q = Pr(k₁) = (1-p_β)^N"""
    q = (1.0 - p_beta(beta)) ** N
    return 2.0 * q / (1.0 + q)


@dataclass
class GibbsGapResult:
    beta: float
    N: int
    distance: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.distance <= self.bound + ORACLE_TOL


def lemma1_gap(L: int, beta: float) -> GibbsGapResult:
    """‖ρ(β) - ρ_f(β)‖₁ no toro 3×3 (matrizes 512×512)"""
    if L != 3:
        raise PreconditionError(f"lemma1_gap só em L=3 (recebido L={L})")
    tri = TriLattice(L)
    n = tri.n_vertices
    dim = 2 ** n
    p = p_beta(beta)
    I = np.eye(dim)
    h = [_term_matrix(n, v, tri.link1(v)) for v in range(n)]

    rho_free = I.copy()
    rho_k1 = I.copy()
    for h_v in h:
        rho_free = rho_free @ (I + (1.0 - p) * h_v) / 2.0
        rho_k1 = rho_k1 @ (I + h_v) / 2.0
    rho_free /= np.trace(rho_free)
    rho_k1 /= np.trace(rho_k1)

    P = (I + _x_matrix(n, list(range(n)))) / 2.0
    sym = P @ rho_free @ P
    rho = sym / np.trace(sym)
    pr_k1 = (1.0 - p) ** n
    rho_f = 2.0 * sym + pr_k1 * (rho_k1 - 2.0 * P @ rho_k1 @ P)

    diff = rho - rho_f
    distance = float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2.0)).sum())
    return GibbsGapResult(beta=beta, N=n, distance=distance, bound=free_ensemble_bound(n, beta))


# ----------------------------------------------------------------------
# Verificação em lote
# ----------------------------------------------------------------------
@dataclass
class DisentangleSummary:
    L: int
    beta: float
    l: int
    trials: int
    n_valid: int = 0
    max_layers: int = 0
    layer_bound: int = 0
    max_depth: int = 0
    depth_bound: int = 0
    all_conjugations_ok: bool = True
    failures: List[str] = field(default_factory=list)

    @property
    def valid_fraction(self) -> float:
        return self.n_valid / self.trials if self.trials else float('nan')

    @property
    def depth_ok(self) -> bool:
        """Camadas ≤ 2·diâmetro do quadrado; subcamadas ≤ cores × esse limite"""
        return self.max_layers <= self.layer_bound and self.max_depth <= self.depth_bound


def verify_configs(L: int, beta: float, trials: int, rng: np.random.Generator,
                   l: Optional[int] = None, c: Optional[float] = None,
                   c_margin: float = DEFAULT_C_MARGIN) -> DisentangleSummary:
    """Amostra configurações e confere o desemaranhamento das válidas"""
    if l is None:
        l = block_side(L, beta, c, c_margin)
    layer_bound = 2 * region_diameter(L, l)
    summary = DisentangleSummary(L=L, beta=beta, l=l, trials=trials, layer_bound=layer_bound,
                                 depth_bound=n_colors(L) * layer_bound)
    for t in range(trials):
        cfg = sample_sinks(L, beta, rng)
        if not is_valid(cfg, l):
            continue
        summary.n_valid += 1
        circuit = build_circuit(cfg, l)
        summary.max_layers = max(summary.max_layers, circuit.n_layers)
        summary.max_depth = max(summary.max_depth, circuit.depth)
        try:
            ok = is_disentangled(conjugate_hamiltonian(cfg, circuit), cfg)
        except InvariantError as e:
            ok = False
            summary.failures.append(f"tentativa {t}: {e}")
        if not ok:
            summary.all_conjugations_ok = False
    return summary
