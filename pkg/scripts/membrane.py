"""
membrane.py - Par de membranas (Γ₁, Γ₂), correção local e parâmetro de ordem

Γ₁: arestas de direção y no plano y = y0 (2-ciclo dual, M₁ só tem X).
Γ₂: faces de normal x no plano x = x0, com z em [z_L, z_R) (cíclico); seu
bordo são as duas linhas S₂ᴸ e S₂ᴿ de arestas y em (x0, z_L) e (x0, z_R).

A correção mede (com conhecimento exato de γ′) os termos violados nos tubos
de raio α/2 em volta de S₂ᴸ e S₂ᴿ e desfaz a paridade das componentes de γ′
fechadas dentro de cada tubo.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from tqdm import trange

from gauging import SymbolicPauli, cluster_term_edge, cluster_term_face
from homology import (
    DUAL, PRIMAL, Chain, CubicLattice, boundary, dual_boundary, get_lattice,
    intersection_parity,
)
from loopgas import LOG5, EnsembleParams, LoopConfig, exact_ensemble, sample_chain
from utils import InvariantError, PreconditionError, mean_and_stderr, spawn_rngs

logger = logging.getLogger(__name__)

MIN_CHAINS = 16


def torus_distance(a, b, d: int):
    """|a - b| no círculo de comprimento d (aceita arrays e meio-inteiros)"""
    delta = np.mod(np.asarray(a, dtype=float) - b, d)
    return np.minimum(delta, d - delta)


def choose_alpha(d: int, beta: float, alpha_c: Optional[float] = None,
                 separation: Optional[int] = None) -> int:
    """α = ⌈c·ln d⌉ com c = 3/(2β − log 5), limitado a [min(2, sep), sep]"""
    sep = separation if separation is not None else d // 2
    if alpha_c is not None:
        c = float(alpha_c)
    elif math.isinf(beta):
        c = 0.0
    elif beta > LOG5 / 2:
        c = 3.0 / (2.0 * beta - LOG5)
    else:
        return int(sep)
    alpha = math.ceil(c * math.log(d))
    return int(min(max(alpha, min(2, sep)), sep))


@dataclass
class MembranePair:
    d: int
    gamma1: Chain
    gamma2: Chain
    s2l: Chain
    s2r: Chain
    z_left: int
    z_right: int
    x0: int
    y0: int
    alpha: int
    tube_left: np.ndarray = field(repr=False)
    tube_right: np.ndarray = field(repr=False)

    @property
    def separation(self) -> int:
        return int(torus_distance(self.z_left, self.z_right, self.d))

    @property
    def radius(self) -> float:
        return self.alpha / 2.0


@dataclass
class CorrectionReport:
    detected_left: np.ndarray
    detected_right: np.ndarray
    flip_left: int
    flip_right: int
    m1: int
    m2_raw: int
    m2: int


def _tube(lattice: CubicLattice, x0: int, z0: int, radius: float) -> np.ndarray:
    """Faces com centro a menos de ``radius`` da linha (x0, ·, z0) em x e z"""
    centers = lattice.cell_centers(2)
    dx = torus_distance(centers[:, 0], x0, lattice.d)
    dz = torus_distance(centers[:, 2], z0, lattice.d)
    return (dx < radius) & (dz < radius)


def build_membranes(lattice: CubicLattice, z_left: int = 0, z_right: Optional[int] = None,
                    alpha: Optional[int] = None, x0: int = 0, y0: int = 0) -> MembranePair:
    """Constrói o par canônico e confere as invariantes geométricas"""
    d = lattice.d
    if z_right is None:
        z_right = z_left + d // 2
    z_left, z_right = z_left % d, z_right % d
    sep = int(torus_distance(z_left, z_right, d))
    if sep < d / 4:
        raise PreconditionError(
            f"separação em z entre as fatias ({sep}) deve ser ≥ d/4 = {d / 4}"
        )
    if alpha is None:
        alpha = min(2, sep)
    if alpha < 0:
        raise PreconditionError(f"alpha deve ser ≥ 0 (recebido {alpha})")

    d3 = d ** 3
    xyz = lattice._xyz
    # Γ₁: arestas y em y = y0
    g1 = np.zeros(lattice.n_edges, dtype=np.uint8)
    g1[1 * d3 + np.flatnonzero(xyz[:, 1] == y0 % d)] = 1
    # Γ₂: faces de normal x em x = x0, z ∈ [z_L, z_R)
    span = (xyz[:, 2] - z_left) % d < (z_right - z_left) % d
    g2 = np.zeros(lattice.n_faces, dtype=np.uint8)
    g2[0 * d3 + np.flatnonzero((xyz[:, 0] == x0 % d) & span)] = 1

    def y_line(z):
        s = np.zeros(lattice.n_edges, dtype=np.uint8)
        s[1 * d3 + np.flatnonzero((xyz[:, 0] == x0 % d) & (xyz[:, 2] == z))] = 1
        return Chain(1, PRIMAL, s)

    pair = MembranePair(
        d=d,
        gamma1=Chain(1, DUAL, g1),
        gamma2=Chain(2, PRIMAL, g2),
        s2l=y_line(z_left),
        s2r=y_line(z_right),
        z_left=z_left, z_right=z_right, x0=x0 % d, y0=y0 % d, alpha=int(alpha),
        tube_left=_tube(lattice, x0, z_left, alpha / 2.0),
        tube_right=_tube(lattice, x0, z_right, alpha / 2.0),
    )

    if not dual_boundary(lattice, pair.gamma1).is_empty():
        raise InvariantError("Γ₁ não é um 2-ciclo dual")
    if not np.array_equal(boundary(lattice, pair.gamma2).support, (pair.s2l ^ pair.s2r).support):
        raise InvariantError("∂Γ₂ ≠ S₂ᴸ ⊕ S₂ᴿ")
    if np.any(pair.tube_left & pair.tube_right):
        raise PreconditionError(f"vizinhanças de S₂ᴸ e S₂ᴿ se sobrepõem (α={alpha}, separação {sep})")
    return pair


def membrane_pair_for(d: int, beta: float, alpha_c: Optional[float] = None,
                      z_left: int = 0) -> MembranePair:
    lattice = get_lattice(d)
    z_right = z_left + d // 2
    sep = int(torus_distance(z_left, z_right, d))
    alpha = choose_alpha(d, beta, alpha_c, sep)
    return build_membranes(lattice, z_left, z_right, alpha)


def deform(lattice: CubicLattice, pair: MembranePair, cube: int) -> MembranePair:
    """Γ₂ ⊕ ∂σ₃ (mesmo bordo, mesmos tubos)"""
    c = Chain.from_indices(lattice, 3, [cube])
    return replace(pair, gamma2=pair.gamma2 ^ boundary(lattice, c))


def deform_gamma1(lattice: CubicLattice, pair: MembranePair, vertex: int) -> MembranePair:
    """Γ₁ ⊕ ∂*σ₀"""
    v = Chain.from_indices(lattice, 0, [vertex])
    star = Chain(1, DUAL, dual_boundary(lattice, v).support)
    return replace(pair, gamma1=pair.gamma1 ^ star)


# ----------------------------------------------------------------------
# Autovalores e correção
# ----------------------------------------------------------------------
def _sign(parity: int) -> int:
    return -1 if parity else 1


def membrane_eigenvalue(pair: MembranePair, cfg: LoopConfig) -> Tuple[int, int]:
    """(m1, m2) = ((-1)^{Γ₁·γ}, (-1)^{Γ₂·γ′})"""
    m1 = _sign(intersection_parity(pair.gamma1, cfg.gamma))
    m2 = _sign(intersection_parity(pair.gamma2, cfg.gamma_prime))
    return m1, m2


def _closed_parity(ends: np.ndarray, crossing: np.ndarray) -> int:
    """Paridade de cruzamento somada sobre as componentes fechadas.

    ``ends`` são os dois cubos de cada face detectada; uma componente com
    algum cubo de grau ímpar sai do tubo e é ignorada.
    """
    if len(ends) == 0:
        return 0
    nodes, inverse = np.unique(ends, return_inverse=True)
    inverse = inverse.reshape(-1, 2)
    n = len(nodes)
    graph = sp.coo_matrix((np.ones(len(inverse)), (inverse[:, 0], inverse[:, 1])), shape=(n, n))
    _, label = connected_components(graph, directed=False)
    degree = np.bincount(inverse.ravel(), minlength=n)
    open_labels = np.unique(label[degree % 2 == 1])
    closed = ~np.isin(label[inverse[:, 0]], open_labels)
    return int(crossing[closed].sum() % 2)


def _tube_flips(lattice: CubicLattice, pair: MembranePair, gamma_prime: Chain) -> Tuple[int, int]:
    """Só lê γ′ dentro de cada tubo"""
    support = gamma_prime.support.astype(bool)
    flips = []
    for tube in (pair.tube_left, pair.tube_right):
        cells = np.flatnonzero(support & tube)
        flips.append(_closed_parity(lattice.face_cubes[cells], pair.gamma2.support[cells]))
    return flips[0], flips[1]


def local_correct(lattice: CubicLattice, pair: MembranePair, cfg: LoopConfig) -> CorrectionReport:
    """Desfaz a paridade de laços de γ′ contidos nos tubos de S₂ᴸ e S₂ᴿ"""
    m1, m2_raw = membrane_eigenvalue(pair, cfg)
    support = cfg.gamma_prime.support.astype(bool)
    flip_left, flip_right = _tube_flips(lattice, pair, cfg.gamma_prime)
    return CorrectionReport(
        detected_left=np.flatnonzero(support & pair.tube_left),
        detected_right=np.flatnonzero(support & pair.tube_right),
        flip_left=flip_left,
        flip_right=flip_right,
        m1=m1,
        m2_raw=m2_raw,
        m2=m2_raw * _sign((flip_left + flip_right) % 2),
    )


# ----------------------------------------------------------------------
# Parâmetro de ordem
# ----------------------------------------------------------------------
@dataclass
class OrderEstimate:
    d: int
    beta: float
    n_samples: int
    O_raw: float
    O_corrected: float
    stderr: float
    alpha: int
    exact: bool = False

    @property
    def T(self) -> float:
        return 0.0 if math.isinf(self.beta) else (math.inf if self.beta == 0 else 1.0 / self.beta)


def _exact_order(lattice: CubicLattice, pair: MembranePair, beta: float) -> OrderEstimate:
    ens = exact_ensemble(EnsembleParams(beta=beta, d=lattice.d))
    g1 = pair.gamma1.support.astype(np.int64)
    g2 = pair.gamma2.support.astype(np.int64)
    m1 = 1 - 2 * ((ens.primal.supports @ g1) % 2)
    m2 = 1 - 2 * ((ens.dual.supports @ g2) % 2)
    m2_corr = m2.copy()
    tubes = (pair.tube_left | pair.tube_right).astype(np.int64)
    if tubes.any():
        for i in np.flatnonzero(ens.dual.supports @ tubes):
            fl, fr = _tube_flips(lattice, pair, ens.dual.chain(i))
            m2_corr[i] *= _sign((fl + fr) % 2)
    e1 = float(np.dot(ens.primal.probs, m1))
    e2 = float(np.dot(ens.dual.probs, m2))
    e2c = float(np.dot(ens.dual.probs, m2_corr))
    return OrderEstimate(
        d=lattice.d, beta=beta, n_samples=0,
        O_raw=(e1 + e2) / 2, O_corrected=(e1 + e2c) / 2, stderr=0.0,
        alpha=pair.alpha, exact=True,
    )


def order_parameter(pair: MembranePair, params: EnsembleParams, n_samples: int,
                    chains: int = MIN_CHAINS, thin: int = 1, exact: bool = False,
                    progress: bool = False) -> OrderEstimate:
    """O_Γ = ⟨(m1 + m2 corrigido)/2⟩ no ensemble simétrico.

    Em d=2 com ``exact`` a média vem da tabela exata. O erro padrão é
    calculado sobre as médias de cadeias independentes.
    """
    lattice = params.lattice
    if math.isinf(params.beta):
        return OrderEstimate(lattice.d, params.beta, n_samples, 1.0, 1.0, 0.0, pair.alpha, exact)
    if exact:
        return _exact_order(lattice, pair, params.beta)

    chains = max(chains, MIN_CHAINS)
    per_chain = max(1, math.ceil(n_samples / chains))
    raw_means: List[float] = []
    corr_means: List[float] = []
    rngs = spawn_rngs(params.seed, chains)
    for k in trange(chains, desc=f"cadeias d={lattice.d} T={params.T:.3g}",
                    disable=not progress, leave=False):
        raw, corr = [], []
        for cfg in sample_chain(params, rngs[k], per_chain, thin=thin):
            rep = local_correct(lattice, pair, cfg)
            raw.append((rep.m1 + rep.m2_raw) / 2)
            corr.append((rep.m1 + rep.m2) / 2)
        raw_means.append(mean_and_stderr(raw)[0])
        corr_means.append(mean_and_stderr(corr)[0])

    O_raw, _ = mean_and_stderr(raw_means)
    O_corr, err = mean_and_stderr(corr_means)
    return OrderEstimate(lattice.d, params.beta, per_chain * chains, O_raw, O_corr, err, pair.alpha)


# ----------------------------------------------------------------------
# Operadores de membrana e estado produto
# ----------------------------------------------------------------------
def membrane_operators(lattice: CubicLattice, pair: MembranePair) -> Tuple[SymbolicPauli, SymbolicPauli]:
    """M₁ = X(Γ₁) e M₂ = X(Γ₂) Z(∂Γ₂)"""
    m1 = SymbolicPauli.from_supports(lattice, x_edges=pair.gamma1.support.copy())
    m2 = SymbolicPauli.from_supports(
        lattice,
        x_faces=pair.gamma2.support.copy(),
        z_edges=boundary(lattice, pair.gamma2).support,
    )
    return m1, m2


def membrane_from_terms(lattice: CubicLattice, pair: MembranePair) -> Tuple[SymbolicPauli, SymbolicPauli]:
    """Os mesmos operadores como produto dos termos de cluster sobre a folha"""
    m1 = SymbolicPauli.identity(lattice)
    for e in pair.gamma1.indices():
        m1 = m1 * cluster_term_edge(lattice, int(e))
    m2 = SymbolicPauli.identity(lattice)
    for f in pair.gamma2.indices():
        m2 = m2 * cluster_term_face(lattice, int(f))
    return m1, m2


def product_state_expectation(op: SymbolicPauli) -> float:
    """⟨+…+| P |+…+⟩: zero com qualquer Z; senão a fase"""
    _, b2, _, b1 = op.supports
    if b2.any() or b1.any():
        return 0.0
    if op.phase % 2:
        raise PreconditionError("operador não hermitiano (fase ímpar)")
    return 1.0 if op.phase == 0 else -1.0


def product_state_order(lattice: CubicLattice, pair: MembranePair) -> float:
    m1, m2 = membrane_operators(lattice, pair)
    return (product_state_expectation(m1) + product_state_expectation(m2)) / 2


# ----------------------------------------------------------------------
# Emaranhamento localizável
# ----------------------------------------------------------------------
@dataclass
class LocalizationSample:
    xx: int
    zz: int
    raw_xx: int
    raw_zz: int
    frame_xx: int
    frame_zz: int
    n_bulk: int
    outcomes: Tuple[np.ndarray, np.ndarray] = field(repr=False)


def _slab(lattice: CubicLattice, dim: int, pair: MembranePair) -> np.ndarray:
    z = lattice.cell_centers(dim)[:, 2]
    width = max(pair.radius, 1.0)
    return ((torus_distance(z, pair.z_left, lattice.d) < width)
            | (torus_distance(z, pair.z_right, lattice.d) < width))


def bulk_outcomes(parity: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n resultados ±1: os n-1 primeiros i.i.d., o último fecha o produto em (-1)^parity"""
    outcomes = rng.choice(np.array([-1, 1]), size=n)
    if n:
        outcomes[-1] = _sign(parity) * int(np.prod(outcomes[:-1]))
    return outcomes


def localize_entanglement(lattice: CubicLattice, pair: MembranePair, cfg: LoopConfig,
                          rng: np.random.Generator) -> LocalizationSample:
    """Medidas X no bulk com rastreamento do referencial de Pauli.

    O produto dos resultados sobre o bulk de cada membrana é a paridade da
    excitação ali (γ para M₁, γ′ para M₂). O correlator lógico nas fatias
    sai com esse sinal embutido; multiplicar pelo produto registrado devolve
    o autovalor corrigido da membrana.
    """
    rep = local_correct(lattice, pair, cfg)
    values = []
    outcomes = []
    n_bulk = 0
    for chain, excitation, dim, m in ((pair.gamma1, cfg.gamma, 1, rep.m1),
                                      (pair.gamma2, cfg.gamma_prime, 2, rep.m2)):
        bulk = np.flatnonzero(chain.support.astype(bool) & ~_slab(lattice, dim, pair))
        n_bulk += len(bulk)
        parity = int(excitation.support[bulk].sum() % 2)
        site_outcomes = bulk_outcomes(parity, len(bulk), rng)
        frame = int(np.prod(site_outcomes))
        raw = m * _sign(parity)
        values.append((raw * frame, raw, frame))
        outcomes.append(site_outcomes)
    (xx, raw_xx, frame_xx), (zz, raw_zz, frame_zz) = values
    return LocalizationSample(
        xx=xx, zz=zz, raw_xx=raw_xx, raw_zz=raw_zz, frame_xx=frame_xx, frame_zz=frame_zz,
        n_bulk=n_bulk, outcomes=(outcomes[0], outcomes[1]),
    )
