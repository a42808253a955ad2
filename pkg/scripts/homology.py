"""
homology.py - Complexo de cadeias mod 2 do toro cúbico d×d×d

Também define o toro triangular L×L usado pelo modelo 2D.

Convenções fixas (os formatos de arquivo dependem delas):
  - índice plano = orientação·d³ + z·d² + y·d + x
  - aresta (p, o) liga p a p + e_o
  - face (p, n) tem normal n e gera as duas outras direções a < b
  - cubo p tem canto inferior em p

Células do reticulado dual são representadas pelas células primais
correspondentes (vértice dual ↔ cubo, aresta dual ↔ face, face dual ↔ aresta,
cubo dual ↔ vértice). Uma Chain guarda a dimensão *primal* das células que
suportam a cadeia; ``side`` diz como interpretá-la.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable

import networkx as nx
import numpy as np
import scipy.sparse as sp

from gf2 import kernel_basis
from utils import PreconditionError

PRIMAL = "primal"
DUAL = "dual"
SIDES = (PRIMAL, DUAL)


def _mod2_matrix(rows, cols, shape) -> sp.csr_matrix:
    data = np.ones(len(rows), dtype=np.int64)
    M = sp.coo_matrix((data, (rows, cols)), shape=shape).tocsr()
    M.sum_duplicates()
    M.data %= 2
    M.eliminate_zeros()
    return M.astype(np.uint8)


class CubicLattice:
    """Toro cúbico periódico de lado d.

    Imutável depois de construído; as matrizes de bordo são calculadas sob
    demanda e podem ser compartilhadas entre workers.
    """

    def __init__(self, d: int):
        if d < 2:
            raise PreconditionError(f"d deve ser ≥ 2 (recebido {d})")
        self.d = int(d)
        self.n_vertices = self.d ** 3
        self.n_edges = 3 * self.d ** 3
        self.n_faces = 3 * self.d ** 3
        self.n_cubes = self.d ** 3

        p = np.arange(self.n_vertices)
        self._pos = p
        self._xyz = np.stack([p % self.d, (p // self.d) % self.d, p // self.d ** 2], axis=1)

    def __repr__(self) -> str:
        return f"CubicLattice(d={self.d})"

    # ------------------------------------------------------------------
    # Indexação
    # ------------------------------------------------------------------
    def n_cells(self, dim: int) -> int:
        return (self.n_vertices, self.n_edges, self.n_faces, self.n_cubes)[dim]

    def position(self, x, y, z):
        d = self.d
        return (np.asarray(z) % d) * d * d + (np.asarray(y) % d) * d + (np.asarray(x) % d)

    def index(self, x: int, y: int, z: int, orientation: int = 0) -> int:
        return int(orientation * self.d ** 3 + self.position(x, y, z))

    def coords(self, idx: int) -> tuple[int, int, int, int]:
        """Retorna (x, y, z, orientação) de um índice plano"""
        d3 = self.d ** 3
        o, p = divmod(int(idx), d3)
        x, y, z = (int(c) for c in self._xyz[p])
        return x, y, z, o

    def cell_coords(self, indices) -> np.ndarray:
        """Coordenadas (x, y, z, o) em lote, shape (n, 4)"""
        indices = np.asarray(indices, dtype=np.int64)
        o, p = np.divmod(indices, self.d ** 3)
        return np.column_stack([self._xyz[p], o])

    def shift(self, p, direction: int, step: int = 1):
        """Posição p deslocada de ``step`` na direção dada"""
        xyz = self._xyz[np.asarray(p)].copy()
        xyz[..., direction] = (xyz[..., direction] + step) % self.d
        return self.position(xyz[..., 0], xyz[..., 1], xyz[..., 2])

    @staticmethod
    def spanning(normal: int) -> tuple[int, int]:
        a, b = (o for o in range(3) if o != normal)
        return a, b

    # ------------------------------------------------------------------
    # Matrizes de bordo (linhas = células de dimensão k-1)
    # ------------------------------------------------------------------
    @cached_property
    def boundary_1(self) -> sp.csr_matrix:
        d3, p = self.d ** 3, self._pos
        rows, cols = [], []
        for o in range(3):
            e = o * d3 + p
            rows += [p, self.shift(p, o)]
            cols += [e, e]
        return _mod2_matrix(np.concatenate(rows), np.concatenate(cols), (self.n_vertices, self.n_edges))

    @cached_property
    def boundary_2(self) -> sp.csr_matrix:
        d3, p = self.d ** 3, self._pos
        rows, cols = [], []
        for n in range(3):
            a, b = self.spanning(n)
            f = n * d3 + p
            rows += [a * d3 + p, b * d3 + p, b * d3 + self.shift(p, a), a * d3 + self.shift(p, b)]
            cols += [f, f, f, f]
        return _mod2_matrix(np.concatenate(rows), np.concatenate(cols), (self.n_edges, self.n_faces))

    @cached_property
    def boundary_3(self) -> sp.csr_matrix:
        d3, p = self.d ** 3, self._pos
        rows, cols = [], []
        for o in range(3):
            rows += [o * d3 + p, o * d3 + self.shift(p, o)]
            cols += [p, p]
        return _mod2_matrix(np.concatenate(rows), np.concatenate(cols), (self.n_faces, self.n_cubes))

    def boundary_matrix(self, k: int) -> sp.csr_matrix:
        if k not in (1, 2, 3):
            raise PreconditionError(f"não há bordo de dimensão {k}")
        return (self.boundary_1, self.boundary_2, self.boundary_3)[k - 1]

    @cached_property
    def edge_endpoints(self) -> np.ndarray:
        """(n_edges, 2): vértices de cada aresta"""
        p = self._pos
        return np.concatenate(
            [np.column_stack([p, self.shift(p, o)]) for o in range(3)]
        ).astype(np.int64)

    @cached_property
    def face_cubes(self) -> np.ndarray:
        """(n_faces, 2): os dois cubos que contêm cada face"""
        p = self._pos
        return np.concatenate(
            [np.column_stack([p, self.shift(p, o, -1)]) for o in range(3)]
        ).astype(np.int64)

    # ------------------------------------------------------------------
    # Células auxiliares
    # ------------------------------------------------------------------
    def cell_centers(self, dim: int) -> np.ndarray:
        """Centros geométricos (n, 3) das células de dimensão dim"""
        xyz = self._xyz.astype(float)
        if dim == 0:
            return xyz.copy()
        if dim == 3:
            return xyz + 0.5
        blocks = []
        for o in range(3):
            offset = np.zeros(3)
            if dim == 1:
                offset[o] = 0.5
            else:
                a, b = self.spanning(o)
                offset[[a, b]] = 0.5
            blocks.append(xyz + offset)
        return np.concatenate(blocks)


@lru_cache(maxsize=16)
def get_lattice(d: int) -> CubicLattice:
    """Rede compartilhada por tamanho (as matrizes ficam em cache)"""
    return CubicLattice(d)


@dataclass(eq=False)
class Chain:
    """Cadeia mod 2 como vetor de bits.

    ``dim`` é a dimensão primal das células do suporte; uma cadeia dual de
    grau k vive nas células primais de dimensão 3 - k.
    """

    dim: int
    side: str
    support: np.ndarray

    def __post_init__(self):
        if self.dim not in (0, 1, 2, 3):
            raise PreconditionError(f"dimensão inválida {self.dim}")
        if self.side not in SIDES:
            raise PreconditionError(f"lado inválido {self.side!r}")
        self.support = (np.asarray(self.support) & 1).astype(np.uint8)

    @classmethod
    def empty(cls, lattice: CubicLattice, dim: int, side: str = PRIMAL) -> "Chain":
        return cls(dim, side, np.zeros(lattice.n_cells(dim), dtype=np.uint8))

    @classmethod
    def from_indices(cls, lattice: CubicLattice, dim: int, indices: Iterable[int],
                     side: str = PRIMAL) -> "Chain":
        support = np.zeros(lattice.n_cells(dim), dtype=np.uint8)
        for i in indices:
            support[int(i)] ^= 1
        return cls(dim, side, support)

    @property
    def weight(self) -> int:
        return int(self.support.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.support)

    def is_empty(self) -> bool:
        return not self.support.any()

    def copy(self) -> "Chain":
        return Chain(self.dim, self.side, self.support.copy())

    def _check_compatible(self, other: "Chain"):
        if self.dim != other.dim or self.support.shape != other.support.shape:
            raise PreconditionError(
                f"cadeias em espaços diferentes (dim {self.dim} vs {other.dim})"
            )

    def __xor__(self, other: "Chain") -> "Chain":
        self._check_compatible(other)
        return Chain(self.dim, self.side, self.support ^ other.support)

    __add__ = __xor__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return (self.dim == other.dim and self.side == other.side
                and np.array_equal(self.support, other.support))

    def __repr__(self) -> str:
        return f"Chain(dim={self.dim}, side={self.side}, weight={self.weight})"


@dataclass(frozen=True)
class HomologyClass:
    """Três paridades de enrolamento, uma por direção"""

    windings: tuple[int, int, int] = field(default=(0, 0, 0))

    @property
    def is_trivial(self) -> bool:
        return not any(self.windings)

    def __xor__(self, other: "HomologyClass") -> "HomologyClass":
        return HomologyClass(tuple((a ^ b) for a, b in zip(self.windings, other.windings)))

    def __iter__(self):
        return iter(self.windings)


# ----------------------------------------------------------------------
# Operações
# ----------------------------------------------------------------------
def _apply(M: sp.csr_matrix, v: np.ndarray) -> np.ndarray:
    return (M @ v.astype(np.int64) % 2).astype(np.uint8)


def boundary(lattice: CubicLattice, c: Chain) -> Chain:
    """∂: cadeia de dimensão k → k-1"""
    if c.dim == 0:
        raise PreconditionError("bordo de uma 0-cadeia não está definido")
    return Chain(c.dim - 1, c.side, _apply(lattice.boundary_matrix(c.dim), c.support))


def dual_boundary(lattice: CubicLattice, c: Chain) -> Chain:
    """∂*: células cofaciais, dimensão k → k+1 (transposta do bordo)"""
    if c.dim == 3:
        raise PreconditionError("bordo dual de uma 3-cadeia não está definido")
    return Chain(c.dim + 1, c.side, _apply(lattice.boundary_matrix(c.dim + 1).T.tocsr(), c.support))


def is_primal_cycle(lattice: CubicLattice, c: Chain) -> bool:
    return c.dim == 0 or boundary(lattice, c).is_empty()


def is_dual_cycle(lattice: CubicLattice, c: Chain) -> bool:
    return c.dim == 3 or dual_boundary(lattice, c).is_empty()


def is_cycle(lattice: CubicLattice, c: Chain) -> bool:
    """Ciclo no sentido do lado da cadeia (∂c = 0 ou ∂*c = 0)"""
    if c.side == PRIMAL:
        return is_primal_cycle(lattice, c)
    return is_dual_cycle(lattice, c)


def homology_class(lattice: CubicLattice, c: Chain, offset: int = 0) -> HomologyClass:
    """Paridade de interseção com as três superfícies de teste na coordenada ``offset``"""
    if not is_cycle(lattice, c):
        raise PreconditionError(f"homology_class exige um ciclo ({c!r})")
    d3 = lattice.d ** 3
    xyz = lattice._xyz
    offset = offset % lattice.d
    windings = []
    for o in range(3):
        block = c.support[o * d3:(o + 1) * d3]
        a, b = CubicLattice.spanning(o)
        if (c.dim, c.side) in ((1, PRIMAL), (2, DUAL)):
            mask = xyz[:, o] == offset
        elif (c.dim, c.side) in ((2, PRIMAL), (1, DUAL)):
            mask = (xyz[:, a] == offset) & (xyz[:, b] == offset)
        else:
            raise PreconditionError(f"classe de homologia indefinida para {c!r}")
        windings.append(int(block[mask].sum() % 2))
    return HomologyClass(tuple(windings))


def intersection_parity(a: Chain, b: Chain) -> int:
    """popcount(a ∧ b) mod 2, para cadeias no mesmo espaço de células"""
    if a.dim != b.dim or a.support.shape != b.support.shape:
        raise PreconditionError(
            f"espaços de células diferentes: dim {a.dim} vs dim {b.dim}"
        )
    return int(np.count_nonzero(a.support & b.support) % 2)


def cycle_space_basis(lattice: CubicLattice, side: str = PRIMAL) -> list[Chain]:
    """Base de Z₁ (arestas) ou Z₁* (faces) por eliminação sobre GF(2)"""
    if side == PRIMAL:
        K = kernel_basis(lattice.boundary_1)
        return [Chain(1, PRIMAL, row) for row in K]
    if side == DUAL:
        K = kernel_basis(lattice.boundary_3.T)
        return [Chain(2, DUAL, row) for row in K]
    raise PreconditionError(f"lado inválido {side!r}")


# ----------------------------------------------------------------------
# Construtores auxiliares
# ----------------------------------------------------------------------
def plaquette(lattice: CubicLattice, x: int, y: int, z: int, normal: int) -> Chain:
    """Laço primal ∂σ₂ de quatro arestas"""
    face = Chain.from_indices(lattice, 2, [lattice.index(x, y, z, normal)])
    return boundary(lattice, face)


def dual_plaquette(lattice: CubicLattice, x: int, y: int, z: int, direction: int) -> Chain:
    """Laço dual ∂*σ₁: as quatro faces em volta de uma aresta"""
    edge = Chain.from_indices(lattice, 1, [lattice.index(x, y, z, direction)])
    return Chain(2, DUAL, dual_boundary(lattice, edge).support)


def straight_line(lattice: CubicLattice, direction: int, x: int = 0, y: int = 0, z: int = 0) -> Chain:
    """d arestas colineares que dão a volta no toro"""
    start = np.array([x, y, z])
    cells = []
    for t in range(lattice.d):
        q = start.copy()
        q[direction] += t
        cells.append(lattice.index(*q, direction))
    return Chain.from_indices(lattice, 1, cells)


def dual_line(lattice: CubicLattice, direction: int, x: int = 0, y: int = 0, z: int = 0) -> Chain:
    """d faces de normal ``direction`` empilhadas ao longo dela (ciclo dual)"""
    start = np.array([x, y, z])
    cells = []
    for t in range(lattice.d):
        q = start.copy()
        q[direction] += t
        cells.append(lattice.index(*q, direction))
    return Chain.from_indices(lattice, 2, cells, side=DUAL)


def cube_boundary(lattice: CubicLattice, x: int, y: int, z: int) -> Chain:
    cube = Chain.from_indices(lattice, 3, [lattice.index(x, y, z)])
    return boundary(lattice, cube)


def vertex_coboundary(lattice: CubicLattice, x: int, y: int, z: int) -> Chain:
    """As seis arestas de um vértice (2-bordo dual)"""
    vertex = Chain.from_indices(lattice, 0, [lattice.index(x, y, z)])
    return Chain(1, DUAL, dual_boundary(lattice, vertex).support)


# ----------------------------------------------------------------------
# Toro triangular
# ----------------------------------------------------------------------
# Vizinhos na ordem do anel hexagonal
HEX_RING = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))
EDGE_DIRECTIONS = ((1, 0), (0, 1), (1, 1))


class TriLattice:
    """Toro triangular L×L com vizinhos (±1,0), (0,±1), ±(1,1).

    Vértice (x, y) tem índice y·L + x; aresta (v, k) liga v a v + EDGE_DIRECTIONS[k]
    e tem índice k·L² + v.
    """

    def __init__(self, L: int):
        if L < 3:
            raise PreconditionError(f"o toro triangular exige L ≥ 3 (recebido {L})")
        self.L = int(L)
        self.n_vertices = self.L ** 2
        self.n_edges = 3 * self.L ** 2

    def __repr__(self) -> str:
        return f"TriLattice(L={self.L})"

    def vertex(self, x: int, y: int) -> int:
        return (y % self.L) * self.L + (x % self.L)

    def xy(self, v: int) -> tuple[int, int]:
        y, x = divmod(int(v), self.L)
        return x, y

    def neighbors(self, v: int) -> list[int]:
        """Seis vizinhos, na ordem do anel"""
        x, y = self.xy(v)
        return [self.vertex(x + dx, y + dy) for dx, dy in HEX_RING]

    def edge_between(self, u: int, w: int) -> int:
        ux, uy = self.xy(u)
        for k, (dx, dy) in enumerate(EDGE_DIRECTIONS):
            if self.vertex(ux + dx, uy + dy) == w:
                return k * self.n_vertices + u
            if self.vertex(ux - dx, uy - dy) == w:
                return k * self.n_vertices + w
        raise PreconditionError(f"vértices {u} e {w} não são vizinhos")

    def edge_vertices(self, e: int) -> tuple[int, int]:
        k, v = divmod(int(e), self.n_vertices)
        x, y = self.xy(v)
        dx, dy = EDGE_DIRECTIONS[k]
        return v, self.vertex(x + dx, y + dy)

    @cached_property
    def triangles(self) -> list[tuple[int, int, int]]:
        tris = []
        for v in range(self.n_vertices):
            x, y = self.xy(v)
            tris.append((v, self.vertex(x + 1, y), self.vertex(x + 1, y + 1)))
            tris.append((v, self.vertex(x, y + 1), self.vertex(x + 1, y + 1)))
        return tris

    def link1(self, v: int) -> list[tuple[int, int]]:
        """Arestas opostas a v nos seis triângulos que o contêm"""
        ring = self.neighbors(v)
        return [(ring[i], ring[(i + 1) % 6]) for i in range(6)]

    @cached_property
    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n_vertices))
        for v in range(self.n_vertices):
            for w in self.neighbors(v):
                G.add_edge(v, w)
        return G

    def distance(self, u: int, w: int) -> int:
        """Distância no grafo (métrica hexagonal, com volta no toro)"""
        ux, uy = self.xy(u)
        wx, wy = self.xy(w)
        best = None
        for sx, sy in itertools.product((-self.L, 0, self.L), repeat=2):
            dx = (wx - ux) % self.L + sx
            dy = (wy - uy) % self.L + sy
            dist = max(abs(dx), abs(dy)) if dx * dy >= 0 else abs(dx) + abs(dy)
            best = dist if best is None else min(best, dist)
        return int(best)
