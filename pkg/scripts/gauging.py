"""
gauging.py - Álgebra de Pauli simbólica e o mapa de gauging da simetria 1-forma

Um operador é guardado como i^α X(a₂) Z(b₂) X(a₁) Z(b₁), com a₂, b₂ em faces
(qubits primais) e a₁, b₁ em arestas (qubits duais). Nenhum vetor de estado é
construído: as dualidades são verificadas termo a termo, módulo os operadores
Z que fixam a imagem do mapa.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Hashable, List, Tuple

import numpy as np

from gf2 import RowSpace, kernel_basis, solve
from homology import DUAL, PRIMAL, Chain, CubicLattice, get_lattice
from utils import InvariantError, PreconditionError

logger = logging.getLogger(__name__)


def _dot(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.count_nonzero(a & b) & 1)


@dataclass(eq=False)
class SymbolicPauli:
    """i^phase · X(x_primal) Z(z_primal) X(x_dual) Z(z_dual)"""

    phase: int
    x_primal: Chain
    z_primal: Chain
    x_dual: Chain
    z_dual: Chain

    def __post_init__(self):
        self.phase %= 4
        for name, dim in (("x_primal", 2), ("z_primal", 2), ("x_dual", 1), ("z_dual", 1)):
            if getattr(self, name).dim != dim:
                raise PreconditionError(f"{name} deve ter dimensão {dim}")

    # ------------------------------------------------------------------
    # Construtores
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls, lattice: CubicLattice) -> "SymbolicPauli":
        faces = Chain.empty(lattice, 2, PRIMAL)
        edges = Chain.empty(lattice, 1, DUAL)
        return cls(0, faces, faces.copy(), edges, edges.copy())

    @classmethod
    def from_supports(cls, lattice: CubicLattice, *, x_faces=None, z_faces=None,
                      x_edges=None, z_edges=None, phase: int = 0) -> "SymbolicPauli":
        """Constrói a partir de vetores de bits (None = vazio)"""
        def face_chain(v):
            return Chain.empty(lattice, 2, PRIMAL) if v is None else Chain(2, PRIMAL, v)

        def edge_chain(v):
            return Chain.empty(lattice, 1, DUAL) if v is None else Chain(1, DUAL, v)

        return cls(phase, face_chain(x_faces), face_chain(z_faces), edge_chain(x_edges), edge_chain(z_edges))

    @property
    def supports(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.x_primal.support, self.z_primal.support,
                self.x_dual.support, self.z_dual.support)

    def copy(self) -> "SymbolicPauli":
        return SymbolicPauli(self.phase, self.x_primal.copy(), self.z_primal.copy(),
                             self.x_dual.copy(), self.z_dual.copy())

    # ------------------------------------------------------------------
    # Álgebra
    # ------------------------------------------------------------------
    def __mul__(self, other: "SymbolicPauli") -> "SymbolicPauli":
        a2, b2, a1, b1 = self.supports
        c2, d2, c1, d1 = other.supports
        # Z(b)X(c) = (-1)^{b·c} X(c)Z(b)
        phase = self.phase + other.phase + 2 * (_dot(b2, c2) + _dot(b1, c1))
        return SymbolicPauli(
            phase,
            Chain(2, PRIMAL, a2 ^ c2), Chain(2, PRIMAL, b2 ^ d2),
            Chain(1, DUAL, a1 ^ c1), Chain(1, DUAL, b1 ^ d1),
        )

    def key(self, with_phase: bool = True) -> Hashable:
        parts = tuple(np.packbits(s).tobytes() for s in self.supports)
        return (self.phase,) + parts if with_phase else parts

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicPauli):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def weight(self) -> int:
        a2, b2, a1, b1 = self.supports
        return int(np.count_nonzero(a2 | b2) + np.count_nonzero(a1 | b1))

    def is_identity(self, ignore_phase: bool = False) -> bool:
        return (ignore_phase or self.phase == 0) and not any(s.any() for s in self.supports)

    def __repr__(self) -> str:
        a2, b2, a1, b1 = self.supports
        return (f"SymbolicPauli(i^{self.phase}, Xf={int(a2.sum())}, Zf={int(b2.sum())}, "
                f"Xe={int(a1.sum())}, Ze={int(b1.sum())})")


def pauli_commutes(a: SymbolicPauli, b: SymbolicPauli) -> bool:
    """Forma simplética: comutam se a soma dos cruzamentos for par"""
    a2, b2, a1, b1 = a.supports
    c2, d2, c1, d1 = b.supports
    return (_dot(a2, d2) + _dot(b2, c2) + _dot(a1, d1) + _dot(b1, c1)) % 2 == 0


def hadamard(op: SymbolicPauli) -> SymbolicPauli:
    """Troca X ↔ Z em todos os qubits (H X H = Z)"""
    a2, b2, a1, b1 = op.supports
    # H X(a)Z(b) H = Z(a)X(b) = (-1)^{a·b} X(b)Z(a)
    phase = op.phase + 2 * (_dot(a2, b2) + _dot(a1, b1))
    return SymbolicPauli(
        phase,
        Chain(2, PRIMAL, b2.copy()), Chain(2, PRIMAL, a2.copy()),
        Chain(1, DUAL, b1.copy()), Chain(1, DUAL, a1.copy()),
    )


# ----------------------------------------------------------------------
# Termos dos modelos
# ----------------------------------------------------------------------
def _unit(n: int, i: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.uint8)
    v[i] = 1
    return v


def _mat_vec(M, v: np.ndarray) -> np.ndarray:
    return (M @ v.astype(np.int64) % 2).astype(np.uint8)


def cluster_term_edge(lattice: CubicLattice, e: int) -> SymbolicPauli:
    """K(σ₁) = X(σ₁) Z(∂*σ₁)"""
    x = _unit(lattice.n_edges, e)
    return SymbolicPauli.from_supports(lattice, x_edges=x, z_faces=_mat_vec(lattice.boundary_2.T, x))


def cluster_term_face(lattice: CubicLattice, f: int) -> SymbolicPauli:
    """K(σ₂) = X(σ₂) Z(∂σ₂)"""
    x = _unit(lattice.n_faces, f)
    return SymbolicPauli.from_supports(lattice, x_faces=x, z_edges=_mat_vec(lattice.boundary_2, x))


def symmetry_cube(lattice: CubicLattice, c: int) -> SymbolicPauli:
    """S(∂σ₃): X nas seis faces de um cubo"""
    return SymbolicPauli.from_supports(
        lattice, x_faces=_mat_vec(lattice.boundary_3, _unit(lattice.n_cubes, c))
    )


def symmetry_vertex(lattice: CubicLattice, v: int) -> SymbolicPauli:
    """S(∂*σ₀): X nas seis arestas de um vértice"""
    return SymbolicPauli.from_supports(
        lattice, x_edges=_mat_vec(lattice.boundary_1.T, _unit(lattice.n_vertices, v))
    )


def is_symmetric(lattice: CubicLattice, op: SymbolicPauli) -> bool:
    """Comuta com todos os S(∂σ₃) e S(∂*σ₀)"""
    _, b2, _, b1 = op.supports
    return (not _mat_vec(lattice.boundary_3.T, b2).any()
            and not _mat_vec(lattice.boundary_1, b1).any())


@dataclass
class HamiltonianSpec:
    """Soma de termos com coeficiente unitário e sinal comum"""

    name: str
    terms: Dict[Tuple[str, int], SymbolicPauli] = field(default_factory=dict)
    sign: int = -1

    def __len__(self) -> int:
        return len(self.terms)

    def pairwise_commuting(self) -> bool:
        return all_commute(list(self.terms.values()))


def trivial_hamiltonian(lattice: CubicLattice) -> HamiltonianSpec:
    """H_X = -Σ X(σ₁) - Σ X(σ₂)"""
    H = HamiltonianSpec("H_X")
    for e in range(lattice.n_edges):
        H.terms[("edge", e)] = SymbolicPauli.from_supports(lattice, x_edges=_unit(lattice.n_edges, e))
    for f in range(lattice.n_faces):
        H.terms[("face", f)] = SymbolicPauli.from_supports(lattice, x_faces=_unit(lattice.n_faces, f))
    return H


def cluster_hamiltonian(lattice: CubicLattice) -> HamiltonianSpec:
    """H_C = -Σ K(σ₁) - Σ K(σ₂)"""
    H = HamiltonianSpec("H_C")
    for e in range(lattice.n_edges):
        H.terms[("edge", e)] = cluster_term_edge(lattice, e)
    for f in range(lattice.n_faces):
        H.terms[("face", f)] = cluster_term_face(lattice, f)
    return H


def toric_code_generators(lattice: CubicLattice) -> Tuple[HamiltonianSpec, HamiltonianSpec]:
    """Geradores dos dois códigos tóricos 3D (qubits em faces; qubits em arestas).

    Os termos X carregam a mesma chave da célula de origem em H_X; os termos Z
    são indexados por cubo e por vértice.
    """
    faces = HamiltonianSpec("toric_faces")
    edges = HamiltonianSpec("toric_edges")
    for e in range(lattice.n_edges):
        x = _mat_vec(lattice.boundary_2.T, _unit(lattice.n_edges, e))
        faces.terms[("edge", e)] = SymbolicPauli.from_supports(lattice, x_faces=x)
    for c in range(lattice.n_cubes):
        z = _mat_vec(lattice.boundary_3, _unit(lattice.n_cubes, c))
        faces.terms[("cube", c)] = SymbolicPauli.from_supports(lattice, z_faces=z)
    for f in range(lattice.n_faces):
        x = _mat_vec(lattice.boundary_2, _unit(lattice.n_faces, f))
        edges.terms[("face", f)] = SymbolicPauli.from_supports(lattice, x_edges=x)
    for v in range(lattice.n_vertices):
        z = _mat_vec(lattice.boundary_1.T, _unit(lattice.n_vertices, v))
        edges.terms[("vertex", v)] = SymbolicPauli.from_supports(lattice, z_edges=z)
    return faces, edges


# ----------------------------------------------------------------------
# Mapa de gauging
# ----------------------------------------------------------------------
class GaugeFrame:
    """Núcleos de ∂₂ e ∂₂ᵀ de uma rede, para representantes canônicos.

    Z(z) com ∂₂z = 0 (faces) ou ∂₂ᵀz = 0 (arestas) age trivialmente sobre a
    imagem do mapa de gauging; dois operadores que diferem por esses fatores
    são identificados.
    """

    def __init__(self, lattice: CubicLattice):
        self.lattice = lattice
        self.face_cycles = RowSpace(kernel_basis(lattice.boundary_2))
        self.edge_cycles = RowSpace(kernel_basis(lattice.boundary_2.T))

    def canonical(self, op: SymbolicPauli) -> SymbolicPauli:
        a2, b2, a1, b1 = op.supports
        return SymbolicPauli(
            op.phase,
            Chain(2, PRIMAL, a2.copy()), Chain(2, PRIMAL, self.face_cycles.reduce(b2)),
            Chain(1, DUAL, a1.copy()), Chain(1, DUAL, self.edge_cycles.reduce(b1)),
        )

    def equivalent(self, a: SymbolicPauli, b: SymbolicPauli, with_phase: bool = True) -> bool:
        return self.canonical(a).key(with_phase) == self.canonical(b).key(with_phase)

    def is_gauge_trivial(self, op: SymbolicPauli) -> bool:
        return self.canonical(op).is_identity()


@lru_cache(maxsize=8)
def get_frame(d: int) -> GaugeFrame:
    return GaugeFrame(get_lattice(d))


def gauge_operator(lattice: CubicLattice, op: SymbolicPauli) -> SymbolicPauli:
    """A ↦ A′ com 𝒢(A|ψ⟩) = A′𝒢(|ψ⟩), usando 𝒢|c₁, c₂⟩ = |∂*c₁, ∂c₂⟩.

    X nas arestas vira X em ∂*; X nas faces vira X em ∂. Um Z é levado para
    uma pré-imagem pelo bordo; ela só existe quando o operador é simétrico e
    o suporte Z é homologicamente trivial.
    """
    if not is_symmetric(lattice, op):
        raise PreconditionError("gauge_operator exige um operador simétrico")
    a2, b2, a1, b1 = op.supports
    B2 = lattice.boundary_2

    z_faces = solve(B2, b1) if b1.any() else np.zeros(lattice.n_faces, dtype=np.uint8)
    z_edges = solve(B2.T, b2) if b2.any() else np.zeros(lattice.n_edges, dtype=np.uint8)
    if z_faces is None or z_edges is None:
        raise PreconditionError(
            "suporte Z com homologia não trivial não tem imagem pelo mapa de gauging"
        )
    return SymbolicPauli.from_supports(
        lattice,
        x_faces=_mat_vec(B2.T, a1),
        z_faces=z_faces,
        x_edges=_mat_vec(B2, a2),
        z_edges=z_edges,
        phase=op.phase,
    )


def gauge_hamiltonian(lattice: CubicLattice, H: HamiltonianSpec) -> HamiltonianSpec:
    out = HamiltonianSpec(f"{H.name}^G", sign=H.sign)
    for label, term in H.terms.items():
        out.terms[label] = gauge_operator(lattice, term)
    return out


def compare_term_sets(frame: GaugeFrame, expected: Dict, actual: Dict,
                      with_phase: bool = True) -> List[str]:
    """Compara célula a célula; retorna descrições das divergências"""
    lattice = frame.lattice
    mismatches = []
    for label in sorted(set(expected) | set(actual)):
        if label not in actual:
            mismatches.append(f"{_describe(lattice, label)}: termo ausente")
        elif label not in expected:
            mismatches.append(f"{_describe(lattice, label)}: termo inesperado")
        elif not frame.equivalent(expected[label], actual[label], with_phase):
            mismatches.append(
                f"{_describe(lattice, label)}: esperado {expected[label]!r}, obtido {actual[label]!r}"
            )
    return mismatches


def _describe(lattice: CubicLattice, label) -> str:
    kind, idx = label
    x, y, z, o = lattice.coords(idx)
    return f"{kind}({x},{y},{z};{o})"


def all_commute(ops: List[SymbolicPauli]) -> bool:
    """Todos os pares comutam (forma simplética em bloco)"""
    if not ops:
        return True
    a2 = np.array([op.x_primal.support for op in ops], dtype=np.int64)
    b2 = np.array([op.z_primal.support for op in ops], dtype=np.int64)
    a1 = np.array([op.x_dual.support for op in ops], dtype=np.int64)
    b1 = np.array([op.z_dual.support for op in ops], dtype=np.int64)
    form = (a2 @ b2.T + b2 @ a2.T + a1 @ b1.T + b1 @ a1.T) % 2
    return not form.any()


# ----------------------------------------------------------------------
# Verificação das dualidades
# ----------------------------------------------------------------------
@dataclass
class DualityReport:
    d: int
    trivial_to_toric: bool = False
    toric_z_gauge_trivial: bool = False
    cluster_to_hadamard: bool = False
    gauged_terms_commute: bool = False
    mismatches: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.trivial_to_toric and self.toric_z_gauge_trivial
                and self.cluster_to_hadamard and self.gauged_terms_commute)

    def to_record(self) -> Dict:
        return {
            "d": self.d,
            "trivial_to_toric": self.trivial_to_toric,
            "toric_z_gauge_trivial": self.toric_z_gauge_trivial,
            "cluster_to_hadamard": self.cluster_to_hadamard,
            "gauged_terms_commute": self.gauged_terms_commute,
            "passed": self.passed,
            "mismatches": self.mismatches[:20],
        }


def verify_dualities(lattice: CubicLattice) -> DualityReport:
    """Confere H_X → dois códigos tóricos e H_C → H·H_C·H, módulo simetria de gauge"""
    if lattice.d not in (2, 3, 4):
        raise PreconditionError(f"verify_dualities aceita d ∈ {{2, 3, 4}} (recebido {lattice.d})")
    frame = get_frame(lattice.d)
    report = DualityReport(lattice.d)

    # (i) modelo trivial
    gauged_x = gauge_hamiltonian(lattice, trivial_hamiltonian(lattice))
    tc_faces, tc_edges = toric_code_generators(lattice)
    expected_x = {k: v for k, v in {**tc_faces.terms, **tc_edges.terms}.items()
                  if k[0] in ("edge", "face")}
    bad = compare_term_sets(frame, expected_x, gauged_x.terms)
    report.mismatches += [f"H_X: {m}" for m in bad]
    report.trivial_to_toric = not bad

    z_terms = [t for k, t in {**tc_faces.terms, **tc_edges.terms}.items() if k[0] in ("cube", "vertex")]
    report.toric_z_gauge_trivial = all(frame.is_gauge_trivial(t) for t in z_terms)
    if not report.toric_z_gauge_trivial:
        report.mismatches.append("geradores Z do código tórico não são triviais de gauge")

    # (ii) modelo de cluster
    H_C = cluster_hamiltonian(lattice)
    gauged_c = gauge_hamiltonian(lattice, H_C)
    expected_c = {k: hadamard(t) for k, t in H_C.terms.items()}
    bad = compare_term_sets(frame, expected_c, gauged_c.terms)
    report.mismatches += [f"H_C: {m}" for m in bad]
    report.cluster_to_hadamard = not bad

    report.gauged_terms_commute = (
        all_commute(list(gauged_c.terms.values()))
        and all_commute(list(gauged_x.terms.values()) + z_terms)
    )
    if not report.gauged_terms_commute:
        report.mismatches.append("termos calibrados não comutam")

    icon = "✓" if report.passed else "✗"
    logger.info(f"{icon} Dualidades d={lattice.d}: H_X→TC {report.trivial_to_toric}, "
                f"H_C→Hadamard {report.cluster_to_hadamard}")
    return report


@dataclass
class KernelReport:
    side: str
    kernel_dim: int
    generator_span_dim: int
    symmetry_span_dim: int
    kernel_equals_symmetry_span: bool

    @property
    def noncontractible_sectors(self) -> int:
        return self.kernel_dim - self.generator_span_dim


def _wrapping_planes(lattice: CubicLattice, side: str) -> List[np.ndarray]:
    d3 = lattice.d ** 3
    xyz = lattice._xyz
    planes = []
    for o in range(3):
        # faces de normal o, ou arestas de direção o, em coord_o = 0
        v = np.zeros(3 * d3, dtype=np.uint8)
        v[o * d3 + np.flatnonzero(xyz[:, o] == 0)] = 1
        planes.append(v)
    return planes


def kernel_report(lattice: CubicLattice) -> Dict[str, KernelReport]:
    """Núcleo do mapa de estados 𝒢 no setor simétrico, por subrede.

    Compara o núcleo de ∂₂ (faces) e de ∂₂ᵀ (arestas) com o span das órbitas
    de simetria: geradores locais mais os três planos que dão a volta no toro.
    """
    out = {}
    for side, M, gens in (
        (PRIMAL, lattice.boundary_2, lattice.boundary_3.T.toarray()),
        (DUAL, lattice.boundary_2.T, lattice.boundary_1.toarray()),
    ):
        K = kernel_basis(M)
        generators = RowSpace(gens)
        symmetry = RowSpace(np.vstack([gens % 2] + _wrapping_planes(lattice, side)))
        contained = all(symmetry.contains(row) for row in K)
        if not all(not _mat_vec(M, row).any() for row in symmetry.basis):
            raise InvariantError(f"órbita de simetria fora do núcleo ({side})")
        out[side] = KernelReport(
            side=side,
            kernel_dim=K.shape[0],
            generator_span_dim=generators.dim,
            symmetry_span_dim=symmetry.dim,
            kernel_equals_symmetry_span=contained and symmetry.dim == K.shape[0],
        )
    return out
