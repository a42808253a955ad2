"""Testes da álgebra de Pauli simbólica e do mapa de gauging."""

import numpy as np
import pytest

from gauging import (
    SymbolicPauli, all_commute, cluster_hamiltonian, cluster_term_edge, cluster_term_face,
    compare_term_sets, gauge_operator, get_frame, hadamard, is_symmetric, kernel_report,
    pauli_commutes, symmetry_cube, symmetry_vertex, toric_code_generators,
    trivial_hamiltonian, verify_dualities,
)
from homology import DUAL, PRIMAL, get_lattice
from utils import PreconditionError


def _unit(n, i):
    v = np.zeros(n, dtype=np.uint8)
    v[i] = 1
    return v


class TestSymbolicPauli:
    """Produto, comutação e Hadamard."""

    def test_xz_anticommute(self, lattice2):
        x = SymbolicPauli.from_supports(lattice2, x_faces=_unit(lattice2.n_faces, 3))
        z = SymbolicPauli.from_supports(lattice2, z_faces=_unit(lattice2.n_faces, 3))
        assert not pauli_commutes(x, z)
        assert (z * x).phase == 2 and (x * z).phase == 0

    def test_disjoint_commute(self, lattice2):
        x = SymbolicPauli.from_supports(lattice2, x_edges=_unit(lattice2.n_edges, 0))
        z = SymbolicPauli.from_supports(lattice2, z_edges=_unit(lattice2.n_edges, 1))
        assert pauli_commutes(x, z)

    def test_square_is_identity(self, lattice3):
        k = cluster_term_face(lattice3, 5)
        assert (k * k).is_identity()

    def test_hadamard_involution(self, lattice3):
        k = cluster_term_edge(lattice3, 7)
        assert hadamard(hadamard(k)) == k
        assert np.array_equal(hadamard(k).x_primal.support, k.z_primal.support)

    def test_cluster_terms_commute(self, lattice3):
        """H_C é uma soma de estabilizadores que comutam."""
        assert cluster_hamiltonian(lattice3).pairwise_commuting()


class TestSymmetry:
    def test_cluster_terms_symmetric(self, lattice3):
        assert is_symmetric(lattice3, cluster_term_edge(lattice3, 0))
        assert is_symmetric(lattice3, cluster_term_face(lattice3, 0))

    def test_single_z_not_symmetric(self, lattice3):
        z = SymbolicPauli.from_supports(lattice3, z_faces=_unit(lattice3.n_faces, 0))
        assert not is_symmetric(lattice3, z)


class TestGaugeOperator:
    """Imagens dos termos pelo mapa de gauging."""

    def test_symmetry_maps_to_identity(self, lattice):
        assert gauge_operator(lattice, symmetry_cube(lattice, 0)).is_identity()
        assert gauge_operator(lattice, symmetry_vertex(lattice, 1)).is_identity()

    def test_x_face_maps_to_boundary(self, lattice3):
        f = lattice3.index(1, 0, 2, 1)
        x = SymbolicPauli.from_supports(lattice3, x_faces=_unit(lattice3.n_faces, f))
        g = gauge_operator(lattice3, x)
        expected = lattice3.boundary_2 @ _unit(lattice3.n_faces, f) % 2
        assert np.array_equal(g.x_dual.support, expected)
        assert not g.x_primal.support.any()

    def test_cluster_face_term(self, lattice3):
        """K(σ₂) ↦ Z(σ₂) X(∂σ₂) módulo simetria de gauge."""
        f = 11
        g = gauge_operator(lattice3, cluster_term_face(lattice3, f))
        expected = hadamard(cluster_term_face(lattice3, f))
        assert get_frame(3).equivalent(g, expected)

    def test_multiplicative(self, lattice3):
        a, b = cluster_term_face(lattice3, 2), cluster_term_edge(lattice3, 9)
        frame = get_frame(3)
        assert frame.equivalent(
            gauge_operator(lattice3, a * b),
            gauge_operator(lattice3, a) * gauge_operator(lattice3, b),
            with_phase=False,
        )

    def test_non_symmetric_rejected(self, lattice3):
        z = SymbolicPauli.from_supports(lattice3, z_faces=_unit(lattice3.n_faces, 0))
        with pytest.raises(PreconditionError):
            gauge_operator(lattice3, z)


class TestDualities:
    """H_X → dois códigos tóricos; H_C → Hadamard de H_C."""

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_verify_passes(self, d):
        report = verify_dualities(get_lattice(d))
        assert report.passed, report.mismatches[:3]
        assert report.to_record()["passed"]

    def test_rejects_other_sizes(self):
        with pytest.raises(PreconditionError):
            verify_dualities(get_lattice(5))

    def test_corrupted_term_reported(self, lattice2):
        """Um bit trocado num termo esperado aparece como divergência."""
        frame = get_frame(2)
        gauged = {k: gauge_operator(lattice2, t) for k, t in trivial_hamiltonian(lattice2).terms.items()}
        faces, edges = toric_code_generators(lattice2)
        expected = {k: t for k, t in {**faces.terms, **edges.terms}.items() if k in gauged}
        assert compare_term_sets(frame, expected, gauged) == []

        label = ("face", 4)
        broken = expected[label].copy()
        broken.x_dual.support[0] ^= 1
        expected[label] = broken
        mismatches = compare_term_sets(frame, expected, gauged)
        assert len(mismatches) == 1
        assert mismatches[0].startswith("face(")

    def test_gauged_cluster_commutes(self, lattice2):
        gauged = [gauge_operator(lattice2, t) for t in cluster_hamiltonian(lattice2).terms.values()]
        assert all_commute(gauged)


class TestKernel:
    """Núcleo do mapa de estados = órbitas da simetria 1-forma."""

    @pytest.mark.parametrize("d", [2, 3])
    def test_kernel_is_symmetry_span(self, d):
        reports = kernel_report(get_lattice(d))
        for side in (PRIMAL, DUAL):
            rep = reports[side]
            assert rep.kernel_equals_symmetry_span
            assert rep.noncontractible_sectors == 3
            assert rep.kernel_dim == d ** 3 + 2
