"""Testes do complexo de cadeias do toro cúbico e do toro triangular."""

import pytest

from homology import (
    DUAL, PRIMAL, Chain, CubicLattice, HomologyClass, TriLattice, boundary,
    cube_boundary, cycle_space_basis, dual_boundary, dual_line, dual_plaquette,
    homology_class, intersection_parity, is_cycle, plaquette, straight_line,
    vertex_coboundary,
)
from utils import PreconditionError


class TestLatticeIndexing:
    """Indexação plana o·d³ + z·d² + y·d + x."""

    def test_counts(self, lattice3):
        """d³ vértices e cubos, 3d³ arestas e faces."""
        assert lattice3.n_vertices == 27
        assert lattice3.n_edges == 81
        assert lattice3.n_faces == 81
        assert lattice3.n_cubes == 27

    def test_index_coords_inverse(self, lattice4):
        """coords desfaz index."""
        for idx in (0, 5, 63, 64, 150, 191):
            x, y, z, o = lattice4.coords(idx)
            assert lattice4.index(x, y, z, o) == idx

    def test_index_wraps(self, lattice3):
        """Coordenadas fora de [0, d) dão a volta."""
        assert lattice3.index(-1, 0, 0) == lattice3.index(2, 0, 0)
        assert lattice3.index(0, 3, 4, 2) == lattice3.index(0, 0, 1, 2)

    def test_rejects_small_lattice(self):
        """d < 2 não forma um toro útil."""
        with pytest.raises(PreconditionError):
            CubicLattice(1)


class TestBoundary:
    """∂∘∂ = 0 e ∂*∘∂* = 0."""

    def test_boundary_squares_to_zero(self, lattice):
        """∂₁∂₂ e ∂₂∂₃ são nulos mod 2."""
        b1 = lattice.boundary_1.toarray().astype(int)
        b2 = lattice.boundary_2.toarray().astype(int)
        b3 = lattice.boundary_3.toarray().astype(int)
        assert not ((b1 @ b2) % 2).any()
        assert not ((b2 @ b3) % 2).any()

    def test_column_weights(self, lattice4):
        """Aresta tem 2 vértices, face 4 arestas, cubo 6 faces."""
        assert (lattice4.boundary_1.sum(axis=0) == 2).all()
        assert (lattice4.boundary_2.sum(axis=0) == 4).all()
        assert (lattice4.boundary_3.sum(axis=0) == 6).all()

    def test_random_chains(self, lattice3, rng):
        """Propriedade em cadeias aleatórias de toda dimensão."""
        for dim in (2, 3):
            for _ in range(20):
                c = Chain(dim, PRIMAL, rng.integers(0, 2, lattice3.n_cells(dim)))
                assert boundary(lattice3, boundary(lattice3, c)).is_empty()
        for dim in (0, 1):
            for _ in range(20):
                c = Chain(dim, DUAL, rng.integers(0, 2, lattice3.n_cells(dim)))
                assert dual_boundary(lattice3, dual_boundary(lattice3, c)).is_empty()

    def test_boundary_of_vertex_rejected(self, lattice2):
        """∂ de uma 0-cadeia é erro."""
        with pytest.raises(PreconditionError):
            boundary(lattice2, Chain.empty(lattice2, 0))

    def test_dual_boundary_of_cube_rejected(self, lattice2):
        with pytest.raises(PreconditionError):
            dual_boundary(lattice2, Chain.empty(lattice2, 3, DUAL))

    def test_single_edge(self, lattice3):
        """∂ de uma aresta são seus dois extremos."""
        e = Chain.from_indices(lattice3, 1, [lattice3.index(0, 0, 0, 0)])
        ends = set(boundary(lattice3, e).indices())
        assert ends == {lattice3.index(0, 0, 0), lattice3.index(1, 0, 0)}


class TestHomologyClass:
    """Classes de enrolamento por paridade de interseção."""

    def test_contractible_loops_trivial(self, lattice):
        """Plaquetas e seus duais são triviais."""
        assert homology_class(lattice, plaquette(lattice, 0, 0, 0, 2)).is_trivial
        assert homology_class(lattice, dual_plaquette(lattice, 1, 0, 0, 0)).is_trivial
        assert homology_class(lattice, cube_boundary(lattice, 0, 1, 0)).is_trivial
        assert homology_class(lattice, vertex_coboundary(lattice, 1, 1, 1)).is_trivial

    def test_straight_lines(self, lattice):
        """A linha na direção o enrola só em o."""
        for o in range(3):
            expected = tuple(int(i == o) for i in range(3))
            assert homology_class(lattice, straight_line(lattice, o)).windings == expected
            assert homology_class(lattice, dual_line(lattice, o)).windings == expected

    def test_offset_independent(self, lattice4):
        """A classe não depende da superfície de teste escolhida."""
        c = straight_line(lattice4, 1, x=2) ^ plaquette(lattice4, 0, 1, 0, 2)
        for k in range(4):
            assert homology_class(lattice4, c, offset=k) == HomologyClass((0, 1, 0))

    def test_additive(self, lattice3):
        """h(a ⊕ b) = h(a) ⊕ h(b)."""
        a = straight_line(lattice3, 0)
        b = straight_line(lattice3, 2, x=1)
        assert homology_class(lattice3, a ^ b) == homology_class(lattice3, a) ^ homology_class(lattice3, b)

    def test_non_cycle_rejected(self, lattice3):
        e = Chain.from_indices(lattice3, 1, [0])
        with pytest.raises(PreconditionError):
            homology_class(lattice3, e)

    def test_cycle_space_rank(self, lattice):
        """dim Z₁ = 2d³ + 1 e dim Z₁* = 2d³ + 1."""
        n = 2 * lattice.d ** 3 + 1
        primal = cycle_space_basis(lattice, PRIMAL)
        dual = cycle_space_basis(lattice, DUAL)
        assert len(primal) == n and len(dual) == n
        assert all(is_cycle(lattice, c) for c in primal + dual)


class TestIntersectionParity:
    def test_plane_and_line(self, lattice3):
        """Plano dual de normal x cruza a linha x uma vez."""
        line = straight_line(lattice3, 0)
        plane = Chain.from_indices(
            lattice3, 1,
            [lattice3.index(0, y, z, 0) for y in range(3) for z in range(3)], side=DUAL,
        )
        assert intersection_parity(line, plane) == 1

    def test_mismatched_dims_rejected(self, lattice2):
        with pytest.raises(PreconditionError):
            intersection_parity(Chain.empty(lattice2, 1), Chain.empty(lattice2, 2))


class TestTriLattice:
    """Toro triangular: grau 6 e Link₁."""

    def test_degree_six(self):
        tri = TriLattice(5)
        for v in range(tri.n_vertices):
            assert len(set(tri.neighbors(v))) == 6
        assert all(deg == 6 for _, deg in tri.graph.degree())

    def test_link_excludes_vertex(self):
        """Link₁(v) tem 6 arestas entre vizinhos, nenhuma contendo v."""
        tri = TriLattice(4)
        for v in range(tri.n_vertices):
            link = tri.link1(v)
            assert len(link) == 6
            for a, b in link:
                assert v not in (a, b)
                assert b in tri.neighbors(a)

    def test_triangles_count(self):
        tri = TriLattice(4)
        assert len(tri.triangles) == 2 * 16

    def test_edge_roundtrip(self):
        tri = TriLattice(4)
        for e in (0, 7, 20, 47):
            u, w = tri.edge_vertices(e)
            assert tri.edge_between(u, w) == e

    def test_distance_matches_graph(self):
        """Métrica hexagonal igual à BFS do networkx."""
        import networkx as nx

        tri = TriLattice(6)
        lengths = nx.single_source_shortest_path_length(tri.graph, 0)
        for w in range(tri.n_vertices):
            assert tri.distance(0, w) == lengths[w]

    def test_small_torus_rejected(self):
        with pytest.raises(PreconditionError):
            TriLattice(2)
