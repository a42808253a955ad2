"""Testes do modelo 2D: sinks, grade P_l, circuito e oráculos densos."""

import itertools
import math

import numpy as np
import pytest

from disentangle2d import (
    Circuit, Gate, SinkConfig, TermState, apply_gate, block_side, block_sizes,
    build_circuit, conjugate_hamiltonian, dense_oracle, is_disentangled, is_valid,
    free_ensemble_bound, lemma1_gap, validity_union_bound, p_beta, region_diameter, sample_sinks,
    n_colors, sublayers, valid_probability, validate_layer, verify_configs, vertex_colors,
)
from homology import TriLattice
from utils import InvariantError, PreconditionError


def _config(L, k, beta=1.0):
    return SinkConfig(L, beta, np.asarray(k, dtype=np.uint8))


class TestSinkProbability:
    """p_β = 2/(e^{2β}+1) e a distribuição produto."""

    def test_values(self):
        assert p_beta(0.0) == 1.0
        assert p_beta(1.0) == pytest.approx(0.2384, abs=1e-4)
        assert p_beta(math.inf) == 0.0

    def test_negative_beta(self):
        with pytest.raises(PreconditionError):
            p_beta(-0.1)

    def test_sink_density(self, rng):
        cfg = sample_sinks(100, 1.0, rng)
        p = p_beta(1.0)
        frac = cfg.sinks.size / 10_000
        assert abs(frac - p) < 5 * math.sqrt(p * (1 - p) / 10_000)

    def test_probabilities_sum_to_one(self):
        """Σ_k Pr(k) = 1 sobre as 512 configurações de L=3."""
        total = math.fsum(
            _config(3, bits, beta=0.7).probability()
            for bits in itertools.product((0, 1), repeat=9)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


class TestGrid:
    def test_block_sizes_absorb_remainder(self):
        assert block_sizes(10, 3) == [3, 3, 4]
        assert block_sizes(12, 3) == [3, 3, 3, 3]
        assert region_diameter(10, 3) == 6

    def test_block_side_limits(self):
        assert block_side(16, 0.0) == 1
        assert block_side(16, math.inf) == 16
        assert block_side(16, 1.0, c=100.0) == 16
        assert 1 <= block_side(16, 1.0) <= 16

    def test_validity_extremes(self):
        assert is_valid(_config(6, np.zeros(36)), 3)
        assert not is_valid(_config(6, np.ones(36)), 3)

    def test_one_sink_per_block(self):
        k = np.ones(36)
        tri = TriLattice(6)
        for x, y in ((0, 0), (4, 1), (1, 5), (5, 5)):
            k[tri.vertex(x, y)] = 0
        assert is_valid(_config(6, k), 3)

    def test_bound_below_exact(self):
        for l in (2, 3, 4):
            assert valid_probability(12, l, 0.3) >= validity_union_bound(12, l, 0.3)

    def test_valid_fraction_monte_carlo(self, rng):
        """Fração de configurações válidas contra ∏_B (1 - (1-p)^{|B|})."""
        L, l, beta, n = 12, 3, 1.0, 2000
        hits = sum(is_valid(sample_sinks(L, beta, rng), l) for _ in range(n))
        exact = valid_probability(L, l, p_beta(beta))
        assert abs(hits / n - exact) < 5 * math.sqrt(exact * (1 - exact) / n)


class TestCircuit:
    """Construção em camadas U e W."""

    def test_all_sinks_empty_circuit(self):
        circuit = build_circuit(_config(6, np.zeros(36)), 3)
        assert circuit.depth == 0 and circuit.n_gates == 0

    def test_single_sink_first_layer(self):
        L = 5
        k = np.ones(L * L)
        k[0] = 0
        circuit = build_circuit(_config(L, k), L)
        assert circuit.sources == [0]
        first = [g for sub in circuit.layers[0] for g in sub]
        assert {g.target for g in first} == set(TriLattice(L).neighbors(0))
        assert all(g.kind == "U" and g.partner == 0 for g in first)
        last = [g for sub in circuit.layers[-1] for g in sub]
        assert last == [Gate("W", g.target, 0) for g in first]

    def test_invalid_config_rejected(self):
        with pytest.raises(PreconditionError):
            build_circuit(_config(6, np.ones(36)), 3)

    def test_random_configs_disentangle(self):
        summary = verify_configs(16, 1.0, 100, np.random.default_rng(99))
        assert summary.n_valid >= 90
        assert summary.all_conjugations_ok, summary.failures[:3]
        assert summary.depth_ok
        assert summary.max_layers <= summary.layer_bound < summary.depth_bound

    def test_depth_within_bound(self, rng):
        l = 4
        for _ in range(20):
            cfg = sample_sinks(12, 0.5, rng)
            if is_valid(cfg, l):
                circuit = build_circuit(cfg, l)
                assert circuit.n_layers <= 2 * region_diameter(12, l)
                assert circuit.n_layers <= circuit.depth <= 3 * circuit.n_layers

    def test_layers_are_single_color_sublayers(self, rng):
        for L in (9, 10):
            tri = TriLattice(L)
            colors = vertex_colors(L)
            cfg = sample_sinks(L, 0.3, rng)
            k = cfg.k.copy()
            k[0] = 0
            circuit = build_circuit(_config(L, k, 0.3), L)
            assert circuit.depth == sum(1 for _ in circuit.sublayers())
            for layer in circuit.layers:
                flat = [g for sub in layer for g in sub]
                assert sublayers(tri, flat) == layer
                for sub in layer:
                    assert len({colors[g.target] for g in sub}) == 1
                    targets = {g.target for g in sub}
                    for t in targets:
                        assert not targets.intersection(tri.neighbors(t))

    def test_three_colors_when_side_divisible(self):
        assert n_colors(9) == 3
        tri = TriLattice(9)
        colors = vertex_colors(9)
        assert all(colors[v] != colors[w] for v in range(tri.n_vertices) for w in tri.neighbors(v))


class TestConjugation:
    """Regras simbólicas U(v,w) e W(v,w)."""

    def test_identity_circuit(self):
        cfg = _config(4, np.ones(16))
        state = conjugate_hamiltonian(cfg, Circuit([]))
        assert state.as_set() == {("h", v, None, -1) for v in range(16)}
        assert not is_disentangled(state, cfg)

    def test_overlapping_layer(self):
        with pytest.raises(InvariantError):
            validate_layer([Gate("U", 1, 0), Gate("U", 1, 2)])
        with pytest.raises(InvariantError):
            validate_layer([Gate("U", 1, 0), Gate("U", 0, 5)])

    def test_partner_with_live_term(self):
        """U(v,w) não comuta com h_w ainda presente."""
        state = TermState.from_config(_config(4, np.ones(16)))
        with pytest.raises(InvariantError):
            apply_gate(state, Gate("U", 0, 1))

    def test_u_then_w(self):
        L = 4
        k = np.zeros(L * L)
        k[1] = 1
        state = TermState.from_config(_config(L, k))
        apply_gate(state, Gate("U", 1, 0))
        assert state.terms[1].kind == "ZZ" and state.terms[1].coeff == 1
        apply_gate(state, Gate("W", 1, 0))
        assert state.terms[1].kind == "X" and state.terms[1].coeff == 1


class TestDenseOracles:
    """Álgebra linear explícita em sistemas pequenos."""

    @pytest.mark.parametrize("partner", [1, 4])
    def test_star_rules(self, partner):
        report = dense_oracle(partner)
        assert report.passed, report.checks

    def test_bad_partner(self):
        with pytest.raises(PreconditionError):
            dense_oracle(partner=0)

    def test_gibbs_gap_within_bound(self):
        result = lemma1_gap(3, 1.0)
        assert result.N == 9
        assert result.holds

    def test_gibbs_gap_infinite_temperature(self):
        assert lemma1_gap(3, 0.0).distance == pytest.approx(0.0, abs=1e-10)

    def test_gibbs_gap_only_small_torus(self):
        with pytest.raises(PreconditionError):
            lemma1_gap(4, 1.0)

    def test_bound_decreases_with_size(self):
        assert free_ensemble_bound(6, 1.0) > free_ensemble_bound(9, 1.0)
