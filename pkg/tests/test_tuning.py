import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcan_nav.errors import ConfigurationError
from mcan_nav.evaluation import sad_heading
from mcan_nav.tuning import (
    GENE_RANGES,
    GaConfig,
    Genome,
    TrialSpec,
    fitness_path_integration,
    mutate,
    random_genome,
    run_ga,
    search_bounds,
    select_parents,
)


def sphere_target():
    return Genome(A=4.0, E=7.5, gamma=0.3, phi=2e-4)


def normalised(genome):
    """Gene coordinates scaled to [0, 1] over the search space (phi in log10)."""
    bounds = search_bounds()
    genes = genome.genes.copy()
    genes[3] = math.log10(genes[3])
    return (genes - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])


def sphere(genome):
    return -float(np.sum((normalised(genome) - normalised(sphere_target())) ** 2))


def flaky(genome):
    return math.nan if genome.gamma > 0.5 else -genome.A


class TestGenome:
    def test_round_trip(self, tmp_path):
        g = Genome(3.2, 9.9, 0.5, 1e-3)
        g.save(tmp_path / "g.json", fitness=-1.0)
        assert Genome.load(tmp_path / "g.json") == g
        assert json.loads((tmp_path / "g.json").read_text())["fitness"] == -1.0

    def test_load_rejects_out_of_range(self, tmp_path):
        (tmp_path / "g.json").write_text(json.dumps({"A": 11, "E": 2, "gamma": 0.5, "phi": 1e-3}))
        with pytest.raises(ConfigurationError):
            Genome.load(tmp_path / "g.json")

    def test_load_rejects_missing_gene(self, tmp_path):
        (tmp_path / "g.json").write_text(json.dumps({"A": 1, "E": 2, "gamma": 0.5}))
        with pytest.raises(ConfigurationError, match="phi"):
            Genome.load(tmp_path / "g.json")

    def test_radii_rounded_on_use(self):
        p = Genome(3.4, 6.6, 0.5, 1e-3).to_params()
        assert (p.activation_radius, p.excitation_radius) == (3, 7)


class TestConfig:
    def test_default_population_split(self):
        config = GaConfig()
        assert config.population_size == 24 and config.n_parents == 6
        assert config.n_parents * config.children_per_parent == 18

    def test_inconsistent_split_rejected(self):
        with pytest.raises(ConfigurationError):
            GaConfig(population_size=22)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="colour"):
            GaConfig.from_dict({"colour": "red"})

    def test_load_json(self, tmp_path):
        path = tmp_path / "ga.json"
        path.write_text(json.dumps({"max_generations": 3, "trial": {"topology": "1d", "steps": 10}}))
        config = GaConfig.load(path)
        assert config.max_generations == 3 and config.trial.topology == "1d"

    def test_bad_topology(self):
        with pytest.raises(ConfigurationError):
            TrialSpec(topology="3d")


class TestMutate:
    def test_rate_zero_identity(self, rng):
        g = Genome(3.0, 4.0, 0.5, 1e-4)
        assert mutate(g, 0.0, 0.5, rng) == g

    def test_vanishing_sigma(self, rng):
        g = Genome(3.0, 4.0, 0.5, 1e-4)
        out = mutate(g, 1.0, 1e-12, rng)
        np.testing.assert_allclose(out.genes, g.genes, rtol=1e-6)

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0))
    def test_always_in_range(self, seed, sigma):
        rng = np.random.default_rng(seed)
        g = random_genome(rng)
        for _ in range(5):
            g = mutate(g, 1.0, sigma, rng)
            assert g.within(GENE_RANGES)


class TestSelectParents:
    def test_top_quarter(self):
        assert select_parents(["a", "b", "c", "d"], [-3, -1, -2, -4]) == ["b"]

    def test_ties_by_index(self):
        assert select_parents(list("abcdefgh"), [0.0] * 8) == ["a", "b"]

    def test_twenty_four_gives_six(self):
        assert len(select_parents(list(range(24)), list(range(24)))) == 6

    def test_empty(self):
        with pytest.raises(ConfigurationError):
            select_parents([], [])

    def test_nan_never_selected(self):
        assert select_parents(["a", "b", "c", "d"], [math.nan, -5, math.inf, -1]) == ["d"]


class TestRunGa:
    def test_generation_structure(self):
        result = run_ga(GaConfig(max_generations=4, parallel_workers=1, rng_seed=3), fitness=sphere)
        assert len(result.history) == 4
        for before, after in zip(result.history, result.history[1:]):
            scores = [sphere(g) for g in before.population]
            parents = select_parents(list(before.population), scores)
            assert len(after.population) == 24
            assert list(after.population[:6]) == parents
            children = after.population[6:]
            assert len(children) == 18
            for i, parent in enumerate(parents):
                for child in children[3 * i : 3 * i + 3]:
                    # each child stays within a few sigma of its parent
                    assert np.all(np.abs(normalised(child) - normalised(parent)) < 0.8)

    def test_best_non_decreasing(self):
        result = run_ga(GaConfig(max_generations=10, parallel_workers=1, rng_seed=1), fitness=sphere)
        best = [h.best_fitness for h in result.history]
        assert all(b >= a for a, b in zip(best, best[1:]))
        assert result.best_fitness == best[-1]

    def test_no_mutation_children_are_clones(self):
        result = run_ga(GaConfig(max_generations=3, mutation_rate=0.0, parallel_workers=1), fitness=sphere)
        last = result.history[-1].population
        for i in range(6):
            assert all(c == last[i] for c in last[6 + 3 * i : 9 + 3 * i])
        best = [h.best_fitness for h in result.history]
        assert all(b >= a for a, b in zip(best, best[1:]))

    def test_sphere_recovered(self):
        result = run_ga(GaConfig(max_generations=20, parallel_workers=1, rng_seed=0), fitness=sphere)
        assert np.all(np.abs(normalised(result.best) - normalised(sphere_target())) <= 0.05)

    def test_non_finite_fitness_scores_minus_inf(self):
        result = run_ga(GaConfig(max_generations=2, parallel_workers=1), fitness=flaky)
        assert result.best.gamma <= 0.5
        assert math.isfinite(result.best_fitness)

    def test_deterministic_across_worker_counts(self):
        a = run_ga(GaConfig(max_generations=3, parallel_workers=1, rng_seed=9), fitness=sphere)
        b = run_ga(GaConfig(max_generations=3, parallel_workers=2, rng_seed=9), fitness=sphere)
        assert a.best == b.best
        assert [h.population for h in a.history] == [h.population for h in b.history]

    def test_history_csv(self, tmp_path):
        result = run_ga(GaConfig(max_generations=2, parallel_workers=1), fitness=sphere)
        result.write_history(tmp_path / "h.csv")
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert lines[0] == "generation,best_fitness,mean_fitness,A,E,gamma,phi"
        assert len(lines) == 3


class TestFitness:
    def test_sad_zero_for_perfect_decoder(self):
        truth = np.linspace(0, 720, 100) % 360
        assert -sad_heading(truth, truth) == 0.0

    def test_constant_offset(self):
        truth = np.zeros(100)
        assert -sad_heading(truth + 1.0, truth) == -100.0

    @pytest.mark.parametrize("topology", ["1d", "2d"])
    def test_deterministic(self, topology):
        g = Genome(5, 9, 0.9, 2e-5)
        trial = TrialSpec(topology=topology, steps=30)
        assert fitness_path_integration(g, trial, 4) == fitness_path_integration(g, trial, 4)

    def test_good_genome_beats_bad(self):
        trial = TrialSpec(topology="1d", steps=100)
        good = fitness_path_integration(Genome(8, 10, 0.98, 1e-5), trial, 0)
        bad = fitness_path_integration(Genome(1, 1, 0.05, 5e-3), trial, 0)
        assert good > bad
        assert good <= 0.0
