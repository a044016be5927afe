import math

import numpy as np
import pandas as pd
import pytest

from query_expansion.optimise.genetic import (Chromosome, FitnessOracle, GaConfig, GeneticOptimiser, boost_fitness,
                                              crossover, evaluate, evaluate_maps, init_population, mutate, optimize,
                                              select_roulette, write_report)
from query_expansion.parsing.roles import RoleType

TARGET = np.array([0.8, 0.4, 0.6, 0.0, 0.7])


class QuadraticOracle(FitnessOracle):
    """ Peaks at TARGET with MAP 1. """

    def __init__(self):
        self.calls = []

    def evaluate_map(self, chromosome):
        self.calls.append(chromosome)
        return math.exp(-10 * float(((chromosome.as_array() - TARGET) ** 2).sum()))


class FixedRng:
    """ Stands in for numpy's Generator where the draws must be known. """

    def __init__(self, random=0.0, cut=2):
        self._random = random
        self._cut = cut

    def random(self, size=None):
        return self._random if size is None else np.full(size, self._random)

    def integers(self, low, high):
        return self._cut


def test_chromosome_bounds():
    with pytest.raises(ValueError):
        Chromosome(1.2, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        Chromosome(0.5, 0.5, 0.5, 0.1, 0.5)

    c = Chromosome.from_array([0.859, 0.157, 0.5, 0.9, 0.064])
    assert c.w_sc == 0.0
    assert c.weight(RoleType.Ec) == pytest.approx(0.064)
    assert str(c) == "0.859 0.157 0.500 0.000 0.064"


def test_config_validation():
    with pytest.raises(TypeError):
        GaConfig(generations=10)
    with pytest.raises(ValueError):
        GaConfig(population_size=1)
    with pytest.raises(ValueError):
        GaConfig(free_genes=(0, 3))
    with pytest.raises(ValueError):
        GaConfig(boost_thresholds=(0.2, 0.1), boost_factors=(1.2, 1.4))
    with pytest.raises(ValueError):
        GaConfig(scope="everything")

    cfg = GaConfig(population_size=10, seed=3)
    assert cfg.as_dict()["population_size"] == 10
    assert cfg.max_generations == 100


def test_quadratic_convergence():
    cfg = GaConfig(population_size=80, max_generations=100, seed=42)
    result = optimize(cfg, QuadraticOracle())

    assert np.abs(result.best.as_array() - TARGET).max() <= 0.1
    assert result.best_map == pytest.approx(QuadraticOracle()(result.best))


def test_history_is_monotone():
    cfg = GaConfig(population_size=20, max_generations=30, seed=5)
    result = optimize(cfg, QuadraticOracle())

    maps = [record.best_map for record in result.history]
    assert len(maps) == 30
    assert maps == sorted(maps)
    assert result.history[-1].best == result.best


def test_same_seed_same_result():
    cfg = GaConfig(population_size=16, max_generations=10, seed=9)
    first, second = optimize(cfg, QuadraticOracle()), optimize(cfg, QuadraticOracle())

    assert first.best == second.best
    assert first.history == second.history


def test_structural_gene_stays_zero():
    rng = np.random.default_rng(0)
    population = init_population(GaConfig(population_size=50, seed=0), rng)

    for i in range(10000):
        a, b = population[i % 50], population[(i * 7 + 3) % 50]
        for child in crossover(a, b, rng, rate=0.9):
            child = mutate(child, 0.5, rng)
            assert child.w_sc == 0.0
            population[i % 50] = child


def test_free_genes():
    cfg = GaConfig(population_size=30, seed=1, free_genes=(0, 4))
    population = init_population(cfg)

    assert all(c.w_dc == 0.0 and c.w_rc == 0.0 for c in population)
    assert len(set(c.w_coi for c in population)) == 30

    rng = np.random.default_rng(1)
    assert all(mutate(c, 1.0, rng, cfg.free_genes).w_dc == 0.0 for c in population)


def test_roulette_draws_in_proportion_to_fitness():
    a, b = Chromosome(1, 0, 0, 0, 0), Chromosome(0, 1, 0, 0, 0)
    pairs = select_roulette([a, b], [3.0, 1.0], np.random.default_rng(7), k=20000)

    share = sum(parent == a for pair in pairs for parent in pair) / 40000
    assert share == pytest.approx(0.75, abs=0.02)


def test_roulette_with_no_fitness_is_uniform():
    a, b = Chromosome(1, 0, 0, 0, 0), Chromosome(0, 1, 0, 0, 0)
    pairs = select_roulette([a, b], [0.0, 0.0], np.random.default_rng(7), k=5000)

    share = sum(parent == a for pair in pairs for parent in pair) / 10000
    assert share == pytest.approx(0.5, abs=0.03)


def test_crossover_at_a_known_cut():
    a, b = Chromosome(0.1, 0.2, 0.3, 0, 0.5), Chromosome(0.6, 0.7, 0.8, 0, 0.9)

    assert crossover(a, b, FixedRng(cut=2)) == (Chromosome(0.1, 0.2, 0.8, 0, 0.9), Chromosome(0.6, 0.7, 0.3, 0, 0.5))
    assert crossover(a, b, FixedRng(random=0.95, cut=2), rate=0.9) == (a, b)


def test_mutation_rate_extremes():
    c = Chromosome(0.1, 0.2, 0.3, 0, 0.5)
    rng = np.random.default_rng(4)

    assert mutate(c, 0.0, rng) == c
    mutated = mutate(c, 1.0, rng)
    assert all(mutated[i] != c[i] for i in (0, 1, 2, 4))
    assert mutated.w_sc == 0.0


def test_boost():
    cfg = GaConfig(seed=1)

    assert boost_fitness(0.05, cfg) == pytest.approx(0.05)
    assert boost_fitness(0.3, cfg) == pytest.approx(0.3 * 1.2 * 1.4)
    assert boost_fitness(0.35, cfg) == pytest.approx(0.35 * 1.2 * 1.4 * 1.6)

    values = np.linspace(0, 1, 101)
    boosted = [boost_fitness(v, cfg) for v in values]
    assert boosted == sorted(boosted)


def test_evaluate_boosts_each_map():
    cfg = GaConfig(seed=1)
    population = [Chromosome(0.1, 0, 0, 0, 0), Chromosome(0.9, 0, 0, 0, 0)]

    fitnesses = evaluate(population, lambda c: 0.05 if c.w_coi < 0.5 else 0.3, cfg)
    assert list(fitnesses) == pytest.approx([0.05, 0.3 * 1.2 * 1.4])


def test_failing_oracle_scores_zero():
    def oracle(chromosome):
        if chromosome.w_coi > 0.5:
            raise RuntimeError("retrieval failed")
        if chromosome.w_ec > 0.5:
            return 1.5
        return 0.25

    population = [Chromosome(0.9, 0, 0, 0, 0), Chromosome(0.1, 0, 0, 0, 0.9), Chromosome(0.1, 0, 0, 0, 0.1)]
    maps = evaluate_maps(population, oracle, GaConfig(seed=1))

    assert list(maps) == [0.0, 0.0, 0.25]


def test_chromosomes_are_scored_once():
    oracle = QuadraticOracle()
    cfg = GaConfig(population_size=10, seed=2, workers=3)
    population = init_population(cfg) * 2
    cache = {}

    evaluate_maps(population, oracle, cfg, cache)
    evaluate_maps(population, oracle, cfg, cache)
    assert len(oracle.calls) == 10


def test_next_generation_keeps_the_fittest():
    cfg = GaConfig(population_size=11, seed=3)
    rng = np.random.default_rng(3)
    population = init_population(cfg, rng)
    fitnesses = np.arange(11, dtype=float)

    offspring = GeneticOptimiser(cfg).next_generation(population, fitnesses, rng)
    assert len(offspring) == 11
    assert offspring[0] == population[10]


def test_write_report(tmp_path):
    cfg = GaConfig(population_size=8, max_generations=3, seed=1)
    result = optimize(cfg, QuadraticOracle())

    path = tmp_path / "ga.tsv"
    write_report(result, str(path))
    df = pd.read_csv(path, sep="\t")
    assert list(df.columns) == ["generation", "best_map", "w_coi", "w_dc", "w_rc", "w_sc", "w_ec"]
    assert len(df) == 3

    path = tmp_path / "labelled.tsv"
    write_report(result, str(path), label="301")
    write_report(result, str(path), label="302")
    df = pd.read_csv(path, sep="\t", dtype={"label": str})
    assert list(df["label"].unique()) == ["301", "302"]
    assert len(df) == 6
