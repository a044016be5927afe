"""
Genetic algorithm searching the per-role weights (CoI, Dc, Rc, Sc, Ec) that maximise the mean average
precision returned by a retrieval fitness oracle.

Each chromosome holds five genes in [0, 1]. The structural (Sc) gene is held at 0.000 by every operator.
Fitness is the MAP of the chromosome boosted by a factor for every threshold the MAP exceeds, parents are
drawn by roulette wheel, the fittest chromosome is copied unchanged into each new generation and the
search stops after a fixed number of generations.
"""

import logging
import math
import os
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from query_expansion import CONFIG
from query_expansion.parsing.roles import RoleType

logger = logging.getLogger(__name__)

GENES = ("w_coi", "w_dc", "w_rc", "w_sc", "w_ec")
GENE_ROLES = (RoleType.CoI, RoleType.Dc, RoleType.Rc, RoleType.Sc, RoleType.Ec)
SC_GENE = 3
FREE_GENES = (0, 1, 2, 4)


class Chromosome(namedtuple("Chromosome", GENES)):
    """ Five role weights in [0, 1], the Sc weight always 0. """
    __slots__ = ()

    def __new__(cls, w_coi, w_dc, w_rc, w_sc, w_ec):
        genes = tuple(float(g) for g in (w_coi, w_dc, w_rc, w_sc, w_ec))
        for name, gene in zip(GENES, genes):
            if not 0.0 <= gene <= 1.0:
                raise ValueError(f"Gene {name} = {gene} is outside [0, 1]")
        if genes[SC_GENE] != 0.0:
            raise ValueError(f"The Sc gene must be 0.000, got {genes[SC_GENE]}")
        return super().__new__(cls, *genes)

    @classmethod
    def from_array(cls, genes):
        """ Build a chromosome from a sequence of five genes, forcing the Sc gene to 0. """
        genes = [float(g) for g in genes]
        genes[SC_GENE] = 0.0
        return cls(*genes)

    @classmethod
    def uniform(cls):
        """ Weight 1 for every role but Sc. """
        return cls(1.0, 1.0, 1.0, 0.0, 1.0)

    def as_array(self):
        return np.array(self, dtype=float)

    def as_weights(self):
        """
        :returns: (dict) RoleType -> weight.
        """
        return dict(zip(GENE_ROLES, self))

    def weight(self, role):
        return self.as_weights()[role]

    def __str__(self):
        return " ".join(f"{g:.3f}" for g in self)


class GaConfig:
    """
    Parameters of one optimisation run. Defaults are taken from the [ga] section of the config file
    and the seed from [common]. Any of them can be overridden by keyword.

    :param free_genes: (tuple) Indices of the genes allowed to vary, the others stay at 0.
    """

    population_size = CONFIG['ga']['population_size']
    max_generations = CONFIG['ga']['max_generations']
    mutation_rate = CONFIG['ga']['mutation_rate']
    crossover_rate = CONFIG['ga']['crossover_rate']
    boost_thresholds = tuple(CONFIG['ga']['boost_thresholds'])
    boost_factors = tuple(CONFIG['ga']['boost_factors'])
    scope = CONFIG['ga']['scope']
    workers = CONFIG['ga']['workers']
    seed = CONFIG['common']['seed']
    free_genes = FREE_GENES

    PARAMETERS = ("population_size", "max_generations", "mutation_rate", "crossover_rate", "boost_thresholds",
                  "boost_factors", "scope", "workers", "seed", "free_genes")

    def __init__(self, **overrides):
        for key, value in overrides.items():
            if key not in self.PARAMETERS:
                raise TypeError(f"Unknown GA parameter '{key}'")
            setattr(self, key, value)

        self.boost_thresholds = tuple(self.boost_thresholds)
        self.boost_factors = tuple(self.boost_factors)
        self.free_genes = tuple(sorted(self.free_genes))
        self.validate()

    def validate(self):
        if self.population_size < 2:
            raise ValueError(f"Population size must be at least 2, got {self.population_size}")
        if self.max_generations < 1:
            raise ValueError(f"Number of generations must be at least 1, got {self.max_generations}")
        if self.seed is None:
            raise ValueError("A random seed is required")
        for name in ("mutation_rate", "crossover_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability, got {getattr(self, name)}")
        if len(self.boost_thresholds) != len(self.boost_factors):
            raise ValueError("Every boost threshold needs a boost factor")
        if list(self.boost_thresholds) != sorted(self.boost_thresholds):
            raise ValueError(f"Boost thresholds must be ascending: {self.boost_thresholds}")
        if any(f < 1.0 for f in self.boost_factors):
            raise ValueError(f"Boost factors below 1 would reward lower MAP: {self.boost_factors}")
        if self.scope not in ("set", "query"):
            raise ValueError(f"Optimisation scope {self.scope} is not supported. Options are set or query.")
        if self.workers < 1:
            raise ValueError(f"Number of workers must be positive, got {self.workers}")
        if SC_GENE in self.free_genes or not set(self.free_genes) <= set(range(len(GENES))):
            raise ValueError(f"Free genes {self.free_genes} must be gene indices other than Sc")

    def as_dict(self):
        return {k: getattr(self, k) for k in self.PARAMETERS}


class FitnessOracle:
    """
    Base class for fitness oracles: maps a chromosome to the MAP in [0, 1] its weights achieve.
    Must be deterministic for a chromosome within a run. Any callable with the same behaviour can be used instead.
    """

    def evaluate_map(self, chromosome):
        """
        Class specific implementation scoring one chromosome.

        :param chromosome: (Chromosome) The role weights.
        :returns: (float) MAP in [0, 1].
        """
        raise NotImplementedError

    def __call__(self, chromosome):
        return self.evaluate_map(chromosome)


GenerationRecord = namedtuple("GenerationRecord", ["generation", "best_map", "best"])
OptimisationResult = namedtuple("OptimisationResult", ["best", "best_map", "history", "evaluations"])


def _free_mask(free_genes):
    mask = np.zeros(len(GENES), dtype=bool)
    mask[list(free_genes)] = True
    return mask


def init_population(cfg, rng=None):
    """
    Draw the first generation uniformly in [0, 1].

    :param cfg: (GaConfig) The run parameters.
    :param rng: (numpy.random.Generator) Random stream, seeded from cfg.seed when not given.
    :returns: (list) population_size chromosomes.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    genes = rng.random((cfg.population_size, len(GENES)))
    genes[:, ~_free_mask(cfg.free_genes)] = 0.0
    return [Chromosome.from_array(row) for row in genes]


def _safe_map(oracle, chromosome):
    try:
        value = float(oracle(chromosome))
    except Exception:
        logger.exception(f"Fitness oracle failed for chromosome ({chromosome}), scoring it 0")
        return 0.0

    if math.isnan(value) or not 0.0 <= value <= 1.0:
        logger.error(f"Fitness oracle returned MAP {value} for chromosome ({chromosome}), scoring it 0")
        return 0.0
    return value


def evaluate_maps(population, oracle, cfg, cache=None):
    """
    Score each chromosome with the oracle. Chromosomes already in the cache are not scored again and
    distinct new chromosomes are scored on cfg.workers threads. A failing oracle call scores 0.

    :param population: (list) Chromosomes.
    :param oracle: (callable) The fitness oracle.
    :param cfg: (GaConfig) The run parameters.
    :param cache: (dict) Chromosome -> MAP, updated in place.
    :returns: (numpy.ndarray) MAP per chromosome, in population order.
    """
    if cache is None:
        cache = {}

    pending = [c for c in dict.fromkeys(population) if c not in cache]
    if cfg.workers > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            values = list(executor.map(lambda c: _safe_map(oracle, c), pending))
    else:
        values = [_safe_map(oracle, c) for c in pending]
    cache.update(zip(pending, values))

    return np.array([cache[c] for c in population], dtype=float)


def boost_fitness(map_value, cfg):
    """
    Multiply a MAP by the boost factor of every threshold it is strictly above.

    :param map_value: (float) The MAP.
    :param cfg: (GaConfig) Holds the thresholds and factors.
    :returns: (float) The fitness.
    """
    fitness = map_value
    for threshold, factor in zip(cfg.boost_thresholds, cfg.boost_factors):
        if map_value > threshold:
            fitness *= factor
    return fitness


def evaluate(population, oracle, cfg, cache=None):
    """
    :returns: (numpy.ndarray) The boosted fitness of each chromosome of the population.
    """
    maps = evaluate_maps(population, oracle, cfg, cache)
    return np.array([boost_fitness(m, cfg) for m in maps])


def select_roulette(population, fitnesses, rng, k=None):
    """
    Draw parent pairs with probability proportional to fitness, or uniformly when every fitness is 0.

    :param population: (list) Chromosomes.
    :param fitnesses: (array-like) Fitness per chromosome.
    :param rng: (numpy.random.Generator) Random stream.
    :param k: (int) Number of pairs, defaults to half the population rounded up.
    :returns: (list) (parent, parent) tuples.
    """
    if k is None:
        k = math.ceil(len(population) / 2)

    fitnesses = np.asarray(fitnesses, dtype=float)
    total = fitnesses.sum()
    p = fitnesses / total if total > 0 else None

    picks = rng.choice(len(population), size=(k, 2), p=p)
    return [(population[i], population[j]) for i, j in picks]


def fittest(population, fitnesses):
    """ The chromosome with the highest fitness, the first one on ties. """
    return population[int(np.argmax(fitnesses))]


def crossover(a, b, rng, rate=1.0):
    """
    Single point crossover at a cut drawn from 1..4. With probability 1 - rate the parents are returned unchanged.

    :param a: (Chromosome) First parent.
    :param b: (Chromosome) Second parent.
    :param rng: (numpy.random.Generator) Random stream.
    :param rate: (float) Probability of crossing.
    :returns: (tuple) The two offspring.
    """
    cross = rng.random() < rate
    cut = int(rng.integers(1, len(GENES)))
    if not cross:
        return a, b
    return Chromosome.from_array(a[:cut] + b[cut:]), Chromosome.from_array(b[:cut] + a[cut:])


def mutate(c, rate, rng, free_genes=FREE_GENES):
    """
    Replace each free gene by a fresh uniform draw with probability rate. The Sc gene is never touched.

    :param c: (Chromosome) The chromosome.
    :param rate: (float) Per-gene mutation probability.
    :param rng: (numpy.random.Generator) Random stream.
    :param free_genes: (tuple) Indices of the genes that may change.
    :returns: (Chromosome) The mutated chromosome.
    """
    draws = rng.random(len(GENES))
    fresh = rng.random(len(GENES))
    mask = (draws < rate) & _free_mask(free_genes)
    if not mask.any():
        return c
    return Chromosome.from_array(np.where(mask, fresh, c.as_array()))


class GeneticOptimiser:
    """
    Runs the generational loop: evaluate, keep the fittest, select parents, cross and mutate,
    for a fixed number of generations.

    :param config: (GaConfig) The run parameters, the configured defaults if None.
    """

    def __init__(self, config=None):
        self.config = config or GaConfig()

    def next_generation(self, population, fitnesses, rng):
        """
        Build the next generation: the fittest chromosome unchanged, then mutated offspring of roulette-drawn parents.
        """
        cfg = self.config
        elite = fittest(population, fitnesses)
        offspring = [elite]

        pairs = select_roulette(population, fitnesses, rng, k=math.ceil((cfg.population_size - 1) / 2))
        for a, b in pairs:
            for child in crossover(a, b, rng, cfg.crossover_rate):
                offspring.append(mutate(child, cfg.mutation_rate, rng, cfg.free_genes))

        return offspring[:cfg.population_size]

    def optimise(self, oracle):
        """
        :param oracle: (callable) Chromosome -> MAP.
        :returns: (OptimisationResult) Best-ever chromosome and MAP, and the best-ever MAP after each generation.
        """
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        population = init_population(cfg, rng)
        cache = {}

        best, best_map = None, -1.0
        history = []
        for generation in range(cfg.max_generations):
            maps = evaluate_maps(population, oracle, cfg, cache)
            fitnesses = np.array([boost_fitness(m, cfg) for m in maps])

            leader = int(np.argmax(fitnesses))
            if maps[leader] > best_map:
                best, best_map = population[leader], float(maps[leader])
            history.append(GenerationRecord(generation, best_map, best))
            logger.debug(f"Generation {generation}: best MAP {best_map:.4f} ({best})")

            if generation < cfg.max_generations - 1:
                population = self.next_generation(population, fitnesses, rng)

        logger.info(f"Best MAP {best_map:.4f} with weights ({best}) after {cfg.max_generations} generations, "
                    f"{len(cache)} distinct chromosomes scored")
        return OptimisationResult(best, best_map, history, len(cache))


def optimize(cfg, oracle):
    """
    Run the genetic algorithm.

    :param cfg: (GaConfig) The run parameters.
    :param oracle: (callable) Chromosome -> MAP.
    :returns: (OptimisationResult) The result.
    """
    return GeneticOptimiser(cfg).optimise(oracle)


def write_report(result, path, label=None):
    """
    Write one line per generation: generation, best MAP and the best chromosome's genes.

    :param result: (OptimisationResult) The optimisation result.
    :param path: (str) The file to write. Appended to when label is given.
    :param label: (str) Optional label (e.g. a query id) written as the first column.
    """
    path = os.path.expanduser(path)
    rows = []
    for record in result.history:
        row = {"generation": record.generation, "best_map": record.best_map}
        row.update(zip(GENES, record.best))
        rows.append(row)

    df = pd.DataFrame(rows, columns=["generation", "best_map", *GENES])
    mode, header = "w", True
    if label is not None:
        df.insert(0, "label", label)
        mode = "a"
        header = not os.path.exists(path) or os.path.getsize(path) == 0
    df.to_csv(path, sep="\t", index=False, float_format="%.6f", mode=mode, header=header)
