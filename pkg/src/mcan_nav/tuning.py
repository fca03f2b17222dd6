"""Mutation-only genetic algorithm for the attractor parameters.

Each generation the population is scored (in parallel), the top quarter is
kept unchanged, and every parent is cloned into three children that are
mutated with probability ``mutation_rate``.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .attractor import GAMMA_RANGE, PHI_RANGE, RADIUS_RANGE, NetworkParams
from .errors import ConfigurationError
from .heading import HeadDirectionNetwork
from .multiscale import DEFAULT_SCALES, DEFAULT_SIZE, MultiscaleNetwork

log = logging.getLogger(__name__)

GENE_NAMES = ("A", "E", "gamma", "phi")
GENE_RANGES = {"A": RADIUS_RANGE, "E": RADIUS_RANGE, "gamma": GAMMA_RANGE, "phi": PHI_RANGE}
# phi spans more than two decades, so it is searched in log10 space
LOG_GENES = frozenset({"phi"})
MAX_RESAMPLES = 1000


def _to_search(name: str, value):
    return np.log10(value) if name in LOG_GENES else value


def _from_search(name: str, value):
    return 10.0**value if name in LOG_GENES else value


def search_bounds(ranges: dict = GENE_RANGES) -> np.ndarray:
    """(4, 2) array of gene bounds in search space (log10 for ``phi``)."""
    return np.array([[_to_search(n, ranges[n][0]), _to_search(n, ranges[n][1])] for n in GENE_NAMES], dtype=float)


@dataclass(frozen=True)
class Genome:
    A: float
    E: float
    gamma: float
    phi: float

    @classmethod
    def from_genes(cls, genes: Sequence[float]) -> "Genome":
        return cls(*(float(g) for g in genes))

    @property
    def genes(self) -> np.ndarray:
        return np.array([self.A, self.E, self.gamma, self.phi], dtype=float)

    def within(self, ranges: dict = GENE_RANGES) -> bool:
        return all(ranges[n][0] <= v <= ranges[n][1] for n, v in zip(GENE_NAMES, self.genes))

    def to_params(self) -> NetworkParams:
        lo, hi = RADIUS_RANGE
        return NetworkParams(
            activation_radius=int(min(max(round(self.A), lo), hi)),
            excitation_radius=int(min(max(round(self.E), lo), hi)),
            motion_confidence=min(max(self.gamma, GAMMA_RANGE[0]), GAMMA_RANGE[1]),
            inhibition_factor=min(max(self.phi, PHI_RANGE[0]), PHI_RANGE[1]),
        )

    def save(self, path, **extra) -> None:
        Path(path).write_text(json.dumps({**asdict(self), **extra}, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Genome":
        data = json.loads(Path(path).read_text())
        try:
            genome = cls(*(float(data[name]) for name in GENE_NAMES))
        except KeyError as exc:
            raise ConfigurationError(f"{path}: genome file lacks gene {exc}") from None
        if not genome.within():
            raise ConfigurationError(f"{path}: genome {genome} outside the allowed gene ranges")
        return genome


@dataclass
class TrialSpec:
    """Random path-integration trial used as the fitness signal."""

    topology: str = "2d"  # "1d" head-direction ring or "2d" multiscale stack
    steps: int = 1000
    dt: float = 1.0
    max_speed: float = 20.0  # m/s, speeds drawn from U(0, max_speed)
    max_turn_deg: float = 30.0  # per step, turns drawn from U(-max, max)
    scales: tuple = DEFAULT_SCALES
    size: int = DEFAULT_SIZE

    def __post_init__(self):
        if self.topology not in ("1d", "2d"):
            raise ConfigurationError(f"topology must be '1d' or '2d', got {self.topology!r}")
        if self.steps < 1 or not self.dt > 0:
            raise ConfigurationError("trial needs at least one step and a positive dt")
        self.scales = tuple(self.scales)


@dataclass
class GaConfig:
    population_size: int = 24
    max_generations: int = 20
    mutation_rate: float = 0.8
    mutation_sigma: float = 0.1  # fraction of each gene's search-space width
    parent_fraction: float = 0.25
    children_per_parent: int = 3
    parallel_workers: int = 14
    rng_seed: int = 0
    trial: TrialSpec = field(default_factory=TrialSpec)

    def __post_init__(self):
        if isinstance(self.trial, dict):
            self.trial = TrialSpec(**self.trial)
        if self.population_size < 1 or self.max_generations < 1:
            raise ConfigurationError("population_size and max_generations must be positive")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigurationError(f"mutation_rate must be a probability, got {self.mutation_rate}")
        if self.mutation_sigma < 0:
            raise ConfigurationError("mutation_sigma must be nonnegative")
        if self.parallel_workers < 1:
            raise ConfigurationError("parallel_workers must be at least 1")
        parents = self.n_parents
        if parents * (1 + self.children_per_parent) != self.population_size:
            raise ConfigurationError(
                f"{parents} parents x (1 + {self.children_per_parent} children) != population {self.population_size}"
            )

    @property
    def n_parents(self) -> int:
        return math.ceil(self.parent_fraction * self.population_size - 1e-9)

    @classmethod
    def from_dict(cls, data: dict) -> "GaConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "GaConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_genome: Genome
    population: tuple[Genome, ...] = ()


@dataclass
class GaResult:
    best: Genome
    best_fitness: float
    history: list[GenerationStats]
    mutation_fallbacks: int = 0

    def write_history(self, path) -> None:
        lines = ["generation,best_fitness,mean_fitness," + ",".join(GENE_NAMES)]
        for h in self.history:
            genes = ",".join(repr(float(g)) for g in h.best_genome.genes)
            lines.append(f"{h.generation},{h.best_fitness!r},{h.mean_fitness!r},{genes}")
        Path(path).write_text("\n".join(lines) + "\n")


def _in_ranges(genes, ranges) -> np.ndarray:
    # log-space round trips can land a hair outside a bound
    return np.array([min(max(g, ranges[n][0]), ranges[n][1]) for n, g in zip(GENE_NAMES, genes)])


def _mutate_genes(genes, rate, sigma, rng, ranges) -> tuple[np.ndarray, bool]:
    """Mutated copy of ``genes`` and whether the resampling cap forced a clamp."""
    if rng.random() >= rate:
        return genes.copy(), False
    bounds = search_bounds(ranges)
    base = np.array([_to_search(n, g) for n, g in zip(GENE_NAMES, genes)])
    step = sigma * (bounds[:, 1] - bounds[:, 0])
    clamped = False
    for _ in range(MAX_RESAMPLES):
        candidate = base + rng.normal(0.0, 1.0, size=len(base)) * step
        if np.all((candidate >= bounds[:, 0]) & (candidate <= bounds[:, 1])):
            break
    else:
        candidate = np.clip(candidate, bounds[:, 0], bounds[:, 1])
        clamped = True
    return _in_ranges([_from_search(n, c) for n, c in zip(GENE_NAMES, candidate)], ranges), clamped


def mutate(genome: Genome, rate: float, sigma: float, rng: np.random.Generator, ranges: dict = GENE_RANGES) -> Genome:
    """Perturb all genes with probability ``rate``, redrawing until every gene is in range."""
    genes, _ = _mutate_genes(genome.genes, rate, sigma, rng, ranges)
    return Genome.from_genes(genes)


def select_parents(population: Sequence, fitnesses: Sequence[float], fraction: float = 0.25) -> list:
    """Top ``ceil(fraction * N)`` individuals by fitness; ties keep the lower index."""
    if not population:
        raise ConfigurationError("cannot select parents from an empty population")
    if len(population) != len(fitnesses):
        raise ConfigurationError("population and fitnesses differ in length")
    k = math.ceil(fraction * len(population) - 1e-9)
    order = sorted(range(len(population)), key=lambda i: (-_finite(fitnesses[i]), i))
    return [population[i] for i in order[:k]]


def _finite(value) -> float:
    value = float(value)
    return value if math.isfinite(value) else -math.inf


def random_genome(rng: np.random.Generator, ranges: dict = GENE_RANGES) -> Genome:
    bounds = search_bounds(ranges)
    draw = rng.uniform(bounds[:, 0], bounds[:, 1])
    return Genome.from_genes(_in_ranges([_from_search(n, d) for n, d in zip(GENE_NAMES, draw)], ranges))


def run_ga(
    config: GaConfig,
    fitness: Callable[[Genome], float] | None = None,
    progress: Callable[[GenerationStats], None] | None = None,
) -> GaResult:
    """Evolve genomes for ``config.max_generations`` generations.

    ``fitness`` defaults to the path-integration trial described by
    ``config.trial``, seeded once per run so cached parent scores stay valid.
    Results do not depend on ``parallel_workers``.
    """
    seeds = np.random.SeedSequence(config.rng_seed).spawn(2)
    rng = np.random.default_rng(seeds[0])
    if fitness is None:
        trial_seed = int(seeds[1].generate_state(1)[0])
        fitness = partial(fitness_path_integration, trial=config.trial, seed=trial_seed)

    population = [random_genome(rng) for _ in range(config.population_size)]
    cache: dict[tuple, float] = {}
    history: list[GenerationStats] = []
    best, best_fitness, fallbacks = population[0], -math.inf, 0

    executor = ProcessPoolExecutor(config.parallel_workers) if config.parallel_workers > 1 else None
    try:
        for generation in range(config.max_generations):
            pending = [g for g in dict.fromkeys(population) if tuple(g.genes) not in cache]
            scores = executor.map(fitness, pending) if executor else map(fitness, pending)
            for genome, score in zip(pending, scores):
                cache[tuple(genome.genes)] = _finite(score)
            fitnesses = [cache[tuple(g.genes)] for g in population]

            top = max(range(len(population)), key=lambda i: (fitnesses[i], -i))
            finite = [f for f in fitnesses if math.isfinite(f)]
            mean = float(np.mean(finite)) if finite else -math.inf
            stats = GenerationStats(generation, fitnesses[top], mean, population[top], tuple(population))
            history.append(stats)
            if fitnesses[top] > best_fitness or generation == 0:
                best, best_fitness = population[top], fitnesses[top]
            log.info("generation %d: best %.4f mean %.4f %s", generation, stats.best_fitness, stats.mean_fitness, stats.best_genome)
            if progress:
                progress(stats)
            if generation == config.max_generations - 1:
                break

            parents = select_parents(population, fitnesses, config.parent_fraction)
            children = []
            for parent in parents:
                for _ in range(config.children_per_parent):
                    genes, clamped = _mutate_genes(parent.genes, config.mutation_rate, config.mutation_sigma, rng, GENE_RANGES)
                    fallbacks += clamped
                    children.append(Genome.from_genes(genes))
            population = list(parents) + children
    finally:
        if executor:
            executor.shutdown()
    return GaResult(best, best_fitness, history, fallbacks)


def _wrap_degrees(delta):
    return (np.asarray(delta) + 180.0) % 360.0 - 180.0


def fitness_path_integration(genome: Genome, trial: TrialSpec, seed: int) -> float:
    """Negative SAD between decoded and exactly integrated motion (0 is perfect).

    1D trials score heading in degrees; 2D trials score position in metres
    with the true heading fed to the stack. A collapsed network scores -inf.
    """
    rng = np.random.default_rng(seed)
    params = genome.to_params()
    turns = np.radians(rng.uniform(-trial.max_turn_deg, trial.max_turn_deg, trial.steps))
    if trial.topology == "1d":
        hd = HeadDirectionNetwork(params, initial_heading=0.0)
        truth = np.degrees(np.cumsum(turns)) % 360.0
        decoded = np.array([hd.step(turn / trial.dt, trial.dt) for turn in turns])
        if hd.faults:
            return -math.inf
        return -float(np.abs(_wrap_degrees(decoded - truth)).sum())

    speeds = rng.uniform(0.0, trial.max_speed, trial.steps)
    headings = np.cumsum(turns)
    stack = MultiscaleNetwork(params, scales=trial.scales, n=trial.size, max_speed=trial.max_speed)
    sad, x, y = 0.0, 0.0, 0.0
    for v, theta in zip(speeds, headings):
        stack.step(v, math.degrees(theta) % 360.0, trial.dt)
        x += v * trial.dt * math.cos(theta)
        y += v * trial.dt * math.sin(theta)
        ex, ey = stack.decode()
        sad += abs(ex - x) + abs(ey - y)
    if stack.faults or not math.isfinite(sad):
        return -math.inf
    return -sad
