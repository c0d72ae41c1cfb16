"""Real-coded genetic algorithm: uniform initialization within symmetric
bounds, roulette selection restricted to the top fraction of the population,
single-point crossover with two children, per-gene mutation, and elitism.

A mutated gene is either resampled uniformly within its bounds (global
exploration) or jittered by a Gaussian step scaled to the bound (local
refinement), with equal probability. Pure resampling cannot make the small
coordinated moves that walking a curved valley requires, and stalls on
entangled multi-term blends; the local component fixes that while the
uniform component keeps the search global.

Fitness callables take a (k, p) array of genomes and return (k,) values
(lower is better); batch evaluation keeps the generation loop vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GAConfig",
    "GeneBounds",
    "Individual",
    "Population",
    "GAResult",
    "init_population",
    "roulette_weights",
    "select_parent",
    "crossover",
    "mutate",
    "run_ga",
    "ise_fitness",
]

# Share of mutations that take a local Gaussian step instead of a uniform
# resample, and the step sizes (fractions of the gene's bound) the local
# steps draw from: a coarse scale to walk valleys, a fine one to polish.
MUTATION_LOCAL_FRAC = 0.75
MUTATION_LOCAL_SCALES = (0.1, 0.01)


@dataclass(frozen=True)
class GAConfig:
    population_size: int
    generations: int
    mutation_prob: float = 0.10
    elitism_frac: float = 0.10
    pressure_frac: float = 0.70
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if self.elitism_frac * self.population_size < 1:
            raise ValueError("elitism_frac * population_size must be >= 1")
        if not 0.0 < self.pressure_frac <= 1.0:
            raise ValueError("pressure_frac must lie in (0, 1]")

    @property
    def elite_count(self) -> int:
        return max(1, int(round(self.elitism_frac * self.population_size)))

    @property
    def pool_count(self) -> int:
        return min(
            self.population_size,
            max(1, math.ceil(self.pressure_frac * self.population_size)),
        )


@dataclass(frozen=True)
class GeneBounds:
    """Symmetric per-gene search bounds: lower is always -upper."""

    upper: np.ndarray

    def __post_init__(self):
        upper = np.asarray(self.upper, dtype=float).ravel().copy()
        if np.any(upper < 0) or not np.all(np.isfinite(upper)):
            raise ValueError("upper bounds must be finite and non-negative")
        upper.flags.writeable = False
        object.__setattr__(self, "upper", upper)

    @property
    def lower(self) -> np.ndarray:
        return -self.upper

    def __len__(self) -> int:
        return len(self.upper)

    def clip(self, genes: np.ndarray) -> np.ndarray:
        return np.clip(genes, -self.upper, self.upper)


@dataclass
class Individual:
    genes: np.ndarray
    fitness: float


@dataclass
class Population:
    """Genome matrix (population_size, p) plus cached fitness values."""

    genes: np.ndarray
    fitness: np.ndarray | None = None

    def __len__(self) -> int:
        return self.genes.shape[0]

    def best(self) -> Individual:
        if self.fitness is None:
            raise ValueError("population has not been evaluated")
        i = int(np.argmin(self.fitness))
        return Individual(self.genes[i].copy(), float(self.fitness[i]))


@dataclass(frozen=True)
class GAResult:
    best: Individual
    history: np.ndarray  # per-generation best fitness
    n_evaluations: int


def init_population(
    bounds: GeneBounds, frozen: np.ndarray, config: GAConfig, rng: np.random.Generator
) -> Population:
    """Uniform i.i.d. genomes within bounds; frozen genes are exactly 0."""
    frozen = np.asarray(frozen, dtype=bool)
    genes = rng.uniform(
        -bounds.upper, bounds.upper, size=(config.population_size, len(bounds))
    )
    genes[:, frozen] = 0.0
    return Population(genes=genes)


def roulette_weights(pool_fitness: np.ndarray) -> np.ndarray:
    """Selection probabilities over a mating pool, proportional to
    (f_worst_in_pool - f_i + eps) so the minimization problem maps onto
    roulette selection; eps keeps a degenerate pool uniform and zero-safe."""
    f = np.asarray(pool_fitness, dtype=float)
    worst = float(np.max(f))
    eps = 1e-12 * (1.0 + abs(worst))
    w = worst - f + eps
    return w / w.sum()


def _pool_indices(fitness: np.ndarray, pool_count: int) -> np.ndarray:
    order = np.argsort(fitness, kind="stable")
    return order[:pool_count]


def select_parent(
    population: Population, pressure_frac: float, rng: np.random.Generator
) -> Individual:
    """Roulette selection restricted to the best ceil(pressure_frac * size)
    individuals; the remainder never reproduces."""
    if population.fitness is None:
        raise ValueError("population has not been evaluated")
    pool_count = min(len(population), max(1, math.ceil(pressure_frac * len(population))))
    pool = _pool_indices(population.fitness, pool_count)
    probs = roulette_weights(population.fitness[pool])
    i = int(pool[rng.choice(pool_count, p=probs)])
    return Individual(population.genes[i].copy(), float(population.fitness[i]))


def crossover(
    parent_a: np.ndarray, parent_b: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover producing two complementary children. The cut
    is uniform on [1, p-1]; with a single gene the children copy the parents."""
    a = np.asarray(parent_a, dtype=float)
    b = np.asarray(parent_b, dtype=float)
    p = a.size
    if p < 2:
        return a.copy(), b.copy()
    cut = int(rng.integers(1, p))
    child_a = np.concatenate([a[:cut], b[cut:]])
    child_b = np.concatenate([b[:cut], a[cut:]])
    return child_a, child_b


def _mutation_proposals(
    genes: np.ndarray, upper: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """New values for would-be-mutated genes: with probability
    MUTATION_LOCAL_FRAC a clamped Gaussian step at one of the local scales,
    otherwise a uniform resample within the bounds.

    Frozen genes have bound 0, so every branch returns 0 for them.
    """
    uniform = rng.uniform(-upper, upper, size=genes.shape)
    scales = np.asarray(MUTATION_LOCAL_SCALES)
    sigma = scales[rng.integers(0, len(scales), size=genes.shape)] * upper
    local = np.clip(genes + rng.normal(0.0, 1.0, size=genes.shape) * sigma,
                    -upper, upper)
    take_local = rng.random(genes.shape) < MUTATION_LOCAL_FRAC
    return np.where(take_local, local, uniform)


def mutate(
    genes: np.ndarray,
    bounds: GeneBounds,
    frozen: np.ndarray,
    mutation_prob: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Each non-frozen gene independently mutates with probability
    mutation_prob, drawing its new value from the resample-or-jitter mix;
    frozen genes stay 0."""
    genes = np.array(genes, dtype=float)
    frozen = np.asarray(frozen, dtype=bool)
    flip = rng.random(genes.shape) < mutation_prob
    flip[..., frozen] = False
    proposals = _mutation_proposals(genes, bounds.upper, rng)
    genes[flip] = proposals[flip]
    return genes


def run_ga(
    fitness,
    bounds: GeneBounds,
    frozen: np.ndarray,
    config: GAConfig,
    rng: np.random.Generator | None = None,
    initial_guess: np.ndarray | None = None,
) -> GAResult:
    """Run the generation loop and return the best individual found.

    Every generation evaluates the full population (exactly population_size *
    generations fitness evaluations per call), copies the elite fraction
    unchanged, and fills the remainder with mutated single-point-crossover
    offspring of roulette-selected parents from the pressure pool. If the
    non-elite remainder is odd, the second child of the final pair is
    dropped.

    ``initial_guess`` (clipped to bounds, frozen genes zeroed) replaces the
    first member of the initial population, which warm-starts the search.
    All stochastic draws come from one generator, so results are fully
    reproducible from the seed.
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    frozen = np.asarray(frozen, dtype=bool)
    p = len(bounds)
    if frozen.shape != (p,):
        raise ValueError("frozen mask and bounds length differ")

    population = init_population(bounds, frozen, config, rng)
    genes = population.genes
    if initial_guess is not None:
        guess = bounds.clip(np.asarray(initial_guess, dtype=float))
        guess = np.where(frozen, 0.0, guess)
        genes[0] = guess

    pop_size = config.population_size
    elite_count = config.elite_count
    pool_count = config.pool_count
    n_offspring = pop_size - elite_count
    n_pairs = (n_offspring + 1) // 2
    column = np.arange(p)

    history = np.empty(config.generations)
    best_genes = None
    best_fitness = np.inf
    n_evaluations = 0

    for gen in range(config.generations):
        values = np.asarray(fitness(genes), dtype=float)
        n_evaluations += pop_size
        i_best = int(np.argmin(values))
        if values[i_best] < best_fitness:
            best_fitness = float(values[i_best])
            best_genes = genes[i_best].copy()
        history[gen] = best_fitness

        if gen == config.generations - 1:
            break

        order = np.argsort(values, kind="stable")
        pool = order[:pool_count]
        probs = roulette_weights(values[pool])

        # One logical stream: parent picks, cut points, mutation mask,
        # mutation values--always drawn in this order.
        picks = pool[rng.choice(pool_count, size=(n_pairs, 2), p=probs)]
        pa = genes[picks[:, 0]]
        pb = genes[picks[:, 1]]
        if p >= 2:
            cuts = rng.integers(1, p, size=n_pairs)
            mask = column < cuts[:, None]
            child_a = np.where(mask, pa, pb)
            child_b = np.where(mask, pb, pa)
        else:
            child_a, child_b = pa.copy(), pb.copy()
        offspring = np.concatenate([child_a, child_b])[:n_offspring]

        flip = rng.random((n_offspring, p)) < config.mutation_prob
        flip[:, frozen] = False
        proposals = _mutation_proposals(offspring, bounds.upper, rng)
        offspring[flip] = proposals[flip]

        next_genes = np.empty_like(genes)
        next_genes[:elite_count] = genes[order[:elite_count]]
        next_genes[elite_count:] = offspring
        genes = next_genes

    return GAResult(
        best=Individual(best_genes, best_fitness),
        history=history,
        n_evaluations=n_evaluations,
    )


def ise_fitness(features: np.ndarray, target: np.ndarray, dt: float):
    """Batch fitness: integral square error between the target derivative
    signal and features @ genes, as a function of the genome.

    The trapezoidal ISE is quadratic in the genes, so it is evaluated through
    its exact expansion g'Ag - 2b'g + c with A, b, c precomputed from the
    feature matrix. This is algebraically identical to forming the residual
    and costs O(p^2) per genome instead of O(N*p); values are clamped at zero
    against rounding at the noise floor.
    """
    F = np.asarray(features, dtype=float)
    v = np.asarray(target, dtype=float).ravel()
    if F.ndim != 2 or F.shape[0] != v.size:
        raise ValueError(f"feature matrix {F.shape} does not match target {v.shape}")
    if dt <= 0:
        raise ValueError("dt must be positive")
    w = np.full(v.size, dt)
    w[0] = w[-1] = 0.5 * dt
    A = F.T @ (F * w[:, None])
    b = F.T @ (w * v)
    c = float(w @ (v * v))

    def fitness(genes: np.ndarray) -> np.ndarray:
        G = np.atleast_2d(np.asarray(genes, dtype=float))
        values = ((G @ A) * G).sum(axis=1) - 2.0 * (G @ b) + c
        return np.maximum(values, 0.0)

    fitness.n_genes = F.shape[1]
    return fitness
