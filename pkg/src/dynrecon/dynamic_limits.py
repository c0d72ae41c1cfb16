"""Adaptive per-coefficient search limits wrapped around the baseline GA.

The outer loop repeatedly runs a small inner GA, then reshapes the search
box: limits expand 10% when the best value presses against them (above 90%
of the bound) and shrink 10% otherwise, coefficients falling below a
threshold are hard-frozen at zero (restoring the original limits for the
survivors), and prolonged stagnation triggers trial eliminations of the
smallest coefficient with the removal kept only if fitness improves during
a probation window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ga import GAConfig, GeneBounds, Individual, ise_fitness, run_ga

__all__ = [
    "DynConfig",
    "LimitState",
    "EliminationProbe",
    "DynamicFitResult",
    "init_limits",
    "adjust_limits",
    "apply_threshold",
    "step_stagnation",
    "run_dynamic",
]

# A feature column whose magnitude never exceeds this on the data cannot be
# scaled meaningfully and is frozen at initialization.
DEGENERATE_FEATURE_TOL = 1e-12


@dataclass(frozen=True)
class DynConfig:
    """Outer-loop hyperparameters.

    outer_iterations inner GAs of inner_population x inner_generations run in
    sequence, so the total fitness-evaluation budget is their product.
    """

    outer_iterations: int = 2000
    inner_population: int = 100
    inner_generations: int = 100
    threshold: float = 1e-4
    stagnation_f: int = 20
    expand_trigger: float = 0.9
    expand_factor: float = 1.1
    shrink_factor: float = 0.9
    # Minimum relative fitness decrease that counts as progress. A strict
    # (jitter-level) setting starves the elimination mechanism whenever the
    # inner GA grinds out micro-improvements forever, so stagnation is
    # declared unless an iteration beats the best by this fraction.
    improvement_rtol: float = 1e-2

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be at least 1")
        if not 0.0 < self.shrink_factor < 1.0 < self.expand_factor:
            raise ValueError("need 0 < shrink_factor < 1 < expand_factor")
        if not 0.0 < self.expand_trigger < 1.0:
            raise ValueError("expand_trigger must lie in (0, 1)")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.stagnation_f < 1:
            raise ValueError("stagnation_f must be at least 1")
        if self.improvement_rtol < 0:
            raise ValueError("improvement_rtol must be non-negative")

    @property
    def evaluation_budget(self) -> int:
        return self.outer_iterations * self.inner_population * self.inner_generations


@dataclass
class LimitState:
    """Per-coefficient symmetric bounds plus the frozen-zero mask and the
    stagnation bookkeeping. Lower limits are always the negated uppers."""

    initial_upper: np.ndarray
    current_upper: np.ndarray
    frozen: np.ndarray
    stagnation_counter: int = 0
    reference_fitness: float = np.inf


@dataclass
class EliminationProbe:
    """State of a trial coefficient removal.

    While active, removed_index is frozen, the limits are restored to the
    broad initial box (the trial must be able to restructure the model, not
    just locally re-polish), and the pre-removal best individual plus its
    limits are kept aside. A failed probe rolls the whole search state back;
    a validated one keeps the freeze and re-explores from the broad box.
    candidates holds the not-yet-tried indices of the current elimination
    round, smallest contribution first (|coefficient| scaled by the term's
    peak magnitude on the data, so huge-valued features rank by their actual
    share of the reconstructed signal, not by their tiny coefficients).
    """

    active: bool = False
    removed_index: int = -1
    pre_best_fitness: float = np.inf
    probation_left: int = 0
    candidates: list[int] = field(default_factory=list)
    snapshot_genes: np.ndarray | None = None
    snapshot_upper: np.ndarray | None = None


@dataclass(frozen=True)
class DynamicFitResult:
    genes: np.ndarray
    fitness: float
    frozen: np.ndarray
    fitness_history: np.ndarray  # best fitness after each outer iteration
    limit_history: np.ndarray  # (outer, p) upper bounds used by each iteration
    gene_history: np.ndarray  # (outer, p) best genes of each iteration
    frozen_history: np.ndarray  # (outer, p) mask used by each iteration
    events: list[tuple[int, str, int]]  # (iteration, kind, gene index)
    n_evaluations: int


def init_limits(target, features) -> LimitState:
    """Initial symmetric bounds: max |target| over the window divided by the
    max |feature| of each candidate term. Terms that are identically ~0 on
    the data are frozen immediately; an all-zero target is rejected."""
    v = np.asarray(target, dtype=float).ravel()
    F = np.asarray(features, dtype=float)
    if F.ndim != 2 or F.shape[0] != v.size:
        raise ValueError(f"feature matrix {F.shape} does not match target {v.shape}")
    v_max = float(np.max(np.abs(v)))
    if v_max == 0.0:
        raise ValueError("target signal is identically zero; nothing to fit")
    theta_max = np.max(np.abs(F), axis=0)
    frozen = theta_max < DEGENERATE_FEATURE_TOL
    upper = np.where(frozen, 0.0, v_max / np.where(frozen, 1.0, theta_max))
    return LimitState(
        initial_upper=upper, current_upper=upper.copy(), frozen=frozen
    )


def adjust_limits(state: LimitState, best_genes, cfg: DynConfig) -> None:
    """Geometric limit update from the current best genes: expand by
    expand_factor where |gene| strictly exceeds expand_trigger * limit,
    shrink by shrink_factor otherwise (a tie at the trigger shrinks).
    Frozen genes are left untouched."""
    genes = np.asarray(best_genes, dtype=float)
    active = ~state.frozen
    expand = np.abs(genes) > cfg.expand_trigger * state.current_upper
    factor = np.where(expand, cfg.expand_factor, cfg.shrink_factor)
    state.current_upper[active] *= factor[active]


def apply_threshold(state: LimitState, best: Individual, cfg: DynConfig) -> np.ndarray:
    """Freeze every non-frozen gene with |value| below the threshold, forcing
    it to exactly zero. If anything froze, the surviving genes get their
    original search limits back. Returns the newly frozen indices.

    Not applied while an elimination probe is active: a threshold freeze is
    permanent, and committing one based on the distorted fits inside a trial
    removal would survive the trial's rollback (the caller suspends it).
    """
    newly = (~state.frozen) & (np.abs(best.genes) < cfg.threshold)
    idx = np.flatnonzero(newly)
    if idx.size:
        state.frozen[newly] = True
        best.genes[newly] = 0.0
        survivors = ~state.frozen
        state.current_upper[survivors] = state.initial_upper[survivors]
    return idx


def _widen_limits(state: LimitState) -> None:
    # Back to the original broad search box, except where the box has
    # legitimately grown beyond it (clamping such a gene would strand it).
    survivors = ~state.frozen
    state.current_upper[survivors] = np.maximum(
        state.initial_upper, state.current_upper
    )[survivors]


def _start_candidate(
    state: LimitState, probe: EliminationProbe, best: Individual, j: int, cfg: DynConfig
) -> tuple[str, int]:
    probe.active = True
    probe.removed_index = j
    probe.probation_left = cfg.stagnation_f
    state.frozen[j] = True
    best.genes[j] = 0.0
    return ("probe_start", j)


def step_stagnation(
    state: LimitState,
    probe: EliminationProbe,
    best: Individual,
    fitness_value: float,
    cfg: DynConfig,
) -> list[tuple[str, int]]:
    """Advance the stagnation/elimination state machine by one outer
    iteration whose best fitness was ``fitness_value``.

    Without an active probe, the counter tracks iterations without a
    sufficient relative fitness decrease; hitting stagnation_f freezes the
    lowest-contribution non-frozen coefficient and opens a probation of
    stagnation_f iterations. At probation end the removal is committed if
    fitness beat the pre-removal best (and the survivors get their original
    wide limits back), otherwise it is rolled back (the pre-removal best
    individual is restored) and the next-smallest candidate is probed
    immediately. A round that exhausts every candidate leaves the model
    unchanged and the search continues.
    """
    events: list[tuple[str, int]] = []
    if probe.active:
        probe.probation_left -= 1
        if probe.probation_left > 0:
            return events
        j = probe.removed_index
        if fitness_value < probe.pre_best_fitness:
            # Validated removal: keep the freeze and re-explore the reduced
            # support from the broad box.
            _widen_limits(state)
            probe.active = False
            probe.snapshot_genes = None
            probe.snapshot_upper = None
            probe.candidates = []
            state.stagnation_counter = 0
            state.reference_fitness = fitness_value
            events.append(("probe_commit", j))
            return events
        # Failed probe: restore the pre-round best individual, undo limit
        # shrinks the probation caused (the snapshot genes always fit the
        # snapshot boxes, so this can never strand them), but keep any limit
        # growth the probation earned.
        state.frozen[j] = False
        restored = probe.snapshot_genes.copy()
        restored[state.frozen] = 0.0
        best.genes[:] = restored
        best.fitness = probe.pre_best_fitness
        survivors = ~state.frozen
        state.current_upper[survivors] = np.maximum(
            probe.snapshot_upper, state.current_upper
        )[survivors]
        events.append(("probe_rollback", j))
        probe.candidates = [k for k in probe.candidates if not state.frozen[k]]
        if probe.candidates:
            nxt = probe.candidates.pop(0)
            events.append(_start_candidate(state, probe, best, nxt, cfg))
        else:
            probe.active = False
            probe.snapshot_genes = None
            probe.snapshot_upper = None
            state.stagnation_counter = 0
            state.reference_fitness = probe.pre_best_fitness
            events.append(("probe_exhausted", j))
        return events

    improved = fitness_value < state.reference_fitness - cfg.improvement_rtol * abs(
        state.reference_fitness
    )
    if improved:
        state.reference_fitness = fitness_value
        state.stagnation_counter = 0
        return events
    state.stagnation_counter += 1
    if state.stagnation_counter < cfg.stagnation_f:
        return events

    active = np.flatnonzero(~state.frozen)
    state.stagnation_counter = 0
    if active.size == 0:
        return events
    # Rank by share of the reconstructed signal: |gene| times the term's
    # peak magnitude on the data (proportional to |gene| / initial_upper).
    contribution = np.abs(best.genes[active]) / state.initial_upper[active]
    order = active[np.argsort(contribution, kind="stable")]
    probe.snapshot_genes = best.genes.copy()
    probe.snapshot_upper = state.current_upper.copy()
    probe.pre_best_fitness = fitness_value
    probe.candidates = [int(k) for k in order[1:]]
    events.append(_start_candidate(state, probe, best, int(order[0]), cfg))
    return events


def run_dynamic(
    target,
    features,
    dt: float,
    cfg: DynConfig,
    ga_cfg: GAConfig | None = None,
    rng: np.random.Generator | None = None,
) -> DynamicFitResult:
    """Fit one state equation with adaptive limits.

    Each outer iteration runs one inner GA (warm-started by injecting the
    running best individual into its initial population), then applies the
    limit adjustment, the zero-threshold, and the stagnation step, in that
    order. Returns the best genes with full per-iteration histories; the
    evaluation count is exactly outer_iterations * inner_population *
    inner_generations.

    ``ga_cfg`` supplies the inner GA operator rates and the seed; its
    population/generation fields are overridden by the DynConfig ones.
    """
    if ga_cfg is None:
        ga_cfg = GAConfig(
            population_size=cfg.inner_population, generations=cfg.inner_generations
        )
    if rng is None:
        rng = np.random.default_rng(ga_cfg.rng_seed)
    target = np.asarray(target, dtype=float).ravel()
    features = np.asarray(features, dtype=float)
    fitness = ise_fitness(features, target, dt)
    inner_cfg = GAConfig(
        population_size=cfg.inner_population,
        generations=cfg.inner_generations,
        mutation_prob=ga_cfg.mutation_prob,
        elitism_frac=ga_cfg.elitism_frac,
        pressure_frac=ga_cfg.pressure_frac,
        rng_seed=ga_cfg.rng_seed,
    )

    state = init_limits(target, features)
    probe = EliminationProbe()
    p = features.shape[1]
    fitness_history = np.empty(cfg.outer_iterations)
    limit_history = np.empty((cfg.outer_iterations, p))
    gene_history = np.empty((cfg.outer_iterations, p))
    frozen_history = np.zeros((cfg.outer_iterations, p), dtype=bool)
    events: list[tuple[int, str, int]] = []
    best: Individual | None = None
    n_evaluations = 0

    for it in range(cfg.outer_iterations):
        limit_history[it] = state.current_upper
        frozen_history[it] = state.frozen
        bounds = GeneBounds(np.where(state.frozen, 0.0, state.current_upper))
        guess = best.genes if best is not None else None
        result = run_ga(
            fitness, bounds, state.frozen, inner_cfg, rng=rng, initial_guess=guess
        )
        n_evaluations += result.n_evaluations
        best = result.best
        fitness_history[it] = best.fitness
        gene_history[it] = best.genes

        adjust_limits(state, best.genes, cfg)
        if not probe.active:
            for j in apply_threshold(state, best, cfg):
                events.append((it, "threshold_freeze", int(j)))
        for kind, j in step_stagnation(state, probe, best, fitness_history[it], cfg):
            events.append((it, kind, int(j)))

    if probe.active:
        # The run ended mid-probation: keep the removal only if it already
        # beat the pre-removal best, otherwise restore that individual.
        last = cfg.outer_iterations - 1
        j = probe.removed_index
        if fitness_history[last] < probe.pre_best_fitness:
            events.append((last, "probe_commit", j))
        else:
            state.frozen[j] = False
            restored = probe.snapshot_genes.copy()
            restored[state.frozen] = 0.0
            best.genes[:] = restored
            best.fitness = probe.pre_best_fitness
            events.append((last, "probe_rollback", j))

    genes = np.where(state.frozen, 0.0, best.genes)
    return DynamicFitResult(
        genes=genes,
        fitness=float(fitness(genes)[0]),
        frozen=state.frozen.copy(),
        fitness_history=fitness_history,
        limit_history=limit_history,
        gene_history=gene_history,
        frozen_history=frozen_history,
        events=events,
        n_evaluations=n_evaluations,
    )
