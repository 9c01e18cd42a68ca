"""Two-phase genetic algorithm.

Phase 1 always puts the elite set (the best individuals of the population)
among the parents; phase 2 keeps it out of the parent pool. The population
switches precedence direction after every generation, so forward and
backward scheduling alternate.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

from .operators import MutationRates, mutate, random_cut_points, two_point_crossover
from .scheduling import (
    ActivityList,
    ContractViolation,
    ProjectInstance,
    Schedule,
    justified_order,
    random_activity_list,
    reverse_precedence,
    ssgs_decode,
    validate_schedule,
)

log = logging.getLogger(__name__)


@dataclass
class Individual:
    chromosome: ActivityList
    fitness: int | None = None
    reversed: bool = False
    schedule: Schedule | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class GaParams:
    population_size: int = 100
    parent_count: int = 40
    elite_size: int = 5
    elite_size_phase2: int = 5
    phase1_generations: int = 5
    phase2_generations: int = 5
    tournament_size: int = 3
    mutation_rates: MutationRates = MutationRates()
    candidate_list_capacity: int = 10
    deterioration_patience: int = 4
    schedule_budget: int = 5000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        for elite in (self.elite_size, self.elite_size_phase2):
            if not 0 <= elite < self.parent_count <= self.population_size:
                raise ValueError(
                    f"need 0 <= elite_size ({elite}) < parent_count ({self.parent_count}) "
                    f"<= population_size ({self.population_size})"
                )
            if self.population_size - elite < self.parent_count:
                raise ValueError(
                    f"phase 2 cannot draw {self.parent_count} parents from "
                    f"{self.population_size - elite} non-elite individuals"
                )
        if self.parent_count < 2:
            raise ValueError("parent_count must be at least 2")
        if self.phase1_generations < 0 or self.phase2_generations < 0:
            raise ValueError("phase lengths must be non-negative")
        if self.phase1_generations + self.phase2_generations == 0:
            raise ValueError("at least one phase needs a positive number of generations")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")
        if self.candidate_list_capacity < 1:
            raise ValueError("candidate_list_capacity must be at least 1")
        if self.deterioration_patience < 0:
            raise ValueError("deterioration_patience must be non-negative")
        if self.schedule_budget <= 0:
            raise ValueError("schedule_budget must be positive")

    def elite_for(self, phase: int) -> int:
        return self.elite_size if phase == 1 else self.elite_size_phase2


class CandidateList:
    """Bounded archive of the best forward-orientation individuals, best first."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: list[Individual] = []

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def best(self) -> Individual:
        return self.entries[0]

    def offer(self, ind: Individual) -> bool:
        """Insert ``ind`` if it is new and good enough; return whether it was kept."""
        if ind.reversed or ind.fitness is None:
            raise ContractViolation("candidate list holds evaluated forward individuals only")
        if len(self.entries) == self.capacity and ind.fitness >= self.entries[-1].fitness:
            return False
        if any(e.chromosome == ind.chromosome for e in self.entries):
            return False
        pos = len(self.entries)
        while pos > 0 and self.entries[pos - 1].fitness > ind.fitness:
            pos -= 1
        self.entries.insert(pos, ind)
        del self.entries[self.capacity :]
        return True

    def would_accept(self, fitness: int) -> bool:
        return len(self.entries) < self.capacity or fitness < self.entries[-1].fitness


@dataclass
class RunResult:
    instance_id: str
    seed: int
    best: Individual
    best_schedule: Schedule
    generations_run: int
    schedules_evaluated: int
    fitness_trace: list[int]

    @property
    def makespan(self) -> int:
        return self.best_schedule.makespan


class BudgetExhausted(Exception):
    pass


class SolverBug(RuntimeError):
    """The solver produced a schedule that fails independent validation."""


@dataclass
class RunState:
    """Everything that evolves during one run."""

    forward: ProjectInstance
    backward: ProjectInstance
    params: GaParams
    rng: random.Random
    population: list[Individual]
    candidates: CandidateList
    reversed: bool = False
    evaluated: int = 0
    generation: int = 0
    stale_generations: int = 0
    budget_exhausted: bool = False
    fitness_trace: list[int] = field(default_factory=list)

    @property
    def instance(self) -> ProjectInstance:
        """Instance in the population's current precedence direction."""
        return self.backward if self.reversed else self.forward

    def decode(self, instance: ProjectInstance, chromosome: ActivityList) -> Schedule:
        self.evaluated += 1
        return ssgs_decode(instance, chromosome, check=False)

    def evaluate(self, population: list[Individual]) -> None:
        instance = self.instance
        for ind in population:
            ind.schedule = self.decode(instance, ind.chromosome)
            ind.fitness = ind.schedule.makespan


def partition_population(
    pop: Sequence[Individual], elite_size: int
) -> tuple[list[Individual], list[Individual]]:
    """Split into the ``elite_size`` fittest members and the rest.

    Ties go to the member earlier in the population. The rest keeps
    population order.
    """
    if not 0 <= elite_size < len(pop):
        raise ContractViolation(f"elite_size {elite_size} must be below population size {len(pop)}")
    ranked = sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))
    chosen = set(ranked[:elite_size])
    elite = [pop[i] for i in ranked[:elite_size]]
    rest = [ind for i, ind in enumerate(pop) if i not in chosen]
    return elite, rest


def tournament(pool: Sequence[Individual], size: int, rng: random.Random) -> Individual:
    """Best of ``size`` uniform draws with replacement; the first drawn wins ties."""
    winner = pool[rng.randrange(len(pool))]
    for _ in range(size - 1):
        contender = pool[rng.randrange(len(pool))]
        if contender.fitness < winner.fitness:
            winner = contender
    return winner


def select_parents(
    pop: Sequence[Individual], phase: int, params: GaParams, rng: random.Random
) -> list[Individual]:
    """Phase 1: the elite plus tournament winners from the rest.
    Phase 2: tournament winners from the rest only."""
    if phase not in (1, 2):
        raise ContractViolation(f"phase must be 1 or 2, got {phase}")
    elite, rest = partition_population(pop, params.elite_for(phase))
    parents = list(elite) if phase == 1 else []
    while len(parents) < params.parent_count:
        parents.append(tournament(rest, params.tournament_size, rng))
    return parents


def next_generation(
    parents: Sequence[Individual],
    instance: ProjectInstance,
    params: GaParams,
    rng: random.Random,
) -> list[Individual]:
    """Cross random parent pairs until the population is refilled, then mutate every child."""
    if len(parents) < 2:
        raise ContractViolation("need at least two parents")
    direction = parents[0].reversed
    if any(p.reversed != direction for p in parents):
        raise ContractViolation("parents disagree on precedence direction")
    n = instance.n_real
    chromosomes: list[ActivityList] = []
    while len(chromosomes) < params.population_size:
        a, b = rng.sample(range(len(parents)), 2)
        mother, father = parents[a].chromosome, parents[b].chromosome
        if n == 0:
            chromosomes += [mother, father]
            continue
        r1, r2 = random_cut_points(n, rng)
        chromosomes.extend(two_point_crossover(mother, father, r1, r2))
    del chromosomes[params.population_size :]
    return [
        Individual(mutate(c, instance, params.mutation_rates, rng), reversed=direction)
        for c in chromosomes
    ]


def switch_direction(ind: Individual, target: ProjectInstance) -> Individual:
    """Re-encode an evaluated individual for the opposite precedence direction.

    Activities are listed by decreasing finish time in the individual's
    schedule. ``target`` is the instance in the new direction. The returned
    individual is not yet evaluated.
    """
    if ind.schedule is None:
        raise ContractViolation("individual must be decoded before switching direction")
    return Individual(justified_order(ind.schedule, target), reversed=not ind.reversed)


def _offer_candidates(state: RunState, population: list[Individual]) -> None:
    if not state.reversed:
        for ind in population:
            if state.candidates.would_accept(ind.fitness):
                state.candidates.offer(replace(ind))
        return
    # Reversed individuals go into the archive in forward orientation, which
    # costs one extra decode; only the generation's best is offered.
    best = min(population, key=lambda ind: ind.fitness)
    if state.candidates.would_accept(best.fitness):
        chromosome = justified_order(best.schedule, state.forward)
        schedule = state.decode(state.forward, chromosome)
        state.candidates.offer(Individual(chromosome, schedule.makespan, False, schedule))


def _batch(state: RunState) -> None:
    # One batch of population_size decodes; the budget is checked before each batch.
    if state.evaluated >= state.params.schedule_budget:
        state.budget_exhausted = True
        raise BudgetExhausted


def run_generation(state: RunState, phase: int) -> None:
    params = state.params
    _batch(state)
    parents = select_parents(state.population, phase, params, state.rng)
    children = next_generation(parents, state.instance, params, state.rng)
    state.evaluate(children)
    state.population = children
    _offer_candidates(state, children)
    state.generation += 1
    pop_best = min(ind.fitness for ind in children)
    state.fitness_trace.append(pop_best)
    if pop_best > state.candidates.best.fitness:
        state.stale_generations += 1
    else:
        state.stale_generations = 0

    _batch(state)
    state.reversed = not state.reversed
    target = state.instance
    switched = [switch_direction(ind, target) for ind in state.population]
    state.evaluate(switched)
    state.population = switched
    _offer_candidates(state, switched)


def phase_iteration(state: RunState, phase: int) -> RunState:
    """Run the configured number of generations of ``phase``.

    Each generation selects, recombines, mutates and evaluates, updates the
    candidate list, and then hands the population over to the opposite
    precedence direction. Returns early once the schedule budget is spent.
    """
    generations = state.params.phase1_generations if phase == 1 else state.params.phase2_generations
    for _ in range(generations):
        try:
            run_generation(state, phase)
        except BudgetExhausted:
            break
    return state


def inject_candidates(state: RunState) -> bool:
    """Replace the worst members by archived solutions if the population has deteriorated.

    Triggered when the population's best has been strictly worse than the
    archive's best for ``deterioration_patience`` consecutive generations.
    Returns whether an injection happened.
    """
    params = state.params
    pop = state.population
    if state.evaluated >= params.schedule_budget:
        state.budget_exhausted = True
        return False
    pop_best = min(ind.fitness for ind in pop)
    if pop_best <= state.candidates.best.fitness or state.stale_generations < params.deterioration_patience:
        return False
    count = min(len(state.candidates), params.elite_size, len(pop))
    if count == 0:
        return False
    incoming: list[Individual] = []
    for entry in state.candidates.entries[:count]:
        if state.reversed:
            chromosome = justified_order(entry.schedule, state.backward)
            schedule = state.decode(state.backward, chromosome)
            incoming.append(Individual(chromosome, schedule.makespan, True, schedule))
        else:
            incoming.append(replace(entry))
    worst = sorted(range(len(pop)), key=lambda i: (-pop[i].fitness, -i))[:count]
    for i, ind in zip(sorted(worst), incoming):
        pop[i] = ind
    state.stale_generations = 0
    log.debug("generation %d: injected %d archived solutions", state.generation, count)
    return True


def initial_state(instance: ProjectInstance, params: GaParams) -> RunState:
    """Seed the generator, build and evaluate a random initial population."""
    if instance.reversed:
        raise ContractViolation("the solver expects a forward-orientation instance")
    rng = random.Random(params.seed)
    state = RunState(
        forward=instance,
        backward=reverse_precedence(instance),
        params=params,
        rng=rng,
        population=[Individual(random_activity_list(instance, rng)) for _ in range(params.population_size)],
        candidates=CandidateList(params.candidate_list_capacity),
    )
    state.evaluate(state.population)
    _offer_candidates(state, state.population)
    return state


def run_2pga(instance: ProjectInstance, params: GaParams, instance_id: str | None = None) -> RunResult:
    """Evolve until the schedule budget is spent; return the best solution found."""
    state = initial_state(instance, params)
    while not state.budget_exhausted:
        phase_iteration(state, 1)
        phase_iteration(state, 2)
        inject_candidates(state)
    best = state.candidates.best
    report = validate_schedule(instance, best.schedule)
    if not report.feasible:
        raise SolverBug(f"solver produced an infeasible schedule: {report.violations()[:3]}")
    log.info(
        "%s: makespan %d after %d generations, %d schedules",
        instance_id or instance.name, best.fitness, state.generation, state.evaluated,
    )
    return RunResult(
        instance_id=instance_id or instance.name,
        seed=params.seed,
        best=Individual(best.chromosome, best.fitness, False),
        best_schedule=best.schedule,
        generations_run=state.generation,
        schedules_evaluated=state.evaluated,
        fitness_trace=list(state.fitness_trace),
    )

