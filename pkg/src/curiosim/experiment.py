"""Seeded trials, multi-trial batches and cross-trial aggregation.

Visit counts tally the position occupied *before* each action, so the start
cell is counted at ``t = 0`` and every trial's counts sum to ``steps``.
Learning curves hold the value of each tracked cell *after* the update of
each step: ``curves[t]`` is the value once ``t + 1`` updates have happened.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from curiosim.agent import AgentConfig, AgentState, agent_step
from curiosim.gridworld import DomainSpec, GridPosition, make_scenario

STD_CONVENTION = "sample (ddof=1); 0 when trials == 1"
VISIT_CONVENTION = "pre-action position counted at each timestep t = 0..steps-1"
THREADS_ENV = "CURIO_THREADS"


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    config: AgentConfig = field(default_factory=AgentConfig)
    trials: int = 30
    steps: int = 5000
    base_seed: int = 0
    snapshot_every: Optional[int] = None
    variant: str = "original"

    def __post_init__(self):
        if self.trials <= 0 or self.steps <= 0:
            raise ValueError("trials and steps must be positive")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError(f"base_seed must be an unsigned 64-bit integer, got {self.base_seed}")
        if self.snapshot_every is not None and self.snapshot_every <= 0:
            raise ValueError("snapshot_every must be positive")
        make_scenario(self.scenario)

    @property
    def domain(self) -> DomainSpec:
        return make_scenario(self.scenario)

    def tracked_cells(self) -> list[GridPosition]:
        """The inducing cell followed by every potential target cell."""
        d = self.domain
        return [d.inducing_pos, *d.target_cells()]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "variant": self.variant,
            "trials": self.trials,
            "steps": self.steps,
            "base_seed": self.base_seed,
            "snapshot_every": self.snapshot_every,
            "config": self.config.to_dict(),
        }


@dataclass
class TrialLog:
    trial_index: int
    visit_counts: np.ndarray
    v_final: np.ndarray
    curves: np.ndarray  # (steps, n_tracked)
    first_target_visits: int
    subsequent_target_visits: int
    inducing_visits: int
    induction_count: int
    replaced_unvisited: int
    unvisited_at_end: int
    snapshots: list = field(default_factory=list)  # (t, V copy) pairs

    @property
    def target_visits(self) -> int:
        return self.first_target_visits + self.subsequent_target_visits


def trial_rng(base_seed: int, trial_index: int) -> np.random.Generator:
    """PCG64 stream keyed on ``(base_seed, trial_index)`` via ``SeedSequence``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([base_seed, trial_index])))


def run_trial(spec: ExperimentSpec, trial_index: int) -> TrialLog:
    if not 0 <= trial_index < spec.trials:
        raise ValueError(f"trial_index {trial_index} outside 0..{spec.trials - 1}")
    domain = spec.domain
    config = spec.config
    rng = trial_rng(spec.base_seed, trial_index)
    state = AgentState.initial(domain)

    tracked = np.array([domain.index(p) for p in spec.tracked_cells()])
    curves = np.empty((spec.steps, len(tracked)))
    visits = np.zeros(domain.shape, dtype=np.int64)
    v_flat = state.v.reshape(-1)
    first = subsequent = inductions = replaced = 0
    snapshots = []

    for t in range(spec.steps):
        visits[state.pos] += 1
        trace = agent_step(domain, state, config, rng, t)
        inductions += trace.induced
        replaced += trace.replaced_unvisited
        if trace.satisfied:
            if trace.first_visit:
                first += 1
            else:
                subsequent += 1
        curves[t] = v_flat[tracked]
        if spec.snapshot_every and (t + 1) % spec.snapshot_every == 0:
            snapshots.append((t, state.v.copy()))

    pending = int(state.curiosity is not None and not state.curiosity.visited)
    return TrialLog(
        trial_index=trial_index,
        visit_counts=visits,
        v_final=state.v.copy(),
        curves=curves,
        first_target_visits=first,
        subsequent_target_visits=subsequent,
        inducing_visits=int(visits[domain.inducing_pos]),
        induction_count=inductions,
        replaced_unvisited=replaced,
        unvisited_at_end=pending,
        snapshots=snapshots,
    )


@dataclass
class AggregateResult:
    name: str
    spec: ExperimentSpec
    tracked_cells: list
    mean_visits: np.ndarray
    std_visits: np.ndarray
    mean_v: np.ndarray
    std_v: np.ndarray
    mean_curves: np.ndarray
    std_curves: np.ndarray
    per_trial_target_visits: list
    per_trial_first_visits: list
    per_trial_subsequent_visits: list
    per_trial_inducing_visits: list
    per_trial_inducing_value: list
    per_trial_v_argmax: list
    example_visits: np.ndarray  # trial 0, for single-trial panels
    example_v: np.ndarray
    example_snapshots: list = field(default_factory=list)
    std_convention: str = STD_CONVENTION

    @property
    def trials(self) -> int:
        return self.spec.trials

    @property
    def steps(self) -> int:
        return self.spec.steps

    @property
    def target_visit_mean(self) -> float:
        return float(np.mean(self.per_trial_target_visits))

    @property
    def target_visit_std(self) -> float:
        return _sample_std(np.asarray(self.per_trial_target_visits, dtype=float))

    @property
    def first_visit_mean(self) -> float:
        return float(np.mean(self.per_trial_first_visits))

    @property
    def first_visit_std(self) -> float:
        return _sample_std(np.asarray(self.per_trial_first_visits, dtype=float))

    @property
    def subsequent_visit_mean(self) -> float:
        return float(np.mean(self.per_trial_subsequent_visits))

    @property
    def subsequent_visit_std(self) -> float:
        return _sample_std(np.asarray(self.per_trial_subsequent_visits, dtype=float))


def _sample_std(a: np.ndarray, axis=None):
    # a single sample has no spread to estimate; report 0 rather than NaN
    if axis is None:
        return float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    if a.shape[axis] < 2:
        return np.zeros(np.delete(a.shape, axis))
    return np.std(a, axis=axis, ddof=1)


def aggregate(spec: ExperimentSpec, logs: list[TrialLog], name: Optional[str] = None) -> AggregateResult:
    """Reduce trial logs (in trial-index order, whatever order they ran in)."""
    logs = sorted(logs, key=lambda log: log.trial_index)
    if len(logs) != spec.trials:
        raise ValueError(f"expected {spec.trials} trial logs, got {len(logs)}")
    domain = spec.domain
    visits = np.stack([log.visit_counts for log in logs]).astype(float)
    values = np.stack([log.v_final for log in logs])
    curves = np.stack([log.curves for log in logs])
    return AggregateResult(
        name=name or f"{spec.scenario}-{spec.variant}",
        spec=spec,
        tracked_cells=spec.tracked_cells(),
        mean_visits=visits.mean(axis=0),
        std_visits=_sample_std(visits, axis=0),
        mean_v=values.mean(axis=0),
        std_v=_sample_std(values, axis=0),
        mean_curves=curves.mean(axis=0),
        std_curves=_sample_std(curves, axis=0),
        per_trial_target_visits=[log.target_visits for log in logs],
        per_trial_first_visits=[log.first_target_visits for log in logs],
        per_trial_subsequent_visits=[log.subsequent_target_visits for log in logs],
        per_trial_inducing_visits=[log.inducing_visits for log in logs],
        per_trial_inducing_value=[float(log.v_final[domain.inducing_pos]) for log in logs],
        per_trial_v_argmax=[domain.position(int(np.argmax(log.v_final))) for log in logs],
        example_visits=logs[0].visit_counts.copy(),
        example_v=logs[0].v_final.copy(),
        example_snapshots=logs[0].snapshots,
    )


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    return max(1, n)


def run_trials(spec: ExperimentSpec, workers: Optional[int] = None) -> list[TrialLog]:
    workers = worker_count() if workers is None else workers
    indices = range(spec.trials)
    if workers <= 1 or spec.trials == 1:
        return [run_trial(spec, i) for i in indices]
    with ProcessPoolExecutor(max_workers=min(workers, spec.trials)) as pool:
        return list(pool.map(run_trial, [spec] * spec.trials, indices))


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None,
                   name: Optional[str] = None) -> AggregateResult:
    return aggregate(spec, run_trials(spec, workers), name=name)


GEOMETRY_SCENARIOS = ("primary", "wide", "wide_no_junction", "tall_low", "tall_mid")
PRIMARY_MODIFICATIONS = (
    "ablate-directedness",
    "ablate-cessation",
    "ablate-voluntary",
    "ablate-aversive",
    "positive-quality",
)


def experiment_spec(scenario: str, variant: str = "original", trials: int = 30,
                    steps: int = 5000, base_seed: int = 0, **config_overrides) -> ExperimentSpec:
    return ExperimentSpec(
        scenario=scenario,
        config=AgentConfig.for_variant(variant, **config_overrides),
        trials=trials,
        steps=steps,
        base_seed=base_seed,
        variant=variant,
    )


def scenario_suite(trials: int = 30, steps: int = 5000, base_seed: int = 0) -> dict[str, ExperimentSpec]:
    """Every experiment of the case study: five geometries plus five primary-domain variants."""
    suite = {f"{s}-original": experiment_spec(s, "original", trials, steps, base_seed)
             for s in GEOMETRY_SCENARIOS}
    for variant in PRIMARY_MODIFICATIONS:
        suite[f"primary-{variant}"] = experiment_spec("primary", variant, trials, steps, base_seed)
    return suite
