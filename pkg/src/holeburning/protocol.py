"""Hole-burning schedules, closed-form oracles and Fock-state preparation.

A schedule is a sequence of qubit-resonator interactions, each followed by a
qubit readout that is post-selected on a fixed outcome. Detecting ``g`` after
time ``tau`` multiplies each amplitude c_n by cos(beta sqrt(n+1) tau), so a
time with beta sqrt(n+1) tau = pi/2 removes |n> exactly. Detecting ``e``
multiplies by -i sin(beta sqrt(n+1) tau) and raises the excitation by one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import (
    DEFAULT_TAIL_TOL,
    FockVector,
    NumberDistribution,
    coherent_amplitudes,
    coherent_state,
    fidelity_to_fock,
    number_distribution,
)
from .jc import CouplingParams, QubitOutcome, TruncationError, conditional_step

DEFAULT_SEARCH_DEPTH = 8
MIN_PREP_FIDELITY = 0.95
FIDELITY_TIE_TOL = 1e-12
MAX_BASIS_DOUBLINGS = 4


class PreparationError(RuntimeError):
    """The schedule search could not reach an acceptable fidelity."""


@dataclass(frozen=True)
class ScheduleStep:
    tau: float
    target_n: int | None
    outcome: QubitOutcome

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"interaction time must be positive, got {self.tau!r}")
        object.__setattr__(self, "outcome", QubitOutcome.parse(self.outcome))


@dataclass(frozen=True)
class Schedule:
    """Ordered interaction steps.

    For hole burning ``target_n`` is the number state removed by the step. For
    Fock preparation it is the index, in the initial coherent state, of the
    component whose amplitude the step sets to zero.
    """

    steps: tuple[ScheduleStep, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if len({s.outcome for s in steps}) > 1:
            raise ValueError("a schedule post-selects a single outcome throughout")
        object.__setattr__(self, "steps", steps)

    @property
    def M(self) -> int:
        return len(self.steps)

    @property
    def taus(self) -> list[float]:
        return [s.tau for s in self.steps]

    @property
    def total_duration(self) -> float:
        return math.fsum(self.taus)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class ProtocolResult:
    final_state: FockVector
    step_probs: list[float]
    success_prob: float
    distribution: NumberDistribution
    schedule: Schedule
    fidelity: float | None = None
    target_N: int | None = None
    extras: dict = field(default_factory=dict)


def hole_time(target_n: int, params: CouplingParams) -> float:
    """Interaction time that removes |target_n> on a ``g`` detection."""
    if target_n < 0:
        raise ValueError("target_n must be non-negative")
    return math.pi / (2.0 * params.beta * math.sqrt(target_n + 1))


def run_schedule(
    initial: FockVector, schedule: Schedule, params: CouplingParams, target_N: int | None = None
) -> ProtocolResult:
    """Execute ``schedule`` step by step on ``initial``."""
    state = initial
    step_probs = []
    for step in schedule.steps:
        state, prob = conditional_step(state, params, step.tau, step.outcome)
        step_probs.append(prob)
    # the initial coherent state is short of unit norm by its discarded tail
    success = initial.norm ** 2 * math.prod(step_probs)
    fidelity = None if target_N is None else fidelity_to_fock(state, target_N)
    return ProtocolResult(
        final_state=state,
        step_probs=step_probs,
        success_prob=success,
        distribution=number_distribution(state),
        schedule=schedule,
        fidelity=fidelity,
        target_N=target_N,
    )


def burn_holes(
    alpha: complex,
    targets: Sequence[int],
    params: CouplingParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> ProtocolResult:
    """Remove the number states ``targets`` from a coherent state, in the given order."""
    targets = [int(n) for n in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"hole targets must be distinct: {targets}")
    initial = coherent_state(alpha, tail_tol)
    for n in targets:
        if not 0 <= n < initial.dim:
            raise ValueError(f"target {n} outside the truncated basis (dim {initial.dim})")
    schedule = Schedule(tuple(ScheduleStep(hole_time(n, params), n, QubitOutcome.G) for n in targets))
    return run_with_growing_basis(alpha, tail_tol, lambda init: run_schedule(init, schedule, params))


def run_with_growing_basis(alpha, tail_tol, execute):
    """Call ``execute(coherent_state)`` and double the basis while the run hits the edge.

    Post-selection renormalizes the surviving amplitudes, so a schedule that
    removes most of the bulk magnifies the truncated tail.
    """
    initial = coherent_state(alpha, tail_tol)
    for _ in range(MAX_BASIS_DOUBLINGS):
        try:
            return execute(initial)
        except TruncationError:
            initial = coherent_state(alpha, tail_tol, dim=2 * initial.dim)
    return execute(initial)


def _dim_for(alpha, tail_tol, dim):
    return dim if dim is not None else coherent_state(alpha, tail_tol).dim


def _cos_product(n, taus, params):
    out = np.ones(n.shape)
    for tau in taus:
        out = out * np.cos(params.beta * np.sqrt(n + 1.0) * tau)
    return out


def _sin_product(n, taus, params):
    # step j (1-based) sees the component that started at n sitting at n+j-1
    out = np.ones(n.shape)
    for j, tau in enumerate(taus, start=1):
        out = out * np.sin(params.beta * np.sqrt(n + float(j)) * tau)
    return out


def holes_distribution_closed_form(
    alpha: complex,
    taus: Sequence[float],
    params: CouplingParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    dim: int | None = None,
) -> NumberDistribution:
    """Number distribution after ``g`` detections, straight from the product formula."""
    if len(taus) == 0:
        raise ValueError("taus must be non-empty")
    dim = _dim_for(alpha, tail_tol, dim)
    n = np.arange(dim)
    w = np.abs(coherent_amplitudes(alpha, dim)) ** 2 * _cos_product(n, taus, params) ** 2
    return NumberDistribution(w / w.sum())


def success_probability_closed_form(
    alpha: complex,
    taus: Sequence[float],
    params: CouplingParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    dim: int | None = None,
) -> float:
    """Probability that every readout of a ``g`` schedule returns ``g``."""
    dim = _dim_for(alpha, tail_tol, dim)
    n = np.arange(dim)
    w = np.abs(coherent_amplitudes(alpha, dim)) ** 2 * _cos_product(n, taus, params) ** 2
    return float(math.fsum(w))


def e_detection_amplitudes_closed_form(
    alpha: complex,
    taus: Sequence[float],
    params: CouplingParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    dim: int | None = None,
) -> FockVector:
    """Normalized resonator state after ``M = len(taus)`` consecutive ``e`` detections.

    The component that started at |n> ends at |n+M>; the returned vector has
    ``dim + M`` levels.
    """
    M = len(taus)
    if M == 0:
        raise ValueError("taus must be non-empty")
    dim = _dim_for(alpha, tail_tol, dim)
    n = np.arange(dim)
    amps = np.zeros(dim + M, dtype=complex)
    amps[M:] = coherent_amplitudes(alpha, dim) * (-1j) ** M * _sin_product(n, taus, params)
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("schedule annihilates every component")
    return FockVector(amps / norm, tail_tol)


def prep_success_probability(
    alpha: complex,
    taus: Sequence[float],
    params: CouplingParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
    dim: int | None = None,
) -> float:
    """Probability that every readout of an ``e`` schedule returns ``e``."""
    dim = _dim_for(alpha, tail_tol, dim)
    n = np.arange(dim)
    w = np.abs(coherent_amplitudes(alpha, dim)) ** 2 * _sin_product(n, taus, params) ** 2
    return float(math.fsum(w))


# --- Fock-state preparation -------------------------------------------------


def _search_multiples(weights, keep, kill_plan, search_depth):
    """Exhaustive search over integer multiples ``k_j`` for one kill assignment.

    ``kill_plan[j]`` is the squared Rabi factor (n'+j) of the component killed
    at step j, so tau_j = k_j pi / (beta sqrt(kill_plan[j])). Works in units of
    beta = 1; scaling beta rescales every tau and leaves the physics unchanged.
    Returns (fidelity, total beta*tau, ks) of the best candidate.
    """
    M = len(kill_plan)
    n = np.arange(weights.size, dtype=float)
    ks = np.array(list(itertools.product(range(1, search_depth + 1), repeat=M)), dtype=float)
    taus = ks * math.pi / np.sqrt(np.asarray(kill_plan, dtype=float))
    mult = np.ones((ks.shape[0], weights.size))
    for j in range(M):
        mult *= np.sin(np.outer(taus[:, j], np.sqrt(n + j + 1.0))) ** 2
    pop = mult * weights
    total = pop.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        fid = np.where(total > 0, pop[:, keep] / total, 0.0)
    durations = taus.sum(axis=1)
    best = _pick(fid, durations)
    return fid[best], durations[best], tuple(int(k) for k in ks[best])


def _pick(fid, durations):
    top = fid.max()
    tied = np.flatnonzero(fid >= top - FIDELITY_TIE_TOL)
    return tied[np.argmin(durations[tied])]


def _prepare(N, alpha, params, search_depth, tail_tol, keep, kills, assignments):
    """Search kill assignments and multiples, then run the winner sequentially."""
    if search_depth < 1:
        raise ValueError("search_depth must be >= 1")
    M = len(kills)
    initial = coherent_state(alpha, tail_tol)
    weights = np.abs(initial.amps) ** 2
    if keep >= weights.size:
        raise ValueError("kept component lies outside the truncated basis")

    best = None
    for assign in assignments:
        # assign[i] is the (1-based) step that kills kills[i]
        plan = [0] * M
        for n_kill, j in zip(kills, assign):
            plan[j - 1] = n_kill + j
        fid, dur, ks = _search_multiples(weights, keep, plan, search_depth)
        if best is None or fid > best[0] + FIDELITY_TIE_TOL or (
            abs(fid - best[0]) <= FIDELITY_TIE_TOL and dur < best[1]
        ):
            best = (fid, dur, ks, assign, plan)

    _, _, ks, assign, plan = best
    killed_at = {j: n_kill for n_kill, j in zip(kills, assign)}
    steps = tuple(
        ScheduleStep(
            tau=k * math.pi / (params.beta * math.sqrt(r)),
            target_n=killed_at[j],
            outcome=QubitOutcome.E,
        )
        for j, (k, r) in enumerate(zip(ks, plan), start=1)
    )
    schedule = Schedule(steps)
    result = run_with_growing_basis(alpha, tail_tol, lambda init: run_schedule(init, schedule, params, target_N=N))
    result.extras.update(multiples=list(ks), search_depth=search_depth)
    if result.fidelity < MIN_PREP_FIDELITY:
        raise PreparationError(
            f"best fidelity {result.fidelity:.4f} for |{N}> is below {MIN_PREP_FIDELITY}; "
            "raise search_depth or lower alpha"
        )
    return schedule, result


def prep_fock_strategy1(
    N: int,
    alpha: complex = 0.6,
    params: CouplingParams = CouplingParams(),
    search_depth: int = DEFAULT_SEARCH_DEPTH,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> tuple[Schedule, ProtocolResult]:
    """Prepare |N> with N ``e`` detections.

    The vacuum component of the coherent state is carried up to |N>. Step j
    removes the component that started at |j>, which sits at |2j-1> during
    that step, so tau_j = k_j pi / (beta sqrt(2j)).
    """
    if not 1 <= N <= 5:
        raise ValueError("strategy 1 supports 1 <= N <= 5")
    kills = list(range(1, N + 1))
    identity = [tuple(range(1, N + 1))]
    return _prepare(N, alpha, params, search_depth, tail_tol, keep=0, kills=kills, assignments=identity)


def prep_fock_strategy2(
    N: int,
    alpha: complex = 0.6,
    params: CouplingParams = CouplingParams(),
    search_depth: int = DEFAULT_SEARCH_DEPTH,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> tuple[Schedule, ProtocolResult]:
    """Prepare |N> with M = ceil(N/2) ``e`` detections.

    The component that started at |N-M> is kept. Every component below it is
    removed, plus the one just above it when N is odd. Which step removes which
    component is searched along with the multiples.
    """
    if N < 2:
        raise ValueError("strategy 2 needs N >= 2")
    M = (N + 1) // 2
    keep = N - M
    kills = list(range(keep))
    if N % 2:
        kills.append(keep + 1)
    assignments = list(itertools.permutations(range(1, M + 1)))
    return _prepare(N, alpha, params, search_depth, tail_tol, keep=keep, kills=kills, assignments=assignments)
