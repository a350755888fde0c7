"""Resonant Jaynes-Cummings evolution of a qubit coupled to one oscillator mode.

The interaction-picture Hamiltonian ``beta (a^dag sigma_- + a sigma_+)`` splits
into 2x2 blocks {|g,n>, |e,n+1>}, each rotating at ``beta sqrt(n+1)``. The
propagator is applied block by block from its closed form, so evolution is
exact to rounding for any time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fock import DEFAULT_TAIL_TOL, EmptyBranchError, FockVector, normalize

EMPTY_BRANCH_NORM2 = 1e-30
LEAKAGE_FACTOR = 100.0


class TruncationError(RuntimeError):
    """Population reached the top of the truncated basis."""


class QubitOutcome(enum.Enum):
    G = "g"
    E = "e"

    @classmethod
    def parse(cls, value) -> QubitOutcome:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class CouplingParams:
    """Coupling strength ``beta`` (rad/s, or 1 when time is measured in 1/beta)."""

    beta: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta!r}")


@dataclass(frozen=True)
class JointState:
    g_amps: np.ndarray
    e_amps: np.ndarray
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        g = np.array(self.g_amps, dtype=complex)
        e = np.array(self.e_amps, dtype=complex)
        if g.shape != e.shape or g.ndim != 1:
            raise ValueError("qubit sectors must share one 1-d truncation")
        g.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "g_amps", g)
        object.__setattr__(self, "e_amps", e)

    @property
    def dim(self) -> int:
        return self.g_amps.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.g_amps) ** 2) + np.sum(np.abs(self.e_amps) ** 2)))

    def as_vector(self) -> np.ndarray:
        """Flat vector ordered (g_0..g_{D-1}, e_0..e_{D-1})."""
        return np.concatenate([self.g_amps, self.e_amps])


def rabi_frequency(params: CouplingParams, n) -> np.ndarray | float:
    """Rotation rate beta*sqrt(n+1) of the {|g,n>, |e,n+1>} doublet."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("number index must be non-negative")
    out = params.beta * np.sqrt(n + 1.0)
    return float(out) if out.ndim == 0 else out


def embed(qubit: QubitOutcome, nr: FockVector) -> JointState:
    """Product state |qubit> (x) |nr>, padded by one level for the a^dag shift."""
    qubit = QubitOutcome.parse(qubit)
    full = nr.padded(nr.dim + 1).amps
    empty = np.zeros_like(full)
    if qubit is QubitOutcome.G:
        return JointState(full, empty, nr.tail_tol)
    return JointState(empty, full, nr.tail_tol)


def _check_edge(state: JointState) -> None:
    top = np.sum(np.abs(state.g_amps[-2:]) ** 2) + np.sum(np.abs(state.e_amps[-2:]) ** 2)
    if top > LEAKAGE_FACTOR * state.tail_tol:
        raise TruncationError(
            f"population {top:.3e} in the top two levels of a dim-{state.dim} basis; "
            "increase the truncation"
        )


def jc_propagate(state: JointState, params: CouplingParams, t: float, check_edge: bool = True) -> JointState:
    """Evolve under the resonant interaction for time ``t``.

    ``|e,0>`` and the top ``|g,D-1>`` (whose partner lies outside the basis)
    are left unchanged; the truncated Hamiltonian has them as zero modes.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if check_edge:
        _check_edge(state)
    g, e = state.g_amps, state.e_amps
    D = state.dim
    theta = params.beta * t * np.sqrt(np.arange(1, D))
    c, s = np.cos(theta), np.sin(theta)

    g_new = g.copy()
    e_new = e.copy()
    g_new[:-1] = c * g[:-1] - 1j * s * e[1:]
    e_new[1:] = c * e[1:] - 1j * s * g[:-1]
    return JointState(g_new, e_new, state.tail_tol)


def measure_qubit(state: JointState, outcome: QubitOutcome) -> tuple[FockVector, float]:
    """Project onto a qubit outcome; return the unnormalized resonator branch and its weight."""
    outcome = QubitOutcome.parse(outcome)
    amps = state.g_amps if outcome is QubitOutcome.G else state.e_amps
    branch = FockVector(amps, state.tail_tol)
    prob = branch.norm ** 2
    if prob < EMPTY_BRANCH_NORM2:
        raise EmptyBranchError(f"outcome {outcome.name} has probability {prob:.3e}")
    return branch, prob


def conditional_step(
    nr: FockVector, params: CouplingParams, t: float, outcome: QubitOutcome
) -> tuple[FockVector, float]:
    """Couple a fresh ground-state qubit for time ``t`` and post-select ``outcome``.

    Returns the renormalized resonator state and the step's detection
    probability (relative to a normalized input). A ``G`` step keeps the
    input dimension; an ``E`` step grows it by one.
    """
    outcome = QubitOutcome.parse(outcome)
    unit, _ = normalize(nr)
    joint = jc_propagate(embed(QubitOutcome.G, unit), params, t)
    branch, prob = measure_qubit(joint, outcome)
    if outcome is QubitOutcome.G:
        # the padding level is a zero mode of the truncated propagator
        branch = FockVector(branch.amps[: nr.dim], branch.tail_tol)
    state, _ = normalize(branch)
    return state, prob
