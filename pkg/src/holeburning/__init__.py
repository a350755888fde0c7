"""Conditional hole burning in the phonon-number distribution of a nanomechanical
resonator coupled to a Cooper-pair-box qubit."""

__version__ = "0.1.0"

from .device import DeviceParams, EffectiveModel, decoherence_budget, effective_model, flux_quantum
from .fock import (
    EmptyBranchError,
    FockVector,
    NumberDistribution,
    auto_dim,
    coherent_state,
    fidelity_to_fock,
    normalize,
    number_distribution,
)
from .jc import CouplingParams, JointState, QubitOutcome, conditional_step, embed, jc_propagate, measure_qubit
from .protocol import (
    ProtocolResult,
    Schedule,
    ScheduleStep,
    burn_holes,
    hole_time,
    prep_fock_strategy1,
    prep_fock_strategy2,
)

__all__ = [
    "CouplingParams",
    "DeviceParams",
    "EffectiveModel",
    "EmptyBranchError",
    "FockVector",
    "JointState",
    "NumberDistribution",
    "ProtocolResult",
    "QubitOutcome",
    "Schedule",
    "ScheduleStep",
    "auto_dim",
    "burn_holes",
    "coherent_state",
    "conditional_step",
    "decoherence_budget",
    "effective_model",
    "embed",
    "fidelity_to_fock",
    "flux_quantum",
    "hole_time",
    "jc_propagate",
    "measure_qubit",
    "normalize",
    "number_distribution",
    "prep_fock_strategy1",
    "prep_fock_strategy2",
]
