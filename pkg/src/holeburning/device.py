"""Map Cooper-pair-box / resonator device parameters onto the effective coupling model.

Energies are angular frequencies in rad/s (hbar = 1). Josephson energies are
quoted in the literature as cyclic frequencies, so :class:`DeviceParams`
takes ``ej0`` in rad/s and callers convert with :func:`hz_to_rad`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from scipy import constants

SMALL_ANGLE_LIMIT = 0.1
WORKING_POINT_TOL = 1e-6

# coherence times quoted for the charge qubit and the mechanical mode
T_QUBIT = 500e-9
T_NR = 160e-6


class WorkingPointError(ValueError):
    """The equilibrium flux does not null cos(pi Phi_b / Phi_0)."""


class SmallAngleWarning(UserWarning):
    pass


def hz_to_rad(f: float) -> float:
    return 2.0 * math.pi * f


def rad_to_hz(w: float) -> float:
    return w / (2.0 * math.pi)


def flux_quantum(h: float = constants.h, e: float = constants.e) -> float:
    """Superconducting flux quantum h/2e in webers."""
    return h / (2.0 * e)


def total_flux(phi_b: float, b_field: float, ell: float, x: float) -> float:
    """Flux through the central loop for resonator displacement ``x``."""
    return phi_b + b_field * ell * x


def charging_energy(c1: float, cj0: float) -> float:
    """Charging energy e^2/(C1 + 4 C_J) as an angular frequency."""
    if c1 < 0 or cj0 <= 0:
        raise ValueError("capacitances must be positive")
    return constants.e**2 / (c1 + 4.0 * cj0) / constants.hbar


def gate_charge(c1: float, v1: float) -> float:
    return c1 * v1 / (2.0 * constants.e)


def resonant_gate_voltage(c1: float, cj0: float, omega: float) -> float:
    """Gate voltage that puts the qubit splitting on resonance with ``omega``."""
    n1 = 0.5 + omega / (8.0 * charging_energy(c1, cj0))
    return n1 * 2.0 * constants.e / c1


@dataclass(frozen=True)
class DeviceParams:
    ej0: float  # rad/s
    c1: float
    cj0: float
    v1: float
    phi_x: float = 0.0
    phi_b: float = 0.5 * flux_quantum()
    b_field: float = 0.1
    ell: float = 30e-6
    x0: float = 500e-15
    omega: float | None = None

    def __post_init__(self):
        for name in ("ej0", "c1", "cj0", "b_field", "ell", "x0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.v1 < 0:
            raise ValueError("v1 must be non-negative")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")


@dataclass(frozen=True)
class EffectiveModel:
    lambda0: float
    omega0: float
    n1: float
    ec: float
    small_angle: float

    @property
    def beta(self) -> float:
        """Coupling for the dynamics (beta = -lambda0, used by magnitude)."""
        return abs(self.lambda0)


def effective_model(params: DeviceParams, check: bool = True) -> EffectiveModel:
    """Linearized, working-point coupling and qubit splitting for ``params``.

    Raises :class:`WorkingPointError` unless cos(pi Phi_b / Phi_0) vanishes,
    and warns when the small-angle expansion of the flux term is doubtful.
    """
    phi0 = flux_quantum()
    if check and abs(math.cos(math.pi * params.phi_b / phi0)) > WORKING_POINT_TOL:
        raise WorkingPointError(
            f"phi_b = {params.phi_b:.6e} Wb is not at a working point (odd multiple of phi0/2)"
        )
    small_angle = math.pi * params.b_field * params.ell * params.x0 / phi0
    if small_angle >= SMALL_ANGLE_LIMIT:
        warnings.warn(
            f"pi B l x0 / phi0 = {small_angle:.3g} is not small; linear coupling is inaccurate",
            SmallAngleWarning,
            stacklevel=2,
        )
    lambda0 = -4.0 * params.ej0 * math.cos(math.pi * params.phi_x / phi0) * small_angle
    ec = charging_energy(params.c1, params.cj0)
    n1 = gate_charge(params.c1, params.v1)
    return EffectiveModel(
        lambda0=lambda0,
        omega0=8.0 * ec * (n1 - 0.5),
        n1=n1,
        ec=ec,
        small_angle=small_angle,
    )


@dataclass(frozen=True)
class BudgetCheck:
    feasible_steps: int
    margin: float
    total_duration: float
    limit: float
    n_steps: int

    @property
    def within_budget(self) -> bool:
        return self.feasible_steps >= self.n_steps


def decoherence_budget(taus: Sequence[float], t_qubit: float = T_QUBIT, t_nr: float = T_NR) -> BudgetCheck:
    """How many leading steps of a schedule finish before the shorter coherence time.

    ``margin`` is the unused fraction of that time after the whole schedule; it
    goes negative once the schedule overruns.
    """
    if not (t_qubit > 0 and t_nr > 0):
        raise ValueError("coherence times must be positive")
    limit = min(t_qubit, t_nr)
    elapsed = 0.0
    feasible = 0
    for tau in taus:
        elapsed += tau
        if elapsed >= limit:
            break
        feasible += 1
    total = math.fsum(taus)
    return BudgetCheck(
        feasible_steps=feasible,
        margin=1.0 - total / limit,
        total_duration=total,
        limit=limit,
        n_steps=len(taus),
    )


def uniform_budget(tau: float, t_qubit: float = T_QUBIT, t_nr: float = T_NR) -> int:
    """Number of equal-length steps that fit in the shorter coherence time."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    return math.floor(min(t_qubit, t_nr) / tau)
