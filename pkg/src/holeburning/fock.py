"""Truncated Fock-space states of a single bosonic mode."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

DEFAULT_TAIL_TOL = 1e-12
MIN_DIM = 16


class EmptyBranchError(ValueError):
    """A post-selected branch carries no probability weight."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes c_0..c_{D-1} over the number basis.

    The vector may be unnormalized; its squared norm is then the weight of the
    branch it came from.
    """

    amps: np.ndarray
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        amps = _frozen(np.atleast_1d(self.amps))
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("FockVector needs a non-empty 1-d amplitude array")
        if not np.all(np.isfinite(amps)):
            raise ValueError("FockVector amplitudes must be finite")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    @classmethod
    def basis(cls, n: int, dim: int = MIN_DIM, tail_tol: float = DEFAULT_TAIL_TOL) -> FockVector:
        if not 0 <= n < dim:
            raise ValueError(f"basis index {n} outside dimension {dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[n] = 1.0
        return cls(amps, tail_tol)

    def padded(self, dim: int) -> FockVector:
        if dim < self.dim:
            raise ValueError("cannot pad to a smaller dimension")
        amps = np.zeros(dim, dtype=complex)
        amps[: self.dim] = self.amps
        return FockVector(amps, self.tail_tol)


@dataclass(frozen=True)
class NumberDistribution:
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return self.p.size

    def __getitem__(self, n):
        return self.p[n]

    def mean(self) -> float:
        return float(np.dot(np.arange(self.p.size), self.p))


def auto_dim(alpha: complex, extra_shift: int = 0, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest basis size whose Poisson tail beyond ``D - extra_shift`` is below ``tail_tol``."""
    if extra_shift < 0:
        raise ValueError("extra_shift must be non-negative")
    mean = abs(complex(alpha)) ** 2
    n0 = 0
    if mean > 0:
        # poisson.sf(k) = P(X > k), so the tail from n0 on is sf(n0 - 1)
        n0 = int(poisson.isf(tail_tol, mean))
        while poisson.sf(n0 - 1, mean) >= tail_tol:
            n0 += 1
        while n0 > 0 and poisson.sf(n0 - 2, mean) < tail_tol:
            n0 -= 1
    return max(MIN_DIM, n0 + extra_shift)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Raw coherent-state amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < dim."""
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    r, phi = abs(alpha), np.angle(alpha)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * phi * n)


def coherent_state(
    alpha: complex,
    tail_tol: float = DEFAULT_TAIL_TOL,
    extra_shift: int = 0,
    dim: int | None = None,
) -> FockVector:
    """Coherent state |alpha> on a basis sized by :func:`auto_dim`.

    One guard level is reserved so the top retained population is itself
    below ``tail_tol``. The amplitudes are the exact Poisson ones and are not
    renormalized, so the norm deficit is the discarded tail.
    """
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    if not 0 < tail_tol <= 1e-6:
        raise ValueError("tail_tol must lie in (0, 1e-6]")
    if dim is None:
        dim = auto_dim(alpha, extra_shift + 1, tail_tol)
    return FockVector(coherent_amplitudes(alpha, dim), tail_tol)


def normalize(state: FockVector) -> tuple[FockVector, float]:
    """Return the unit-norm state and the norm it had before."""
    norm = state.norm
    if not norm > 0:
        raise EmptyBranchError("cannot normalize a zero-norm state")
    return FockVector(state.amps / norm, state.tail_tol), norm


def number_distribution(state: FockVector) -> NumberDistribution:
    return NumberDistribution(np.abs(state.amps) ** 2)


def fidelity_to_fock(state: FockVector, N: int) -> float:
    """Population of |N> in the normalized state."""
    if not 0 <= N < state.dim:
        raise ValueError(f"N={N} outside basis of dimension {state.dim}")
    unit, _ = normalize(state)
    return float(abs(unit.amps[N]) ** 2)
