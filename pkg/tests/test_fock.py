import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holeburning.fock import (
    MIN_DIM,
    EmptyBranchError,
    FockVector,
    auto_dim,
    coherent_state,
    fidelity_to_fock,
    normalize,
    number_distribution,
)

# smallest n0 with sum_{n >= n0} Poisson(mean) < 1e-12, from a 40-digit mpmath summation
TAIL_START_1E12 = {4.0: 26, 0.36: 11, 25.0: 69}


def poisson(mean, n):
    return math.exp(-mean + n * math.log(mean) - math.lgamma(n + 1)) if mean > 0 else float(n == 0)


def test_vacuum():
    s = coherent_state(0)
    assert s.dim == MIN_DIM
    assert s.amps[0] == 1
    assert np.all(s.amps[1:] == 0)


@pytest.mark.parametrize("alpha, p0", [(2.0, math.exp(-4)), (0.6, math.exp(-0.36))])
def test_coherent_vacuum_population(alpha, p0):
    dist = number_distribution(coherent_state(alpha))
    assert dist[0] == pytest.approx(p0, rel=1e-13)


@pytest.mark.parametrize("alpha", [0.3, 0.6, 2.0, 1.5 * cmath.exp(0.7j), 4.0])
def test_poisson_property(alpha):
    s = coherent_state(alpha)
    mean = abs(alpha) ** 2
    expected = np.array([poisson(mean, n) for n in range(s.dim)])
    assert np.max(np.abs(number_distribution(s).p - expected)) < 1e-12
    assert abs(s.norm**2 - 1) < 1e-12


def test_coherent_phase_pattern():
    s = coherent_state(1.2 * cmath.exp(0.4j))
    phases = np.angle(s.amps[1:6] / s.amps[:5])
    np.testing.assert_allclose(phases, 0.4, atol=1e-12)


def test_coherent_rejects_bad_input():
    with pytest.raises(ValueError):
        coherent_state(complex(float("nan"), 0))
    with pytest.raises(ValueError):
        coherent_state(1.0, tail_tol=1e-3)


@pytest.mark.parametrize("mean", sorted(TAIL_START_1E12))
def test_auto_dim_matches_tail_sum(mean):
    assert auto_dim(math.sqrt(mean), 0, 1e-12) == max(MIN_DIM, TAIL_START_1E12[mean])


def test_auto_dim_floor_and_shift():
    assert auto_dim(0, 0) == 16
    assert auto_dim(2.0, 5, 1e-12) == TAIL_START_1E12[4.0] + 5
    # alpha = 0.6 tail starts at 11, so a shift of 5 still sits on the floor
    assert auto_dim(0.6, 5, 1e-12) == 16
    assert auto_dim(0.6, 9, 1e-12) == 20
    with pytest.raises(ValueError):
        auto_dim(1.0, -1)


def test_truncation_edge_is_below_tolerance():
    for alpha in (0.6, 2.0, 3.5):
        s = coherent_state(alpha)
        assert abs(s.amps[-1]) ** 2 <= s.tail_tol


def test_truncation_stability():
    s = coherent_state(2.0)
    big = coherent_state(2.0, dim=2 * s.dim)
    a = number_distribution(normalize(s)[0]).p
    b = number_distribution(normalize(big)[0]).p[: s.dim]
    assert np.max(np.abs(a - b)) < s.tail_tol


def test_normalize_examples():
    unit, norm = normalize(FockVector([2, 0, 0]))
    assert norm == 2
    np.testing.assert_array_equal(unit.amps, [1, 0, 0])

    unit, norm = normalize(FockVector([1, 1j]))
    assert norm == pytest.approx(math.sqrt(2))
    np.testing.assert_allclose(unit.amps, [1 / math.sqrt(2), 1j / math.sqrt(2)])

    with pytest.raises(EmptyBranchError):
        normalize(FockVector([0, 0, 0]))


def test_fock_vector_is_immutable():
    s = FockVector([1, 0])
    with pytest.raises(ValueError):
        s.amps[0] = 2


def test_fock_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        FockVector([1, float("inf")])


def test_number_distribution_examples():
    assert number_distribution(FockVector.basis(0)).p[0] == 1
    amps = np.zeros(6, dtype=complex)
    amps[3] = (1 + 1j) / math.sqrt(2)
    p = number_distribution(FockVector(amps)).p
    assert p[3] == pytest.approx(1, abs=1e-15)
    assert p.sum() == pytest.approx(1, abs=1e-12)


def test_fidelity_to_fock():
    three = FockVector.basis(3, 8)
    assert fidelity_to_fock(three, 3) == 1
    assert fidelity_to_fock(three, 2) == 0
    assert fidelity_to_fock(coherent_state(0.6), 0) == pytest.approx(math.exp(-0.36), rel=1e-12)
    with pytest.raises(ValueError):
        fidelity_to_fock(three, 8)


complex_amps = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=30
)


@settings(max_examples=200, deadline=None)
@given(complex_amps)
def test_normalize_gives_unit_norm(amps):
    s = FockVector(amps)
    if s.norm < 1e-100:
        return
    unit, norm = normalize(s)
    assert abs(unit.norm - 1) < 1e-12
    assert norm == pytest.approx(s.norm)
    assert abs(number_distribution(unit).p.sum() - 1) < 1e-12


@settings(max_examples=200, deadline=None)
@given(complex_amps, st.floats(0, 2 * math.pi))
def test_global_phase_invariance(amps, phase):
    s = FockVector(amps)
    # |e^{i phi}| is exactly 1 only for the four quarter turns; test those bitwise
    for unit in (1, 1j, -1, -1j):
        rotated = FockVector(np.asarray(s.amps) * unit)
        np.testing.assert_array_equal(number_distribution(rotated).p, number_distribution(s).p)
    rotated = FockVector(np.asarray(s.amps) * cmath.exp(1j * phase))
    np.testing.assert_allclose(number_distribution(rotated).p, number_distribution(s).p, rtol=1e-13, atol=0)
