import math
import warnings

import pytest

from holeburning.device import (
    DeviceParams,
    SmallAngleWarning,
    WorkingPointError,
    charging_energy,
    decoherence_budget,
    effective_model,
    flux_quantum,
    hz_to_rad,
    rad_to_hz,
    resonant_gate_voltage,
    total_flux,
    uniform_budget,
)

# exact SI values
H = 6.62607015e-34
E_CHARGE = 1.602176634e-19
PHI0 = H / (2 * E_CHARGE)


def device(**kw):
    base = dict(ej0=hz_to_rad(5e9), c1=0.5e-15, cj0=0.5e-15, v1=0.0, phi_x=0.0, phi_b=PHI0 / 2)
    base.update(kw)
    return DeviceParams(**base)


def test_flux_quantum():
    assert flux_quantum() == pytest.approx(2.0678338e-15, rel=1e-7)
    assert flux_quantum() == pytest.approx(PHI0, rel=1e-15)
    assert flux_quantum(e=2 * E_CHARGE) == pytest.approx(PHI0 / 2, rel=1e-15)
    assert flux_quantum() == flux_quantum()


def test_total_flux():
    assert total_flux(1e-15, 0.1, 30e-6, 0.0) == 1e-15
    assert total_flux(0.0, 0.1, 30e-6, 500e-15) == pytest.approx(1.5e-18, rel=1e-12)
    a = total_flux(0.0, 0.1, 30e-6, 200e-15)
    b = total_flux(0.0, 0.1, 30e-6, 300e-15)
    assert a + b == pytest.approx(total_flux(0.0, 0.1, 30e-6, 500e-15), rel=1e-12)


def test_charging_energy():
    base = charging_energy(1e-15, 0.25e-15)
    assert charging_energy(2e-15, 0.5e-15) == pytest.approx(base / 2, rel=1e-14)
    assert charging_energy(0.0, 1e-15) == pytest.approx(E_CHARGE**2 / 4e-15 / (H / (2 * math.pi)), rel=1e-12)
    # 2 fF total capacitance lands at tens of GHz
    f = rad_to_hz(charging_energy(1e-15, 0.25e-15))
    assert f == pytest.approx(E_CHARGE**2 / 2e-15 / H, rel=1e-12)
    assert 1e9 < f < 1e11
    with pytest.raises(ValueError):
        charging_energy(1e-15, 0.0)


def test_coupling_at_quoted_parameters():
    m = effective_model(device())
    expected_hz = 4 * 5e9 * math.pi * 0.1 * 30e-6 * 500e-15 / PHI0
    assert rad_to_hz(m.beta) == pytest.approx(expected_hz, rel=1e-12)
    assert rad_to_hz(m.beta) == pytest.approx(45.58e6, rel=1e-3)
    assert m.lambda0 < 0
    assert m.small_angle == pytest.approx(math.pi * 1.5e-18 / PHI0, rel=1e-12)


def test_coupling_switched_off():
    m = effective_model(device(phi_x=PHI0 / 2))
    assert abs(m.lambda0) < 1e-16 * effective_model(device()).beta * 1e3


def test_degeneracy_point():
    c1 = 0.5e-15
    v1 = 0.5 * 2 * E_CHARGE / c1
    m = effective_model(device(c1=c1, v1=v1))
    assert m.n1 == pytest.approx(0.5, rel=1e-14)
    assert abs(m.omega0) < 1e-3


def test_omega0_sign_flips_across_degeneracy():
    v_half = 0.5 * 2 * E_CHARGE / 0.5e-15
    assert effective_model(device(v1=0.9 * v_half)).omega0 < 0
    assert effective_model(device(v1=1.1 * v_half)).omega0 > 0


def test_resonant_gate_voltage():
    omega = hz_to_rad(100e6)
    v1 = resonant_gate_voltage(0.5e-15, 0.5e-15, omega)
    assert effective_model(device(v1=v1)).omega0 == pytest.approx(omega, rel=1e-9)


@pytest.mark.parametrize("field", ["b_field", "ell", "x0", "ej0"])
def test_lambda_linear(field):
    base = device()
    scaled = device(**{field: 3 * getattr(base, field)})
    assert effective_model(scaled).lambda0 == pytest.approx(3 * effective_model(base).lambda0, rel=1e-12)


@pytest.mark.parametrize("phi", [0.13, 0.4, 0.77, 1.3])
def test_lambda_even_and_periodic(phi):
    lam = lambda f: effective_model(device(phi_x=f * PHI0)).lambda0  # noqa: E731
    assert lam(phi) == pytest.approx(lam(-phi), rel=1e-12)
    assert lam(phi) == pytest.approx(lam(phi + 2), rel=1e-9)


def test_working_point_enforced():
    with pytest.raises(WorkingPointError):
        effective_model(device(phi_b=0.3 * PHI0))
    effective_model(device(phi_b=1.5 * PHI0))


def test_small_angle_warning():
    with pytest.warns(SmallAngleWarning):
        effective_model(device(b_field=1e4))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        effective_model(device())


def test_params_validation():
    with pytest.raises(ValueError):
        device(ej0=0.0)
    with pytest.raises(ValueError):
        device(x0=-1.0)


def test_budget_quoted_tau():
    assert uniform_budget(0.3e-9, 500e-9) == 1666
    check = decoherence_budget([0.3e-9] * 2000, 500e-9, 160e-6)
    assert check.feasible_steps == 1666
    assert not check.within_budget


def test_budget_computed_tau():
    assert uniform_budget(5.55e-9, 500e-9) == 90


def test_budget_overrun_flagged():
    check = decoherence_budget([200e-9, 200e-9, 200e-9], 500e-9, 160e-6)
    assert check.feasible_steps == 2
    assert check.margin < 0
    ok = decoherence_budget([100e-9], 500e-9, 160e-6)
    assert ok.within_budget and ok.margin == pytest.approx(0.8)


def test_budget_uses_shorter_time():
    assert decoherence_budget([1.1e-6] * 10, 500e-6, 5e-6).feasible_steps == 4


def test_budget_margin_monotone():
    taus = [3e-9, 7e-9, 1e-9, 50e-9, 20e-9]
    margins = [decoherence_budget(taus[:k]).margin for k in range(len(taus) + 1)]
    assert margins == sorted(margins, reverse=True)
