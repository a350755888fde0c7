"""Configuration-driven experiment runner.

A run takes one JSON-style config dict, executes a hole-burning, Fock
preparation or device calculation, and writes ``report.json`` plus (for state
experiments) ``distribution.csv`` into the output directory.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
import re
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .device import (
    T_NR,
    T_QUBIT,
    DeviceParams,
    WorkingPointError,
    decoherence_budget,
    effective_model,
    flux_quantum,
    hz_to_rad,
    rad_to_hz,
    resonant_gate_voltage,
    uniform_budget,
)
from .fock import DEFAULT_TAIL_TOL, EmptyBranchError, NumberDistribution
from .jc import CouplingParams, TruncationError
from .protocol import (
    DEFAULT_SEARCH_DEPTH,
    PreparationError,
    burn_holes,
    hole_time,
    prep_fock_strategy1,
    prep_fock_strategy2,
    prep_success_probability,
    success_probability_closed_form,
)

log = logging.getLogger(__name__)

MODES = ("burn", "fock1", "fock2", "device", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_BRANCH, EXIT_BUDGET = 0, 2, 3, 4

# interaction time quoted alongside the 45 MHz coupling; kept for comparison only
QUOTED_TAU_NS = 0.3
DEFAULT_BETA = "45MHz"

# illustrative capacitances (not quoted with the device numbers)
DEFAULT_C1 = 0.5e-15
DEFAULT_CJ0 = 0.5e-15

CONVENTIONS = {
    "units": "hbar = 1; internal frequencies in rad/s; times in s (or 1/beta when beta is dimensionless)",
    "frequency_reading": "values quoted in Hz/MHz/GHz are cyclic; rad/s = 2*pi*f",
    "beta_sign": "dynamics use beta = |lambda0|",
    "g_detection_factor": "cos(beta*sqrt(n+1)*tau) on c_n",
    "e_detection_factor": "step j multiplies the component that started at n by -i*sin(beta*sqrt(n+j)*tau_j)",
    "fidelity": "population of |N> in the final normalized state",
}

SWEEPABLE = {"alpha": float, "alpha_phase": float, "search_depth": int, "N": int, "tail_tol": float}

_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_FREQ_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/]*)\s*$")


class ConfigError(ValueError):
    pass


class BudgetViolation(RuntimeError):
    pass


def parse_frequency(value, default_unit: str | None = None) -> tuple[float, bool]:
    """Parse ``'45MHz'``, ``'2.8e8rad/s'``, ``{'value': 45, 'unit': 'MHz'}`` or a number.

    Returns (angular frequency, has_unit). A bare number with no default unit
    is taken as dimensionless.
    """
    if isinstance(value, dict):
        num, unit = value.get("value"), str(value.get("unit", ""))
    elif isinstance(value, (int, float)):
        num, unit = value, default_unit or ""
    else:
        m = _FREQ_RE.match(str(value))
        if not m:
            raise ConfigError(f"cannot parse frequency {value!r}")
        num, unit = m.group(1), m.group(2) or (default_unit or "")
    try:
        num = float(num)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse frequency {value!r}") from None
    unit = unit.strip().lower()
    if unit in ("", "1"):
        return num, False
    if unit in ("rad/s", "rads"):
        return num, True
    if unit in _UNITS:
        return hz_to_rad(num * _UNITS[unit]), True
    raise ConfigError(f"unknown frequency unit {unit!r} (use Hz, kHz, MHz, GHz or rad/s)")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def distribution_csv(dist: NumberDistribution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "p"])
    for n, p in enumerate(dist.p):
        writer.writerow([n, f"{p:.12g}"])
    return buf.getvalue()


def emit_distribution(dist: NumberDistribution, path) -> Path:
    """Write ``n,p`` rows for every retained level."""
    path = Path(path)
    _atomic_write(path, distribution_csv(dist))
    return path


def read_distribution(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["p"]) for r in rows])


# --- configuration ------------------------------------------------------------


@dataclass
class ExperimentConfig:
    mode: str
    alpha: float = 0.0
    alpha_phase: float = 0.0
    beta: object = None
    targets: list | None = None
    N: int | None = None
    search_depth: int = DEFAULT_SEARCH_DEPTH
    tail_tol: float = DEFAULT_TAIL_TOL
    device: dict | None = None
    sweep: dict | None = None
    t_qubit: float = T_QUBIT
    t_nr: float = T_NR
    strict_budget: bool = False
    workers: int = 1
    out: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        """Echo of the physics-relevant fields (output location excluded)."""
        d = {k: copy.deepcopy(getattr(self, k)) for k in self.__dataclass_fields__}
        d.pop("out")
        d.pop("workers")
        return d

    @property
    def alpha_complex(self) -> complex:
        return self.alpha * complex(math.cos(self.alpha_phase), math.sin(self.alpha_phase))

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        try:
            self.alpha = float(self.alpha)
            self.alpha_phase = float(self.alpha_phase)
            self.tail_tol = float(self.tail_tol)
            self.t_qubit = float(self.t_qubit)
            self.t_nr = float(self.t_nr)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigError("alpha must be a finite non-negative magnitude (use alpha_phase for the phase)")
        if not 0 < self.tail_tol <= 1e-6:
            raise ConfigError("tail_tol must lie in (0, 1e-6]")
        if not (self.t_qubit > 0 and self.t_nr > 0):
            raise ConfigError("coherence times must be positive")
        if isinstance(self.search_depth, bool) or not isinstance(self.search_depth, int) or self.search_depth < 1:
            raise ConfigError("search_depth must be a positive integer")
        if self.workers is None or int(self.workers) < 1:
            raise ConfigError("workers must be >= 1")
        if self.beta is not None and self.device is not None and self.mode != "device":
            raise ConfigError("give exactly one of beta or a device block")
        if self.mode == "burn":
            if not self.targets:
                raise ConfigError("burn mode needs a non-empty targets list")
            try:
                self.targets = [int(t) for t in self.targets]
            except (TypeError, ValueError):
                raise ConfigError(f"targets must be integers: {self.targets!r}") from None
            if any(t < 0 for t in self.targets) or len(set(self.targets)) != len(self.targets):
                raise ConfigError("targets must be distinct non-negative integers")
        if self.mode in ("fock1", "fock2"):
            if self.N is None:
                raise ConfigError(f"{self.mode} mode needs N")
            self.N = int(self.N)
            lo, hi = (1, 5) if self.mode == "fock1" else (2, None)
            if self.N < lo or (hi is not None and self.N > hi):
                raise ConfigError(f"N={self.N} out of range for {self.mode}")
        if self.mode == "sweep":
            self._validate_sweep()

    def _validate_sweep(self) -> None:
        sw = self.sweep
        if not isinstance(sw, dict):
            raise ConfigError("sweep mode needs a sweep block")
        missing = {"mode", "param", "min", "max", "steps"} - set(sw)
        if missing:
            raise ConfigError(f"sweep block missing {sorted(missing)}")
        if sw["mode"] not in ("burn", "fock1", "fock2"):
            raise ConfigError("sweep.mode must be burn, fock1 or fock2")
        if sw["param"] not in SWEEPABLE:
            raise ConfigError(f"sweep.param must be one of {sorted(SWEEPABLE)}")
        if int(sw["steps"]) < 1:
            raise ConfigError("sweep.steps must be >= 1")


def resolve_device(block: dict) -> DeviceParams:
    """Build :class:`DeviceParams` from a config block (frequencies in Hz unless tagged)."""
    block = dict(block)
    try:
        ej0, _ = parse_frequency(block.pop("ej0", "5GHz"), default_unit="Hz")
        omega = block.pop("omega", "100MHz")
        omega = None if omega is None else parse_frequency(omega, default_unit="Hz")[0]
        c1 = float(block.pop("c1", DEFAULT_C1))
        cj0 = float(block.pop("cj0", DEFAULT_CJ0))
        v1 = block.pop("v1", None)
        if v1 is None:
            if omega is None:
                raise ConfigError("device block needs v1 or omega")
            v1 = resonant_gate_voltage(c1, cj0, omega)
        phi0 = flux_quantum()
        kw = {}
        for key in ("phi_x", "phi_b"):
            if key in block:
                kw[key] = float(block.pop(key))
            if f"{key}_over_phi0" in block:
                kw[key] = float(block.pop(f"{key}_over_phi0")) * phi0
        for key in ("b_field", "ell", "x0"):
            if key in block:
                kw[key] = float(block.pop(key))
        if block:
            raise ConfigError(f"unknown device keys: {sorted(block)}")
        return DeviceParams(ej0=ej0, c1=c1, cj0=cj0, v1=float(v1), omega=omega, **kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad device block: {exc}") from None


def resolve_beta(cfg: ExperimentConfig) -> tuple[float, bool, dict]:
    """Coupling in rad/s (or dimensionless), whether it has physical units, and device info."""
    if cfg.device is not None:
        params = resolve_device(cfg.device)
        try:
            model = effective_model(params)
        except WorkingPointError as exc:
            raise ConfigError(str(exc)) from None
        if model.beta == 0:
            raise ConfigError("device coupling is switched off (lambda0 = 0)")
        return model.beta, True, _device_summary(params, model)
    beta, physical = parse_frequency(cfg.beta if cfg.beta is not None else DEFAULT_BETA)
    if not beta > 0:
        raise ConfigError("beta must be positive")
    return beta, physical, {}


def _device_summary(params: DeviceParams, model) -> dict:
    detuning = None
    if params.omega is not None:
        detuning = (model.omega0 - params.omega) / params.omega
        if abs(detuning) > 1e-3:
            log.warning("qubit splitting is detuned from the resonator by %.3g (relative)", detuning)
    return {
        "lambda0_rad_s": model.lambda0,
        "beta_hz": rad_to_hz(model.beta),
        "omega0_rad_s": model.omega0,
        "omega_rad_s": params.omega,
        "relative_detuning": detuning,
        "n1": model.n1,
        "ec_rad_s": model.ec,
        "small_angle": model.small_angle,
        "v1": params.v1,
        "c1": params.c1,
        "cj0": params.cj0,
        "flux_quantum_wb": flux_quantum(),
    }


# --- runs ---------------------------------------------------------------------


@dataclass
class RunReport:
    body: dict
    distribution: NumberDistribution | None
    exit_code: int = EXIT_OK

    @property
    def checksum(self) -> str:
        return self.body["checksum"]

    def to_json(self) -> str:
        doc = dict(self.body)
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _canonical(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _finish(body: dict, dist) -> RunReport:
    body = {k: v for k, v in body.items() if k != "checksum"}
    body["checksum"] = hashlib.sha256(_canonical(body).encode()).hexdigest()
    return RunReport(body, dist)


def _budget(cfg: ExperimentConfig, taus, physical: bool) -> dict:
    if not physical:
        return {"applicable": False, "reason": "beta is dimensionless"}
    check = decoherence_budget(taus, cfg.t_qubit, cfg.t_nr)
    out = {
        "applicable": True,
        "feasible_steps": check.feasible_steps,
        "n_steps": check.n_steps,
        "margin": check.margin,
        "total_duration_s": check.total_duration,
        "limit_s": check.limit,
        "within_budget": check.within_budget,
    }
    if not check.within_budget:
        msg = f"schedule needs {check.total_duration:.3e} s but coherence allows {check.limit:.3e} s"
        if cfg.strict_budget:
            raise BudgetViolation(msg)
        log.warning(msg)
    return out


def _schedule_rows(schedule, physical: bool) -> list[dict]:
    rows = []
    for j, step in enumerate(schedule.steps, start=1):
        row = {"step": j, "tau": step.tau, "target_n": step.target_n, "outcome": step.outcome.name}
        if physical:
            row["tau_ns"] = step.tau * 1e9
        rows.append(row)
    return rows


def _state_body(cfg, beta, physical, device_info, result, closed_form_success) -> dict:
    body = {
        "software": {"name": "holeburning", "version": __version__},
        "config": cfg.to_dict(),
        "conventions": CONVENTIONS,
        "beta_rad_s" if physical else "beta": beta,
        "schedule": _schedule_rows(result.schedule, physical),
        "step_probs": list(result.step_probs),
        "success_prob": result.success_prob,
        "success_prob_closed_form": closed_form_success,
        "fidelity": result.fidelity,
        "target_N": result.target_N,
        "dim": result.final_state.dim,
        "distribution": [float(p) for p in result.distribution.p],
        "budget": _budget(cfg, result.schedule.taus, physical),
    }
    if physical:
        body["beta_hz"] = rad_to_hz(beta)
        body["quoted_tau_ns"] = QUOTED_TAU_NS
    if device_info:
        body["device"] = device_info
    if result.extras:
        body["search"] = result.extras
    return body


def run(cfg: ExperimentConfig | dict) -> RunReport:
    """Execute one burn / fock1 / fock2 / device experiment (no file output)."""
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    if cfg.mode == "sweep":
        raise ConfigError("use sweep() for sweep configs")
    if cfg.mode == "device":
        return _run_device(cfg)

    beta, physical, device_info = resolve_beta(cfg)
    params = CouplingParams(beta)
    alpha = cfg.alpha_complex
    if cfg.mode == "burn":
        try:
            result = burn_holes(alpha, cfg.targets, params, cfg.tail_tol)
        except ValueError as exc:
            if isinstance(exc, EmptyBranchError):
                raise
            raise ConfigError(str(exc)) from None
        closed = success_probability_closed_form(alpha, result.schedule.taus, params, cfg.tail_tol)
    else:
        prep = prep_fock_strategy1 if cfg.mode == "fock1" else prep_fock_strategy2
        _, result = prep(cfg.N, alpha, params, cfg.search_depth, cfg.tail_tol)
        closed = prep_success_probability(alpha, result.schedule.taus, params, cfg.tail_tol)
    body = _state_body(cfg, beta, physical, device_info, result, closed)
    return _finish(body, result.distribution)


def _run_device(cfg: ExperimentConfig) -> RunReport:
    params = resolve_device(cfg.device or {})
    try:
        model = effective_model(params)
    except WorkingPointError as exc:
        raise ConfigError(str(exc)) from None
    info = _device_summary(params, model)
    body = {
        "software": {"name": "holeburning", "version": __version__},
        "config": cfg.to_dict(),
        "conventions": CONVENTIONS,
        "device": info,
        "beta_rad_s": model.beta,
        "beta_hz": rad_to_hz(model.beta),
        "quoted_tau_ns": QUOTED_TAU_NS,
        "quoted_tau_budget_steps": uniform_budget(QUOTED_TAU_NS * 1e-9, cfg.t_qubit, cfg.t_nr),
    }
    if model.beta > 0:
        tau0 = hole_time(0, CouplingParams(model.beta))
        body["hole_time_n0_ns"] = tau0 * 1e9
        body["hole_time_budget_steps"] = uniform_budget(tau0, cfg.t_qubit, cfg.t_nr)
    return _finish(body, None)


def write_outputs(report: RunReport, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if report.distribution is not None:
        emit_distribution(report.distribution, out_dir / "distribution.csv")
    _atomic_write(out_dir / "report.json", report.to_json())
    return out_dir


# --- sweeps -------------------------------------------------------------------


def sweep_points(cfg: ExperimentConfig) -> list[dict]:
    """Standalone configs, one per grid point."""
    sw = cfg.sweep
    cast = SWEEPABLE[sw["param"]]
    grid = np.linspace(float(sw["min"]), float(sw["max"]), int(sw["steps"]))
    base = cfg.to_dict()
    base.pop("sweep")
    base["mode"] = sw["mode"]
    points = []
    for value in grid:
        point = copy.deepcopy(base)
        point[sw["param"]] = int(round(value)) if cast is int else float(f"{value:.12g}")
        points.append(point)
    return points


def _run_point(point: dict):
    try:
        return run(point), None
    except Exception as exc:  # reported per point, mapped to an exit code by the caller
        return None, exc


def sweep(cfg: ExperimentConfig | dict, out_dir=None) -> tuple[list, str]:
    """Run every grid point independently; return (reports, aggregate CSV text).

    Failed points appear in the aggregate with an ``error`` entry and a
    ``None`` report.
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    if cfg.mode != "sweep":
        raise ConfigError("sweep() needs mode 'sweep'")
    points = sweep_points(cfg)
    workers = int(cfg.workers)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_point, points))
    else:
        outcomes = [_run_point(p) for p in points]

    param = cfg.sweep["param"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([param, "success_prob", "fidelity", "error"])
    reports = []
    for i, (point, (report, exc)) in enumerate(zip(points, outcomes)):
        reports.append(report if exc is None else exc)
        if exc is None:
            fid = report.body.get("fidelity")
            writer.writerow(
                [point[param], f"{report.body['success_prob']:.12g}", "" if fid is None else f"{fid:.12g}", ""]
            )
            if out_dir is not None:
                write_outputs(report, Path(out_dir) / f"point_{i:03d}")
        else:
            writer.writerow([point[param], "", "", f"{type(exc).__name__}: {exc}"])
    text = buf.getvalue()
    if out_dir is not None:
        _atomic_write(Path(out_dir) / "sweep.csv", text)
    return reports, text


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, BudgetViolation):
        return EXIT_BUDGET
    if isinstance(exc, EmptyBranchError):
        return EXIT_BRANCH
    if isinstance(exc, (ConfigError, PreparationError, TruncationError, ValueError)):
        return EXIT_CONFIG
    raise exc
