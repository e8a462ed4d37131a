"""Run-configuration files: an INI document with strict key checking.

Sections and keys (defaults in brackets):

    [system]    n_atoms; kappa [388.6]; delta_c [-kappa]; recoil_khz [3.86]
                or wavelength_nm + mass_amu to fix the recoil frequency
    [protocol]  type = sudden | ramp | two-step | temperature;
                alpha1_final, alpha2_final; tau_kappa (ramp dwell/duration,
                in 1/kappa); epsilon; alpha1_initial, alpha2_initial;
                alpha1_intermediate, alpha2_intermediate; t_initial_over_t0
    [integrator] dt [1e-2]; wrap [true]
    [ensemble]  model [adiabatic]; trajectories; base_seed [0]
    [output]    t_min_kappa [1]; t_max_kappa [3.77e6]; points_per_decade [40];
                bin_width [2/111]; theta_c [0.5]; out_dir [.]

``kappa`` and ``delta_c`` take either plain numbers (units of omega_r) or
laboratory frequencies with an explicit suffix ("1.5 MHz", "-1.5e3 kHz");
the recoil frequency converting them comes from ``recoil_khz`` or from
``wavelength_nm`` with ``mass_amu``.  Unknown sections or keys are rejected.
Relative paths are resolved against the config file location.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy import constants as _const

from .ensemble import GridSpec, RunSpec
from .integrators import IntegratorConfig
from .model import SystemParams
from .observables import DEFAULT_BIN_WIDTH
from .protocols import (
    DEFAULT_EPSILON,
    LinearRamp,
    Protocol,
    SuddenQuench,
    TemperatureQuench,
    TwoStepQuench,
)
from .units import DEFAULT_RECOIL_KHZ

__all__ = ["ConfigError", "RunConfig", "parse_config", "emit_config", "recoil_khz_from_wavelength"]


class ConfigError(ValueError):
    pass


_KNOWN = {
    "system": {"n_atoms", "kappa", "delta_c", "recoil_khz", "wavelength_nm", "mass_amu"},
    "protocol": {
        "type", "alpha1_final", "alpha2_final", "alpha1_initial", "alpha2_initial",
        "alpha1_intermediate", "alpha2_intermediate", "tau_kappa", "epsilon",
        "t_initial_over_t0",
    },
    "integrator": {"dt", "wrap"},
    "ensemble": {"model", "trajectories", "base_seed"},
    "output": {
        "t_min_kappa", "t_max_kappa", "points_per_decade", "bin_width",
        "theta_c", "out_dir",
    },
}

_FREQ_SUFFIX_KHZ = {"ghz": 1e6, "mhz": 1e3, "khz": 1.0, "hz": 1e-3}


def recoil_khz_from_wavelength(wavelength_nm: float, mass_amu: float) -> float:
    """Recoil frequency nu_r = hbar k^2 / (2 m) / 2 pi in kHz."""
    k = 2.0 * math.pi / (wavelength_nm * 1e-9)
    omega_r = _const.hbar * k * k / (2.0 * mass_amu * _const.atomic_mass)
    return omega_r / (2.0 * math.pi) / 1e3


def _parse_frequency(text: str, recoil_khz: float, key: str) -> float:
    """A value in omega_r units, from a plain number or a lab frequency."""
    parts = text.split()
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2 and parts[1].lower() in _FREQ_SUFFIX_KHZ:
            return float(parts[0]) * _FREQ_SUFFIX_KHZ[parts[1].lower()] / recoil_khz
    except ValueError:
        pass
    raise ConfigError(
        f"cannot parse {key} = {text!r}; use a number (omega_r units) or "
        "'<number> Hz|kHz|MHz|GHz'"
    )


def _parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {key} = {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved simulation request."""

    spec: RunSpec
    bin_width: float = DEFAULT_BIN_WIDTH
    theta_c: float = 0.5
    out_dir: str = "."
    recoil_khz: float = DEFAULT_RECOIL_KHZ


class _Section:
    def __init__(self, cp: configparser.ConfigParser, name: str):
        self.name = name
        self.raw = dict(cp[name]) if cp.has_section(name) else {}
        for key in self.raw:
            if key not in _KNOWN[name]:
                raise ConfigError(f"unknown key [{name}] {key}")

    def get(self, key, default=None, required=False):
        if key in self.raw:
            return self.raw[key]
        if required:
            raise ConfigError(f"missing required key [{self.name}] {key}")
        return default

    def get_float(self, key, default=None, required=False):
        val = self.get(key, default=default, required=required)
        if val is None or isinstance(val, float):
            return val
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"cannot parse [{self.name}] {key} = {val!r}") from None

    def get_int(self, key, default=None, required=False):
        val = self.get(key, default=default, required=required)
        if val is None or isinstance(val, int):
            return val
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"cannot parse [{self.name}] {key} = {val!r}") from None


def _build_protocol(sec: _Section, kappa: float) -> Protocol:
    kind = sec.get("type", required=True).strip().lower()
    a_final = (sec.get_float("alpha1_final", required=True),
               sec.get_float("alpha2_final", required=True))
    tau_kappa = sec.get_float("tau_kappa")
    tau = tau_kappa / kappa if tau_kappa is not None else None
    try:
        if kind == "sudden":
            eps = DEFAULT_EPSILON
            a_init = (sec.get_float("alpha1_initial", eps),
                      sec.get_float("alpha2_initial", eps))
            return SuddenQuench(a_final, a_init)
        if kind == "ramp":
            if tau is None:
                raise ConfigError("ramp protocol needs tau_kappa")
            return LinearRamp(a_final, tau, sec.get_float("epsilon", DEFAULT_EPSILON))
        if kind in ("two-step", "twostep"):
            if tau is None:
                raise ConfigError("two-step protocol needs tau_kappa")
            a_int = (sec.get_float("alpha1_intermediate", required=True),
                     sec.get_float("alpha2_intermediate", required=True))
            return TwoStepQuench(a_int, a_final, tau)
        if kind == "temperature":
            return TemperatureQuench(
                a_final, sec.get_float("t_initial_over_t0", required=True))
    except ValueError as err:
        raise ConfigError(str(err)) from None
    raise ConfigError(f"unknown protocol type {kind!r}")


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a run-configuration file."""
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    except configparser.Error as err:
        raise ConfigError(f"malformed config file: {err}") from None
    for name in cp.sections():
        if name not in _KNOWN:
            raise ConfigError(f"unknown section [{name}]")

    system = _Section(cp, "system")
    wavelength = system.get_float("wavelength_nm")
    mass = system.get_float("mass_amu")
    if (wavelength is None) != (mass is None):
        raise ConfigError("wavelength_nm and mass_amu must be given together")
    if wavelength is not None:
        if system.get("recoil_khz") is not None:
            raise ConfigError("give either recoil_khz or wavelength_nm/mass_amu")
        recoil = recoil_khz_from_wavelength(wavelength, mass)
    else:
        recoil = system.get_float("recoil_khz", DEFAULT_RECOIL_KHZ)

    kappa = _parse_frequency(system.get("kappa", "388.6"), recoil, "kappa")
    delta_raw = system.get("delta_c")
    delta_c = (-kappa if delta_raw is None
               else _parse_frequency(delta_raw, recoil, "delta_c"))
    n_atoms = system.get_int("n_atoms", required=True)

    protocol_sec = _Section(cp, "protocol")
    protocol = _build_protocol(protocol_sec, kappa)

    integ = _Section(cp, "integrator")
    wrap_raw = integ.get("wrap")
    cfg_kwargs = {}
    if integ.get("dt") is not None:
        cfg_kwargs["dt"] = integ.get_float("dt")
    if wrap_raw is not None:
        cfg_kwargs["wrap"] = _parse_bool(wrap_raw, "wrap")

    ens = _Section(cp, "ensemble")
    out = _Section(cp, "output")
    grid = GridSpec(
        t_min_kappa=out.get_float("t_min_kappa", 1.0),
        t_max_kappa=out.get_float("t_max_kappa", 3.77e6),
        points_per_decade=out.get_int("points_per_decade", 40),
    )
    out_dir = out.get("out_dir", ".")
    try:
        params = SystemParams(n_atoms=n_atoms, kappa=kappa, delta_c=delta_c,
                              alpha=protocol.alpha_at(0.0))
        spec = RunSpec(
            params=params,
            protocol=protocol,
            n_traj=ens.get_int("trajectories", required=True),
            model=ens.get("model", "adiabatic").strip().lower(),
            integrator=IntegratorConfig(**cfg_kwargs),
            base_seed=ens.get_int("base_seed", 0),
            grid=grid,
        )
        return RunConfig(
            spec=spec,
            bin_width=out.get_float("bin_width", DEFAULT_BIN_WIDTH),
            theta_c=out.get_float("theta_c", 0.5),
            out_dir=str((path.parent / out_dir).resolve()),
            recoil_khz=recoil,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def emit_config(config: RunConfig) -> str:
    """Serialize a RunConfig back to the file format (all keys explicit).

    Re-parsing the emitted text yields an equal RunConfig (paths stay
    resolved because out_dir is emitted absolute).
    """
    spec = config.spec
    params = spec.params
    proto = spec.protocol
    kappa = params.kappa
    lines = ["[system]"]
    lines.append(f"n_atoms = {params.n_atoms}")
    lines.append(f"kappa = {params.kappa!r}")
    lines.append(f"delta_c = {params.delta_c!r}")
    lines.append(f"recoil_khz = {config.recoil_khz!r}")
    lines.append("")
    lines.append("[protocol]")
    if isinstance(proto, SuddenQuench):
        lines.append("type = sudden")
        lines.append(f"alpha1_initial = {proto.alpha_initial[0]!r}")
        lines.append(f"alpha2_initial = {proto.alpha_initial[1]!r}")
    elif isinstance(proto, LinearRamp):
        lines.append("type = ramp")
        lines.append(f"tau_kappa = {proto.ramp_time * kappa!r}")
        lines.append(f"epsilon = {proto.epsilon!r}")
    elif isinstance(proto, TwoStepQuench):
        lines.append("type = two-step")
        lines.append(f"tau_kappa = {proto.dwell_time * kappa!r}")
        lines.append(f"alpha1_intermediate = {proto.alpha_intermediate[0]!r}")
        lines.append(f"alpha2_intermediate = {proto.alpha_intermediate[1]!r}")
    elif isinstance(proto, TemperatureQuench):
        lines.append("type = temperature")
        lines.append(f"t_initial_over_t0 = {proto.t_initial_over_t0!r}")
    else:
        raise ConfigError(f"cannot serialize protocol {type(proto).__name__}")
    lines.append(f"alpha1_final = {proto.alpha_final[0]!r}")
    lines.append(f"alpha2_final = {proto.alpha_final[1]!r}")
    lines.append("")
    lines.append("[integrator]")
    lines.append(f"dt = {spec.integrator.dt!r}")
    lines.append(f"wrap = {'true' if spec.integrator.wrap else 'false'}")
    lines.append("")
    lines.append("[ensemble]")
    lines.append(f"model = {spec.model}")
    lines.append(f"trajectories = {spec.n_traj}")
    lines.append(f"base_seed = {spec.base_seed}")
    lines.append("")
    lines.append("[output]")
    lines.append(f"t_min_kappa = {spec.grid.t_min_kappa!r}")
    lines.append(f"t_max_kappa = {spec.grid.t_max_kappa!r}")
    lines.append(f"points_per_decade = {spec.grid.points_per_decade}")
    lines.append(f"bin_width = {config.bin_width!r}")
    lines.append(f"theta_c = {config.theta_c!r}")
    lines.append(f"out_dir = {config.out_dir}")
    lines.append("")
    return "\n".join(lines)
