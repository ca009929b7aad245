"""Run configuration: strict INI parsing, validation, manifest echo.

One structured-text format, no environment-variable configuration; the
parsed config plus every applied default is echoed into the manifest so
outputs are reproducible from the manifest alone.  Unknown sections or
keys are hard errors: a typo should never silently fall back to a
default.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_CFL, DEFAULT_FILTER, PhysicalConstants
from .geometry import CavityBodyGeometry


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "geometry": ("lengths", "center", "shape", "body_mass", "body_inertia"),
    "constants": ("a", "gamma", "mu", "lam"),
    "initial": (
        "fluid_mass",
        "velocity_amplitude",
        "density_amplitude",
        "seed",
        "angular_momentum",
        "omega",
    ),
    "integrator": ("cfl", "filter_coeff", "max_steps", "max_time", "dt"),
    "diagnostics": ("record_interval", "v_tol", "variation_tol", "window_steps"),
    "output": ("csv", "checkpoint", "manifest"),
}
_REQUIRED = {
    "geometry": ("lengths", "shape", "body_mass", "body_inertia"),
    "constants": ("a", "gamma", "mu"),
}


@dataclass
class InitialSpec:
    fluid_mass: float
    velocity_amplitude: float = 0.0
    density_amplitude: float = 0.0
    seed: int = 0
    angular_momentum: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray | None = None


@dataclass
class IntegratorSpec:
    cfl: float = DEFAULT_CFL
    filter_coeff: float = DEFAULT_FILTER
    max_steps: int = 1000
    max_time: float | None = None
    dt: float | None = None


@dataclass
class DiagnosticsSpec:
    record_interval: int = 20
    v_tol: float = 1e-6
    variation_tol: float = 1e-8
    window_steps: int = 100


@dataclass
class OutputSpec:
    csv: str = ""
    checkpoint: str = ""
    manifest: str = ""


@dataclass
class RunConfig:
    geometry: CavityBodyGeometry
    constants: PhysicalConstants
    initial: InitialSpec
    integrator: IntegratorSpec
    diagnostics: DiagnosticsSpec
    output: OutputSpec
    echo: dict = field(default_factory=dict)


def _floats(raw: str, n: int, where: str) -> np.ndarray:
    parts = raw.replace(",", " ").split()
    try:
        vals = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse '{raw}' as numbers") from exc
    if vals.size != n:
        raise ConfigError(f"{where}: expected {n} values, got {vals.size}")
    return vals


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text; collect every violation."""
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    errors = []
    for section in parser.sections():
        if section not in _SCHEMA:
            errors.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                errors.append(f"unknown key '{key}' in section [{section}]")
    for section, keys in _REQUIRED.items():
        if not parser.has_section(section):
            errors.append(f"missing required section [{section}]")
            continue
        for key in keys:
            if key not in parser[section]:
                errors.append(f"missing required key '{key}' in [{section}]")
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))

    geo = parser["geometry"]
    lengths = _floats(geo["lengths"], 3, "geometry.lengths")
    center = _floats(geo.get("center", "0 0 0"), 3, "geometry.center")
    shape = tuple(int(v) for v in _floats(geo["shape"], 3, "geometry.shape"))
    inertia_raw = geo["body_inertia"].replace(",", " ").split()
    if len(inertia_raw) == 3:
        inertia = np.diag([float(v) for v in inertia_raw])
    elif len(inertia_raw) == 9:
        inertia = np.array([float(v) for v in inertia_raw]).reshape(3, 3)
    else:
        raise ConfigError("geometry.body_inertia: give 3 diagonal or 9 row-major values")
    try:
        geometry = CavityBodyGeometry(
            lengths=lengths,
            center=center,
            shape=shape,
            body_mass=float(geo["body_mass"]),
            body_inertia=inertia,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from exc

    cs = parser["constants"]
    try:
        constants = PhysicalConstants(
            a=float(cs["a"]),
            gamma=float(cs["gamma"]),
            mu=float(cs["mu"]),
            lam=float(cs.get("lam", "0")),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid constants: {exc}") from exc

    ini = parser["initial"] if parser.has_section("initial") else {}
    fluid_mass = float(ini.get("fluid_mass", geometry.volume))
    if fluid_mass <= 0.0:
        raise ConfigError("initial.fluid_mass must be positive")
    vel_amp = float(ini.get("velocity_amplitude", "0"))
    den_amp = float(ini.get("density_amplitude", "0"))
    if vel_amp < 0.0 or den_amp < 0.0:
        raise ConfigError("initial amplitudes must be non-negative")
    if den_amp >= 1.0:
        raise ConfigError("initial.density_amplitude must stay below 1 to keep rho positive")
    omega0 = None
    if "omega" in ini:
        if "angular_momentum" in ini:
            raise ConfigError("give initial.omega or initial.angular_momentum, not both")
        omega0 = _floats(ini["omega"], 3, "initial.omega")
    initial = InitialSpec(
        fluid_mass=fluid_mass,
        velocity_amplitude=vel_amp,
        density_amplitude=den_amp,
        seed=int(ini.get("seed", "0")),
        angular_momentum=_floats(ini.get("angular_momentum", "0 0 0"), 3, "initial.angular_momentum"),
        omega=omega0,
    )

    itg = parser["integrator"] if parser.has_section("integrator") else {}
    max_time = float(itg.get("max_time", "0"))
    dt = float(itg.get("dt", "0"))
    integrator = IntegratorSpec(
        cfl=float(itg.get("cfl", str(DEFAULT_CFL))),
        filter_coeff=float(itg.get("filter_coeff", str(DEFAULT_FILTER))),
        max_steps=int(itg.get("max_steps", "1000")),
        max_time=max_time if max_time > 0.0 else None,
        dt=dt if dt > 0.0 else None,
    )
    if not 0.0 < integrator.cfl <= 1.0:
        raise ConfigError("integrator.cfl must lie in (0, 1]")
    if integrator.filter_coeff < 0.0:
        raise ConfigError("integrator.filter_coeff must be non-negative")
    if integrator.max_steps < 1:
        raise ConfigError("integrator.max_steps must be at least 1")

    dg = parser["diagnostics"] if parser.has_section("diagnostics") else {}
    diagnostics = DiagnosticsSpec(
        record_interval=int(dg.get("record_interval", "20")),
        v_tol=float(dg.get("v_tol", "1e-6")),
        variation_tol=float(dg.get("variation_tol", "1e-8")),
        window_steps=int(dg.get("window_steps", "100")),
    )
    if diagnostics.record_interval < 1:
        raise ConfigError("diagnostics.record_interval must be at least 1")

    out = parser["output"] if parser.has_section("output") else {}
    output = OutputSpec(
        csv=out.get("csv", ""),
        checkpoint=out.get("checkpoint", ""),
        manifest=out.get("manifest", ""),
    )

    echo = {
        "geometry": {
            "lengths": [float(v) for v in lengths],
            "center": [float(v) for v in center],
            "shape": list(shape),
            "body_mass": geometry.body_mass,
            "body_inertia": [float(v) for v in geometry.body_inertia.ravel()],
        },
        "constants": {"a": constants.a, "gamma": constants.gamma, "mu": constants.mu, "lam": constants.lam},
        "initial": {
            "fluid_mass": initial.fluid_mass,
            "velocity_amplitude": initial.velocity_amplitude,
            "density_amplitude": initial.density_amplitude,
            "seed": initial.seed,
            "angular_momentum": [float(v) for v in initial.angular_momentum],
            "omega": None if initial.omega is None else [float(v) for v in initial.omega],
        },
        "integrator": {
            "cfl": integrator.cfl,
            "filter_coeff": integrator.filter_coeff,
            "max_steps": integrator.max_steps,
            "max_time": integrator.max_time,
            "dt": integrator.dt,
        },
        "diagnostics": {
            "record_interval": diagnostics.record_interval,
            "v_tol": diagnostics.v_tol,
            "variation_tol": diagnostics.variation_tol,
            "window_steps": diagnostics.window_steps,
        },
        "output": {"csv": output.csv, "checkpoint": output.checkpoint, "manifest": output.manifest},
    }
    return RunConfig(geometry, constants, initial, integrator, diagnostics, output, echo)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def run_manifest(config: RunConfig, code_version: str) -> str:
    """JSON manifest: config echo with defaults applied, plus version."""
    doc = {"format": "spincavity-manifest", "version": code_version, "config": config.echo}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
