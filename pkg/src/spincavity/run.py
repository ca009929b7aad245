"""Simulation driver: initial data, main loop, records, CSV output.

The loop advances the conserved variables (rho, w, M) and converts back
to (state, rigid) only at record times.  Angular velocity and angular
momentum are sampled every step so the inertial orientation can be
reconstructed afterwards.  Initial perturbations come from a seeded
generator; a given (config, seed) pair reproduces its outputs byte for
byte regardless of thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics
from .checkpoint import load_checkpoint, save_checkpoint
from .config import DiagnosticsSpec, IntegratorSpec, RunConfig
from .diagnostics import (
    CSV_COLUMNS,
    ConvergenceStatus,
    DiagnosticsRecord,
    angular_momentum_from_fields,
    detect_convergence,
    make_record,
)
from .fields import FluidState, RigidState
from .geometry import CavityBodyGeometry, compute_mass_properties


def initial_state_from_config(config: RunConfig):
    """Seeded random initial data with the configured mass and momentum."""
    geometry = config.geometry
    spec = config.initial
    rng = np.random.default_rng(spec.seed)
    rho_bar = spec.fluid_mass / geometry.volume
    rho = rho_bar * (1.0 + spec.density_amplitude * rng.uniform(-1.0, 1.0, geometry.shape))
    # rescale so the discrete mass matches the target exactly
    rho *= spec.fluid_mass / (float(np.sum(rho)) * geometry.cell_volume)
    v = spec.velocity_amplitude * rng.uniform(-1.0, 1.0, geometry.shape + (3,))
    state = FluidState(rho, v)
    if spec.omega is not None:
        omega = np.asarray(spec.omega, dtype=float)
        props = compute_mass_properties(geometry, rho)
        mom_rel = np.sum(rho[..., None] * v, axis=(0, 1, 2)) * geometry.cell_volume
        xi = -(mom_rel + np.cross(omega, props.first_moment)) / props.total_mass
        rigid = RigidState(omega, xi)
        rigid.angular_momentum = angular_momentum_from_fields(state, rigid, geometry)
        return state, rigid
    rigid = dynamics.solve_rigid_closure(state, spec.angular_momentum, geometry)
    return state, rigid


@dataclass
class RunResult:
    state: FluidState
    rigid: RigidState
    records: list
    convergence: ConvergenceStatus | None
    dt: float
    steps: int
    dissipation_integral: float
    times: np.ndarray
    omegas: np.ndarray
    momenta: np.ndarray
    stop_reason: str


class Simulator:
    """Owns one run: fixed dt from the initial stability limit, record
    cadence, convergence checks, optional early stop."""

    def __init__(
        self,
        geometry: CavityBodyGeometry,
        constants: dynamics.PhysicalConstants,
        state: FluidState,
        rigid: RigidState,
        integrator: IntegratorSpec | None = None,
        diagnostics: DiagnosticsSpec | None = None,
    ):
        self.geometry = geometry
        self.constants = constants
        self.state = state
        self.rigid = rigid
        self.integrator = integrator or IntegratorSpec()
        self.diagnostics = diagnostics or DiagnosticsSpec()
        if rigid.angular_momentum is None:
            rigid.angular_momentum = angular_momentum_from_fields(state, rigid, geometry)
        if self.integrator.dt is not None:
            self.dt = float(self.integrator.dt)
        else:
            self.dt = dynamics.cfl_timestep(state, rigid, geometry, constants, self.integrator.cfl)

    def run(self, stop_on_convergence: bool = True) -> RunResult:
        geometry, constants = self.geometry, self.constants
        spec = self.integrator
        diag = self.diagnostics
        rho, w, M = dynamics.conserved_from_state(self.state, self.rigid, geometry)
        t = self.state.time
        dt = self.dt
        diss = 0.0
        records: list[DiagnosticsRecord] = []
        state0, rigid0 = dynamics.state_from_conserved(rho, w, M, geometry, time=t)
        records.append(make_record(state0, rigid0, geometry, constants, diss_integral=0.0))
        prev_snapshot = (state0, rigid0)
        prev_rho = state0.rho.copy()
        times = [t]
        omegas = [rigid0.omega.copy()]
        momenta = [M.copy()]
        window_time = diag.window_steps * dt
        stop_reason = "max_steps"
        convergence = None
        steps = 0
        for k in range(1, spec.max_steps + 1):
            rho, w, M, info = dynamics.step_conserved(
                rho, w, M, dt, geometry, constants, spec.filter_coeff, time=t
            )
            t += dt
            steps = k
            diss += info.dissipation_increment
            times.append(t)
            momenta.append(M.copy())
            at_record = (k % diag.record_interval == 0) or (k == spec.max_steps)
            hit_time = spec.max_time is not None and t >= spec.max_time - 1e-12 * dt
            if at_record or hit_time:
                state_k, rigid_k = dynamics.state_from_conserved(rho, w, M, geometry, time=t)
                omegas.append(rigid_k.omega.copy())
                rec = make_record(
                    state_k,
                    rigid_k,
                    geometry,
                    constants,
                    diss_integral=diss,
                    prev=prev_snapshot,
                    prev_rho=prev_rho,
                )
                records.append(rec)
                prev_snapshot = (state_k, rigid_k)
                prev_rho = state_k.rho.copy()
                if len(records) >= 2:
                    convergence = detect_convergence(
                        records, diag.v_tol, diag.variation_tol, window_time
                    )
                    if stop_on_convergence and convergence.converged and t - times[0] >= window_time:
                        stop_reason = "converged"
                        break
            else:
                # sample omega cheaply from the conserved fields
                rigid_k = dynamics.rigid_from_conserved(rho, w, M, geometry)
                omegas.append(rigid_k.omega.copy())
            if hit_time:
                stop_reason = "max_time"
                break
        state_f, rigid_f = dynamics.state_from_conserved(rho, w, M, geometry, time=t)
        if records[-1].t < t - 1e-12 * dt:
            records.append(
                make_record(
                    state_f, rigid_f, geometry, constants, diss_integral=diss, prev=prev_snapshot, prev_rho=prev_rho
                )
            )
        self.state, self.rigid = state_f, rigid_f
        return RunResult(
            state=state_f,
            rigid=rigid_f,
            records=records,
            convergence=convergence,
            dt=dt,
            steps=steps,
            dissipation_integral=diss,
            times=np.array(times),
            omegas=np.array(omegas),
            momenta=np.array(momenta),
            stop_reason=stop_reason,
        )


def simulator_from_config(config: RunConfig, restart: str = "") -> Simulator:
    if restart:
        state, rigid = load_checkpoint(restart, expected_shape=config.geometry.shape)
    else:
        state, rigid = initial_state_from_config(config)
    return Simulator(
        config.geometry,
        config.constants,
        state,
        rigid,
        integrator=config.integrator,
        diagnostics=config.diagnostics,
    )


def write_csv(records, path: str) -> None:
    """Deterministic CSV: %.17g round-trips float64 exactly."""
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join("%.17g" % x for x in rec.row()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_final_checkpoint(result: RunResult, path: str) -> None:
    save_checkpoint(path, result.state, result.rigid)
