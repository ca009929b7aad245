"""Coupled fluid / rigid-container dynamics.

State and closure
-----------------
The conserved variables are the density rho, the total momentum density
w = rho*u, and the total angular momentum M of the coupled system.  The
rigid motion (omega, xi) is not independent: it is recovered each stage
from the conservation constraints

    I_C omega = M - sum(x cross w) vol,      m_B xi = -sum(w) vol,

which is algebraically equivalent to the symmetric 6x6 system in the
relative velocity v = u - omega cross x - xi (``solve_rigid_closure``).
M itself rotates with the body, dM/dt = -omega cross M, so |M| is an
exact invariant; the stepper projects M back onto the sphere of its
pre-step magnitude after each Runge-Kutta update, which removes the
O(dt^4) norm drift of the raw scheme without touching its accuracy.

Time integration
----------------
Three-stage strong-stability-preserving Runge-Kutta.  The time step is
validated every step against the advective + acoustic + viscous limit

    dt <= cfl * h / (max|u| + max c + 4 (mu + lam) / (rho_min h)).

The viscous sweep reports the quadratic form Phi(v) it dissipates at
each stage; the stepper accumulates 2*Phi with Simpson-type stage
weights, so `dissipation_increment` integrates the semi-discrete energy
identity d(E)/dt = -2 Phi to the same order as the scheme itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import FluidState, RigidState, rigid_velocity, total_velocity
from .geometry import CavityBodyGeometry, MassProperties, compute_mass_properties


class NumericalError(RuntimeError):
    """Base for runtime failures of the integrator."""


class CFLViolation(NumericalError):
    pass


class NegativeDensity(NumericalError):
    pass


DEFAULT_CFL = 0.4
DEFAULT_FILTER = 0.01
# hard ceiling on dt/dt_limit before the step refuses to proceed
CFL_CEILING = 0.9


@dataclass(frozen=True)
class PhysicalConstants:
    """Barotropic pressure law p = a rho**gamma and viscosities."""

    a: float
    gamma: float
    mu: float
    lam: float = 0.0

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError("pressure coefficient a must be positive")
        if not self.gamma > 1.0:
            raise ValueError("adiabatic index gamma must exceed 1")
        if not self.mu > 0.0:
            raise ValueError("shear viscosity mu must be positive")
        if self.lam < 0.0:
            raise ValueError("second viscosity lam must be non-negative")


def pressure(rho, constants: PhysicalConstants):
    return constants.a * np.asarray(rho) ** constants.gamma


def pressure_derivative(rho, constants: PhysicalConstants):
    return constants.a * constants.gamma * np.asarray(rho) ** (constants.gamma - 1.0)


def sound_speed(rho, constants: PhysicalConstants):
    return np.sqrt(pressure_derivative(rho, constants))


def enthalpy(rho, constants: PhysicalConstants):
    """Specific enthalpy H with rho * grad(H) = grad(p)."""
    g = constants.gamma
    return constants.a * g / (g - 1.0) * np.asarray(rho) ** (g - 1.0)


def viscous_stress(grad_v: np.ndarray, constants: PhysicalConstants) -> np.ndarray:
    """Stress tensor mu (G + G^T) + (lam - 2 mu / 3) tr(G) I, pointwise."""
    g = np.asarray(grad_v, dtype=float)
    sym = g + np.swapaxes(g, -1, -2)
    div = np.trace(g, axis1=-2, axis2=-1)
    eye = np.eye(3)
    return constants.mu * sym + (constants.lam - 2.0 * constants.mu / 3.0) * div[..., None, None] * eye


# ---------------------------------------------------------------------------
# rigid closure


def solve_rigid_closure(
    state: FluidState,
    angular_momentum: np.ndarray,
    geometry: CavityBodyGeometry,
    props: MassProperties | None = None,
) -> RigidState:
    """Recover (omega, xi) from the density/velocity field and M.

    Solves the symmetric positive definite 6x6 system expressing that M
    is the total angular momentum and that the total linear momentum of
    fluid plus container vanishes in the body frame.
    """
    M = np.asarray(angular_momentum, dtype=float).reshape(3)
    if props is None:
        props = compute_mass_properties(geometry, state.rho)
    vol = geometry.cell_volume
    x = geometry.cell_centers
    rv = state.rho[..., None] * state.v
    mom_rel = np.sum(rv, axis=(0, 1, 2)) * vol
    ang_rel = np.sum(np.cross(x, rv), axis=(0, 1, 2)) * vol
    g = props.first_moment
    sg = np.array([[0.0, -g[2], g[1]], [g[2], 0.0, -g[0]], [-g[1], g[0], 0.0]])
    K = np.zeros((6, 6))
    K[:3, :3] = geometry.body_inertia + props.fluid_inertia
    K[:3, 3:] = sg
    K[3:, :3] = sg.T
    K[3:, 3:] = props.total_mass * np.eye(3)
    rhs = np.concatenate([M - ang_rel, -mom_rel])
    sol = np.linalg.solve(K, rhs)
    return RigidState(sol[:3], sol[3:], M)


def rigid_from_conserved(
    rho: np.ndarray, w: np.ndarray, angular_momentum: np.ndarray, geometry: CavityBodyGeometry
) -> RigidState:
    """Closure in conserved variables: same answer as solve_rigid_closure."""
    M = np.asarray(angular_momentum, dtype=float).reshape(3)
    vol = geometry.cell_volume
    x = geometry.cell_centers
    sw = np.sum(w, axis=(0, 1, 2)) * vol
    sxw = np.sum(np.cross(x, w), axis=(0, 1, 2)) * vol
    omega = np.linalg.solve(geometry.body_inertia, M - sxw)
    xi = -sw / geometry.body_mass
    return RigidState(omega, xi, M)


# ---------------------------------------------------------------------------
# right-hand sides


def _rhs_pieces(rho, v, omega, xi, geometry, constants):
    h = geometry.spacings
    rho_p = kernels.pad_scalar(rho)
    v_p = kernels.pad_vector_reflect(v)
    H_p = kernels.pad_scalar(enthalpy(rho, constants))
    drho, dw = kernels.transport_rhs(rho_p, v_p, H_p, omega, xi, geometry.origin, h)
    divv = kernels.divergence_central(v_p, h)
    divv_p = kernels.pad_scalar(divv)
    dw_visc, phi = kernels.viscous_rhs(v_p, divv, divv_p, h, geometry.cell_volume, constants.mu, constants.lam)
    return drho, dw + dw_visc, phi


def continuity_rhs(state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry) -> np.ndarray:
    """d(rho)/dt = -div(rho v), flux form with no-slip ghosts."""
    rho_p = kernels.pad_scalar(state.rho)
    v_p = kernels.pad_vector_reflect(state.v)
    H_p = np.zeros_like(rho_p)
    drho, _ = kernels.transport_rhs(rho_p, v_p, H_p, rigid.omega, rigid.xi, geometry.origin, geometry.spacings)
    return drho


def momentum_rhs(
    state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry, constants: PhysicalConstants
) -> np.ndarray:
    """d(rho u)/dt: transport, rotation coupling, pressure and viscosity."""
    _, dw, _ = _rhs_pieces(state.rho, state.v, rigid.omega, rigid.xi, geometry, constants)
    return dw


def viscous_force(v: np.ndarray, geometry: CavityBodyGeometry, constants: PhysicalConstants):
    """Viscous force density and the quadratic form Phi it dissipates.

    The pair satisfies sum(v . force) * vol == -Phi exactly, wall
    contributions included.
    """
    h = geometry.spacings
    v_p = kernels.pad_vector_reflect(v)
    divv = kernels.divergence_central(v_p, h)
    divv_p = kernels.pad_scalar(divv)
    return kernels.viscous_rhs(v_p, divv, divv_p, h, geometry.cell_volume, constants.mu, constants.lam)


def density_filter_rhs(
    rho: np.ndarray, geometry: CavityBodyGeometry, constants: PhysicalConstants, coeff: float
) -> np.ndarray:
    """Conservative fourth-difference smoothing of the density field."""
    if coeff == 0.0:
        return np.zeros_like(rho)
    c_ref = float(sound_speed(np.mean(rho), constants))
    rho_p2 = kernels.pad2_scalar_mirror(rho)
    return kernels.filter_rhs(rho_p2, geometry.spacings, coeff * c_ref)


# ---------------------------------------------------------------------------
# time stepping


@dataclass
class StepInfo:
    """Per-step report: start-of-step rigid motion and budget increments."""

    omega: np.ndarray
    xi: np.ndarray
    dissipation_increment: float
    dt_limit: float
    max_speed: float
    max_sound: float
    rho_min: float
    rho_max: float


def _speed_limit(umax, cmax, rho_min, geometry, constants):
    h_min = float(np.min(geometry.spacings))
    visc = 4.0 * (constants.mu + constants.lam) / (rho_min * h_min)
    return h_min / (umax + cmax + visc)


def cfl_timestep(
    state: FluidState,
    rigid: RigidState,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
    cfl: float = DEFAULT_CFL,
) -> float:
    """Stable time step for the current state."""
    u = total_velocity(state, rigid, geometry)
    umax = float(np.sqrt(np.max(np.einsum("ijkc,ijkc->ijk", u, u))))
    rho_min = float(np.min(state.rho))
    if rho_min <= 0.0:
        raise NegativeDensity("density must be positive to set a time step")
    cmax = float(sound_speed(np.max(state.rho), constants))
    return cfl * _speed_limit(umax, cmax, rho_min, geometry, constants)


def _conserved_rhs(rho, w, M, geometry, constants, filter_coeff, check=None):
    vol = geometry.cell_volume
    x = geometry.cell_centers
    mass, sw, sxw, umax2, rmin, rmax = kernels.reductions(rho, w, x, vol)
    if rmin <= 0.0 or not np.isfinite(rmin):
        raise NegativeDensity(
            f"density became non-positive (min rho = {rmin:.3e}); "
            "reduce the time step or strengthen the density filter"
        )
    omega = np.linalg.solve(geometry.body_inertia, M - sxw)
    xi = -sw / geometry.body_mass
    v = w / rho[..., None] - (np.cross(omega, x) + xi)
    if check is not None:
        dt, time = check
        cmax = float(sound_speed(rmax, constants))
        limit = _speed_limit(float(np.sqrt(umax2)), cmax, rmin, geometry, constants)
        if dt > CFL_CEILING * limit:
            raise CFLViolation(
                f"time step {dt:.6e} exceeds {CFL_CEILING:.2f} of the stability "
                f"limit {limit:.6e} at t = {time:.6e}; rerun with "
                f"dt <= {DEFAULT_CFL * limit:.6e}"
            )
    drho, dw, phi = _rhs_pieces(rho, v, omega, xi, geometry, constants)
    if filter_coeff > 0.0:
        c_ref = float(sound_speed(mass / geometry.volume, constants))
        drho = drho + kernels.filter_rhs(kernels.pad2_scalar_mirror(rho), geometry.spacings, filter_coeff * c_ref)
    dM = -np.cross(omega, M)
    return drho, dw, dM, phi, omega, xi, (np.sqrt(umax2), rmin, rmax)


def step_conserved(
    rho: np.ndarray,
    w: np.ndarray,
    M: np.ndarray,
    dt: float,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
    filter_coeff: float = DEFAULT_FILTER,
    time: float = 0.0,
    validate: bool = True,
):
    """One strong-stability-preserving RK3 step in conserved variables."""
    check = (dt, time) if validate else None
    dr0, dw0, dM0, phi0, omega0, xi0, diag = _conserved_rhs(rho, w, M, geometry, constants, filter_coeff, check)
    r1 = rho + dt * dr0
    w1 = w + dt * dw0
    M1 = M + dt * dM0

    dr1, dw1, dM1, phi1, _, _, _ = _conserved_rhs(r1, w1, M1, geometry, constants, filter_coeff)
    r2 = 0.75 * rho + 0.25 * (r1 + dt * dr1)
    w2 = 0.75 * w + 0.25 * (w1 + dt * dw1)
    M2 = 0.75 * M + 0.25 * (M1 + dt * dM1)

    dr2, dw2, dM2, phi2, _, _, _ = _conserved_rhs(r2, w2, M2, geometry, constants, filter_coeff)
    third = 1.0 / 3.0
    rho_new = third * rho + 2.0 * third * (r2 + dt * dr2)
    w_new = third * w + 2.0 * third * (w2 + dt * dw2)
    M_new = third * M + 2.0 * third * (M2 + dt * dM2)

    rmin_new = float(np.min(rho_new))
    if rmin_new <= 0.0 or not np.isfinite(rmin_new):
        raise NegativeDensity(
            f"density became non-positive (min rho = {rmin_new:.3e}); "
            "reduce the time step or strengthen the density filter"
        )
    # |M| is exactly invariant; project out the O(dt^4) norm drift
    norm0 = float(np.linalg.norm(M))
    norm_new = float(np.linalg.norm(M_new))
    if norm0 > 0.0 and norm_new > 0.0:
        M_new = M_new * (norm0 / norm_new)
    # stage states sit at t, t + dt, t + dt/2: Simpson weights
    diss = 2.0 * dt * (phi0 / 6.0 + phi1 / 6.0 + 2.0 * phi2 / 3.0)
    umax, rmin, rmax = diag
    cmax = float(sound_speed(rmax, constants))
    info = StepInfo(
        omega=omega0,
        xi=xi0,
        dissipation_increment=diss,
        dt_limit=_speed_limit(umax, cmax, rmin, geometry, constants),
        max_speed=float(umax),
        max_sound=cmax,
        rho_min=rmin,
        rho_max=rmax,
    )
    return rho_new, w_new, M_new, info


def conserved_from_state(state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry):
    """(rho, w, M) for the stepper; M is recomputed if rigid carries none."""
    u = total_velocity(state, rigid, geometry)
    w = state.rho[..., None] * u
    if rigid.angular_momentum is not None:
        M = rigid.angular_momentum.copy()
    else:
        x = geometry.cell_centers
        M = geometry.body_inertia @ rigid.omega + np.sum(np.cross(x, w), axis=(0, 1, 2)) * geometry.cell_volume
    return state.rho.copy(), w, M


def state_from_conserved(rho, w, M, geometry, time=0.0):
    rigid = rigid_from_conserved(rho, w, M, geometry)
    v = w / rho[..., None] - rigid_velocity(rigid, geometry)
    return FluidState(rho, v, time), rigid


def step(
    state: FluidState,
    rigid: RigidState,
    dt: float,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
    filter_coeff: float = DEFAULT_FILTER,
):
    """Advance one step; returns (state, rigid, info)."""
    rho, w, M = conserved_from_state(state, rigid, geometry)
    rho_n, w_n, M_n, info = step_conserved(
        rho, w, M, dt, geometry, constants, filter_coeff, time=state.time
    )
    new_state, new_rigid = state_from_conserved(rho_n, w_n, M_n, geometry, time=state.time + dt)
    return new_state, new_rigid, info
