"""Conserved-quantity bookkeeping, convergence detection, branch matching.

Everything here recomputes its numbers from the raw fields rather than
trusting integrator internals (double-entry bookkeeping): the mass is
re-summed, and the angular momentum is re-assembled from rho, v, omega,
xi.  The dissipation rate uses the field-intrinsic strain operators, so
a rigid velocity field reports exactly zero.

Two dissipation quantities appear in the records:

- ``dissipation_rate``: 2 * integral of S(grad v):grad v, the physical
  rate from the strain of the current snapshot;
- ``diss_integral``: the running time integral of the quadratic form
  the discrete viscous operator actually removed, accumulated by the
  stepper stage by stage.  The energy-balance residual
  energy(t) + diss_integral(t) - energy(0) is the scheme's conservation
  defect and shrinks at the integrator's order; using the snapshot rate
  instead would bury that signal under the difference between the two
  quadratures.

The monitor psi is a discrete H1-level smallness functional (field
norms, first gradients, density-weighted velocity, and finite
difference time derivatives between records); it is logged and checked
for boundedness, never used for control flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import PhysicalConstants, momentum_rhs, pressure_derivative
from .fields import FluidState, RigidState, divergence, strain, total_velocity, vector_gradient
from .geometry import CavityBodyGeometry

CSV_COLUMNS = (
    "t",
    "energy",
    "dissipation_rate",
    "diss_integral",
    "mass",
    "M_norm",
    "psi",
    "v_l2",
    "omega_x",
    "omega_y",
    "omega_z",
    "xi_x",
    "xi_y",
    "xi_z",
    "sigma_linf",
    "rho_delta",
)


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    dissipation_rate: float
    diss_integral: float
    mass: float
    M_norm: float
    psi: float
    v_l2: float
    omega: np.ndarray
    xi: np.ndarray
    sigma_linf: float
    rho_delta: float

    def row(self):
        return (
            self.t,
            self.energy,
            self.dissipation_rate,
            self.diss_integral,
            self.mass,
            self.M_norm,
            self.psi,
            self.v_l2,
            self.omega[0],
            self.omega[1],
            self.omega[2],
            self.xi[0],
            self.xi[1],
            self.xi[2],
            self.sigma_linf,
            self.rho_delta,
        )


def l2_norm(field: np.ndarray, geometry: CavityBodyGeometry) -> float:
    """Volume-weighted discrete L2 norm (works for scalar or vector)."""
    return float(np.sqrt(np.sum(np.asarray(field) ** 2) * geometry.cell_volume))


def mass(state: FluidState, geometry: CavityBodyGeometry) -> float:
    return float(np.sum(state.rho)) * geometry.cell_volume


def angular_momentum_from_fields(
    state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry
) -> np.ndarray:
    """I_C omega + integral of rho x cross u: the conserved M, re-derived."""
    x = geometry.cell_centers
    w = state.rho[..., None] * total_velocity(state, rigid, geometry)
    return geometry.body_inertia @ rigid.omega + np.sum(np.cross(x, w), axis=(0, 1, 2)) * geometry.cell_volume


def energy(
    state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry, constants: PhysicalConstants
) -> float:
    """Total energy: rho|u|^2 + (2a/(gamma-1)) rho^gamma + container terms."""
    u = total_velocity(state, rigid, geometry)
    vol = geometry.cell_volume
    kinetic = float(np.sum(state.rho * np.einsum("ijkc,ijkc->ijk", u, u))) * vol
    internal = 2.0 * constants.a / (constants.gamma - 1.0) * float(np.sum(state.rho**constants.gamma)) * vol
    body = float(rigid.omega @ geometry.body_inertia @ rigid.omega) + geometry.body_mass * float(rigid.xi @ rigid.xi)
    return kinetic + internal + body


def dissipation_rate(state: FluidState, geometry: CavityBodyGeometry, constants: PhysicalConstants) -> float:
    """2 * integral of S(grad v):grad v over the cavity.

    Expands to 2 [ (mu/2)|D(v)|^2 + (lam - 2 mu/3)(div v)^2 ]; the
    one-sided strain operators vanish identically on rigid fields.
    """
    D = strain(state.v, geometry)
    div = divergence(state.v, geometry)
    d2 = np.einsum("ijkab,ijkab->ijk", D, D)
    integrand = 0.5 * constants.mu * d2 + (constants.lam - 2.0 * constants.mu / 3.0) * div**2
    return 2.0 * float(np.sum(integrand)) * geometry.cell_volume


def psi_monitor(
    state: FluidState,
    rigid: RigidState,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
    prev: tuple | None = None,
) -> float:
    """Discrete proxy of the smallness monitor: H1 norms of v and of the
    density deviation, the weighted velocity norm, plus time-difference
    terms when a previous sample (state, rigid) with earlier time is
    given."""
    vol = geometry.cell_volume
    rho_bar = mass(state, geometry) / geometry.volume
    sigma = state.rho - rho_bar
    grad_v = vector_gradient(state.v, geometry)
    grad_sigma = np.gradient(sigma, *geometry.spacings, edge_order=2)
    u = total_velocity(state, rigid, geometry)
    out = (
        float(np.sum(state.v**2)) * vol
        + float(np.sum(grad_v**2)) * vol
        + float(np.sum(sigma**2)) * vol
        + sum(float(np.sum(g**2)) * vol for g in grad_sigma)
        + float(np.sum(state.rho * np.einsum("ijkc,ijkc->ijk", u, u))) * vol
    )
    if prev is not None:
        prev_state, prev_rigid = prev
        dt = state.time - prev_state.time
        if dt > 0.0:
            du = (u - total_velocity(prev_state, prev_rigid, geometry)) / dt
            dsig = (state.rho - prev_state.rho) / dt
            weight = float(pressure_derivative(rho_bar, constants)) / rho_bar
            out += float(np.sum(state.rho * np.einsum("ijkc,ijkc->ijk", du, du))) * vol
            out += weight * float(np.sum(dsig**2)) * vol
    return out


def make_record(
    state: FluidState,
    rigid: RigidState,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
    diss_integral: float = 0.0,
    prev: tuple | None = None,
    prev_rho: np.ndarray | None = None,
) -> DiagnosticsRecord:
    m = mass(state, geometry)
    rho_bar = m / geometry.volume
    M = angular_momentum_from_fields(state, rigid, geometry)
    rho_delta = 0.0 if prev_rho is None else l2_norm(state.rho - prev_rho, geometry)
    return DiagnosticsRecord(
        t=state.time,
        energy=energy(state, rigid, geometry, constants),
        dissipation_rate=dissipation_rate(state, geometry, constants),
        diss_integral=diss_integral,
        mass=m,
        M_norm=float(np.linalg.norm(M)),
        psi=psi_monitor(state, rigid, geometry, constants, prev),
        v_l2=l2_norm(state.v, geometry),
        omega=rigid.omega.copy(),
        xi=rigid.xi.copy(),
        sigma_linf=float(np.max(np.abs(state.rho - rho_bar))),
        rho_delta=rho_delta,
    )


# ---------------------------------------------------------------------------
# convergence detection and branch comparison


@dataclass
class ConvergenceStatus:
    converged: bool
    time: float
    v_l2: float
    omega_variation: float
    xi_variation: float
    rho_variation: float
    omega: np.ndarray
    xi: np.ndarray
    message: str = ""


def detect_convergence(
    records,
    v_tol: float = 1e-6,
    variation_tol: float = 1e-8,
    window_time: float = 0.0,
) -> ConvergenceStatus:
    """Declare an Omega-limit candidate when motion and drift both stall.

    Requires v_l2 below v_tol at the latest record and the variation of
    omega, xi, rho across all records in the last `window_time` span
    below variation_tol.
    """
    if len(records) < 2:
        raise ValueError("need at least two diagnostics records")
    last = records[-1]
    t0 = last.t - window_time
    tail = [r for r in records if r.t >= t0]
    if len(tail) < 2:
        tail = records[-2:]
    om = np.array([r.omega for r in tail])
    xi = np.array([r.xi for r in tail])
    om_var = float(np.max(np.abs(om - om[-1])))
    xi_var = float(np.max(np.abs(xi - xi[-1])))
    rho_var = float(np.max([r.rho_delta for r in tail[1:]]))
    ok = last.v_l2 < v_tol and om_var < variation_tol and xi_var < variation_tol and rho_var < variation_tol
    return ConvergenceStatus(
        converged=bool(ok),
        time=last.t,
        v_l2=last.v_l2,
        omega_variation=om_var,
        xi_variation=xi_var,
        rho_variation=rho_var,
        omega=np.asarray(last.omega),
        xi=np.asarray(last.xi),
        message="converged to terminal-state candidate" if ok else "still evolving",
    )


@dataclass
class OmegaLimitCandidate:
    """Terminal snapshot handed to the branch comparison."""

    omega: np.ndarray
    xi: np.ndarray
    rho: np.ndarray
    angular_momentum: np.ndarray


@dataclass
class BranchMatch:
    branch_index: int
    sign: int
    rho_distance: float
    omega_distance: float
    xi_distance: float
    momentum_angle: float


def compare_to_branch(candidate: OmegaLimitCandidate, branches, geometry: CavityBodyGeometry) -> BranchMatch:
    """Distances to the nearest steady branch (over branches and sign)."""
    if not branches:
        raise ValueError("no steady branches to compare against")
    best = None
    for idx, br in enumerate(branches):
        for sign in (1, -1):
            d_om = float(np.linalg.norm(candidate.omega - sign * br.omega_s))
            d_xi = float(np.linalg.norm(candidate.xi - sign * br.xi_s))
            d_rho = l2_norm(candidate.rho - br.rho_s, geometry)
            key = d_rho + d_om + d_xi
            if best is None or key < best[0]:
                best = (key, idx, sign, d_rho, d_om, d_xi)
    _, idx, sign, d_rho, d_om, d_xi = best
    nm = float(np.linalg.norm(candidate.angular_momentum))
    no = float(np.linalg.norm(candidate.omega))
    if nm > 0.0 and no > 0.0:
        cosang = float(candidate.omega @ candidate.angular_momentum) / (no * nm)
        angle = float(np.arccos(np.clip(abs(cosang), -1.0, 1.0)))
    else:
        angle = 0.0
    return BranchMatch(
        branch_index=idx,
        sign=sign,
        rho_distance=d_rho,
        omega_distance=d_om,
        xi_distance=d_xi,
        momentum_angle=angle,
    )


def steady_residual_norm(
    rho: np.ndarray,
    omega: np.ndarray,
    xi: np.ndarray,
    geometry: CavityBodyGeometry,
    constants: PhysicalConstants,
) -> float:
    """L2 norm of the momentum rate at (rho, v=0, omega, xi).

    Steady candidates should sit at truncation-error level.
    """
    state = FluidState(rho, np.zeros(rho.shape + (3,)))
    rigid = RigidState(np.asarray(omega, dtype=float), np.asarray(xi, dtype=float))
    return l2_norm(momentum_rhs(state, rigid, geometry, constants), geometry)
