"""Field containers and differential operators on the cavity grid.

Two families of operators live here, with different jobs:

- ``gradient``/``divergence``/``strain`` are field-intrinsic: central
  differences inside, second-order one-sided stencils at boundary cells,
  no ghost values.  They are exact on affine fields, so a rigid velocity
  field has exactly zero strain and divergence everywhere including the
  boundary layer.  Diagnostics use these.
- ``conservative_divergence`` is the flux-average form the integrator
  uses, with reflected ghost cells; its cell sum telescopes to the wall
  fluxes, which vanish, so it integrates to zero exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import CavityBodyGeometry


@dataclass
class FluidState:
    """Density and relative velocity, cell-centered."""

    rho: np.ndarray
    v: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.ascontiguousarray(np.asarray(self.rho, dtype=float))
        self.v = np.ascontiguousarray(np.asarray(self.v, dtype=float))
        if self.rho.ndim != 3:
            raise ValueError("rho must be a 3-d cell array")
        if self.v.shape != self.rho.shape + (3,):
            raise ValueError("v must have shape rho.shape + (3,)")

    def copy(self) -> "FluidState":
        return FluidState(self.rho.copy(), self.v.copy(), self.time)


@dataclass
class RigidState:
    """Instantaneous rigid motion: angular/translational velocity and the
    conserved total angular momentum that determines them."""

    omega: np.ndarray
    xi: np.ndarray
    angular_momentum: np.ndarray | None = None

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float).reshape(3)
        self.xi = np.asarray(self.xi, dtype=float).reshape(3)
        if self.angular_momentum is not None:
            self.angular_momentum = np.asarray(self.angular_momentum, dtype=float).reshape(3)

    def copy(self) -> "RigidState":
        M = None if self.angular_momentum is None else self.angular_momentum.copy()
        return RigidState(self.omega.copy(), self.xi.copy(), M)


def rigid_velocity(rigid: RigidState, geometry: CavityBodyGeometry) -> np.ndarray:
    """Rigid transport field omega x x + xi at every cell center."""
    x = geometry.cell_centers
    return np.cross(rigid.omega, x) + rigid.xi


def total_velocity(state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry) -> np.ndarray:
    """Body-frame total velocity u = v + omega x x + xi."""
    return state.v + rigid_velocity(rigid, geometry)


def momentum_density(state: FluidState, rigid: RigidState, geometry: CavityBodyGeometry) -> np.ndarray:
    return state.rho[..., None] * total_velocity(state, rigid, geometry)


def gradient(f: np.ndarray, geometry: CavityBodyGeometry) -> np.ndarray:
    """Cell gradient of a scalar field, one-sided at the boundary."""
    geometry.check_field(f)
    h = geometry.spacings
    parts = [np.gradient(f, h[d], axis=d, edge_order=2) for d in range(3)]
    return np.stack(parts, axis=-1)


def vector_gradient(v: np.ndarray, geometry: CavityBodyGeometry) -> np.ndarray:
    """Jacobian G[..., d, c] = d v_c / d x_d."""
    geometry.check_field(v, components=3)
    h = geometry.spacings
    out = np.empty(v.shape[:3] + (3, 3))
    for d in range(3):
        out[..., d, :] = np.gradient(v, h[d], axis=d, edge_order=2)
    return out


def divergence(v: np.ndarray, geometry: CavityBodyGeometry) -> np.ndarray:
    geometry.check_field(v, components=3)
    h = geometry.spacings
    out = np.zeros(v.shape[:3])
    for d in range(3):
        out += np.gradient(v[..., d], h[d], axis=d, edge_order=2)
    return out


def strain(v: np.ndarray, geometry: CavityBodyGeometry) -> np.ndarray:
    """Symmetrized velocity gradient D = grad v + (grad v)^T."""
    g = vector_gradient(v, geometry)
    return g + np.swapaxes(g, -1, -2)


def conservative_divergence(v: np.ndarray, geometry: CavityBodyGeometry) -> np.ndarray:
    """Flux-average divergence with reflected (no-slip) ghost cells."""
    geometry.check_field(v, components=3)
    v_p = kernels.pad_vector_reflect(v)
    return kernels.divergence_central(v_p, geometry.spacings)
