"""Cavity/body geometry and mass-distribution integrals.

The cavity is an axis-aligned box discretized by a uniform cell-centered
grid; every volume integral in the package uses the same midpoint rule
(cell value times cell volume) so that mass bookkeeping is consistent
across modules.  The body frame has its origin at the body's own center
of mass; the box may be offset from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GeometryError(ValueError):
    """Invalid geometry or field/grid mismatch."""


@dataclass
class CavityBodyGeometry:
    """Axis-aligned box cavity inside a rigid body.

    lengths      : box edge lengths (3,)
    center       : box center in body coordinates (3,)
    shape        : cells per axis (n1, n2, n3)
    body_mass    : mass of the rigid part, m_B > 0
    body_inertia : inertia tensor of the rigid part about the origin,
                   symmetric positive definite (3, 3)
    """

    lengths: np.ndarray
    center: np.ndarray
    shape: tuple
    body_mass: float
    body_inertia: np.ndarray

    def __post_init__(self) -> None:
        self.lengths = np.asarray(self.lengths, dtype=np.float64).reshape(3)
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.shape = tuple(int(n) for n in self.shape)
        self.body_mass = float(self.body_mass)
        self.body_inertia = np.asarray(self.body_inertia, dtype=np.float64).reshape(3, 3)
        if not np.all(self.lengths > 0.0):
            raise GeometryError(f"box lengths must be positive, got {self.lengths}")
        if len(self.shape) != 3 or any(n < 2 for n in self.shape):
            raise GeometryError(f"grid shape needs at least 2 cells per axis, got {self.shape}")
        if self.body_mass <= 0.0:
            raise GeometryError(f"body mass must be positive, got {self.body_mass}")
        if not np.allclose(self.body_inertia, self.body_inertia.T, rtol=0.0, atol=1e-13):
            raise GeometryError("body inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.body_inertia) <= 0.0):
            raise GeometryError("body inertia must be positive definite")

    @cached_property
    def spacings(self) -> np.ndarray:
        return self.lengths / np.asarray(self.shape, dtype=np.float64)

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @cached_property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @cached_property
    def origin(self) -> np.ndarray:
        """Center of cell (0, 0, 0)."""
        return self.center - 0.5 * self.lengths + 0.5 * self.spacings

    @cached_property
    def cell_centers(self) -> np.ndarray:
        """Cell-center coordinates, shape (n1, n2, n3, 3)."""
        axes = [
            self.origin[d] + self.spacings[d] * np.arange(self.shape[d])
            for d in range(3)
        ]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.ascontiguousarray(np.stack(grid, axis=-1))

    def check_field(self, arr: np.ndarray, components: int = 0) -> None:
        want = self.shape if components == 0 else self.shape + (components,)
        if arr.shape != want:
            raise GeometryError(f"field shape {arr.shape} does not match grid {want}")


@dataclass
class MassProperties:
    """Mass integrals of a density field plus the rigid part.

    fluid_mass     : m_F = sum(rho) * cell_volume
    first_moment   : g = sum(rho * x) * cell_volume
    fluid_inertia  : I_bar = sum(rho * (|x|^2 Id - x x^T)) * cell_volume
    total_mass     : m_S = m_B + m_F
    center_offset  : x_G = g / m_S, system center of mass
    system_inertia : I = I_C + I_bar - (|g|^2 Id - g g^T) / m_S
    """

    fluid_mass: float
    first_moment: np.ndarray
    fluid_inertia: np.ndarray
    total_mass: float
    center_offset: np.ndarray = field(init=False)
    system_inertia: np.ndarray = field(init=False)
    body_mass: float = 0.0
    body_inertia: np.ndarray | None = None

    def __post_init__(self) -> None:
        g = self.first_moment
        self.center_offset = g / self.total_mass
        correction = (np.dot(g, g) * np.eye(3) - np.outer(g, g)) / self.total_mass
        self.system_inertia = self.body_inertia + self.fluid_inertia - correction


def compute_mass_properties(geometry: CavityBodyGeometry, rho: np.ndarray) -> MassProperties:
    """Midpoint-rule mass, first moment and inertia of a density field."""
    geometry.check_field(rho)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise GeometryError("density must be positive and finite everywhere")
    vol = geometry.cell_volume
    x = geometry.cell_centers
    m_f = float(np.sum(rho)) * vol
    g = np.einsum("ijk,ijkd->d", rho, x) * vol
    r2 = np.einsum("ijkd,ijkd->ijk", x, x)
    trace_part = float(np.sum(rho * r2)) * vol
    second = np.einsum("ijk,ijkd,ijke->de", rho, x, x) * vol
    i_bar = trace_part * np.eye(3) - second
    return MassProperties(
        fluid_mass=m_f,
        first_moment=g,
        fluid_inertia=i_bar,
        total_mass=geometry.body_mass + m_f,
        body_mass=geometry.body_mass,
        body_inertia=geometry.body_inertia,
    )


def center_of_mass(props: MassProperties) -> np.ndarray:
    """System center of mass x_G = g / m_S in body coordinates."""
    return props.center_offset


def inertia_about(
    geometry: CavityBodyGeometry, rho: np.ndarray, point: np.ndarray
) -> np.ndarray:
    """Total system inertia assembled directly about an arbitrary point.

    Body part by the parallel-axis shift from the origin (the body's own
    center of mass), fluid part by direct quadrature.  Evaluating at the
    system center of mass must reproduce MassProperties.system_inertia.
    """
    geometry.check_field(rho)
    point = np.asarray(point, dtype=np.float64).reshape(3)
    shift = np.dot(point, point) * np.eye(3) - np.outer(point, point)
    body = geometry.body_inertia + geometry.body_mass * shift
    y = geometry.cell_centers - point
    y2 = np.einsum("ijkd,ijkd->ijk", y, y)
    trace_part = float(np.sum(rho * y2)) * geometry.cell_volume
    second = np.einsum("ijk,ijkd,ijke->de", rho, y, y) * geometry.cell_volume
    return body + trace_part * np.eye(3) - second
