"""Shared builders for the test suite."""

import numpy as np

from spincavity.geometry import CavityBodyGeometry


def box_geometry(n=12, lengths=(0.3, 0.4, 0.5)):
    shape = (n, n, n) if isinstance(n, int) else tuple(n)
    return CavityBodyGeometry(
        lengths=lengths,
        center=(0.0, 0.0, 0.0),
        shape=shape,
        body_mass=5.0,
        body_inertia=np.diag((0.11, 0.13, 0.15)),
    )


def random_density(rng, geometry, m_f, amplitude=0.3):
    rho = np.exp(rng.uniform(-amplitude, amplitude, size=geometry.shape))
    rho *= m_f / (np.sum(rho) * geometry.cell_volume)
    return rho
