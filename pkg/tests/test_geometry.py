"""Grid bookkeeping, quadrature accuracy, and inertia identities."""

import numpy as np
import pytest

from conftest import box_geometry, random_density
from spincavity.geometry import (
    CavityBodyGeometry,
    GeometryError,
    center_of_mass,
    compute_mass_properties,
    inertia_about,
)


def test_grid_layout():
    geom = box_geometry(8)
    assert np.allclose(geom.spacings, np.array([0.3, 0.4, 0.5]) / 8)
    assert geom.cell_volume == pytest.approx(geom.spacings.prod())
    assert geom.volume == pytest.approx(0.3 * 0.4 * 0.5)
    x = geom.cell_centers
    # midpoint grid: first center half a cell inside the wall, symmetric box
    assert x[0, 0, 0, 0] == pytest.approx(-0.15 + geom.spacings[0] / 2)
    assert x[-1, 0, 0, 0] == pytest.approx(0.15 - geom.spacings[0] / 2)
    assert abs(x.sum()) < 1e-12


def test_validation_errors():
    with pytest.raises(GeometryError, match="positive"):
        box_geometry(8, lengths=(0.3, -0.4, 0.5))
    with pytest.raises(GeometryError, match="2 cells"):
        CavityBodyGeometry((0.3, 0.4, 0.5), (0, 0, 0), (1, 8, 8), 5.0, np.eye(3))
    with pytest.raises(GeometryError, match="mass"):
        CavityBodyGeometry((0.3, 0.4, 0.5), (0, 0, 0), (8, 8, 8), 0.0, np.eye(3))
    bad = np.eye(3)
    bad[0, 1] = 0.2
    with pytest.raises(GeometryError, match="symmetric"):
        CavityBodyGeometry((0.3, 0.4, 0.5), (0, 0, 0), (8, 8, 8), 5.0, bad)
    with pytest.raises(GeometryError, match="positive definite"):
        CavityBodyGeometry((0.3, 0.4, 0.5), (0, 0, 0), (8, 8, 8), 5.0, -np.eye(3))
    geom = box_geometry(8)
    with pytest.raises(GeometryError, match="shape"):
        geom.check_field(np.zeros((8, 8, 7)))
    with pytest.raises(GeometryError, match="positive"):
        compute_mass_properties(geom, np.full(geom.shape, -1.0))


def test_mass_properties_uniform():
    geom = box_geometry(10)
    rho = np.full(geom.shape, 2.0)
    props = compute_mass_properties(geom, rho)
    assert props.fluid_mass == pytest.approx(2.0 * geom.volume, rel=1e-14)
    assert props.total_mass == pytest.approx(5.0 + 2.0 * geom.volume, rel=1e-14)
    assert np.max(np.abs(props.first_moment)) < 1e-15
    assert np.max(np.abs(props.center_offset)) < 1e-15
    # uniform box inertia: m/12 * diag(Ly^2+Lz^2, Lx^2+Lz^2, Lx^2+Ly^2) plus
    # the midpoint-rule correction (1 - 1/n^2) on each second moment
    m = props.fluid_mass
    second = np.array([0.3, 0.4, 0.5]) ** 2 / 12.0 * (1.0 - 1.0 / 10**2)
    expect = m * np.diag(
        [second[1] + second[2], second[0] + second[2], second[0] + second[1]]
    )
    assert np.allclose(props.fluid_inertia, expect, rtol=1e-12, atol=1e-16)


def test_quadrature_order_exponential_density():
    """Midpoint-rule mass and first moment converge at second order."""

    def analytic():
        alpha = np.array([1.3, -0.9, 0.7])
        L = np.array([0.3, 0.4, 0.5])
        m1 = np.ones(3)
        g1 = np.ones(3)
        for d in range(3):
            a, half = alpha[d], L[d] / 2
            m1[d] = (np.exp(a * half) - np.exp(-a * half)) / a
            # int x e^{ax} dx over [-h, h]
            g1[d] = (half * (np.exp(a * half) + np.exp(-a * half)) / a
                     - (np.exp(a * half) - np.exp(-a * half)) / a**2)
        mass = m1.prod()
        gx = g1[0] * m1[1] * m1[2]
        return mass, gx

    mass_exact, gx_exact = analytic()
    errs_m, errs_g = [], []
    for n in (8, 16, 32):
        geom = box_geometry(n)
        x = geom.cell_centers
        rho = np.exp(1.3 * x[..., 0] - 0.9 * x[..., 1] + 0.7 * x[..., 2])
        props = compute_mass_properties(geom, rho)
        errs_m.append(abs(props.fluid_mass - mass_exact))
        errs_g.append(abs(props.first_moment[0] - gx_exact))
    for errs in (errs_m, errs_g):
        order = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
        assert min(order) > 1.9, f"quadrature order dropped: {order}"


def test_steiner_and_lagrange_properties():
    geom = box_geometry(9)
    rng = np.random.default_rng(101)
    for _ in range(25):
        rho = random_density(rng, geom, 0.06 * np.exp(rng.uniform(-1, 1)))
        props = compute_mass_properties(geom, rho)
        imat = props.system_inertia
        assert np.allclose(imat, imat.T, rtol=0, atol=1e-18)
        assert np.linalg.eigvalsh(imat).min() > 0.0
        # Steiner: assembling directly about the center of mass matches
        direct = inertia_about(geom, rho, center_of_mass(props))
        scale = np.max(np.abs(imat))
        assert np.max(np.abs(direct - imat)) <= 1e-10 * scale
        # parallel-axis: origin assembly = body + raw fluid inertia
        about_origin = inertia_about(geom, rho, np.zeros(3))
        ibar = about_origin - props.body_inertia
        assert np.allclose(about_origin, props.body_inertia + ibar)
        # Lagrange identity bound: |a x g|^2 <= m_F a.Ibar.a
        for _ in range(4):
            a = rng.normal(size=3)
            lhs = np.cross(a, props.first_moment) @ np.cross(a, props.first_moment)
            rhs = props.fluid_mass * (a @ ibar @ a)
            assert lhs <= rhs * (1.0 + 1e-12)


def test_system_inertia_lower_bound():
    # I(rho) >= I_C + (1 - m_F/m_S) Ibar as quadratic forms
    geom = box_geometry(8)
    rng = np.random.default_rng(55)
    for _ in range(10):
        rho = random_density(rng, geom, 0.06)
        props = compute_mass_properties(geom, rho)
        ibar = inertia_about(geom, rho, np.zeros(3)) - props.body_inertia
        floor = props.body_inertia + (1.0 - props.fluid_mass / props.total_mass) * ibar
        gap_eigs = np.linalg.eigvalsh(props.system_inertia - floor)
        assert gap_eigs.min() >= -1e-14
