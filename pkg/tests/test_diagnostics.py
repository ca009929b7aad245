"""Bookkeeping: norms, energy, dissipation, convergence, branch matching."""

import numpy as np
import pytest

from conftest import box_geometry
from spincavity.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    OmegaLimitCandidate,
    angular_momentum_from_fields,
    compare_to_branch,
    detect_convergence,
    dissipation_rate,
    energy,
    l2_norm,
    make_record,
    mass,
    psi_monitor,
    steady_residual_norm,
)
from spincavity.dynamics import PhysicalConstants
from spincavity.fields import FluidState, RigidState
from spincavity.steady import enumerate_branches

M_F = 0.06
CONST = PhysicalConstants(a=10.0, gamma=1.4, mu=0.05)


def uniform_state(geometry, rho_bar=None):
    rho_bar = M_F / geometry.volume if rho_bar is None else rho_bar
    rho = np.full(geometry.shape, rho_bar)
    return FluidState(rho, np.zeros(geometry.shape + (3,)))


def grid_second_moments(geometry):
    n = np.asarray(geometry.shape, dtype=float)
    return np.asarray(geometry.lengths) ** 2 / 12.0 * (1.0 - 1.0 / n**2)


def test_norms_and_mass():
    geom = box_geometry(8)
    state = uniform_state(geom)
    assert mass(state, geom) == pytest.approx(M_F, rel=1e-14)
    assert l2_norm(np.full(geom.shape, 0.7), geom) == pytest.approx(
        0.7 * np.sqrt(geom.volume), rel=1e-13
    )
    vec = np.zeros(geom.shape + (3,))
    vec[..., 1] = 2.0
    assert l2_norm(vec, geom) == pytest.approx(2.0 * np.sqrt(geom.volume), rel=1e-13)


def test_angular_momentum_uniform_density_closed_form():
    # v = 0, uniform rho: M = I_C omega + fluid inertia of the grid, and
    # the xi term integrates to zero on the centered box
    geom = box_geometry(10)
    state = uniform_state(geom)
    rigid = RigidState(np.array([0.4, -0.2, 0.7]), np.array([0.01, 0.02, -0.03]))
    sm = grid_second_moments(geom)
    fluid_inertia = M_F * np.diag([sm[1] + sm[2], sm[0] + sm[2], sm[0] + sm[1]])
    expect = geom.body_inertia @ rigid.omega + fluid_inertia @ rigid.omega
    got = angular_momentum_from_fields(state, rigid, geom)
    assert np.allclose(got, expect, rtol=1e-12)


def test_energy_closed_forms():
    geom = box_geometry(9)
    rho_bar = M_F / geom.volume
    internal = 2.0 * CONST.a / (CONST.gamma - 1.0) * rho_bar**CONST.gamma * geom.volume
    state = uniform_state(geom)
    rest = RigidState(np.zeros(3), np.zeros(3))
    assert energy(state, rest, geom, CONST) == pytest.approx(internal, rel=1e-13)

    xi = np.array([0.3, -0.1, 0.2])
    sliding = RigidState(np.zeros(3), xi)
    expect = internal + (M_F + geom.body_mass) * float(xi @ xi)
    assert energy(state, sliding, geom, CONST) == pytest.approx(expect, rel=1e-13)

    w = 0.8
    spinning = RigidState(np.array([0.0, 0.0, w]), np.zeros(3))
    sm = grid_second_moments(geom)
    expect = internal + w * w * (geom.body_inertia[2, 2] + M_F * (sm[0] + sm[1]))
    assert energy(state, spinning, geom, CONST) == pytest.approx(expect, rel=1e-13)


def test_dissipation_rate_closed_forms():
    geom = box_geometry(10)
    cst = PhysicalConstants(a=10.0, gamma=1.4, mu=0.05, lam=0.07)
    x = geom.cell_centers
    rho = np.ones(geom.shape)

    # rigid motion dissipates nothing
    omega, xi = np.array([0.3, -0.5, 0.2]), np.array([0.1, 0.0, -0.2])
    rigid_v = np.cross(omega, x) + xi
    assert abs(dissipation_rate(FluidState(rho, rigid_v), geom, cst)) < 1e-14

    # pure stretch v = (ax, by, cz): the gradient is exact on the grid
    al, be, ga = 0.3, -0.2, 0.5
    v = np.stack([al * x[..., 0], be * x[..., 1], ga * x[..., 2]], axis=-1)
    expect = 2.0 * geom.volume * (
        2.0 * cst.mu * (al**2 + be**2 + ga**2)
        + (cst.lam - 2.0 * cst.mu / 3.0) * (al + be + ga) ** 2
    )
    assert dissipation_rate(FluidState(rho, v), geom, cst) == pytest.approx(expect, rel=1e-12)

    # simple shear v = (by, 0, 0): divergence-free, 2 mu b^2 per unit volume
    shear = np.zeros(geom.shape + (3,))
    shear[..., 0] = 0.9 * x[..., 1]
    expect = 2.0 * geom.volume * cst.mu * 0.9**2
    assert dissipation_rate(FluidState(rho, shear), geom, cst) == pytest.approx(expect, rel=1e-12)


def test_psi_monitor_vanishes_only_at_uniform_rest():
    geom = box_geometry(8)
    state = uniform_state(geom)
    rest = RigidState(np.zeros(3), np.zeros(3))
    assert psi_monitor(state, rest, geom, CONST) == 0.0

    moving = FluidState(state.rho.copy(), state.v.copy())
    moving.v[..., 0] = 1e-3
    assert psi_monitor(moving, rest, geom, CONST) > 0.0

    # an identical earlier sample contributes no finite-difference terms
    prev = FluidState(state.rho.copy(), state.v.copy(), time=0.0)
    later = FluidState(state.rho.copy(), state.v.copy(), time=0.5)
    base = psi_monitor(later, rest, geom, CONST)
    assert psi_monitor(later, rest, geom, CONST, prev=(prev, rest)) == base

    changed = FluidState(state.rho * (1.0 + 1e-3), state.v.copy(), time=0.5)
    assert psi_monitor(changed, rest, geom, CONST, prev=(prev, rest)) > psi_monitor(
        changed, rest, geom, CONST
    )


def test_record_row_matches_columns():
    geom = box_geometry(8)
    state = uniform_state(geom)
    rigid = RigidState(np.array([0.0, 0.0, 0.2]), np.zeros(3))
    rec = make_record(state, rigid, geom, CONST, diss_integral=1.5, prev_rho=state.rho * 1.01)
    row = rec.row()
    assert len(row) == len(CSV_COLUMNS) == 16
    assert row[0] == state.time
    assert row[4] == pytest.approx(M_F, rel=1e-14)
    assert row[5] == pytest.approx(
        np.linalg.norm(angular_momentum_from_fields(state, rigid, geom)), rel=1e-13
    )
    assert row[3] == 1.5
    assert row[8:11] == (0.0, 0.0, 0.2)
    assert rec.rho_delta == pytest.approx(l2_norm(0.01 * state.rho, geom), rel=1e-12)
    assert rec.sigma_linf == pytest.approx(0.0, abs=1e-15)


def synthetic_record(t, v_l2, omega, rho_delta=0.0):
    return DiagnosticsRecord(
        t=t,
        energy=1.0,
        dissipation_rate=0.0,
        diss_integral=0.0,
        mass=M_F,
        M_norm=1e-3,
        psi=0.0,
        v_l2=v_l2,
        omega=np.asarray(omega, dtype=float),
        xi=np.zeros(3),
        sigma_linf=0.0,
        rho_delta=rho_delta,
    )


def test_detect_convergence():
    with pytest.raises(ValueError, match="two"):
        detect_convergence([synthetic_record(0.0, 1e-9, [0, 0, 1])])

    steady = [synthetic_record(0.1 * k, 1e-9, [0.0, 0.0, 1.0]) for k in range(5)]
    status = detect_convergence(steady, window_time=0.3)
    assert status.converged
    assert status.omega_variation == 0.0
    assert "terminal" in status.message

    drifting = [synthetic_record(0.1 * k, 1e-9, [0.0, 0.0, 1.0 + 0.01 * k]) for k in range(5)]
    status = detect_convergence(drifting, window_time=1.0)
    assert not status.converged
    assert status.omega_variation == pytest.approx(0.04, rel=1e-12)

    fast = [synthetic_record(0.1 * k, 1e-2, [0.0, 0.0, 1.0]) for k in range(5)]
    assert not detect_convergence(fast, window_time=0.3).converged

    churn = [synthetic_record(0.1 * k, 1e-9, [0.0, 0.0, 1.0], rho_delta=1e-3) for k in range(5)]
    assert not detect_convergence(churn, window_time=0.3).converged


def test_compare_to_branch_identifies_sign_and_index():
    geom = box_geometry(8)
    cst = PhysicalConstants(a=100.0, gamma=1.4, mu=0.05)
    branches = enumerate_branches(geom, cst, 1e-3, M_F)
    br = branches[1]
    M = 1e-3 * br.omega_s / np.linalg.norm(br.omega_s)

    exact = OmegaLimitCandidate(br.omega_s.copy(), br.xi_s.copy(), br.rho_s.copy(), M)
    match = compare_to_branch(exact, branches, geom)
    assert match.branch_index == 1 and match.sign == 1
    assert match.rho_distance == 0.0
    assert match.omega_distance == 0.0
    assert match.momentum_angle < 1e-12

    flipped = OmegaLimitCandidate(-br.omega_s, -br.xi_s, br.rho_s.copy(), -M)
    match = compare_to_branch(flipped, branches, geom)
    assert match.branch_index == 1 and match.sign == -1
    assert match.omega_distance == 0.0

    # the angle reports axis misalignment between omega and M
    tilted = OmegaLimitCandidate(
        np.array([1.0, 0.0, 0.0]),
        np.zeros(3),
        br.rho_s.copy(),
        np.array([np.cos(0.3), np.sin(0.3), 0.0]),
    )
    assert compare_to_branch(tilted, branches, geom).momentum_angle == pytest.approx(0.3, abs=1e-12)

    with pytest.raises(ValueError, match="branches"):
        compare_to_branch(exact, [], geom)


def test_steady_residual_norm():
    geom = box_geometry(10)
    cst = PhysicalConstants(a=100.0, gamma=1.4, mu=0.05)
    rho_bar = M_F / geom.volume
    assert steady_residual_norm(np.full(geom.shape, rho_bar), np.zeros(3), np.zeros(3), geom, cst) == 0.0
    br = enumerate_branches(geom, cst, 1e-3, M_F)[0]
    resid = steady_residual_norm(br.rho_s, br.omega_s, br.xi_s, geom, cst)
    assert 0.0 < resid < 1e-4
