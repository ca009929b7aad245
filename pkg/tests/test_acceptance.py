"""Acceptance gate: the eight desk-scale criteria for this package.

Each test covers one criterion and prints a single pass/fail line; the
assertions carry the same tolerances the line reports.  Runs are seeded
and deterministic, so the numbers below are stable across machines up
to libm differences.
"""

import hashlib
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import box_geometry, random_density
from test_steady import fd_jacobian
from spincavity.config import parse_config
from spincavity.diagnostics import OmegaLimitCandidate, compare_to_branch, l2_norm
from spincavity.dynamics import PhysicalConstants
from spincavity.fields import FluidState, RigidState
from spincavity.geometry import compute_mass_properties, inertia_about
from spincavity.rotation import quat_to_matrix, reconstruct_orientation
from spincavity.run import Simulator, simulator_from_config, write_csv
from spincavity.steady import (
    DegenerateInertiaError,
    assemble_gradF,
    enumerate_branches,
    mass_closure,
    scan_decay,
)


def _report(num, label, checks):
    """checks: list of (ok, description) pairs; prints one line, asserts all."""
    bad = [desc for ok, desc in checks if not ok]
    status = "PASS" if not bad else "FAIL"
    print(f"[criterion {num}] {label}: {status}" + (f"  -- {bad[0]}" if bad else ""))
    assert not bad, f"criterion {num} ({label}): " + "; ".join(bad)


def _config(n, a, extra=""):
    return parse_config(f"""
[geometry]
lengths = 0.3 0.4 0.5
shape = {n} {n} {n}
body_mass = 5.0
body_inertia = 0.11 0.13 0.15

[constants]
a = {a}
gamma = 1.4
mu = 0.05

[initial]
fluid_mass = 0.06
{extra}""")


def test_criterion_1_conservation_suite():
    cfg = _config(24, 10, """velocity_amplitude = 2e-2
density_amplitude = 1e-2
seed = 5
angular_momentum = 0 0 1e-5

[integrator]
max_steps = 10000
filter_coeff = 0

[diagnostics]
record_interval = 250
""")
    t0 = time.perf_counter()
    sim = simulator_from_config(cfg)
    result = sim.run(stop_on_convergence=False)
    wall = time.perf_counter() - t0

    recs = result.records
    m0, e0 = recs[0].mass, recs[0].energy
    mass_drift = max(abs(r.mass - m0) / m0 for r in recs)
    M0 = recs[0].M_norm
    m_norm_drift = max(abs(r.M_norm - M0) / M0 for r in recs)
    resid = abs(recs[-1].energy + recs[-1].diss_integral - e0) / e0

    # dt refinement on the same configuration over a fixed horizon
    def residual_at(dt, steps):
        c = _config(24, 10, f"""velocity_amplitude = 2e-2
density_amplitude = 1e-2
seed = 5
angular_momentum = 0 0 1e-5

[integrator]
max_steps = {steps}
filter_coeff = 0
dt = {dt!r}

[diagnostics]
record_interval = {steps}
""")
        r = simulator_from_config(c).run(stop_on_convergence=False)
        return abs(r.records[-1].energy + r.records[-1].diss_integral - r.records[0].energy)

    dt0 = result.dt
    r_coarse = residual_at(dt0, 400)
    r_fine = residual_at(dt0 / 2.0, 800)
    order = np.log2(r_coarse / r_fine)

    _report(1, "conservation suite, 24^3 x 10^4 steps", [
        (result.steps == 10000, f"ran {result.steps} steps"),
        (mass_drift <= 1e-12, f"mass drift {mass_drift:.3e} > 1e-12"),
        (m_norm_drift <= 1e-8, f"|M| drift {m_norm_drift:.3e} > 1e-8"),
        (resid <= 1e-3, f"energy residual {resid:.3e} > 1e-3"),
        (order >= 2.0, f"energy residual order {order:.2f} < 2 "
                       f"(R={r_coarse:.3e} -> {r_fine:.3e})"),
        (wall < 600.0, f"runtime {wall:.0f}s not laptop-scale"),
    ])


def test_criterion_2_branches_are_equilibria():
    cfg = _config(16, 1000)
    geom, cst = cfg.geometry, cfg.constants
    branches = enumerate_branches(geom, cst, 1e-3, 0.06)
    checks = [(len(branches) == 3, f"{len(branches)} branches")]
    for idx, br in enumerate(branches):
        state = FluidState(br.rho_s.copy(), np.zeros(geom.shape + (3,)))
        rigid = RigidState(br.omega_s.copy(), br.xi_s.copy(), br.lambda_s * br.omega_s)
        sim = Simulator(geom, cst, state, rigid, integrator=cfg.integrator,
                        diagnostics=cfg.diagnostics)
        sim.integrator.max_steps = 1000
        result = sim.run(stop_on_convergence=False)
        v_max = max(r.v_l2 for r in result.records)
        om_max = max(float(np.linalg.norm(r.omega - br.omega_s)) for r in result.records)
        checks.append((v_max <= 1e-6, f"branch {idx}: max ||v||_2 {v_max:.3e} > 1e-6"))
        checks.append((om_max <= 1e-6, f"branch {idx}: max |omega-omega_s| {om_max:.3e} > 1e-6"))
    _report(2, "steady branches stay stationary for 10^3 steps", checks)


def test_criterion_3_zero_momentum_terminal_state():
    cfg = _config(12, 10, """velocity_amplitude = 1e-2
density_amplitude = 1e-2
seed = 23
angular_momentum = 0 0 0

[integrator]
max_steps = 20000

[diagnostics]
record_interval = 50
v_tol = 5e-7
variation_tol = 1e-8
window_steps = 200
""")
    sim = simulator_from_config(cfg)
    result = sim.run()
    geom = cfg.geometry
    rho_bar = 0.06 / geom.volume
    rho_dev = l2_norm(result.state.rho - rho_bar, geom)
    om = float(np.linalg.norm(result.rigid.omega))
    xi = float(np.linalg.norm(result.rigid.xi))
    _report(3, "zero-momentum run relaxes to uniform rest", [
        (result.stop_reason == "converged",
         f"no terminal state in {result.steps} steps (v_l2 {result.records[-1].v_l2:.2e})"),
        (rho_dev <= 1e-4, f"||rho-rho_bar||_2 {rho_dev:.3e} > 1e-4"),
        (om <= 1e-6, f"|omega| {om:.3e} > 1e-6"),
        (xi <= 1e-6, f"|xi| {xi:.3e} > 1e-6"),
    ])


def test_criterion_4_small_momentum_terminal_rotation():
    cfg = _config(12, 1000, """velocity_amplitude = 5e-3
density_amplitude = 1e-3
seed = 7
angular_momentum = 0 0 1e-4

[integrator]
max_steps = 8000

[diagnostics]
record_interval = 25
""")
    geom, cst = cfg.geometry, cfg.constants
    sim = simulator_from_config(cfg)
    result = sim.run()
    checks = [(result.stop_reason == "converged",
               f"no terminal state in {result.steps} steps")]

    M_body = result.rigid.angular_momentum
    branches = enumerate_branches(geom, cst, float(np.linalg.norm(M_body)), 0.06)
    candidate = OmegaLimitCandidate(result.rigid.omega, result.rigid.xi,
                                    result.state.rho, M_body)
    match = compare_to_branch(candidate, branches, geom)
    br = branches[match.branch_index]
    rho_bar = 0.06 / geom.volume
    om_s = float(np.linalg.norm(br.omega_s))
    checks += [
        (match.rho_distance <= 1e-3 * rho_bar,
         f"||rho-rho_s||_2 {match.rho_distance:.3e} > 1e-3 rho_bar"),
        (match.omega_distance <= 1e-4 * om_s,
         f"|omega-omega_s| {match.omega_distance:.3e} > 1e-4 |omega_s|"),
        (match.momentum_angle <= 1e-3,
         f"omega/M angle {match.momentum_angle:.3e} rad > 1e-3"),
    ]

    # inertial angular momentum Q M along the reconstructed orientation
    quats = reconstruct_orientation(result.times, result.omegas)
    M_in = np.array([quat_to_matrix(q) @ m for q, m in zip(quats, result.momenta)])
    spread = float(np.max(np.linalg.norm(M_in - M_in[0], axis=1)))
    rel = spread / float(np.linalg.norm(M_in[0]))
    checks.append((rel <= 1e-6, f"inertial Q M spread {rel:.3e} > 1e-6 relative"))
    _report(4, "small-momentum run lands on a steady branch", checks)


def test_criterion_5_newton_system_and_stiff_limit():
    geom = box_geometry(12)
    checks = []
    for a in (1e2, 1e3, 1e4):
        cst = PhysicalConstants(a=a, gamma=1.4, mu=0.05)
        branches = enumerate_branches(geom, cst, 1e-3, 0.06)
        worst = max(br.newton_residual for br in branches)
        ok = len(branches) == 3 and all(br.converged for br in branches) and worst <= 1e-12
        checks.append((ok, f"a={a:g}: residual {worst:.2e} > 1e-12"))

    # analytic Jacobian against the finite-difference oracle
    small = box_geometry(10)
    cst = PhysicalConstants(a=1000.0, gamma=1.4, mu=0.05)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        lam = 0.13 * (1.0 + 0.3 * rng.uniform(-1, 1))
        omega = 0.01 * rng.normal(size=3)
        xi = 1e-4 * rng.normal(size=3)
        c = mass_closure(omega, xi, small, cst, 0.06) * (1.0 + 1e-4 * rng.uniform(-1, 1))
        J = assemble_gradF(lam, omega, xi, c, small, cst, 1e-3, 0.06)
        fd = fd_jacobian(lam, omega, xi, c, small, cst, 1e-3, 0.06)
        worst = max(worst, float(np.max(np.abs(J - fd)) / np.max(np.abs(J))))
    checks.append((worst <= 1e-6, f"Jacobian vs FD {worst:.2e} > 1e-6"))

    # stiff-limit decay: at gamma = 2 both perturbation norms scale as
    # a^(-1/(gamma-1)) = 1/a; the fitted slopes must sit within 10%
    cst2 = PhysicalConstants(a=1.0, gamma=2.0, mu=0.05)
    a_values = [1e2, 1e3, 1e4, 1e5, 1e6]
    rows = scan_decay(geom, cst2, 1e-3, 0.06, a_values)
    target = -1.0 / (cst2.gamma - 1.0)
    loga = np.log([r["a"] for r in rows])
    for key in ("perturbation_norm", "inertia_shift"):
        slope = float(np.polyfit(loga, np.log([r[key] for r in rows]), 1)[0])
        ok = abs(slope - target) <= 0.1 * abs(target)
        checks.append((ok, f"{key} slope {slope:.3f} not within 10% of {target:g}"))
    sig_ok = all(r["sigma_min"] > 0.0 for r in rows)
    checks.append((sig_ok, "sigma_min vanished at some a"))
    print("        sigma_min over a in {1e2..1e6}:",
          ", ".join(f"{r['sigma_min']:.3e}" for r in rows))
    _report(5, "Newton residuals, Jacobian oracle, stiff-limit slopes", checks)


def test_criterion_6_inertia_property_suite():
    geom = box_geometry(10)
    rng = np.random.default_rng(314)
    checks = []
    worst_spd = np.inf
    worst_lag = -np.inf
    worst_steiner = 0.0
    for _ in range(100):
        rho = random_density(rng, geom, 0.06 * np.exp(rng.uniform(-1, 1)))
        props = compute_mass_properties(geom, rho)
        I = props.system_inertia
        worst_spd = min(worst_spd, float(np.min(np.linalg.eigvalsh(I))))
        # Lagrange: m_S a.I_g a = |a x g|^2 <= m_F a.Ibar a for every a
        for _ in range(5):
            av = rng.normal(size=3)
            lhs = float(np.linalg.norm(np.cross(av, props.first_moment)) ** 2)
            rhs = props.fluid_mass * float(av @ props.fluid_inertia @ av)
            worst_lag = max(worst_lag, lhs - rhs * (1.0 + 1e-12))
        # direct assembly about the system center of mass
        direct = inertia_about(geom, rho, props.center_offset)
        err = float(np.max(np.abs(direct - I)) / np.max(np.abs(I)))
        worst_steiner = max(worst_steiner, err)
    checks.append((worst_spd > 0.0, f"I(rho) not positive definite ({worst_spd:.3e})"))
    checks.append((worst_lag <= 0.0, f"Lagrange inequality violated by {worst_lag:.3e}"))
    checks.append((worst_steiner <= 1e-10, f"Steiner mismatch {worst_steiner:.3e} > 1e-10"))
    _report(6, "inertia SPD + Lagrange + Steiner over 100 random fields", checks)


def test_criterion_7_degenerate_inputs():
    import spincavity.geometry as G

    cube = G.CavityBodyGeometry(lengths=(0.4, 0.4, 0.4), center=(0.0, 0.0, 0.0),
                                shape=(10, 10, 10), body_mass=5.0,
                                body_inertia=0.12 * np.eye(3))
    cst = PhysicalConstants(a=1000.0, gamma=1.4, mu=0.05)
    refused = False
    try:
        enumerate_branches(cube, cst, 1e-3, cube.volume)
    except DegenerateInertiaError:
        refused = True

    geom = box_geometry(10)
    singleton = enumerate_branches(geom, cst, 0.0, 0.06)
    rho_bar = 0.06 / geom.volume
    ok_singleton = (
        len(singleton) == 1
        and singleton[0].lambda_s == 0.0
        and np.all(singleton[0].omega_s == 0.0)
        and np.all(singleton[0].xi_s == 0.0)
        and np.allclose(singleton[0].rho_s, rho_bar, rtol=1e-14)
    )
    _report(7, "cube cavity refused, zero momentum gives the rest branch", [
        (refused, "degenerate cube was not refused"),
        (ok_singleton, "zero-momentum enumeration is not the uniform rest singleton"),
    ])


def test_criterion_8_byte_reproducibility(tmp_path):
    # end-to-end simulate pipeline re-run under different thread settings
    cfg_text = """
[geometry]
lengths = 0.3 0.4 0.5
shape = 16 16 16
body_mass = 5.0
body_inertia = 0.11 0.13 0.15

[constants]
a = 10
gamma = 1.4
mu = 0.05

[initial]
fluid_mass = 0.06
velocity_amplitude = 2e-2
density_amplitude = 1e-2
seed = 5
angular_momentum = 0 0 1e-5

[integrator]
max_steps = 300

[diagnostics]
record_interval = 50
"""
    cfg_path = tmp_path / "repro.ini"
    cfg_path.write_text(cfg_text, encoding="utf-8")
    boot = "import sys; from spincavity.cli import main; sys.exit(main(sys.argv[1:]))"

    digests = []
    for tag, threads in (("t1a", "1"), ("t1b", "1"), ("t4", "4")):
        csv = tmp_path / f"{tag}.csv"
        ckpt = tmp_path / f"{tag}.ckpt"
        env = dict(os.environ)
        env["OMP_NUM_THREADS"] = threads
        env["NUMBA_NUM_THREADS"] = threads
        proc = subprocess.run(
            [sys.executable, "-c", boot, "simulate", str(cfg_path),
             "--csv", str(csv), "--checkpoint", str(ckpt), "--run-to-end"],
            env=env, capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        blob = csv.read_bytes() + ckpt.read_bytes()
        digests.append((tag, hashlib.sha256(blob).hexdigest()))

    # the steady/scan text pipeline repeats exactly in-process too
    geom = box_geometry(10)
    cst = PhysicalConstants(a=1.0, gamma=2.0, mu=0.05)
    rows1 = scan_decay(geom, cst, 1e-3, 0.06, [1e2, 1e3])
    rows2 = scan_decay(geom, cst, 1e-3, 0.06, [1e2, 1e3])
    cfg = parse_config(cfg_text)
    res1 = simulator_from_config(cfg).run(stop_on_convergence=False)
    res2 = simulator_from_config(cfg).run(stop_on_convergence=False)
    p1, p2 = tmp_path / "rep1.csv", tmp_path / "rep2.csv"
    write_csv(res1.records, str(p1))
    write_csv(res2.records, str(p2))

    _report(8, "byte-identical outputs across executions and thread counts", [
        (len({d for _, d in digests}) == 1,
         "subprocess hashes differ: " + ", ".join(f"{t}={d[:12]}" for t, d in digests)),
        (rows1 == rows2, "scan rows differ between repeated calls"),
        (p1.read_bytes() == p2.read_bytes(), "CSV bytes differ between repeated runs"),
    ])
