"""Command line interface.

Subcommands:
  simulate  integrate a configured run, write CSV / checkpoint / manifest
  steady    enumerate permanent-rotation branches, report, export one
  scan      sweep the pressure stiffness and tabulate decay quantities
  verify    run the property suite; nonzero exit on any violation
  compare   simulate to the terminal state and match it to a branch

Exit codes: 0 success, 1 usage, 2 validation, 3 numerical failure,
4 property violation.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .backend import BACKEND
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, load_config, parse_config, run_manifest
from . import dynamics
from .diagnostics import (
    OmegaLimitCandidate,
    angular_momentum_from_fields,
    compare_to_branch,
    energy,
    l2_norm,
    steady_residual_norm,
)
from .dynamics import NumericalError, PhysicalConstants
from .fields import FluidState, RigidState
from .geometry import CavityBodyGeometry, GeometryError, compute_mass_properties, inertia_about
from .rotation import quat_to_matrix, reconstruct_orientation
from .run import simulator_from_config, write_csv, write_final_checkpoint
from .steady import (
    DegenerateInertiaError,
    VacuumRegionError,
    assemble_F,
    assemble_gradF,
    enumerate_branches,
    reduced_matrix_check,
    scan_decay,
    system_inertia,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_PROPERTY = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; 2 is reserved for validation here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _vec(v) -> str:
    return "(" + ", ".join("%.12g" % (float(x) + 0.0) for x in np.asarray(v).ravel()) + ")"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spincavity", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"spincavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="integrate a configured run")
    p_sim.add_argument("config", help="INI run configuration")
    p_sim.add_argument("--restart", default="", help="checkpoint to resume from")
    p_sim.add_argument("--csv", default="", help="override [output] csv path")
    p_sim.add_argument("--checkpoint", default="", help="override [output] checkpoint path")
    p_sim.add_argument("--manifest", default="", help="override [output] manifest path")
    p_sim.add_argument(
        "--run-to-end",
        action="store_true",
        help="ignore the convergence detector and integrate the full budget",
    )

    p_std = sub.add_parser("steady", help="solve the permanent-rotation branches")
    p_std.add_argument("config", help="INI run configuration (geometry and constants)")
    p_std.add_argument(
        "--m0",
        type=float,
        default=None,
        help="angular momentum magnitude (default: |[initial] angular_momentum|)",
    )
    p_std.add_argument("--branch", type=int, default=0, help="branch index to export")
    p_std.add_argument("--checkpoint", default="", help="write the selected branch as a checkpoint")

    p_scan = sub.add_parser("scan", help="sweep pressure stiffness, tabulate decay quantities")
    p_scan.add_argument("config", help="INI run configuration (geometry and constants)")
    p_scan.add_argument("--m0", type=float, default=None, help="angular momentum magnitude")
    p_scan.add_argument(
        "--a-values",
        default="1e2,1e3,1e4,1e5,1e6",
        help="comma-separated stiffness values (default 1e2..1e6 decades)",
    )
    p_scan.add_argument("--branch", type=int, default=0, help="branch index to follow")
    p_scan.add_argument("--out", default="-", help="output CSV path, - for stdout")

    p_ver = sub.add_parser("verify", help="run the property suite")
    p_ver.add_argument(
        "config",
        nargs="?",
        default="",
        help="optional INI config; its geometry/constants replace the built-in desk case",
    )

    p_cmp = sub.add_parser("compare", help="simulate, then match the terminal state to a branch")
    p_cmp.add_argument("config", help="INI run configuration")
    p_cmp.add_argument("--restart", default="", help="checkpoint to resume from")
    return parser


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    sim = simulator_from_config(config, restart=args.restart)
    result = sim.run(stop_on_convergence=not args.run_to_end)

    first, last = result.records[0], result.records[-1]
    mass_drift = abs(last.mass - first.mass) / abs(first.mass)
    m_scale = max(first.M_norm, 1e-300)
    m_drift = abs(last.M_norm - first.M_norm) / m_scale
    e_resid = abs(last.energy + last.diss_integral - first.energy) / abs(first.energy)

    print(f"backend {BACKEND}  grid {'x'.join(map(str, config.geometry.shape))}  dt {result.dt:.6g}")
    print(f"steps {result.steps}  t_final {last.t:.6g}  stop {result.stop_reason}")
    print(f"mass drift {mass_drift:.3e}  |M| drift {m_drift:.3e}  energy residual {e_resid:.3e}")
    print(f"v_l2 {last.v_l2:.6e}  omega {_vec(result.rigid.omega)}  xi {_vec(result.rigid.xi)}")

    csv_path = args.csv or config.output.csv
    ckpt_path = args.checkpoint or config.output.checkpoint
    manifest_path = args.manifest or config.output.manifest
    if csv_path:
        write_csv(result.records, csv_path)
        print(f"wrote {csv_path}")
    if ckpt_path:
        write_final_checkpoint(result, ckpt_path)
        print(f"wrote {ckpt_path}")
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(run_manifest(config, __version__))
        print(f"wrote {manifest_path}")
    return EXIT_OK


def _config_m0(config, override) -> float:
    if override is not None:
        if override < 0.0:
            raise ConfigError("angular momentum magnitude must be non-negative")
        return float(override)
    return float(np.linalg.norm(config.initial.angular_momentum))


def cmd_steady(args) -> int:
    config = load_config(args.config)
    geometry, constants = config.geometry, config.constants
    m0 = _config_m0(config, args.m0)
    m_f = config.initial.fluid_mass
    branches = enumerate_branches(geometry, constants, m0, m_f)
    if not 0 <= args.branch < len(branches):
        raise ConfigError(f"branch index {args.branch} outside 0..{len(branches) - 1}")

    rho_bar = m_f / geometry.volume
    print(f"permanent rotations: M0 {m0:.12g}  m_F {m_f:.12g}  rho_bar {rho_bar:.12g}")
    print(f"a {constants.a:.6g}  gamma {constants.gamma:.6g}  mu {constants.mu:.6g}  lam {constants.lam:.6g}")
    for idx, br in enumerate(branches):
        status = "converged" if br.converged else "NOT CONVERGED"
        print(f"branch {idx}: lambda_s {br.lambda_s:.12g}  {status} in {br.iterations} iterations")
        print(f"  omega_s {_vec(br.omega_s)}")
        print(f"  xi_s    {_vec(br.xi_s)}")
        print(f"  c_s {br.c_s:.12g}  newton residual {br.newton_residual:.3e}"
              f"  jacobian condition {br.jacobian_condition:.3e}")
        band = "inside" if br.profile_in_band else "OUTSIDE"
        print(f"  density span [{br.rho_s.min():.9g}, {br.rho_s.max():.9g}]"
              f"  ({band} (rho_bar/2, 3 rho_bar/2))")
        if br.message:
            print(f"  note: {br.message}")
        if m0 > 0.0:
            chk = reduced_matrix_check(br, geometry, constants, m_f)
            ident = max(chk["identity_residuals"])
            print(f"  reduced matrix: sigma_min {chk['sigma_min']:.6e}"
                  f"  identity residual {ident:.3e}"
                  f"  axis alignment {chk['eigen_alignment_angle']:.3e} rad")
        resid = steady_residual_norm(br.rho_s, br.omega_s, br.xi_s, geometry, constants)
        print(f"  discrete momentum residual {resid:.6e}")

    if args.checkpoint:
        br = branches[args.branch]
        state = FluidState(br.rho_s, np.zeros(br.rho_s.shape + (3,)))
        rigid = RigidState(br.omega_s.copy(), br.xi_s.copy(),
                           angular_momentum=br.lambda_s * br.omega_s)
        save_checkpoint(args.checkpoint, state, rigid)
        print(f"wrote branch {args.branch} to {args.checkpoint}")
    return EXIT_OK


def cmd_scan(args) -> int:
    config = load_config(args.config)
    m0 = _config_m0(config, args.m0)
    if m0 == 0.0:
        raise ConfigError("scan needs a nonzero angular momentum magnitude")
    try:
        a_values = [float(s) for s in args.a_values.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --a-values entry: {exc}") from None
    if not a_values:
        raise ConfigError("--a-values is empty")
    rows = scan_decay(config.geometry, config.constants, m0, config.initial.fluid_mass,
                      a_values, branch_index=args.branch)

    lines = ["a,perturbation_norm,inertia_shift,sigma_min"]
    for row in rows:
        lines.append(",".join("%.17g" % row[k]
                              for k in ("a", "perturbation_norm", "inertia_shift", "sigma_min")))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.out}")

    if len(rows) >= 2:
        la = np.log([r["a"] for r in rows])
        for key in ("perturbation_norm", "inertia_shift"):
            vals = np.array([r[key] for r in rows])
            if np.all(vals > 0.0):
                slope = np.polyfit(la, np.log(vals), 1)[0]
                print(f"log-log slope {key} {slope:+.4f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = load_config(args.config)
    sim = simulator_from_config(config, restart=args.restart)
    result = sim.run(stop_on_convergence=True)
    geometry, constants = config.geometry, config.constants
    state, rigid = result.state, result.rigid
    last = result.records[-1]

    conv = result.convergence
    converged = conv is not None and conv.converged
    print(f"run: steps {result.steps}  t_final {last.t:.6g}  stop {result.stop_reason}")
    print(f"terminal v_l2 {last.v_l2:.6e}  converged {'yes' if converged else 'no'}")

    m0 = float(np.linalg.norm(rigid.angular_momentum))
    branches = enumerate_branches(geometry, constants, m0, config.initial.fluid_mass)
    candidate = OmegaLimitCandidate(
        omega=rigid.omega,
        xi=rigid.xi,
        rho=state.rho,
        angular_momentum=rigid.angular_momentum,
    )
    match = compare_to_branch(candidate, branches, geometry)
    resid = steady_residual_norm(state.rho, rigid.omega, rigid.xi, geometry, constants)
    print(f"nearest branch {match.branch_index} (sign {match.sign:+d}) of {len(branches)}")
    print(f"  rho distance {match.rho_distance:.6e}")
    print(f"  omega distance {match.omega_distance:.6e}  xi distance {match.xi_distance:.6e}")
    print(f"  omega/momentum angle {match.momentum_angle:.6e} rad")
    print(f"  discrete momentum residual {resid:.6e}")

    # Inertial-frame angular momentum from the reconstructed orientation:
    # constant for the exact dynamics, so its spread measures integration error.
    stride = max(1, len(result.times) // 512)
    quats = reconstruct_orientation(result.times[::stride], result.omegas[::stride])
    inertial = np.array([quat_to_matrix(q) @ m
                         for q, m in zip(quats, result.momenta[::stride])])
    spread = float(np.max(np.linalg.norm(inertial - inertial[0], axis=1)))
    print(f"  inertial momentum spread {spread:.6e}"
          + (f"  (relative {spread / m0:.6e})" if m0 > 0.0 else ""))

    if not converged:
        print("property violation: run did not reach a terminal state within budget",
              file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


# --- verify battery ---------------------------------------------------------

def _desk_case():
    geometry = CavityBodyGeometry(
        lengths=(0.3, 0.4, 0.5),
        center=(0.0, 0.0, 0.0),
        shape=(12, 12, 12),
        body_mass=5.0,
        body_inertia=np.diag((0.11, 0.13, 0.15)),
    )
    constants = PhysicalConstants(a=10.0, gamma=1.4, mu=0.05)
    return geometry, constants, geometry.volume


def _random_density(rng, geometry, m_f):
    rho = np.exp(rng.uniform(-0.5, 0.5, size=geometry.shape))
    rho *= m_f / (np.sum(rho) * geometry.cell_volume)
    return rho


def _check_inertia_properties(geometry, constants, m_f, reports):
    rng = np.random.default_rng(2024)
    worst_eig, worst_lagrange, worst_steiner = np.inf, -np.inf, 0.0
    for _ in range(20):
        rho = _random_density(rng, geometry, m_f)
        props = compute_mass_properties(geometry, rho)
        imat = props.system_inertia
        sym = float(np.max(np.abs(imat - imat.T))) / float(np.max(np.abs(imat)))
        eigs = np.linalg.eigvalsh(imat)
        worst_eig = min(worst_eig, float(eigs.min()))
        g = props.first_moment
        ibar = inertia_about(geometry, rho, np.zeros(3)) - props.body_inertia
        for _ in range(5):
            avec = rng.normal(size=3)
            lhs = float(np.cross(avec, g) @ np.cross(avec, g))
            rhs = props.fluid_mass * float(avec @ ibar @ avec)
            worst_lagrange = max(worst_lagrange, (lhs - rhs) / max(abs(rhs), 1e-300))
        direct = inertia_about(geometry, rho, props.center_offset)
        mismatch = float(np.max(np.abs(direct - imat))) / float(np.max(np.abs(imat)))
        worst_steiner = max(worst_steiner, mismatch, sym)
    ok = worst_eig > 0.0 and worst_lagrange <= 1e-12 and worst_steiner <= 1e-10
    reports.append((ok, "inertia properties",
                    f"min eigenvalue {worst_eig:.3e}, Lagrange excess {worst_lagrange:.3e}, "
                    f"Steiner mismatch {worst_steiner:.3e}"))


def _check_closure(geometry, reports):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        rho = _random_density(rng, geometry, geometry.volume)
        w = rng.normal(scale=0.1, size=geometry.shape + (3,))
        m_vec = rng.normal(size=3)
        direct = dynamics.rigid_from_conserved(rho, w, m_vec, geometry)
        state, _ = dynamics.state_from_conserved(rho, w, m_vec, geometry)
        sym = dynamics.solve_rigid_closure(state, m_vec, geometry)
        worst = max(worst, float(np.max(np.abs(direct.omega - sym.omega))),
                    float(np.max(np.abs(direct.xi - sym.xi))))
    reports.append((worst <= 1e-10, "rigid closure route agreement", f"max deviation {worst:.3e}"))


def _check_discrete_identities(geometry, constants, reports):
    rng = np.random.default_rng(11)
    rho = _random_density(rng, geometry, geometry.volume)
    v = rng.normal(scale=0.1, size=geometry.shape + (3,))
    state = FluidState(rho, v)
    rigid = RigidState(np.array([0.3, -0.2, 0.5]), np.array([0.1, 0.0, -0.05]))
    vol = geometry.cell_volume

    drho = dynamics.continuity_rhs(state, rigid, geometry)
    mass_rate = abs(float(np.sum(drho))) / max(float(np.sum(np.abs(drho))), 1e-300)
    dfil = dynamics.density_filter_rhs(rho, geometry, constants, 0.05)
    filt_rate = abs(float(np.sum(dfil))) / max(float(np.sum(np.abs(dfil))), 1e-300)
    force, phi = dynamics.viscous_force(v, geometry, constants)
    duality = abs(float(np.sum(v * force)) * vol + phi) / max(phi, 1e-300)
    ok = mass_rate <= 1e-13 and filt_rate <= 1e-13 and duality <= 1e-12
    reports.append((ok, "discrete conservation and dissipation duality",
                    f"relative mass rate {mass_rate:.1e}, filter rate {filt_rate:.1e}, "
                    f"duality defect {duality:.3e}"))


def _check_conservation_run(geometry, constants, m_f, reports):
    rng = np.random.default_rng(3)
    rho_bar = m_f / geometry.volume
    rho = rho_bar * (1.0 + 1e-2 * rng.uniform(-1.0, 1.0, size=geometry.shape))
    rho *= m_f / (np.sum(rho) * geometry.cell_volume)
    v = 1e-2 * rng.uniform(-1.0, 1.0, size=geometry.shape + (3,))
    state = FluidState(rho, v)
    m_vec = np.array([0.0, 0.0, 1e-4])
    rigid = dynamics.solve_rigid_closure(state, m_vec, geometry)

    dt = dynamics.cfl_timestep(state, rigid, geometry, constants, 0.4)
    mass0 = float(np.sum(state.rho)) * geometry.cell_volume
    e0 = energy(state, rigid, geometry, constants)
    diss = 0.0
    monotone = True
    e_prev = e0
    for _ in range(150):
        state, rigid, info = dynamics.step(state, rigid, dt, geometry, constants, filter_coeff=0.0)
        diss += info.dissipation_increment
        e_now = energy(state, rigid, geometry, constants)
        if e_now > e_prev + 1e-9 * abs(e0):
            monotone = False
        e_prev = e_now
    mass_drift = abs(float(np.sum(state.rho)) * geometry.cell_volume - mass0) / mass0
    m_drift = abs(float(np.linalg.norm(rigid.angular_momentum)) - 1e-4) / 1e-4
    e_resid = abs(e_now + diss - e0) / abs(e0)
    ok = mass_drift <= 1e-12 and m_drift <= 1e-10 and e_resid <= 1e-5 and monotone
    reports.append((ok, "conservation over 150 steps",
                    f"mass drift {mass_drift:.3e}, |M| drift {m_drift:.3e}, "
                    f"energy residual {e_resid:.3e}, monotone {monotone}"))


def _check_steady_suite(geometry, constants, m_f, reports):
    cst = PhysicalConstants(a=1000.0, gamma=constants.gamma, mu=constants.mu, lam=constants.lam)
    m0 = 1e-3
    branches = enumerate_branches(geometry, cst, m0, m_f)
    worst_resid = max(br.newton_residual for br in branches)
    all_conv = all(br.converged for br in branches)
    worst_ident, worst_sigma = 0.0, np.inf
    for br in branches:
        chk = reduced_matrix_check(br, geometry, cst, m_f)
        worst_ident = max(worst_ident, max(chk["identity_residuals"]))
        worst_sigma = min(worst_sigma, chk["sigma_min"])

    rng = np.random.default_rng(17)
    base = branches[0]
    worst_jac = 0.0
    for _ in range(5):
        lam = base.lambda_s * (1.0 + 0.3 * rng.uniform(-1, 1))
        omega = base.omega_s + 0.3 * np.linalg.norm(base.omega_s) * rng.uniform(-1, 1, 3)
        xi = base.xi_s + (1e-6 + 0.3 * np.linalg.norm(base.xi_s)) * rng.uniform(-1, 1, 3)
        c = base.c_s * (1.0 + 1e-3 * rng.uniform(-1, 1))
        jac = assemble_gradF(lam, omega, xi, c, geometry, cst, m0, m_f)
        fd = np.zeros_like(jac)
        z = np.array([lam, *omega, *xi, c])
        for col in range(8):
            hstep = 1e-6 * max(abs(z[col]), 1e-3)
            zp, zm = z.copy(), z.copy()
            zp[col] += hstep
            zm[col] -= hstep
            fp = assemble_F(zp[0], zp[1:4], zp[4:7], zp[7], geometry, cst, m0, m_f)
            fm = assemble_F(zm[0], zm[1:4], zm[4:7], zm[7], geometry, cst, m0, m_f)
            fd[:, col] = (fp - fm) / (2.0 * hstep)
        scale = float(np.max(np.abs(jac)))
        worst_jac = max(worst_jac, float(np.max(np.abs(jac - fd))) / scale)

    ok = (all_conv and worst_resid <= 1e-12 and worst_ident <= 1e-10
          and worst_sigma > 0.0 and worst_jac <= 1e-6)
    reports.append((ok, "steady branches and Jacobian",
                    f"newton residual {worst_resid:.3e}, identity residual {worst_ident:.3e}, "
                    f"sigma_min {worst_sigma:.3e}, FD Jacobian mismatch {worst_jac:.3e}"))
    return branches


def _check_steady_feed(geometry, constants, m_f, branches, reports):
    cst = PhysicalConstants(a=1000.0, gamma=constants.gamma, mu=constants.mu, lam=constants.lam)
    br = branches[0]
    resid = steady_residual_norm(br.rho_s, br.omega_s, br.xi_s, geometry, cst)
    scale = cst.a * (m_f / geometry.volume) ** cst.gamma / min(geometry.lengths)
    ok = resid <= 1e-6 * scale
    reports.append((ok, "steady state balances the discrete momentum equation",
                    f"residual {resid:.3e} against pressure scale {scale:.3e}"))


def _check_checkpoint(geometry, reports, tmpdir):
    import os

    rng = np.random.default_rng(23)
    rho = _random_density(rng, geometry, geometry.volume)
    v = rng.normal(size=geometry.shape + (3,))
    state = FluidState(rho, v, time=0.375)
    rigid = RigidState(rng.normal(size=3), rng.normal(size=3), angular_momentum=rng.normal(size=3))
    path = os.path.join(tmpdir, "verify.ckpt")
    save_checkpoint(path, state, rigid)
    state2, rigid2 = load_checkpoint(path, expected_shape=geometry.shape)
    ok = (state2.rho.tobytes() == state.rho.tobytes()
          and state2.v.tobytes() == state.v.tobytes()
          and state2.time == state.time
          and rigid2.omega.tobytes() == rigid.omega.tobytes()
          and rigid2.xi.tobytes() == rigid.xi.tobytes()
          and rigid2.angular_momentum.tobytes() == rigid.angular_momentum.tobytes())
    reports.append((ok, "checkpoint round-trip is bit exact", "compared raw buffers"))


def _check_config_validation(reports):
    base = (
        "[geometry]\nlengths = 0.3 0.4 0.5\nshape = 8 8 8\n"
        "body_mass = 5.0\nbody_inertia = 0.11 0.13 0.15\n"
        "[constants]\na = 10.0\ngamma = {gamma}\nmu = 0.05\n"
    )
    try:
        parse_config(base.format(gamma="0.9"))
        ok1, msg1 = False, "gamma = 0.9 accepted"
    except ConfigError as exc:
        ok1 = "gamma must exceed 1" in str(exc)
        msg1 = "gamma = 0.9 rejected"
    try:
        parse_config(base.format(gamma="1.4") + "[constants]\na = 2.0\n")
        ok2, msg2 = False, "duplicate section accepted"
    except ConfigError as exc:
        ok2 = "line" in str(exc)
        msg2 = "duplicate section rejected with line number"
    reports.append((ok1 and ok2, "config validation", f"{msg1}; {msg2}"))


def cmd_verify(args) -> int:
    import tempfile

    if args.config:
        config = load_config(args.config)
        geometry, constants = config.geometry, config.constants
        m_f = config.initial.fluid_mass
    else:
        geometry, constants, m_f = _desk_case()

    reports: list[tuple[bool, str, str]] = []
    checks = [
        lambda: _check_inertia_properties(geometry, constants, m_f, reports),
        lambda: _check_closure(geometry, reports),
        lambda: _check_discrete_identities(geometry, constants, reports),
        lambda: _check_conservation_run(geometry, constants, m_f, reports),
    ]
    for chk in checks:
        try:
            chk()
        except Exception as exc:  # a crashed check is a failed check
            reports.append((False, "check raised", f"{type(exc).__name__}: {exc}"))
    try:
        branches = _check_steady_suite(geometry, constants, m_f, reports)
        _check_steady_feed(geometry, constants, m_f, branches, reports)
    except Exception as exc:
        reports.append((False, "steady suite raised", f"{type(exc).__name__}: {exc}"))
    with tempfile.TemporaryDirectory() as tmpdir:
        try:
            _check_checkpoint(geometry, reports, tmpdir)
        except Exception as exc:
            reports.append((False, "checkpoint check raised", f"{type(exc).__name__}: {exc}"))
    _check_config_validation(reports)

    failures = 0
    for ok, name, detail in reports:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(reports) - failures}/{len(reports)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_PROPERTY


_COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GeometryError, CheckpointError, DegenerateInertiaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, VacuumRegionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
