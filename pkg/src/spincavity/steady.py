"""Steady rigid rotations: profile, mass closure, branch solves.

A permanent rotation of the coupled system has v = 0 and a density
profile set by centrifugal balance,

    rho^(gamma-1) = (gamma-1)/(2 a gamma) (|omega x x|^2
                    - 2 (omega x xi) . x) + c  =: p(omega, xi, c),

together with four algebraic constraints: omega is an eigenvector of
the system inertia I(rho) with eigenvalue lambda, lambda |omega| equals
the conserved angular-momentum magnitude M0, the translational balance
m_S xi = g(rho) x omega, and total fluid mass m_F.  Stacked over the
unknowns (lambda, omega, xi, c) this is an 8-dimensional root problem
F = 0 with (for distinct inertia eigenvalues and stiff enough pressure)
exactly three isolated solution branches, one per eigenvalue.

Solver layout: the profile constant c is eliminated inside the Newton
loop through the strictly monotone mass closure, leaving a damped
7-dimensional Newton iteration; `assemble_F`/`assemble_gradF` keep the
full 8-dimensional form so the Jacobian can be checked independently
against finite differences.  `assemble_gradF` returns the complete
derivative, including the through-profile terms in the c-column; the
perturbation matrix used for the large-a decay report
(`perturbation_matrix`) contains only the omega/xi through-profile
blocks, whose norm vanishes as the pressure stiffens.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import PhysicalConstants
from .geometry import CavityBodyGeometry, compute_mass_properties

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MIN_DAMPING = 2.0**-20
EIGEN_GAP_TOL = 1e-9


class VacuumRegionError(RuntimeError):
    """The centrifugal potential opens a non-positive-density region."""


class DegenerateInertiaError(RuntimeError):
    """Repeated inertia eigenvalues: branches are not isolated."""


@dataclass
class SteadyBranch:
    """One converged (or flagged) solution of the steady system."""

    lambda_s: float
    omega_s: np.ndarray
    xi_s: np.ndarray
    c_s: float
    rho_s: np.ndarray
    newton_residual: float
    jacobian_condition: float
    converged: bool = True
    iterations: int = 0
    profile_in_band: bool = True
    message: str = ""


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _bracket_field(omega, xi, c, geometry, constants):
    """p(omega, xi, c) per cell (the quantity rho^(gamma-1) balances)."""
    x = geometry.cell_centers
    wx = np.cross(omega, x)
    lin = x @ np.cross(omega, xi)
    scale = (constants.gamma - 1.0) / (2.0 * constants.a * constants.gamma)
    return scale * (np.einsum("ijkc,ijkc->ijk", wx, wx) - 2.0 * lin) + c


def density_profile(omega, xi, c, geometry, constants) -> np.ndarray:
    """Centrifugal density profile p**(1/(gamma-1)) per cell."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    xi = np.asarray(xi, dtype=float).reshape(3)
    p = _bracket_field(omega, xi, float(c), geometry, constants)
    pmin = float(np.min(p))
    if pmin <= 0.0:
        idx = np.unravel_index(int(np.argmin(p)), p.shape)
        pos = geometry.cell_centers[idx]
        raise VacuumRegionError(
            f"vacuum region: bracket p = {pmin:.6e} <= 0 at cell {tuple(int(i) for i in idx)} "
            f"(x = {pos[0]:.4f}, {pos[1]:.4f}, {pos[2]:.4f}); "
            "the rotation is too fast for this profile constant"
        )
    return p ** (1.0 / (constants.gamma - 1.0))


def mass_closure(omega, xi, geometry, constants, m_F) -> float:
    """Profile constant c with integral of the profile equal to m_F.

    The cell mass is strictly increasing in c, so the root is unique on
    the positivity interval; safeguarded Newton with a bisection
    fallback keeps every iterate inside the bracket.
    """
    if not m_F > 0.0:
        raise ValueError("fluid mass m_F must be positive")
    omega = np.asarray(omega, dtype=float).reshape(3)
    xi = np.asarray(xi, dtype=float).reshape(3)
    pot = _bracket_field(omega, xi, 0.0, geometry, constants)
    vol = geometry.cell_volume
    expo = 1.0 / (constants.gamma - 1.0)

    def mass(c):
        p = pot + c
        return float(np.sum(np.maximum(p, 0.0) ** expo)) * vol

    lo = -float(np.min(pot))
    if mass(lo) >= m_F:
        raise VacuumRegionError(
            f"no positive-density profile reaches mass {m_F:.6e}: even at the "
            f"positivity limit c = {lo:.6e} the profile holds {mass(lo):.6e}"
        )
    hi = lo + max((m_F / geometry.volume) ** (constants.gamma - 1.0), 1.0)
    while mass(hi) < m_F:
        hi = lo + 2.0 * (hi - lo)
    c = min(max((m_F / geometry.volume) ** (constants.gamma - 1.0) - float(np.mean(pot)), lo + 0.5 * (hi - lo) * 1e-12), hi)
    for _ in range(100):
        p = pot + c
        err = float(np.sum(p**expo)) * vol - m_F
        if err > 0.0:
            hi = c
        else:
            lo = c
        slope = expo * float(np.sum(p ** (expo - 1.0))) * vol
        step = -err / slope
        c_new = c + step
        if not (lo < c_new < hi):
            c_new = 0.5 * (lo + hi)
        if abs(err) <= 1e-14 * m_F:
            return float(c)
        c = c_new
    return float(c)


def _system_inertia_parts(rho, geometry, m_S):
    """(I, g, fluid_mass) with the Steiner correction at fixed total mass."""
    props = compute_mass_properties(geometry, rho)
    g = props.first_moment
    inertia = (
        geometry.body_inertia
        + props.fluid_inertia
        - (np.dot(g, g) * np.eye(3) - np.outer(g, g)) / m_S
    )
    return inertia, g, props.fluid_mass


def system_inertia(rho, geometry, m_F) -> np.ndarray:
    """Inertia tensor of body plus fluid about the joint center of mass."""
    m_S = geometry.body_mass + m_F
    return _system_inertia_parts(rho, geometry, m_S)[0]


def assemble_F(lam, omega, xi, c, geometry, constants, M0, m_F) -> np.ndarray:
    """The 8-component steady residual at (lambda, omega, xi, c)."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    xi = np.asarray(xi, dtype=float).reshape(3)
    rho = density_profile(omega, xi, c, geometry, constants)
    m_S = geometry.body_mass + m_F
    inertia, g, fluid_mass = _system_inertia_parts(rho, geometry, m_S)
    out = np.empty(8)
    out[0:3] = lam * omega - inertia @ omega
    out[3] = lam * lam * float(omega @ omega) - M0 * M0
    out[4:7] = m_S * xi - np.cross(g, omega)
    out[7] = fluid_mass - m_F
    return out


def _profile_derivatives(omega, xi, c, geometry, constants):
    """d(rho)/d(theta) fields for theta in (omega, xi, c): shape (7, n1, n2, n3)."""
    x = geometry.cell_centers
    p = _bracket_field(omega, xi, c, geometry, constants)
    if float(np.min(p)) <= 0.0:
        raise VacuumRegionError("bracket non-positive while differentiating the profile")
    gamma = constants.gamma
    base = (1.0 / (gamma - 1.0)) * p ** ((2.0 - gamma) / (gamma - 1.0))
    scale = (gamma - 1.0) / (constants.a * gamma)
    x2 = np.einsum("ijkc,ijkc->ijk", x, x)
    xdw = x @ omega
    wx = np.cross(omega, x)
    xxi = np.cross(x, xi)
    out = np.empty((7,) + p.shape)
    for j in range(3):
        # d p / d omega_j = scale * (x cross (omega cross x) + x cross xi)_j
        dp = scale * (x2 * omega[j] - xdw * x[..., j] + xxi[..., j])
        out[j] = base * dp
    for j in range(3):
        out[3 + j] = base * scale * wx[..., j]
    out[6] = base
    return out


def _moment_derivatives(drho, geometry, g, m_S):
    """For one profile derivative field: (dI, dg, dmass)."""
    x = geometry.cell_centers
    vol = geometry.cell_volume
    dmass = float(np.sum(drho)) * vol
    dg = np.einsum("ijk,ijkc->c", drho, x) * vol
    x2 = np.einsum("ijkc,ijkc->ijk", x, x)
    dibar = (float(np.sum(drho * x2)) * np.eye(3) - np.einsum("ijk,ijkc,ijkd->cd", drho, x, x)) * vol
    dschur = (2.0 * float(g @ dg) * np.eye(3) - np.outer(dg, g) - np.outer(g, dg)) / m_S
    return dibar - dschur, dg, dmass


def assemble_gradF(lam, omega, xi, c, geometry, constants, M0, m_F) -> np.ndarray:
    """Full 8x8 derivative of assemble_F, through-profile terms included.

    Column order (lambda, omega, xi, c).  Every entry is the analytic
    derivative; the c-column of the momentum and translation rows
    carries the profile sensitivity of I and g like the omega/xi ones.
    """
    omega = np.asarray(omega, dtype=float).reshape(3)
    xi = np.asarray(xi, dtype=float).reshape(3)
    rho = density_profile(omega, xi, c, geometry, constants)
    m_S = geometry.body_mass + m_F
    inertia, g, _ = _system_inertia_parts(rho, geometry, m_S)
    dfields = _profile_derivatives(omega, xi, c, geometry, constants)
    J = np.zeros((8, 8))
    J[0:3, 0] = omega
    J[0:3, 1:4] = lam * np.eye(3) - inertia
    J[3, 0] = 2.0 * lam * float(omega @ omega)
    J[3, 1:4] = 2.0 * lam * lam * omega
    J[4:7, 1:4] = -_skew(g)
    J[4:7, 4:7] = m_S * np.eye(3)
    for col in range(7):
        dI, dg, dmass = _moment_derivatives(dfields[col], geometry, g, m_S)
        J[0:3, 1 + col] += -dI @ omega
        J[4:7, 1 + col] += -np.cross(dg, omega)
        J[7, 1 + col] = dmass
    return J


def perturbation_matrix(omega, xi, c, geometry, constants, m_F) -> np.ndarray:
    """Through-profile blocks in the omega/xi columns only.

    This is the part of the Jacobian that vanishes as the pressure law
    stiffens (the profile flattens to a constant); its norm is what the
    large-a decay scan reports.  The c-column sensitivities of I and g
    do not decay and are excluded here, though assemble_gradF carries
    them.
    """
    omega = np.asarray(omega, dtype=float).reshape(3)
    xi = np.asarray(xi, dtype=float).reshape(3)
    rho = density_profile(omega, xi, c, geometry, constants)
    m_S = geometry.body_mass + m_F
    _, g, _ = _system_inertia_parts(rho, geometry, m_S)
    dfields = _profile_derivatives(omega, xi, c, geometry, constants)
    N = np.zeros((8, 8))
    for col in range(6):
        dI, dg, dmass = _moment_derivatives(dfields[col], geometry, g, m_S)
        N[0:3, 1 + col] = -dI @ omega
        N[4:7, 1 + col] = -np.cross(dg, omega)
        N[7, 1 + col] = dmass
    return N


# ---------------------------------------------------------------------------
# Newton solve


def _normalized_sign(omega, xi):
    """Pick the representative of the (omega, xi) <-> (-omega, -xi) pair."""
    k = int(np.argmax(np.abs(omega)))
    if omega[k] < 0.0:
        return -omega, -xi
    return omega, xi


def _reduced_residual_jacobian(lam, omega, xi, geometry, constants, M0, m_F):
    c = mass_closure(omega, xi, geometry, constants, m_F)
    F = assemble_F(lam, omega, xi, c, geometry, constants, M0, m_F)
    J = assemble_gradF(lam, omega, xi, c, geometry, constants, M0, m_F)
    # eliminate c by the implicit function on the mass row:
    # dc/dz = -J[7, z] / J[7, c]
    dcdz = -J[7, 0:7] / J[7, 7]
    Jr = J[0:7, 0:7] + np.outer(J[0:7, 7], dcdz)
    return F, Jr, c


def solve_branch(lam0, omega0, geometry, constants, M0, m_F) -> SteadyBranch:
    """Damped Newton on (lambda, omega, xi) with c eliminated by mass."""
    m_S = geometry.body_mass + m_F
    omega = np.asarray(omega0, dtype=float).reshape(3).copy()
    c0 = mass_closure(omega, np.zeros(3), geometry, constants, m_F)
    rho0 = density_profile(omega, np.zeros(3), c0, geometry, constants)
    _, g0, _ = _system_inertia_parts(rho0, geometry, m_S)
    xi = np.cross(g0, omega) / m_S
    lam = float(lam0)
    message = ""
    converged = False
    F = None
    c = c0
    iterations = 0
    for iterations in range(1, NEWTON_MAX_ITER + 1):
        F, Jr, c = _reduced_residual_jacobian(lam, omega, xi, geometry, constants, M0, m_F)
        if float(np.max(np.abs(F))) <= NEWTON_TOL:
            converged = True
            break
        rhs = -F[0:7]
        try:
            step = np.linalg.solve(Jr, rhs)
        except np.linalg.LinAlgError:
            message = "singular reduced Jacobian"
            break
        norm0 = float(np.linalg.norm(F[0:7]))
        alpha = 1.0
        accepted = False
        while alpha >= MIN_DAMPING:
            lam_t = lam + alpha * step[0]
            omega_t = omega + alpha * step[1:4]
            xi_t = xi + alpha * step[4:7]
            try:
                c_t = mass_closure(omega_t, xi_t, geometry, constants, m_F)
                F_t = assemble_F(lam_t, omega_t, xi_t, c_t, geometry, constants, M0, m_F)
            except VacuumRegionError:
                alpha *= 0.5
                continue
            if float(np.linalg.norm(F_t[0:7])) < norm0:
                lam, omega, xi = lam_t, omega_t, xi_t
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            message = "line search stagnated"
            break
    if F is None:
        F = assemble_F(lam, omega, xi, c, geometry, constants, M0, m_F)
    if converged:
        omega, xi = _normalized_sign(omega, xi)
    c = mass_closure(omega, xi, geometry, constants, m_F)
    rho = density_profile(omega, xi, c, geometry, constants)
    F = assemble_F(lam, omega, xi, c, geometry, constants, M0, m_F)
    J = assemble_gradF(lam, omega, xi, c, geometry, constants, M0, m_F)
    cond = float(np.linalg.cond(J))
    rho_bar = m_F / geometry.volume
    in_band = bool(np.all(rho > 0.5 * rho_bar) and np.all(rho < 1.5 * rho_bar))
    if converged and not in_band:
        warnings.warn(
            "steady profile leaves the band (rho_bar/2, 3 rho_bar/2); "
            "the isolation theory does not cover this regime",
            stacklevel=2,
        )
    if not converged and not message:
        message = "no convergence within the iteration budget"
    return SteadyBranch(
        lambda_s=lam,
        omega_s=omega,
        xi_s=xi,
        c_s=float(c),
        rho_s=rho,
        newton_residual=float(np.max(np.abs(F))),
        jacobian_condition=cond,
        converged=converged,
        iterations=iterations,
        profile_in_band=in_band,
        message=message,
    )


def uniform_branch(geometry, constants, m_F) -> SteadyBranch:
    """The M0 = 0 terminal state: rest with uniform density."""
    rho_bar = m_F / geometry.volume
    c = rho_bar ** (constants.gamma - 1.0)
    rho = density_profile(np.zeros(3), np.zeros(3), c, geometry, constants)
    F = assemble_F(0.0, np.zeros(3), np.zeros(3), c, geometry, constants, 0.0, m_F)
    return SteadyBranch(
        lambda_s=0.0,
        omega_s=np.zeros(3),
        xi_s=np.zeros(3),
        c_s=float(c),
        rho_s=rho,
        newton_residual=float(np.max(np.abs(F))),
        jacobian_condition=float("inf"),
        converged=True,
        iterations=0,
        profile_in_band=True,
        message="rest state (M0 = 0): every lambda solves the degenerate row",
    )


def mean_inertia_eigensystem(geometry, constants, m_F):
    """Eigenpairs of the uniform-density system inertia, ascending.

    Raises DegenerateInertiaError when the relative spectral gap falls
    below 1e-9: the branches are then not isolated and the Newton
    enumeration refuses to guess.
    """
    rho_bar = np.full(geometry.shape, m_F / geometry.volume)
    inertia = system_inertia(rho_bar, geometry, m_F)
    evals, evecs = np.linalg.eigh(inertia)
    scale = float(np.max(np.abs(evals)))
    gaps = np.diff(evals) / scale
    if np.any(gaps < EIGEN_GAP_TOL):
        raise DegenerateInertiaError(
            f"inertia eigenvalues {evals} are degenerate at relative gap "
            f"{float(np.min(gaps)):.3e} < {EIGEN_GAP_TOL:.0e}; steady branches "
            "are not isolated for symmetric mass distributions"
        )
    # deterministic eigenvector signs: largest component positive
    for i in range(3):
        k = int(np.argmax(np.abs(evecs[:, i])))
        if evecs[k, i] < 0.0:
            evecs[:, i] = -evecs[:, i]
    return evals, evecs


def enumerate_branches(geometry, constants, M0, m_F) -> list:
    """One branch per eigenvalue of the uniform-density inertia.

    Initial guesses: omega along the eigenvector scaled to M0/lambda,
    xi from the translational closure, lambda at the eigenvalue.  Sign
    pairs (omega, xi) and (-omega, -xi) are the same physical branch and
    are reported once, in a deterministic orientation.
    """
    M0 = float(M0)
    if M0 < 0.0:
        raise ValueError("M0 is a magnitude and must be non-negative")
    if M0 == 0.0:
        return [uniform_branch(geometry, constants, m_F)]
    evals, evecs = mean_inertia_eigensystem(geometry, constants, m_F)
    branches = []
    for i in range(3):
        omega0 = (M0 / evals[i]) * evecs[:, i]
        branches.append(solve_branch(evals[i], omega0, geometry, constants, M0, m_F))
    return branches


def reduced_matrix_check(branch: SteadyBranch, geometry, constants, m_F) -> dict:
    """Verify the 4x4 reduced-matrix identities and report isolation.

    P = [[omega_s, lambda_s 1 - I(rho_s)], [2 lambda_s |omega_s|^2,
    2 lambda_s^2 omega_s^T]] maps (with r_1 = omega_s, r_2, r_3 the
    eigenvectors of I(rho_s)):

        P (0, r_2) = ((lambda_s - lambda_2) r_2, 0)
        P (0, r_3) = ((lambda_s - lambda_3) r_3, 0)
        P (0, r_1) = (0, 2 lambda_s^2 |r_1|^2)
        P (1, 0)   = (r_1, 2 lambda_s |r_1|^2)

    so P spans R^4 whenever lambda_s is a simple eigenvalue.  The
    report also carries sigma_min of the full Jacobian at the branch as
    the isolation certificate.
    """
    lam = branch.lambda_s
    omega = branch.omega_s
    inertia = system_inertia(branch.rho_s, geometry, m_F)
    evals, evecs = np.linalg.eigh(inertia)
    # order eigenpairs so the first matches the branch eigenvalue
    order = np.argsort(np.abs(evals - lam))
    evals = evals[order]
    evecs = evecs[:, order]

    def apply_P(mu, u):
        top = mu * omega + (lam * np.eye(3) - inertia) @ u
        bot = 2.0 * lam * float(omega @ omega) * mu + 2.0 * lam * lam * float(omega @ u)
        return np.concatenate([top, [bot]])

    w2 = float(omega @ omega)
    scale = max(abs(lam) * max(np.sqrt(w2), 1.0), 1.0)
    residuals = []
    for idx in (1, 2):
        r = evecs[:, idx]
        expect = np.concatenate([(lam - evals[idx]) * r, [0.0]])
        residuals.append(float(np.max(np.abs(apply_P(0.0, r) - expect))) / scale)
    r1 = omega
    expect = np.concatenate([np.zeros(3), [2.0 * lam * lam * w2]])
    residuals.append(float(np.max(np.abs(apply_P(0.0, r1) - expect))) / scale)
    expect = np.concatenate([omega, [2.0 * lam * w2]])
    residuals.append(float(np.max(np.abs(apply_P(1.0, np.zeros(3)) - expect))) / scale)
    J = assemble_gradF(lam, omega, branch.xi_s, branch.c_s, geometry, constants, 0.0, m_F)
    # M0 enters F but not its derivative; pass 0 above without harm
    svals = np.linalg.svd(J, compute_uv=False)
    align = float(
        np.arccos(
            min(1.0, abs(float(omega @ (inertia @ omega))) / max(np.linalg.norm(omega) * np.linalg.norm(inertia @ omega), 1e-300))
        )
    )
    return {
        "identity_residuals": residuals,
        "sigma_min": float(svals[-1]),
        "condition": float(svals[0] / svals[-1]),
        "eigenvalues": evals,
        "eigen_alignment_angle": align,
    }


def scan_decay(geometry, constants, M0, m_F, a_values, branch_index=0) -> list:
    """Rows (a, |N|, |I(rho_bar) - I(rho_s)|, sigma_min) over an a-sweep."""
    rows = []
    rho_bar = np.full(geometry.shape, m_F / geometry.volume)
    for a in a_values:
        cst = PhysicalConstants(a=float(a), gamma=constants.gamma, mu=constants.mu, lam=constants.lam)
        branches = enumerate_branches(geometry, cst, M0, m_F)
        br = branches[branch_index]
        if not br.converged:
            raise RuntimeError(f"branch {branch_index} failed to converge at a = {a}")
        N = perturbation_matrix(br.omega_s, br.xi_s, br.c_s, geometry, cst, m_F)
        dI = system_inertia(rho_bar, geometry, m_F) - system_inertia(br.rho_s, geometry, m_F)
        J = assemble_gradF(br.lambda_s, br.omega_s, br.xi_s, br.c_s, geometry, cst, M0, m_F)
        svals = np.linalg.svd(J, compute_uv=False)
        rows.append(
            {
                "a": float(a),
                "perturbation_norm": float(np.linalg.norm(N, 2)),
                "inertia_shift": float(np.linalg.norm(dI, 2)),
                "sigma_min": float(svals[-1]),
            }
        )
    return rows
