"""Hot stencil sweeps with twin numba/numpy implementations.

Discretization notes (shared by both backends):

- Cell-centered collocated grid.  Ghost layers: relative velocity v is
  reflected (v_ghost = -v_adjacent, so v = 0 at wall faces) and scalars
  carry zero normal gradient (ghost = adjacent).
- Transport is in conservative flux form.  The normal mass flux at a
  face is the arithmetic average of rho*v from the two cells; the same
  face flux drives both the continuity divergence and the momentum
  fluxes, so total mass telescopes to the wall fluxes, which vanish
  identically under the reflected closure.
- The momentum equation is advanced for the conserved field w = rho*u
  (u total velocity) in the split form

      dw/dt = -div(rho v (x) v) - b div(rho v) - rho omega x (2v + b)
              - rho grad(H) + viscous,   b := omega x x + xi,

  which equals -div(rho v (x) u) - rho omega x u - grad(p) + viscous
  pointwise but pairs the transport of the rigid part with the density
  flux cell by cell.  The pressure force uses the enthalpy-gradient form
  rho*grad(H), H = a*gamma/(gamma-1) * rho**(gamma-1) (identical to
  grad(p) in the continuum); with the zero-gradient scalar ghosts the
  central gradient is the exact negative adjoint of the face-average
  flux divergence, which is what makes the semi-discrete energy balance
  close to round-off.
- Viscous force: mu*Lap(v) + (mu/3 + lam)*grad(div v) (constant
  coefficients), 7-point Laplacian plus central gradient of the
  face-average divergence.  The sweep also returns the quadratic form
  Phi(v) it dissipates, so the integrator can accumulate the energy
  budget exactly:  sum(v . F_visc) * vol == -Phi(v).
- Density filter: conservative fourth-difference hyperdiffusion in flux
  form; the mirror ghosts zero the wall fluxes, so filtering never
  changes total mass.

All sweeps are serial with a fixed traversal order; results are
byte-reproducible across runs and thread counts.
"""

from __future__ import annotations

import numpy as np

from .backend import HAVE_NUMBA, USE_NUMBA, jit

# ---------------------------------------------------------------------------
# ghost padding (plain numpy; cheap slice assignments shared by both backends)


def pad_scalar(f: np.ndarray) -> np.ndarray:
    """One ghost layer, zero normal gradient (ghost = adjacent interior)."""
    out = np.zeros((f.shape[0] + 2, f.shape[1] + 2, f.shape[2] + 2))
    out[1:-1, 1:-1, 1:-1] = f
    out[0, 1:-1, 1:-1] = f[0]
    out[-1, 1:-1, 1:-1] = f[-1]
    out[1:-1, 0, 1:-1] = f[:, 0]
    out[1:-1, -1, 1:-1] = f[:, -1]
    out[1:-1, 1:-1, 0] = f[:, :, 0]
    out[1:-1, 1:-1, -1] = f[:, :, -1]
    return out


def pad_vector_reflect(v: np.ndarray) -> np.ndarray:
    """One ghost layer, reflected (ghost = -adjacent): v = 0 at wall faces."""
    out = np.zeros((v.shape[0] + 2, v.shape[1] + 2, v.shape[2] + 2, 3))
    out[1:-1, 1:-1, 1:-1] = v
    out[0, 1:-1, 1:-1] = -v[0]
    out[-1, 1:-1, 1:-1] = -v[-1]
    out[1:-1, 0, 1:-1] = -v[:, 0]
    out[1:-1, -1, 1:-1] = -v[:, -1]
    out[1:-1, 1:-1, 0] = -v[:, :, 0]
    out[1:-1, 1:-1, -1] = -v[:, :, -1]
    return out


def pad2_scalar_mirror(f: np.ndarray) -> np.ndarray:
    """Two ghost layers, mirrored (f[-1]=f[0], f[-2]=f[1])."""
    out = np.zeros((f.shape[0] + 4, f.shape[1] + 4, f.shape[2] + 4))
    out[2:-2, 2:-2, 2:-2] = f
    out[1, 2:-2, 2:-2] = f[0]
    out[0, 2:-2, 2:-2] = f[1]
    out[-2, 2:-2, 2:-2] = f[-1]
    out[-1, 2:-2, 2:-2] = f[-2]
    out[2:-2, 1, 2:-2] = f[:, 0]
    out[2:-2, 0, 2:-2] = f[:, 1]
    out[2:-2, -2, 2:-2] = f[:, -1]
    out[2:-2, -1, 2:-2] = f[:, -2]
    out[2:-2, 2:-2, 1] = f[:, :, 0]
    out[2:-2, 2:-2, 0] = f[:, :, 1]
    out[2:-2, 2:-2, -2] = f[:, :, -1]
    out[2:-2, 2:-2, -1] = f[:, :, -2]
    return out


# ---------------------------------------------------------------------------
# numpy implementations


def _axis_slices(d: int, lo, hi):
    sl = [slice(1, -1)] * 3
    sl[d] = slice(lo, hi)
    return tuple(sl)


def _transport_rhs_numpy(rho_p, v_p, H_p, omega, xi, origin, h):
    n = (rho_p.shape[0] - 2, rho_p.shape[1] - 2, rho_p.shape[2] - 2)
    m = rho_p[..., None] * v_p
    divg = np.zeros(n)
    div_flux = np.zeros(n + (3,))
    grad_h = np.zeros(n + (3,))
    for d in range(3):
        full = _axis_slices(d, None, None)
        md = m[full][..., d]
        vd = v_p[full]
        lo = [slice(None)] * 3
        lo[d] = slice(0, -1)
        hi = [slice(None)] * 3
        hi[d] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        g_face = 0.5 * (md[lo] + md[hi])
        v_face = 0.5 * (vd[lo] + vd[hi])
        flux = g_face[..., None] * v_face
        up = [slice(None)] * 3
        up[d] = slice(1, None)
        dn = [slice(None)] * 3
        dn[d] = slice(0, -1)
        up, dn = tuple(up), tuple(dn)
        divg += (g_face[up] - g_face[dn]) / h[d]
        div_flux += (flux[up] - flux[dn]) / h[d]
        fwd = _axis_slices(d, 2, None)
        bwd = _axis_slices(d, 0, -2)
        grad_h[..., d] = (H_p[fwd] - H_p[bwd]) / (2.0 * h[d])
    axes = [origin[d] + h[d] * np.arange(n[d]) for d in range(3)]
    x = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    b = np.cross(omega, x) + xi
    rho = rho_p[1:-1, 1:-1, 1:-1]
    v = v_p[1:-1, 1:-1, 1:-1]
    spin = np.cross(omega, 2.0 * v + b)
    dw = -div_flux - b * divg[..., None] - rho[..., None] * (spin + grad_h)
    return -divg, dw


def _divergence_central_numpy(v_p, h):
    n = (v_p.shape[0] - 2, v_p.shape[1] - 2, v_p.shape[2] - 2)
    out = np.zeros(n)
    for d in range(3):
        fwd = _axis_slices(d, 2, None)
        bwd = _axis_slices(d, 0, -2)
        out += (v_p[fwd][..., d] - v_p[bwd][..., d]) / (2.0 * h[d])
    return out


def _viscous_rhs_numpy(v_p, divv, divv_p, h, vol, mu, lam):
    n = divv.shape
    lap = np.zeros(n + (3,))
    grad_div = np.zeros(n + (3,))
    phi_lap = 0.0
    mid = _axis_slices(0, 1, -1)
    for d in range(3):
        fwd = _axis_slices(d, 2, None)
        bwd = _axis_slices(d, 0, -2)
        lap += (v_p[fwd] - 2.0 * v_p[mid] + v_p[bwd]) / h[d] ** 2
        grad_div[..., d] = (divv_p[fwd] - divv_p[bwd]) / (2.0 * h[d])
        # face differences for the dissipated quadratic form; wall faces
        # weight 1/2 because the reflected ghost doubles the jump there
        full = _axis_slices(d, None, None)
        vd = v_p[full]
        lo = [slice(None)] * 3
        lo[d] = slice(0, -1)
        hi = [slice(None)] * 3
        hi[d] = slice(1, None)
        delta = vd[tuple(hi)] - vd[tuple(lo)]
        jump2 = np.einsum("...c,...c->...", delta, delta)
        w_face = np.ones(jump2.shape)
        edge = [slice(None)] * 3
        edge[d] = 0
        w_face[tuple(edge)] = 0.5
        edge[d] = -1
        w_face[tuple(edge)] = 0.5
        phi_lap += float(np.sum(w_face * jump2)) * vol / h[d] ** 2
    bulk = mu / 3.0 + lam
    dw = mu * lap + bulk * grad_div
    phi = mu * phi_lap + bulk * float(np.sum(divv * divv)) * vol
    return dw, phi


def _filter_rhs_numpy(rho_p2, h, strength):
    n = (rho_p2.shape[0] - 4, rho_p2.shape[1] - 4, rho_p2.shape[2] - 4)
    out = np.zeros(n)
    for d in range(3):
        sl = [slice(2, -2)] * 3
        sl[d] = slice(None)
        fd = rho_p2[tuple(sl)]

        def shift(k):
            s = [slice(None)] * 3
            s[d] = slice(k, k + n[d] + 1)
            return fd[tuple(s)]

        # third difference at faces: f[i+2] - 3 f[i+1] + 3 f[i] - f[i-1]
        q = shift(3) - 3.0 * shift(2) + 3.0 * shift(1) - shift(0)
        up = [slice(None)] * 3
        up[d] = slice(1, None)
        dn = [slice(None)] * 3
        dn[d] = slice(0, -1)
        out -= strength * (q[tuple(up)] - q[tuple(dn)]) / h[d]
    return out


def _reductions_numpy(rho, w, x, vol):
    mass = float(np.sum(rho)) * vol
    sw = np.sum(w, axis=(0, 1, 2)) * vol
    sxw = np.sum(np.cross(x, w), axis=(0, 1, 2)) * vol
    u2 = np.einsum("ijkc,ijkc->ijk", w, w) / (rho * rho)
    return mass, sw, sxw, float(np.max(u2)), float(np.min(rho)), float(np.max(rho))


# ---------------------------------------------------------------------------
# numba implementations (same contracts, explicit loops)


def _transport_rhs_loops(rho_p, v_p, H_p, omega, xi, origin, h):
    n1 = rho_p.shape[0] - 2
    n2 = rho_p.shape[1] - 2
    n3 = rho_p.shape[2] - 2
    drho = np.empty((n1, n2, n3))
    dw = np.empty((n1, n2, n3, 3))
    h1, h2, h3 = h[0], h[1], h[2]
    w1, w2, w3 = omega[0], omega[1], omega[2]
    for i in range(1, n1 + 1):
        x1 = origin[0] + (i - 1) * h1
        for j in range(1, n2 + 1):
            x2 = origin[1] + (j - 1) * h2
            for k in range(1, n3 + 1):
                x3 = origin[2] + (k - 1) * h3
                r0 = rho_p[i, j, k]
                v0x = v_p[i, j, k, 0]
                v0y = v_p[i, j, k, 1]
                v0z = v_p[i, j, k, 2]
                # axis 0 face mass fluxes
                gp1 = 0.5 * (r0 * v0x + rho_p[i + 1, j, k] * v_p[i + 1, j, k, 0])
                gm1 = 0.5 * (rho_p[i - 1, j, k] * v_p[i - 1, j, k, 0] + r0 * v0x)
                gp2 = 0.5 * (r0 * v0y + rho_p[i, j + 1, k] * v_p[i, j + 1, k, 1])
                gm2 = 0.5 * (rho_p[i, j - 1, k] * v_p[i, j - 1, k, 1] + r0 * v0y)
                gp3 = 0.5 * (r0 * v0z + rho_p[i, j, k + 1] * v_p[i, j, k + 1, 2])
                gm3 = 0.5 * (rho_p[i, j, k - 1] * v_p[i, j, k - 1, 2] + r0 * v0z)
                divg = (gp1 - gm1) / h1 + (gp2 - gm2) / h2 + (gp3 - gm3) / h3
                dfx = (
                    (gp1 * 0.5 * (v0x + v_p[i + 1, j, k, 0]) - gm1 * 0.5 * (v_p[i - 1, j, k, 0] + v0x)) / h1
                    + (gp2 * 0.5 * (v0x + v_p[i, j + 1, k, 0]) - gm2 * 0.5 * (v_p[i, j - 1, k, 0] + v0x)) / h2
                    + (gp3 * 0.5 * (v0x + v_p[i, j, k + 1, 0]) - gm3 * 0.5 * (v_p[i, j, k - 1, 0] + v0x)) / h3
                )
                dfy = (
                    (gp1 * 0.5 * (v0y + v_p[i + 1, j, k, 1]) - gm1 * 0.5 * (v_p[i - 1, j, k, 1] + v0y)) / h1
                    + (gp2 * 0.5 * (v0y + v_p[i, j + 1, k, 1]) - gm2 * 0.5 * (v_p[i, j - 1, k, 1] + v0y)) / h2
                    + (gp3 * 0.5 * (v0y + v_p[i, j, k + 1, 1]) - gm3 * 0.5 * (v_p[i, j, k - 1, 1] + v0y)) / h3
                )
                dfz = (
                    (gp1 * 0.5 * (v0z + v_p[i + 1, j, k, 2]) - gm1 * 0.5 * (v_p[i - 1, j, k, 2] + v0z)) / h1
                    + (gp2 * 0.5 * (v0z + v_p[i, j + 1, k, 2]) - gm2 * 0.5 * (v_p[i, j - 1, k, 2] + v0z)) / h2
                    + (gp3 * 0.5 * (v0z + v_p[i, j, k + 1, 2]) - gm3 * 0.5 * (v_p[i, j, k - 1, 2] + v0z)) / h3
                )
                ghx = (H_p[i + 1, j, k] - H_p[i - 1, j, k]) / (2.0 * h1)
                ghy = (H_p[i, j + 1, k] - H_p[i, j - 1, k]) / (2.0 * h2)
                ghz = (H_p[i, j, k + 1] - H_p[i, j, k - 1]) / (2.0 * h3)
                bx = w2 * x3 - w3 * x2 + xi[0]
                by = w3 * x1 - w1 * x3 + xi[1]
                bz = w1 * x2 - w2 * x1 + xi[2]
                sx = 2.0 * v0x + bx
                sy = 2.0 * v0y + by
                sz = 2.0 * v0z + bz
                cx = w2 * sz - w3 * sy
                cy = w3 * sx - w1 * sz
                cz = w1 * sy - w2 * sx
                drho[i - 1, j - 1, k - 1] = -divg
                dw[i - 1, j - 1, k - 1, 0] = -dfx - bx * divg - r0 * (cx + ghx)
                dw[i - 1, j - 1, k - 1, 1] = -dfy - by * divg - r0 * (cy + ghy)
                dw[i - 1, j - 1, k - 1, 2] = -dfz - bz * divg - r0 * (cz + ghz)
    return drho, dw


def _divergence_central_loops(v_p, h):
    n1 = v_p.shape[0] - 2
    n2 = v_p.shape[1] - 2
    n3 = v_p.shape[2] - 2
    out = np.empty((n1, n2, n3))
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            for k in range(1, n3 + 1):
                out[i - 1, j - 1, k - 1] = (
                    (v_p[i + 1, j, k, 0] - v_p[i - 1, j, k, 0]) / (2.0 * h[0])
                    + (v_p[i, j + 1, k, 1] - v_p[i, j - 1, k, 1]) / (2.0 * h[1])
                    + (v_p[i, j, k + 1, 2] - v_p[i, j, k - 1, 2]) / (2.0 * h[2])
                )
    return out


def _viscous_rhs_loops(v_p, divv, divv_p, h, vol, mu, lam):
    n1 = divv.shape[0]
    n2 = divv.shape[1]
    n3 = divv.shape[2]
    bulk = mu / 3.0 + lam
    dw = np.empty((n1, n2, n3, 3))
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            for k in range(1, n3 + 1):
                for c in range(3):
                    lap = (
                        (v_p[i + 1, j, k, c] - 2.0 * v_p[i, j, k, c] + v_p[i - 1, j, k, c]) / h[0] ** 2
                        + (v_p[i, j + 1, k, c] - 2.0 * v_p[i, j, k, c] + v_p[i, j - 1, k, c]) / h[1] ** 2
                        + (v_p[i, j, k + 1, c] - 2.0 * v_p[i, j, k, c] + v_p[i, j, k - 1, c]) / h[2] ** 2
                    )
                    if c == 0:
                        gd = (divv_p[i + 1, j, k] - divv_p[i - 1, j, k]) / (2.0 * h[0])
                    elif c == 1:
                        gd = (divv_p[i, j + 1, k] - divv_p[i, j - 1, k]) / (2.0 * h[1])
                    else:
                        gd = (divv_p[i, j, k + 1] - divv_p[i, j, k - 1]) / (2.0 * h[2])
                    dw[i - 1, j - 1, k - 1, c] = mu * lap + bulk * gd
    phi_lap = 0.0
    for i in range(1, n1 + 2):  # faces normal to axis 0
        wf = 0.5 if (i == 1 or i == n1 + 1) else 1.0
        for j in range(1, n2 + 1):
            for k in range(1, n3 + 1):
                j2 = 0.0
                for c in range(3):
                    d = v_p[i, j, k, c] - v_p[i - 1, j, k, c]
                    j2 += d * d
                phi_lap += wf * j2 * vol / h[0] ** 2
    for j in range(1, n2 + 2):
        wf = 0.5 if (j == 1 or j == n2 + 1) else 1.0
        for i in range(1, n1 + 1):
            for k in range(1, n3 + 1):
                j2 = 0.0
                for c in range(3):
                    d = v_p[i, j, k, c] - v_p[i, j - 1, k, c]
                    j2 += d * d
                phi_lap += wf * j2 * vol / h[1] ** 2
    for k in range(1, n3 + 2):
        wf = 0.5 if (k == 1 or k == n3 + 1) else 1.0
        for i in range(1, n1 + 1):
            for j in range(1, n2 + 1):
                j2 = 0.0
                for c in range(3):
                    d = v_p[i, j, k, c] - v_p[i, j, k - 1, c]
                    j2 += d * d
                phi_lap += wf * j2 * vol / h[2] ** 2
    sdiv2 = 0.0
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                sdiv2 += divv[i, j, k] * divv[i, j, k]
    phi = mu * phi_lap + bulk * sdiv2 * vol
    return dw, phi


def _filter_rhs_loops(rho_p2, h, strength):
    n1 = rho_p2.shape[0] - 4
    n2 = rho_p2.shape[1] - 4
    n3 = rho_p2.shape[2] - 4
    out = np.zeros((n1, n2, n3))
    for i in range(2, n1 + 2):
        for j in range(2, n2 + 2):
            for k in range(2, n3 + 2):
                qp = rho_p2[i + 2, j, k] - 3.0 * rho_p2[i + 1, j, k] + 3.0 * rho_p2[i, j, k] - rho_p2[i - 1, j, k]
                qm = rho_p2[i + 1, j, k] - 3.0 * rho_p2[i, j, k] + 3.0 * rho_p2[i - 1, j, k] - rho_p2[i - 2, j, k]
                acc = (qp - qm) / h[0]
                qp = rho_p2[i, j + 2, k] - 3.0 * rho_p2[i, j + 1, k] + 3.0 * rho_p2[i, j, k] - rho_p2[i, j - 1, k]
                qm = rho_p2[i, j + 1, k] - 3.0 * rho_p2[i, j, k] + 3.0 * rho_p2[i, j - 1, k] - rho_p2[i, j - 2, k]
                acc += (qp - qm) / h[1]
                qp = rho_p2[i, j, k + 2] - 3.0 * rho_p2[i, j, k + 1] + 3.0 * rho_p2[i, j, k] - rho_p2[i, j, k - 1]
                qm = rho_p2[i, j, k + 1] - 3.0 * rho_p2[i, j, k] + 3.0 * rho_p2[i, j, k - 1] - rho_p2[i, j, k - 2]
                acc += (qp - qm) / h[2]
                out[i - 2, j - 2, k - 2] = -strength * acc
    return out


def _reductions_loops(rho, w, x, vol):
    n1, n2, n3 = rho.shape
    mass = 0.0
    swx = swy = swz = 0.0
    sxwx = sxwy = sxwz = 0.0
    umax2 = 0.0
    rmin = rho[0, 0, 0]
    rmax = rho[0, 0, 0]
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                r = rho[i, j, k]
                wx = w[i, j, k, 0]
                wy = w[i, j, k, 1]
                wz = w[i, j, k, 2]
                mass += r
                swx += wx
                swy += wy
                swz += wz
                x1 = x[i, j, k, 0]
                x2 = x[i, j, k, 1]
                x3 = x[i, j, k, 2]
                sxwx += x2 * wz - x3 * wy
                sxwy += x3 * wx - x1 * wz
                sxwz += x1 * wy - x2 * wx
                u2 = (wx * wx + wy * wy + wz * wz) / (r * r)
                if u2 > umax2:
                    umax2 = u2
                if r < rmin:
                    rmin = r
                if r > rmax:
                    rmax = r
    sw = np.empty(3)
    sw[0] = swx * vol
    sw[1] = swy * vol
    sw[2] = swz * vol
    sxw = np.empty(3)
    sxw[0] = sxwx * vol
    sxw[1] = sxwy * vol
    sxw[2] = sxwz * vol
    return mass * vol, sw, sxw, umax2, rmin, rmax


_transport_rhs_numba = jit(_transport_rhs_loops)
_divergence_central_numba = jit(_divergence_central_loops)
_viscous_rhs_numba = jit(_viscous_rhs_loops)
_filter_rhs_numba = jit(_filter_rhs_loops)
_reductions_numba = jit(_reductions_loops)

IMPLEMENTATIONS = {
    "numpy": {
        "transport_rhs": _transport_rhs_numpy,
        "divergence_central": _divergence_central_numpy,
        "viscous_rhs": _viscous_rhs_numpy,
        "filter_rhs": _filter_rhs_numpy,
        "reductions": _reductions_numpy,
    },
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "transport_rhs": _transport_rhs_numba,
        "divergence_central": _divergence_central_numba,
        "viscous_rhs": _viscous_rhs_numba,
        "filter_rhs": _filter_rhs_numba,
        "reductions": _reductions_numba,
    }

_active = IMPLEMENTATIONS["numba" if USE_NUMBA else "numpy"]
transport_rhs = _active["transport_rhs"]
divergence_central = _active["divergence_central"]
viscous_rhs = _active["viscous_rhs"]
filter_rhs = _active["filter_rhs"]
reductions = _active["reductions"]
