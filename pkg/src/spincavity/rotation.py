"""Orientation bookkeeping via unit quaternions.

The simulation itself runs entirely in the body frame; the container's
attitude in the inertial frame is a passive output, reconstructed from
the sampled angular velocity history by integrating

    dq/dt = q * (0, omega_body) / 2

with classical RK4 on piecewise-linear omega samples and per-step
renormalization.
"""

from __future__ import annotations

import numpy as np


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ]
    )


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix mapping body coordinates to inertial coordinates."""
    w, x, y, z = quat_normalize(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_derivative(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    return 0.5 * quat_multiply(q, np.array([0.0, *omega_body]))


def reconstruct_orientation(
    times: np.ndarray, omegas: np.ndarray, q0: np.ndarray | None = None
) -> np.ndarray:
    """Quaternion at each sample time, starting from q0 (identity default).

    omegas[i] is the body angular velocity at times[i]; between samples
    it is interpolated linearly and the kinematic equation is advanced
    with one RK4 step per interval.
    """
    times = np.asarray(times, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    if omegas.shape != (times.size, 3):
        raise ValueError("omega history must have shape (len(times), 3)")
    out = np.empty((times.size, 4))
    q = np.array([1.0, 0.0, 0.0, 0.0]) if q0 is None else quat_normalize(np.asarray(q0, dtype=float))
    out[0] = q
    for i in range(times.size - 1):
        dt = times[i + 1] - times[i]
        w0 = omegas[i]
        w1 = omegas[i + 1]
        wm = 0.5 * (w0 + w1)
        k1 = quat_derivative(q, w0)
        k2 = quat_derivative(q + 0.5 * dt * k1, wm)
        k3 = quat_derivative(q + 0.5 * dt * k2, wm)
        k4 = quat_derivative(q + dt * k3, w1)
        q = quat_normalize(q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        out[i + 1] = q
    return out
