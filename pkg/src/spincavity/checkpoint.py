"""Versioned binary checkpoints for exact restart.

Layout (all little-endian):

    bytes 0..3    magic  b"SPCV"
    uint32        format version (currently 1)
    float64       time
    3 x uint32    grid shape (n1, n2, n3)
    3 x float64   omega
    3 x float64   xi
    3 x float64   angular momentum M
    n1*n2*n3 float64          rho, C order
    n1*n2*n3*3 float64        v, C order

Raw IEEE bytes are written untouched, so save followed by load
reproduces the state to the last bit.
"""

from __future__ import annotations

import struct

import numpy as np

from .fields import FluidState, RigidState

MAGIC = b"SPCV"
VERSION = 1
_HEADER = struct.Struct("<4sId3I9d")


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str, state: FluidState, rigid: RigidState) -> None:
    if rigid.angular_momentum is None:
        raise CheckpointError("checkpoint requires the angular momentum on the rigid state")
    n1, n2, n3 = state.rho.shape
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        state.time,
        n1,
        n2,
        n3,
        *rigid.omega,
        *rigid.xi,
        *rigid.angular_momentum,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.rho, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.v, dtype="<f8").tobytes())


def load_checkpoint(path: str, expected_shape: tuple | None = None):
    """Read a checkpoint; returns (FluidState, RigidState)."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CheckpointError(f"{path}: truncated header")
        fields = _HEADER.unpack(raw)
        magic, version, time = fields[0], fields[1], fields[2]
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}, not a checkpoint")
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        shape = tuple(int(n) for n in fields[3:6])
        omega = np.array(fields[6:9])
        xi = np.array(fields[9:12])
        M = np.array(fields[12:15])
        if expected_shape is not None and shape != tuple(expected_shape):
            raise CheckpointError(
                f"{path}: grid shape {shape} does not match the configured grid {tuple(expected_shape)}"
            )
        count = shape[0] * shape[1] * shape[2]
        rho = np.fromfile(fh, dtype="<f8", count=count)
        v = np.fromfile(fh, dtype="<f8", count=count * 3)
        if rho.size != count or v.size != count * 3:
            raise CheckpointError(f"{path}: truncated field data")
    state = FluidState(rho.reshape(shape), v.reshape(shape + (3,)), time)
    rigid = RigidState(omega, xi, M)
    return state, rigid
