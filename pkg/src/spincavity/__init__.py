"""Rigid body with a fluid-filled box cavity: simulation and steady states.

The package integrates the compressible barotropic Navier-Stokes equations
written in the frame of a rigid container, coupled to the momentum balance
of the container itself, and solves the nonlinear system whose roots are
the permanent rotations the coupled system relaxes to.
"""

from .backend import BACKEND, HAVE_NUMBA
from .geometry import CavityBodyGeometry, GeometryError, MassProperties, compute_mass_properties
from .fields import FluidState, RigidState
from .dynamics import (
    CFLViolation,
    NegativeDensity,
    NumericalError,
    PhysicalConstants,
    cfl_timestep,
    step,
)
from .steady import (
    DegenerateInertiaError,
    SteadyBranch,
    VacuumRegionError,
    enumerate_branches,
    solve_branch,
    uniform_branch,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .run import Simulator, simulator_from_config

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "CavityBodyGeometry",
    "GeometryError",
    "MassProperties",
    "compute_mass_properties",
    "FluidState",
    "RigidState",
    "CFLViolation",
    "NegativeDensity",
    "NumericalError",
    "PhysicalConstants",
    "cfl_timestep",
    "step",
    "DegenerateInertiaError",
    "SteadyBranch",
    "VacuumRegionError",
    "enumerate_branches",
    "solve_branch",
    "uniform_branch",
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "Simulator",
    "simulator_from_config",
    "__version__",
]
