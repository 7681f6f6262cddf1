"""Random-walk collisions on combs with truncated teeth.

Subpackages:
    graph       lazy comb geometry (degrees, neighbors, distances, balls)
    kernel      exact free/killed transition densities and collision moments
    resistance  electrical-network quantities on finite windows
    simulate    reproducible Monte Carlo for k walkers
    estimates   finite-scale checks of the heat-kernel/exit-time bounds
    cli         command-line front end
"""

from .graph import (
    Ball,
    CombSpec,
    Strip,
    Vertex,
    ball,
    custom_comb,
    degree,
    distance,
    log_comb,
    neighbors,
    parity,
    poly_comb,
    tooth_height,
    volume,
    volume_witness_lower_bound,
)
# The submodule is named `kernel`; its kernel() function stays off the
# package namespace to keep `combwalk.kernel` resolving to the module.
from .kernel import (
    DistVector,
    EmptyTargetRegion,
    KernelValue,
    ResourceLimit,
    Window,
    delta_mass,
    expected_H1,
    expected_H2,
    h1_law,
    h1_sites,
    kernel_1d,
    k_collision_probability,
    on_diagonal_series,
    second_moment_H1,
    second_moment_H2,
    step,
    triple_collision_probability,
)
from . import kernel as _kernel_module  # noqa: F401  (restore module binding)
from .resistance import (
    ExitProfile,
    expected_exit_time_direct,
    fused_pair_resistance,
    occupation_density,
    pair_resistance,
    pair_resistance_solve,
    resistance_to_boundary,
)
from .simulate import Estimate, RunRecord, SimConfig, run_replicas, simulate_replica

__version__ = "0.1.0"
