"""Compositional steady-state analysis of open Markov chains and circuits.

Open networks (continuous-time Markov chains, detailed balanced chains,
resistor circuits) compose by gluing ports; their steady-state boundary
behavior is a linear relation computed by constrained quadratic
minimization, and behaviors compose the same way the networks do.
"""

from .blackbox import (BoundaryBehavior, TriangleReport, behavior_equations,
                       blackbox_circuit, blackbox_markov,
                       blackbox_markov_direct, check_lagrangian_behavior,
                       check_triangle, dagger_behavior, oplus_behaviors,
                       to_circuit)
from .dynamics import (KERNEL_BACKEND, BoundarySignal, DynamicsError,
                       GeneratorMatrix, Trajectory, check_detailed_balance,
                       check_equilibrium, generator_matrix, integrate_closed,
                       integrate_open, is_infinitesimal_stochastic)
from .linrel import (LinearRelation, Subspace, SymplecticForm,
                     apply_relation_to_subspace, compose_relations,
                     identity_relation, is_lagrangian, oplus,
                     population_rescaling, port_relation, relation_from_map,
                     subspace_distance, subspace_equal, transpose_relation)
from .network import (CIRCUIT, DETAILED_BALANCED, MARKOV, CompositionError,
                      Edge, Network, NetworkError, OpenNetwork,
                      PortSignature, ValidationReport, compose, dagger,
                      forget_populations, identity_network, pushout, tensor,
                      validate)
from .variational import (BoundaryGraphSubspace, QuadraticFunctional,
                          boundary_current, boundary_flow,
                          dissipation_laplacian, dtn_matrix,
                          extended_dissipation, extended_power,
                          graph_of_boundary_map, laplacian, minimize_power,
                          minimize_dissipation)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Which integrator hot loop is active: "compiled" or "python"."""
    return KERNEL_BACKEND
