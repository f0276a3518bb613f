"""szwalk: a numerical laboratory for abstract Szegedy quantum walks.

Builds evolutions U = shift . (2 d* d - 1) from graph data or abstract
coisometry/involution pairs, verifies the spectral mapping between the
discriminant and the evolution, constructs the Hermitian generator with
exp(iH) = U, and simulates walker dynamics with Cesaro-limit localization
diagnostics.
"""

from .errors import ConsistencyError, DimensionError, DomainError, GraphStructureError
from .report import ValidationReport, Violation
from .graphs import (Arc, Graph, arc_name, complete, cycle, from_edge_list, graph_from_json,
                     graph_to_json, grover_weight, load_graph_file, one_form_from_edge_values,
                     path_with_loops, single_edge, validate_structures, zero_one_form)
from .linalg import (SpectralDecomposition, Subspace, apply_function, arccos_clamped,
                     cluster_eigenvalues, hermitian_eig, intersect_subspaces, nullspace,
                     operator_from_json, operator_to_json, orth_complement, projector,
                     projector_distance)
from .walk import (WalkInstance, assemble_walk, boundary_operator, grover_walk,
                   instance_from_json, instance_to_json, random_instance, shift_operator,
                   szegedy_walk, validate_instance)
from .spectral import (SpectralLine, SpectrumPrediction, SubspaceAtlas, atlas_report,
                       boundary_subspaces, mapped_spectrum, verify_spectral_mapping)
from .generator import (ChiralIntertwiners, GeneratorDecomposition, build_generator,
                        build_intertwiners, generator_of, identity_report, kernels_of_u,
                        verify_generator, wave_equation_check)
from .dynamics import (InferredDigraph, LocalizationReport, Partition, WalkTrace, arc_delta,
                       block_unitarity_check, equivalence_transform, evolve_and_measure,
                       homogeneous_cycle_walk, infer_graph, limit_distribution,
                       localization_report, measured_evolution, origin_order, origin_partition,
                       permute_state, time_average)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
