"""Marginal DAG models on discrete variables.

Structure theory for mDAGs (districts, intrinsic sets, parametrizable sets,
model dimension), gearings and functional latent-variable models with exact
enumeration, a recursive nested-Markov checker for concrete kernels, and a
tangent-space verifier showing the achievable first-order directions at the
uniform distribution span exactly the nested model's tangent space.
"""

__version__ = "0.1.0"

from .axes import Axis, function_axis, vertex_axis
from .catalog import example_graph, example_names, load_graph_document, resolve_graph_arg
from .degenerate import (
    DegenerateFunction,
    EtaFamily,
    degenerate_basis,
    eta_functions,
    lambda_basis,
    lambda_dimension,
    rank_one_decompose,
    symdiff_decompose,
)
from .errors import MdagError
from .functional import (
    DeltaMultiResult,
    FunctionAssignment,
    FunctionTable,
    FunctionalEnumeration,
    RhoTable,
    delta_from_lambda,
    delta_multi,
    directional_derivative,
    evaluate_structural,
    get_enumeration,
    joint_distribution,
    phi_set,
    uniform_rhos,
)
from .gearing import (
    FunctionSpaceDescriptor,
    Gearing,
    best_gearing,
    enumerate_gearings,
    find_gearing,
    function_space,
    geared_subgraph_for,
    is_geared,
    make_gearing,
    pi_of,
    remainder_tree,
)
from .graph import (
    ConditionalDag,
    Mdag,
    build_mdag,
    canonical_dag,
    children,
    district_subgraph,
    districts,
    is_bidirected_connected,
    parents,
    remove_childless,
    sterile,
    topological_order,
)
from .intrinsic import (
    DiffsetWitness,
    IntrinsicRecord,
    PsetFamily,
    intrinsic_sets,
    minimal_intrinsic_superset,
    model_dimension,
    parametrizable_sets,
    verify_diffsets,
)
from .kernels import DiscreteKernel, kernel_from_text, kernel_to_text, read_kernel, uniform_kernel, write_kernel
from .nested import ConstraintViolation, district_factor, nmp_verify, verma_check
from .tangent import (
    ExclusionReport,
    TangentReport,
    achievable_directions,
    mixture_first_order,
    project_onto_lambda,
    verify_exclusions,
)
