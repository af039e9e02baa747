"""Repeated quantum interactions on a system coupled to a chain of copies,
and their continuous-time limits."""
from .continuous import (
    coherent_generator,
    lindblad_generator,
    qsde_matrix_element,
    semigroup_apply,
    unitality_defect,
    vacuum_heisenberg,
)
from .dilation import (
    KrausFamily,
    discrete_semigroup_limit_check,
    effective_hamiltonian,
    kraus_dilate,
    steps_for,
)
from .discrete import (
    CoherentFunction,
    DiscreteCoherent,
    chain_simulate_bracket,
    discrete_matrix_element,
    discretize_coherent,
    evolve_chain,
    iterate_cp,
    reduced_cp_map,
)
from .errors import InputError, NumericalError, RepintError
from .hamiltonian import (
    InteractionParams,
    QsdeCoefficients,
    build_hamiltonian,
    check_convergence_hypothesis,
    hypothesis_residuals,
    limit_coefficients,
    series_blocks,
    unitarity_structure_check,
    unitary_step,
)
from .harness import (
    ConvergenceReport,
    Scenario,
    builtin_scenario,
    emit_report,
    parse_scenario,
    run_matrix_element_convergence,
    run_semigroup_convergence,
    serialize_scenario,
)
from .model import BlockOperator, ChainState, SpaceDims, block_to_flat, flat_to_block
from .numerics import expm, fit_order, hermitian_fn, ode_solve_linear, phi_scalar
from .scenarios import (
    ProjectionFamily,
    random_params,
    two_level_params,
    two_level_step,
    von_neumann_closed_form,
    von_neumann_params,
)
from .superop import Superoperator

__version__ = "0.1.0"

__all__ = [
    "coherent_generator",
    "lindblad_generator",
    "qsde_matrix_element",
    "semigroup_apply",
    "unitality_defect",
    "vacuum_heisenberg",
    "KrausFamily",
    "discrete_semigroup_limit_check",
    "effective_hamiltonian",
    "kraus_dilate",
    "steps_for",
    "CoherentFunction",
    "DiscreteCoherent",
    "chain_simulate_bracket",
    "discrete_matrix_element",
    "discretize_coherent",
    "evolve_chain",
    "iterate_cp",
    "reduced_cp_map",
    "InputError",
    "NumericalError",
    "RepintError",
    "InteractionParams",
    "QsdeCoefficients",
    "build_hamiltonian",
    "check_convergence_hypothesis",
    "hypothesis_residuals",
    "limit_coefficients",
    "series_blocks",
    "unitarity_structure_check",
    "unitary_step",
    "ConvergenceReport",
    "Scenario",
    "builtin_scenario",
    "emit_report",
    "parse_scenario",
    "run_matrix_element_convergence",
    "run_semigroup_convergence",
    "serialize_scenario",
    "BlockOperator",
    "ChainState",
    "SpaceDims",
    "block_to_flat",
    "flat_to_block",
    "expm",
    "fit_order",
    "hermitian_fn",
    "ode_solve_linear",
    "phi_scalar",
    "ProjectionFamily",
    "random_params",
    "two_level_params",
    "two_level_step",
    "von_neumann_closed_form",
    "von_neumann_params",
    "Superoperator",
]
