"""High-order immersed finite volume methods for 1D elliptic interface problems."""

from .polynomials import (
    Poly,
    PiecewisePoly,
    RefInterface,
    QuadRule,
    legendre,
    lobatto_std,
    gen_legendre,
    gen_lobatto,
    weighted_inner,
    roots_in,
    gauss_rule,
    integrate_split,
)
from .meshing import Mesh, ElementBasis, DualMesh, build_mesh, element_basis, dual_partition
from .solver import (
    InterfaceProblem,
    LinearSystem,
    SolutionField,
    SolverError,
    assemble_ifvm,
    assemble_ifem,
    solve,
    conservation_residual,
)
from .analysis import (
    ExactSolution,
    ErrorReport,
    manufactured,
    gl_projection,
    error_report,
    fit_rates,
    pi_h,
    discrete_norms,
)
from .experiments import ExperimentConfig, run_experiment, table_config

__version__ = "0.1.0"
