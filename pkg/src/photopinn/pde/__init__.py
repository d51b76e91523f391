from .problems import (
    LossWeights,
    OracleNotBuilt,
    PinnProblem,
    PROBLEM_NAMES,
    SamplingBudget,
    darcy_residual,
    get_problem,
    pinn_loss,
    reference_solution,
    relative_l2,
    sample_batch,
)
from .black_scholes import bs_exact
from .hjb import hjb_exact, hjb_transform
from .burgers import burgers_exact, burgers_cole_hopf_quad, burgers_fd_solve
from .darcy import darcy_fd_solve, default_permeability, random_two_value_field
from .oracles import oracle_build
from .raster import Raster, load_raster, save_raster
