"""Multi-objective Bayesian optimization with lookahead acquisition functions.

GP surrogates with a Matern 5/2 ARD kernel, exact hypervolume machinery, and
four acquisition strategies (myopic EHVI plus nested, joint, and
batch-informed lookahead variants) wired into a reproducible sequential
optimization loop and a campaign CLI.
"""

from .acquisition import (
    LookaheadConfig,
    MCConfig,
    behvi,
    binom_af,
    binom_pick,
    ehvi,
    ehvi_exact_2d,
    joint_af,
    nested_af,
)
from .benchmarks import PROBLEM_NAMES, Problem, evaluate, make_problem, reference_max
from .engine import (
    METHODS,
    BOState,
    IterationRecord,
    RunConfig,
    RunRecord,
    horizon,
    init_state,
    observe,
    run_bo,
    step,
    suggest,
)
from .gp import (
    GPModel,
    KernelParams,
    PosteriorGaussian,
    fantasize,
    fit_gp,
    joint_sample,
    log_marginal_likelihood,
    matern52_ard,
    posterior,
)
from .optimize import OptBudget, maximize_joint, maximize_on_grid, maximize_pointwise, sobol_candidates
from .pareto import (
    HvEstimate,
    ObjectiveVector,
    ParetoFront,
    dominates,
    hv_mc_oracle,
    hvi,
    hypervolume,
    nondominated,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ObjectiveVector",
    "ParetoFront",
    "HvEstimate",
    "dominates",
    "nondominated",
    "hypervolume",
    "hvi",
    "hv_mc_oracle",
    "KernelParams",
    "GPModel",
    "PosteriorGaussian",
    "matern52_ard",
    "log_marginal_likelihood",
    "fit_gp",
    "posterior",
    "fantasize",
    "joint_sample",
    "MCConfig",
    "LookaheadConfig",
    "ehvi",
    "ehvi_exact_2d",
    "behvi",
    "nested_af",
    "joint_af",
    "binom_af",
    "binom_pick",
    "OptBudget",
    "sobol_candidates",
    "maximize_pointwise",
    "maximize_joint",
    "maximize_on_grid",
    "Problem",
    "PROBLEM_NAMES",
    "make_problem",
    "evaluate",
    "reference_max",
    "METHODS",
    "RunConfig",
    "BOState",
    "IterationRecord",
    "RunRecord",
    "horizon",
    "init_state",
    "suggest",
    "observe",
    "step",
    "run_bo",
]
