"""Age-and-size structured branching processes: flow maps, renewal kernels,
Malthus exponent, Monte Carlo simulation, drift checks and explicit minorants.
"""

__version__ = "0.1.0"

from .errors import (BracketFailure, DegenerateData, EmptyMinorantWarning,
                     GridMismatch, InsufficientData, IntegrationFailure,
                     InvalidModel, MalthusError, NoConvergence, NonPositiveH,
                     OffDomain, OffOrbit, PopulationCapExceeded,
                     TailBoundExceeded)
from .model import (BetaFragmentation, ConstantHazard, MarkovModel, ModelSpec,
                    MomentTable, PhasePoint, TableFragmentation, TableHazard,
                    UniformFragmentation, ValidationReport, h_transform,
                    load_config, make_adder, model_from_config, validate)
from .flow import FlowEngine, Jacobian2x2
from .renewal import (FirstJumpLaw, KernelAssembler, KernelMatrix,
                      RowQuadrature, SizeGrid)
from .eigen import (EigenResult, euler_lotka_residual, leading_eigen,
                    reconstruct_h, solve_malthus, spectral_value)
from .simulate import (ConsistencyReport, Individual, PopulationState,
                       SimConfig, Trajectory, division_age_cdf,
                       empirical_functional, estimate_malthus,
                       generator_consistency_check, individual_rng,
                       run_replicates, sample_division_age,
                       simulate_population)
from .stationary import (Density2D, DoeblinConstants, DriftReport,
                         ErgodicityReport, EtaStarProfile, check_drift,
                         default_V, doeblin_minorant, drift_offset,
                         empirical_profile, ergodicity_report,
                         kernel_minorant_epsilon, pi_star, pi_star_density,
                         reference_profile, skeleton_mc_density,
                         solve_eta_star, weighted_tv)
