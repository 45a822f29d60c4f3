"""Cell-free integrated sensing and communication simulation toolkit.

Builds the vectorized clutter/target sensing model for distributed transmit
APs and one sensing AP, and jointly optimizes the per-AP transmit
beamformers and the space-time receive filter to maximize radar output SINR
under per-user communication SINR targets and per-AP power budgets.
"""

from .scenario import (SystemConfig, Scenario, steering_vector, path_loss,
                       bistatic_delay_doppler, rician_channel, generate_scenario)
from .model import (SymbolBlock, SensingModel, BeamformerSet, SpaceTimeFilter,
                    shift_matrix, doppler_matrix, draw_symbols,
                    build_sensing_model, comm_sinr, radar_sinr,
                    simulate_received, monte_carlo_radar_sinr)
from .numerics import (HermitianEigResult, hermitian_eig,
                       rank_one_plus_identity_inverse_apply,
                       principal_generalized_direction)
from .cone import (ConeProgram, ConeSolution, SolverSettings, solve,
                   complex_affine_to_real, quadratic_epigraph_cone)
from .optimizer import (SolveOptions, InitResult, AlternatingResult, SolveTrace,
                        InfeasibleDropError, initialize_beamformers,
                        update_receive_filter, update_gamma,
                        surrogate_coefficients, assemble_transmit_socp,
                        run_alternating, baseline_no_rbf, baseline_spatial_bf,
                        baseline_radar_only)
from .harness import (ExperimentConfig, ResultRow, desk_config, paper_config,
                      run_experiment, summarize, validate)

__version__ = "0.1.0"
