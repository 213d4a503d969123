"""cyclonet: coupled negative cyclic feedback oscillator networks.

Library plus CLI for checking oscillation and synchronization conditions,
estimating the collective period by multivariable harmonic balance, and
simulating the full nonlinear network.
"""

from .analysis import (
    EquilibriumInfo,
    OscillationVerdict,
    SyncVerdict,
    oscillation_condition,
    phase_crossing_frequency,
    required_connectivity,
    solve_equilibrium,
    sync_condition,
    z0_max_gain,
)
from .harmonic import (
    DescribingGains,
    PeriodEstimate,
    describing_functions,
    estimate_period,
    solve_amplitudes,
    solve_balance_gains,
    surrogate_poles,
)
from .model import (
    CouplingLaplacian,
    DimensionalParams,
    NetworkModel,
    OscillatorParams,
    build_laplacian,
    concentration_scales,
    generate_topology,
    nondimensionalize,
)
from .report import AnalysisReport, analyze, mode_instability_map, report_to_dict, report_to_json
from .sim import (
    IntegrationError,
    SimConfig,
    SimulationResult,
    Trajectory,
    equilibrium_state,
    export_trajectory_csv,
    integrate,
    measure_period,
    measure_sync,
    rhs,
    run_simulation,
    step_halving_audit,
    summarize,
)

__version__ = "0.1.0"
