"""Multi-AUV formation control: fixed-time sliding-mode laws, simulation, analysis."""

from .control import (
    AuxState,
    BaselineGains,
    DisturbanceBound,
    FtGains,
    adaptive_sat_tau,
    baseline_smc_tau,
    ft_backstepping_tau,
    sigpow,
    sliding_surfaces,
    smooth_sat,
    virtual_control,
    virtual_control_deriv,
)
from .config import default_scenario, parse_config
from .fuzzy import AdaptiveState, FuzzyNet, adapt_derivative, basis, fls_output, membership
from .sim import (
    LeaderPath,
    Metrics,
    RunLog,
    Scenario,
    compute_metrics,
    leader_reference,
    lyapunov_trace,
    mc_sweep,
    residual_radius,
    rk4_step,
    run,
    settling_bound,
    settling_time,
)
from .topology import (
    FormationGraph,
    FormationSpec,
    consensus_errors,
    grounded_matrix,
    laplacian,
    stacked_apply,
)
from .vehicle import (
    AuvParams,
    AuvState,
    coriolis_matrix,
    damping_matrix,
    default_params,
    disturbance,
    jacobian,
    mass_matrix,
    plant_derivative,
    saturate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
