"""Stability toolkit for inverter based control on unbalanced radial feeders.

The package models three phase radial distribution feeders with a linearized
power flow, closes droop volt-var/volt-watt or phasor based control loops
around the network sensitivities, and relates closed loop stability to
impedance metrics of the feeder: line length, R/X ratio, and phase ratio.
On top of that sit a quasi-static time simulator with an exact two bus
solver, a placement heatmap procedure, and cross application experiments.
"""

from .errors import (
    DegenerateBlock,
    DivisionByZeroReactance,
    GridStabError,
    NoGoodConfigurationFound,
    NoRealSolution,
    NoStabilizingGain,
    NumericalFailure,
    ParseError,
    PhaseError,
    SchemaError,
    SingularMatrix,
    StructureError,
    TopologyError,
    UnboundedGain,
    UnknownNode,
)
from .feeder import (
    ABC,
    Feeder,
    Line,
    LineImpedance,
    PhaseSet,
    SensitivityMatrices,
    build_sensitivity,
    feeder_from_dict,
    feeder_to_dict,
    load_feeder,
    path_to_substation,
    save_feeder,
)
from .metrics import (
    LineMetrics,
    line_length,
    line_metrics,
    make_phase_ratio_line,
    make_rx_line,
    path_cumulative_metrics,
    phase_ratio,
    rx_ratio,
    scale_feeder_ratios,
    sigma1,
)
from .control import (
    APNP,
    ClosedLoopSystem,
    Configuration,
    GainMatrix,
    build_closed_loop,
    build_droop,
    build_pbc,
    colocated_config,
    disturbance_response,
    droop_gains,
    pbc_gains,
    uniform_gains,
    validate_structure,
)
from .stability import (
    CriticalGain,
    EigenReport,
    GoodnessReport,
    analytic_acrit,
    bisect_acrit,
    eigen_report,
    gain_sweep,
    goodness_report,
    is_good,
    spectral_radius,
)
from .twobus import FAMILIES, family_builder, raw_b, two_bus_feeder, two_bus_system
from .simulate import (
    SimScenario,
    Trajectory,
    run,
    solve_exact_two_bus,
    solve_linear_flow,
    solve_two_node_block,
)
from .placement import (
    CrossApplyResult,
    HeatmapResult,
    NodeVerdict,
    SamplingSpec,
    branch_metrics_ranking,
    cpp,
    cross_apply_experiment,
    sample_gains,
)
from .ieee123 import build_ieee123

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
