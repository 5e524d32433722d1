"""Couplings of sparse planted-bisection graphs with uniform random graphs.

The package samples kernel random graphs, computes exact optimal transport
costs on tiny vertex counts, measures cycle and bisection witnesses, and
runs the threshold detectors built from them.
"""

__version__ = "0.1.0"

from .classes import (
    CanonicalClass,
    canonical_code,
    distance_matrix,
    edit_distance,
    enumerate_classes,
)
from .estimators import CycleStatistics, ThresholdDetector, WitnessTransformer
from .exceptions import (
    CapExceededError,
    DegenerateMeansError,
    EnumerationBudgetError,
    InvalidSpecError,
    InvalidVertexError,
    MarginalError,
    ProbabilityMassError,
    SbmCouplingError,
    SizeMismatchError,
)
from .graph import Graph, read_edge_list, toggle_edge, write_edge_list
from .inference import (
    EstimatorResult,
    VarianceReport,
    detection_accuracy,
    detection_sweep,
    efron_stein_check,
    remove_short_cycles,
    threshold_estimator,
)
from .models import (
    BlockKernel,
    GraphDistribution,
    ModelSpec,
    exact_distribution,
    sample_graph,
    sample_kernel_graph,
    sample_sbm,
)
from .stats import (
    BisectionReport,
    CycleReport,
    count_k_cycles,
    count_overlapping_pairs,
    cycle_report,
    expected_cycles_planted_limit,
    expected_cycles_uniform,
    max_disjoint_packing,
    min_bisection,
)
from .transport import (
    CouplingPlan,
    DualWitness,
    baseline_coupling_cost,
    expected_baseline_cost,
    lb_cycle_gap,
    lb_formula,
    sample_coupled_pair,
    solve_dual,
    solve_primal,
)
from .witnesses import Witness, parse_witness

__all__ = [name for name in dir() if not name.startswith("_")]
