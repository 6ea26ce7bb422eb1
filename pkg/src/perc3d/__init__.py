"""Rigorous Monte-Carlo confidence bounds for cubic-lattice percolation.

Pipeline: seeded occupancy samples -> block/rectangle crossing events ->
exact binomial certification -> two-sided confidence interval, plus the
exact transfer-matrix certificate behind the 3/100 block threshold.
"""

from ._backend import active_backend, set_backend
from .errors import (
    CertificationError,
    ConfigError,
    ContractError,
    DomainError,
    IncompleteRunError,
    InfeasiblePlanError,
    InvalidGeometryError,
    NumericError,
    OracleRefusal,
    Perc3dError,
    RecordFormatError,
    SeedLedgerError,
    TamperError,
)
from .lattice import (
    GENERATOR_ID,
    BlockGeometry,
    Box,
    OccupancySample,
    RectGeometry,
    make_block_geometry,
    make_box,
    make_rect_geometry,
    sample_block,
    sample_box,
    sample_rect,
)
from .clusters import (
    ClusterLabeling,
    RegionLargest,
    label_clusters,
    label_clusters_grid,
    largest_in_region,
)
from .events import (
    EventResult,
    LowerWitness,
    UpperWitness,
    lower_event,
    upper_event,
)
from .oracles import lower_event_oracle, upper_event_oracle
from .upsilon import (
    CharacteristicPolynomial,
    PairType,
    REFERENCE_M6,
    ThresholdCertificate,
    TransferMatrix,
    characteristic_polynomial,
    dominant_eigenvalue,
    pair_type,
    reconcile_reference,
    transfer_matrix,
    upsilon_degree,
    upsilon_neighbors,
    verify_threshold,
)
from .stats import (
    CONSTANTS,
    ConfidencePlan,
    P0_LOWER,
    P0_UPPER,
    Verdict,
    as_rational,
    binom_tail_geq,
    binom_tail_leq,
    decimal_str,
    format_probability,
    plan,
    verdict,
)
from .runner import (
    ExperimentConfig,
    Report,
    RunResult,
    TrialRecord,
    format_config,
    load_config,
    parse_config,
    read_records,
    report,
    run_experiment,
    run_trial,
)

__version__ = "0.1.0"
