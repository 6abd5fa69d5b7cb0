"""fairscore: sampling-based design and auditing of linear scoring functions.

The toolkit samples the space of linear scoring functions uniformly (whole
space or a vicinity cap around a reference function), estimates how hard it
is to score a dataset fairly, suggests nearby fair functions, audits
rankings for cherry-picking, and approximates hyperplane arrangements from
samples alone.
"""

from .arrangement import ApproxArrangement, Region, new_arrangement
from .data_io import IngestConfig, Report, export_report, load_csv, normalize, parse_report
from .errors import FairscoreError
from .estimators import (
    AuditResult,
    RankingScope,
    StabilityReport,
    StableRanking,
    Suggestion,
    UpEstimate,
    audit_reference,
    confidence_error,
    estimate_up,
    stable_rankings,
    suggest_fair,
)
from .geometry import (
    Hyperplane,
    RotationPlan,
    angular_distance,
    dual_hyperplane,
    rotate,
    rotation_matrix,
    to_cartesian,
    to_polar,
    unit,
)
from .rng import RngStream
from .sampler import (
    DEFAULT_GAMMA,
    CdfTable,
    RegionOfInterest,
    build_cdf_table,
    inverse_cdf_3d,
    sample_cap,
    sample_cap_batch,
    sample_cap_rejection,
    sample_sphere,
    sample_sphere_batch,
    sample_sphere_by_angles,
)
from .scoring import (
    Dataset,
    FairnessConstraint,
    Ranking,
    Record,
    ScoringFunction,
    all_ordering_exchanges,
    check_fairness,
    group_counts,
    ordering_exchange,
    rank,
    score,
)

__version__ = "0.1.0"
