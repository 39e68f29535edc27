"""opentorus: numerical laboratory for open hyperbolic toral automorphisms.

Covers Bowen-box covering bounds on unstable leaves, mollifier norm
scalings, effective-mixing measure estimates, and survivor-set dimension
deficits, with exact integer arithmetic where the contracts demand it.
"""

__version__ = "0.1.0"

from .errors import (
    ComplexSpectrumUnsupported,
    ConfigError,
    DegenerateScales,
    DenominatorOverflow,
    GridTooCoarse,
    NotHyperbolic,
    NotUnimodular,
    OpenTorusError,
    OracleTooLarge,
    RadiusTooLarge,
    StencilOutOfRange,
    SupportDoesNotEmbed,
    ThickeningSwallowsHole,
    TooFewPointsAboveFloor,
)
from .system import (
    Point,
    ToralSystem,
    UnstableCoord,
    bowen_halfwidths,
    bowen_volume,
    hball_volume,
    leaf_positions,
    make_system,
    step,
    torus_distance,
    unstable_translate,
    xball_volume,
)
from .holes import Hole, in_K, in_K_points, thicken
from .mollifier import (
    Mollifier,
    PsiField,
    ScalingReport,
    build_mollifier,
    build_psi,
    grad_sup_norm,
    sobolev_norm,
    verify_norm_scaling,
)
from .covering import (
    CellSet,
    CoverReport,
    SurvivorSpec,
    bowen_boxes_disjoint,
    cover_verify,
    expanded_distances,
    greedy_cover_count,
    grid_indices,
    grid_slack,
    lemma_ratio_bound,
    minimal_cover_oracle,
    prop_bound,
    refined_bound,
    separated_net,
    survivors,
)
from .mixing import (
    ConstantField,
    DecaySeries,
    MeasureEstimateReport,
    MixingParams,
    choose_t,
    correlation,
    correlation_series,
    entry_fraction,
    fit_decay,
    fit_measure_estimate,
    noise_floor_estimate,
    verify_measure_estimate,
)
from .dimension import (
    DeficitRow,
    DimensionEstimate,
    SweepReport,
    box_dimension,
    brute_force_dimension,
    deficit_sweep,
    full_space_dimension,
    survivor_dimension,
    theoretical_bound,
)
from .config import ExperimentConfig, load_config, parse_config, serialize_config
