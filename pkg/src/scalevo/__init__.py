"""Generative models of musical-scale evolution.

Core pieces: scale and interval-set representation (`core`), the melody
step-scoring model and its fits (`melody`), harmonicity and interference
interval scoring (`harmonicity`, `interference`), interval-category
complexity (`complexity`), biased scale-population generation (`generate`),
likelihood-ratio model comparison and interval significance (`compare`), and
scale inference from pitch tracks (`extraction`). The `scalevo` CLI wires
these into file-based pipelines.
"""

from .core import (
    DataFormatError,
    IntervalSet,
    Scale,
    ScaleValidationError,
    degrees_from_steps,
    filter_intervals,
    interval_set,
    read_scales,
    write_scales,
)
from .melody import (
    DEFAULT_MELODY_PARAMS,
    CorpusHistogram,
    MelodyParams,
    StepDistribution,
    UniformStepSource,
    fit_is,
    fit_mc,
    fit_sigma_per,
    melody_scale_probability,
    p_is,
    p_mc,
    p_melody,
)
from .harmonicity import (
    EmptyIntervalSetError,
    HarmonicityModel,
    NormalizedScoreTable,
    h_gp,
    h_hp,
    h_of,
    harmony_cost,
    normalize_scores,
)
from .interference import (
    InterferenceModel,
    Timbre,
    dissonance_berezovsky,
    dissonance_hk,
    dissonance_sethares,
    interference_cost,
    interference_table,
)
from .complexity import ClusterResult, complexity_cost, step_categories, ward_categories
from .costs import make_cost_model
from .generate import (
    GeneratorConfig,
    Population,
    mcmc_generate,
    melody_population,
    null_range_population,
    null_range_study,
    population_summary,
    range_filtered_population,
    sample_melody_scale,
    trait_trajectory,
)
from .compare import (
    LogZTable,
    benjamini_hochberg,
    bootstrap_regions,
    estimate_log_mean_likelihood,
    gini,
    interval_significance,
    llr_significance,
    optimize_beta,
    region_weights,
    scale_llr,
    weighted_mean_llr,
)
from .extraction import (
    GmmFit,
    PitchTrack,
    detect_equidistant,
    extract_scale,
    fit_gmm,
    pitch_histogram,
    scale_from_gmm,
)
from .stats import jensen_shannon

__version__ = "0.1.0"
