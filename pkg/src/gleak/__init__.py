"""gleak: exact and black-box estimation of g-vulnerability and g-leakage.

Exact computation works on explicit channel matrices.  Black-box estimation
reduces the problem to Bayes classification through two pre-processing
transformations (sample rewriting and channel prepending), trains k-NN or
neural-network classifiers, and reports normalized estimation errors with
distribution-free deviation bounds.
"""

from .bounds import (
    BoundInputs,
    BoundReport,
    bound_report,
    erf,
    expected_error_bounds,
    hypothesis_count,
    plugin_sigma2,
    sample_complexity,
    training_suboptimality_prob,
    validation_deviation_prob,
    worst_case_sigma2,
)
from .core import (
    Alphabet,
    Channel,
    GainFunction,
    GenerativeChannel,
    JointDistribution,
    NumericalError,
    Prior,
    SampleSet,
    Strategy,
    ValidationError,
    empirical_functional,
    enumerate_strategies_vulnerability,
    identity_gain,
    joint_from,
    leakage,
    optimal_strategy,
    posterior_vulnerability,
    prior_vulnerability,
    sample_joint,
    sample_outputs,
    sample_prior,
    strategy_gain,
)
from .estimation import (
    EstimateReport,
    MajorityEnsemble,
    TablePredictor,
    ensemble_majority,
    estimate_channel_preproc,
    estimate_data_preproc,
    frequentist_estimate,
    frequentist_predictor,
    sample_preprocessed_pairs,
)
from .features import FeatureCodec, grid_codec, scalar_codec, tuple_codec
from .io import (
    read_channel,
    read_gain,
    read_prior,
    read_samples,
    read_weighted,
    write_channel,
    write_gain,
    write_prior,
    write_samples,
    write_weighted,
)
from .harness import (
    PROFILES,
    MetricsReport,
    TrialMatrixConfig,
    emit_reports,
    run_trial_matrix,
)
from .knn import DistanceMetric, KnnClassifier, KnnConfig, k_for, knn_train
from .mlp import (
    MlpClassifier,
    MlpConfig,
    TrainingDiverged,
    gradient_check,
    mlp_train,
)
from .preprocess import (
    ChannelPreprocDerivation,
    DataPreprocDerivation,
    WeightedSampleSet,
    channel_preprocess,
    compose,
    data_preprocess,
    ideal_derivation,
    rationalize_gain,
)
from .rng import SeedProvenance, Stream, stream
from .scenarios import SCENARIO_NAMES, Scenario, build_scenario

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BoundInputs",
    "BoundReport",
    "Channel",
    "ChannelPreprocDerivation",
    "DataPreprocDerivation",
    "DistanceMetric",
    "EstimateReport",
    "FeatureCodec",
    "GainFunction",
    "GenerativeChannel",
    "JointDistribution",
    "KnnClassifier",
    "KnnConfig",
    "MajorityEnsemble",
    "MetricsReport",
    "MlpClassifier",
    "MlpConfig",
    "NumericalError",
    "PROFILES",
    "Prior",
    "SCENARIO_NAMES",
    "SampleSet",
    "Scenario",
    "SeedProvenance",
    "Strategy",
    "Stream",
    "TablePredictor",
    "TrainingDiverged",
    "TrialMatrixConfig",
    "ValidationError",
    "WeightedSampleSet",
    "bound_report",
    "build_scenario",
    "channel_preprocess",
    "compose",
    "data_preprocess",
    "emit_reports",
    "empirical_functional",
    "ensemble_majority",
    "enumerate_strategies_vulnerability",
    "erf",
    "estimate_channel_preproc",
    "estimate_data_preproc",
    "expected_error_bounds",
    "frequentist_estimate",
    "frequentist_predictor",
    "gradient_check",
    "grid_codec",
    "hypothesis_count",
    "identity_gain",
    "ideal_derivation",
    "joint_from",
    "k_for",
    "knn_train",
    "leakage",
    "mlp_train",
    "optimal_strategy",
    "plugin_sigma2",
    "posterior_vulnerability",
    "prior_vulnerability",
    "rationalize_gain",
    "read_channel",
    "read_gain",
    "read_prior",
    "read_samples",
    "read_weighted",
    "run_trial_matrix",
    "sample_complexity",
    "sample_joint",
    "sample_outputs",
    "sample_preprocessed_pairs",
    "sample_prior",
    "scalar_codec",
    "strategy_gain",
    "stream",
    "training_suboptimality_prob",
    "tuple_codec",
    "validation_deviation_prob",
    "worst_case_sigma2",
    "write_channel",
    "write_gain",
    "write_prior",
    "write_samples",
    "write_weighted",
]
