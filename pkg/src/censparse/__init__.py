"""Sparse support recovery from deterministically censored designs.

The pipeline: estimate a pairwise-complete covariance from the observed
entries, rank neighbor features by predictive score, impute each missing
entry from its best observed neighbor, then solve the l1-penalized least
squares problem and read off the support.  The witness module certifies a
recovered support through strict dual feasibility and provides the
population-level condition and bound calculators used for diagnostics.
"""

from .covariance import (
    NeighborModel,
    PopulationNeighborModel,
    SampleCovariance,
    build_neighbor_model,
    neighbor_scores,
    pairwise_covariance,
    population_neighbor_model,
)
from .data import (
    CensoredMatrix,
    LabeledDataset,
    load_dataset,
    load_design,
    load_labels,
    observed_fraction,
    save_design,
    save_dataset,
    save_table,
)
from .errors import (
    BoundUndefinedError,
    CensparseError,
    ParseError,
    ValidationError,
    WitnessUndefinedError,
)
from .experiments import (
    ExperimentRecord,
    FixedLambda,
    LambdaContext,
    ScaledLambda,
    SupportPathLambda,
    TheoryLambda,
    choose_lambda,
    run_experiment1,
    run_experiment2,
    run_experiment3,
    summarize,
    weighted_constant,
)
from .imputation import (
    ImputationError,
    ImputedDesign,
    impute_baseline,
    impute_lowrank,
    impute_top_neighbor,
    imputation_error,
)
from .lasso import LassoConfig, LassoSolution, extract_support, kkt_residual, solve_lasso
from .synth import (
    ChainMask,
    CustomMask,
    CustomSigma,
    Equicorrelation,
    FractionMask,
    GenerationConfig,
    GroundTruth,
    Identity,
    apply_mask,
    make_mask,
    make_sigma,
    sample_dataset,
    sample_ground_truth,
    substream,
)
from .witness import (
    AssumptionReport,
    ImputedCovariance,
    LambdaBound,
    PopulationModel,
    WitnessReport,
    WitnessTruth,
    check_assumptions,
    construct_witness,
    imputed_covariance,
    lambda_bound,
    restricted_lasso,
    sample_incoherence,
    sample_min_eigen,
    score_separation_condition,
)

__version__ = "0.1.0"
