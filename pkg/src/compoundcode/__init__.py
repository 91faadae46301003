"""Compound LDGM/LDPC codes: samplers, exact desk-scale codecs, nested-coset
side-information pipelines, and the numerical engine for their exponents and
achievability bounds."""

__version__ = "0.1.0"

from .gf2 import (
    BitVector,
    SparseBitMatrix,
    concat,
    matrix_from_text,
    matrix_to_text,
    matvec,
    null_space_basis,
    rank,
    solve_particular,
)
from .ensembles import (
    CodeRates,
    CompoundCode,
    Coset,
    EnsembleParams,
    assemble,
    coset_code,
    load_code,
    new_rng,
    random_bitvector,
    sample_ldgm,
    sample_regular_ldpc,
    save_code,
    trial_rng,
)
from .analysis import (
    ChannelCondition,
    ChannelExponent,
    DerivativeCheck,
    ExponentCurve,
    RdBound,
    RdPoint,
    SaddleSolution,
    bernoulli_convolve,
    binary_entropy,
    channel_condition_holds,
    channel_exponent_L,
    delta_fun,
    derivative_checks,
    enum_curve,
    exact_overlap_log_prob,
    first_moment_exponent,
    kl_bernoulli,
    ldpc_enum_bound_B,
    ldpc_rate,
    overlap_curve,
    overlap_exponent_F,
    rd_bound_curve,
    rd_min_rate,
    rd_objective_K,
    rd_rate_ratio,
    smallest_passing_degree,
)
from .codec import (
    DecodeResult,
    EnumerationCapError,
    MomentEstimate,
    SourceEncodeResult,
    WeightHistogram,
    channel_decode_ml,
    channel_decode_threshold,
    count_good_codewords,
    enumerate_codewords,
    moment_experiment,
    source_encode_exhaustive,
    weight_enumerator_exact,
)
from .sideinfo import (
    BatchSummary,
    InfeasiblePlanError,
    PipelineTrace,
    RatePlan,
    override_plan_counts,
    plan_rates_ccsi,
    plan_rates_scsi,
    run_ccsi,
    run_scsi,
    simulate_ccsi,
    simulate_scsi,
)
