"""Generalised polar codes over the binary erasure channel.

Construction, analysis, simulation, and successive-cancellation decoding of
polar codes built from arbitrary l x l binary kernels.
"""

from .errors import BudgetExceededError, DecodingIntegrityError, KernelFormatError
from .kernels import (
    Kernel,
    PartialDistances,
    digit_reversal_permutation,
    enumerate_kernels,
    kronecker_generator,
    parse_kernel,
    partial_distances,
    rate_exponent_table,
    reference_generator,
)
from .bec import (
    Spectrum,
    TransitionProfile,
    bler_upper_bound,
    bound_curve,
    bounds_csv_text,
    evaluate_erasure,
    evolve_spectrum,
    exhaustive_split_oracle,
    one_step_profile,
    polarisation_distance,
    select_information_set,
    spectrum_csv_text,
)
from .codec import (
    DecodeResult,
    PolarCode,
    Symbol,
    encode,
    genie_erasure_flags,
    kernel_step_decide,
    map_oracle_decode,
    sc_decode,
    stride_permutation,
    symbols_from_str,
    symbols_to_str,
)
from .survey import (
    FamilySummary,
    GroupRecord,
    Signature,
    SurveyMember,
    export_survey,
    group_survey,
    invertible_summary,
    signature,
)
from .sim import (
    BecChannel,
    ReportComparison,
    SimReport,
    StopRule,
    bec_transmit,
    compare_reports,
    run_monte_carlo,
    wilson_interval,
)

__all__ = [
    "DecodeResult",
    "PolarCode",
    "Symbol",
    "encode",
    "genie_erasure_flags",
    "kernel_step_decide",
    "map_oracle_decode",
    "sc_decode",
    "stride_permutation",
    "symbols_from_str",
    "symbols_to_str",
    "FamilySummary",
    "GroupRecord",
    "Signature",
    "SurveyMember",
    "export_survey",
    "group_survey",
    "invertible_summary",
    "signature",
    "BecChannel",
    "ReportComparison",
    "SimReport",
    "StopRule",
    "bec_transmit",
    "compare_reports",
    "run_monte_carlo",
    "wilson_interval",
    "BudgetExceededError",
    "DecodingIntegrityError",
    "KernelFormatError",
    "Kernel",
    "PartialDistances",
    "digit_reversal_permutation",
    "enumerate_kernels",
    "kronecker_generator",
    "parse_kernel",
    "partial_distances",
    "rate_exponent_table",
    "reference_generator",
    "Spectrum",
    "TransitionProfile",
    "bler_upper_bound",
    "bound_curve",
    "bounds_csv_text",
    "evaluate_erasure",
    "evolve_spectrum",
    "exhaustive_split_oracle",
    "one_step_profile",
    "polarisation_distance",
    "select_information_set",
    "spectrum_csv_text",
]
