"""properact: exact properness decisions and explicit free acting groups.

The package decides, for classical families of reductive homogeneous
spaces, whether they admit proper actions of non-virtually-abelian
discrete subgroups, and when they do, constructs explicit free matrix
groups witnessing it, along with certified contraction estimates.

Layers, bottom up:

- ``exact``    — rational linear algebra (fractions all the way down).
- ``chamber``  — Weyl chambers for the classical series, signed-permutation
  Weyl groups, the exact subspace test deciding existence, and the family
  catalog.
- ``cartan``   — Cartan/Lyapunov projections in log coordinates, margin
  functionals, census and growth probes.
- ``proximal`` — projective contraction: dominant eigendata, epsilon
  certificates, transversal product bounds.
- ``wordball`` — enumeration of reduced words with renormalized
  exterior-power states that stay accurate far beyond one float's range.
- ``schottky`` — cone construction, generator search, power doubling,
  and word-ball verification; the end-to-end pipeline.
- ``serialize``— canonical JSON round trips for every result object.
- ``cli``      — the ``properact`` command.
"""

# Defined before the submodule imports: serialize reads it back from the
# partially initialized package.
SCHEMA_VERSION = "1"

from .cartan import (
    CensusResult,
    GrowthProbe,
    LogVector,
    MarginFn,
    MarginProfile,
    cartan_projection,
    census,
    growth_probe,
    lyapunov_projection,
    margin_fn,
    margin_fn_for,
    margin_profile,
    mu_margin,
    singular_values,
)
from .chamber import (
    DEFAULT_RANK_CAP,
    FAMILY_DESCRIPTIONS,
    FAMILY_PARAM_NAMES,
    FAMILY_SL_BLOCK,
    FAMILY_SL_WINDOW,
    FAMILY_SO_FORMS,
    FAMILY_SO_IN_SL,
    FAMILY_SP,
    RANK_CAP_ENV,
    ChamberData,
    Decision,
    Outcome,
    PairSpec,
    SignedMap,
    SubspaceQ,
    WeylElement,
    WeylGroup,
    b_plus_decomposition,
    b_plus_span,
    build_pair_spec,
    chamber_a,
    chamber_b,
    chamber_d,
    contains_b_plus,
    decide_existence,
    effective_rank_cap,
    enumerate_weyl,
    involution_signed_map,
    iter_family_cases,
    kobayashi_proper,
    longest_element,
    opposition_involution,
)
from .errors import (
    AdditivityFailure,
    BadIndex,
    BadParameters,
    BudgetExceeded,
    ConeEscape,
    DimensionMismatch,
    FreenessFailure,
    KindMismatch,
    MarginDegeneration,
    MaxPowerExceeded,
    NoDirectionFound,
    NotCertified,
    NotFound,
    NotProximal,
    OverflowRisk,
    PreconditionFailed,
    ProperactError,
    RankCapExceeded,
    RetryBudgetExhausted,
    SingularInput,
    TransversalityFailed,
    UnsupportedFamily,
    WordBallCheckFailure,
)
from .proximal import (
    EpsCertificate,
    ProductBoundReport,
    ProjHyperplane,
    ProjPoint,
    ProximalData,
    compound_matrix,
    delta_to_hyperplane,
    eps_proximal_certificate,
    product_bound_check,
    proj_distance,
    proximal_data,
    proximality_from_contraction,
)
from .schottky import (
    Cone,
    GeneratorSet,
    PipelineResult,
    SchottkyWitness,
    WordBallReport,
    build_avoiding_cone,
    construct_generators,
    construct_witness,
    power_search,
    properness_pipeline,
    verify_word_ball,
)
from .serialize import (
    dumps_canonical,
    load_witness,
    save_witness,
    witness_from_json,
    witness_to_json,
)
from .wordball import (
    GROUP,
    SEMIGROUP,
    LetterSystem,
    ball_size,
    is_very_reduced,
    iter_ball,
    syllables,
)

__all__ = [
    "SCHEMA_VERSION",
    # cartan
    "CensusResult",
    "GrowthProbe",
    "LogVector",
    "MarginFn",
    "MarginProfile",
    "cartan_projection",
    "census",
    "growth_probe",
    "lyapunov_projection",
    "margin_fn",
    "margin_fn_for",
    "margin_profile",
    "mu_margin",
    "singular_values",
    # chamber
    "DEFAULT_RANK_CAP",
    "FAMILY_DESCRIPTIONS",
    "FAMILY_PARAM_NAMES",
    "FAMILY_SL_BLOCK",
    "FAMILY_SL_WINDOW",
    "FAMILY_SO_FORMS",
    "FAMILY_SO_IN_SL",
    "FAMILY_SP",
    "RANK_CAP_ENV",
    "ChamberData",
    "Decision",
    "Outcome",
    "PairSpec",
    "SignedMap",
    "SubspaceQ",
    "WeylElement",
    "WeylGroup",
    "b_plus_decomposition",
    "b_plus_span",
    "build_pair_spec",
    "chamber_a",
    "chamber_b",
    "chamber_d",
    "contains_b_plus",
    "decide_existence",
    "effective_rank_cap",
    "enumerate_weyl",
    "involution_signed_map",
    "iter_family_cases",
    "kobayashi_proper",
    "longest_element",
    "opposition_involution",
    # errors
    "AdditivityFailure",
    "BadIndex",
    "BadParameters",
    "BudgetExceeded",
    "ConeEscape",
    "DimensionMismatch",
    "FreenessFailure",
    "KindMismatch",
    "MarginDegeneration",
    "MaxPowerExceeded",
    "NoDirectionFound",
    "NotCertified",
    "NotFound",
    "NotProximal",
    "OverflowRisk",
    "PreconditionFailed",
    "ProperactError",
    "RankCapExceeded",
    "RetryBudgetExhausted",
    "SingularInput",
    "TransversalityFailed",
    "UnsupportedFamily",
    "WordBallCheckFailure",
    # proximal
    "EpsCertificate",
    "ProductBoundReport",
    "ProjHyperplane",
    "ProjPoint",
    "ProximalData",
    "compound_matrix",
    "delta_to_hyperplane",
    "eps_proximal_certificate",
    "product_bound_check",
    "proj_distance",
    "proximal_data",
    "proximality_from_contraction",
    # schottky
    "Cone",
    "GeneratorSet",
    "PipelineResult",
    "SchottkyWitness",
    "WordBallReport",
    "build_avoiding_cone",
    "construct_generators",
    "construct_witness",
    "power_search",
    "properness_pipeline",
    "verify_word_ball",
    # serialize
    "dumps_canonical",
    "load_witness",
    "save_witness",
    "witness_from_json",
    "witness_to_json",
    # wordball
    "GROUP",
    "SEMIGROUP",
    "LetterSystem",
    "ball_size",
    "is_very_reduced",
    "iter_ball",
    "syllables",
]
