from germrenorm.renorm.checks import (
    SEPARATION_WIDTHS,
    CheckReport,
    check_compatibility,
    check_extension,
    check_factorization,
    check_linearity,
    check_locality,
    check_translation_covariance,
    load_corpus,
    relative_discrepancy,
    support_separation,
    verify_corpus,
)
from germrenorm.renorm.maps import (
    CombinationResult,
    RenormResult,
    renormalize,
    renormalize_combination,
)

__all__ = [
    "SEPARATION_WIDTHS",
    "CheckReport",
    "CombinationResult",
    "RenormResult",
    "check_compatibility",
    "check_extension",
    "check_factorization",
    "check_linearity",
    "check_locality",
    "check_translation_covariance",
    "load_corpus",
    "relative_discrepancy",
    "renormalize",
    "renormalize_combination",
    "support_separation",
    "verify_corpus",
]
