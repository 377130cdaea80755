"""Zeros of the confluent hypergeometric function 1F1(alpha; gamma; z).

Evaluation at extended precision, certified zero finding by the argument
principle, an explicit linear lower bound |z_n| >= M n, and numerical
checks of the classical identities satisfied by the zero sequence.
"""

__version__ = "0.1.0"

from .analytics import (
    AsymptoticPrediction,
    IdentityReport,
    LambdaEstimate,
    asymptotic_zero_predict,
    conjecture_evidence,
    jensen_inequality_check,
    jensen_residual,
    lambda_estimate,
    mid_gap_radius,
    zero_sum_residual,
    power_sum_identity,
)
from .certificate import (
    BoundCertificate,
    CaseTag,
    certify,
    coefficient_bound_check,
    jensen_chain_check,
    optimize_radius,
    verify_bound,
)
from .kummer import EvalResult, Method, ParamClass, Parameters, classify, coefficient_ratio_stream, derivative, evaluate
from .precision import BigComplex, PrecisionPolicy, compensated_sum, complex_gamma, principal_log
from .zeros import Region, Zero, ZeroSet, find_zeros, refine_newton, winding_count

__all__ = [
    "AsymptoticPrediction",
    "BigComplex",
    "BoundCertificate",
    "CaseTag",
    "EvalResult",
    "IdentityReport",
    "LambdaEstimate",
    "Method",
    "ParamClass",
    "Parameters",
    "PrecisionPolicy",
    "Region",
    "Zero",
    "ZeroSet",
    "asymptotic_zero_predict",
    "certify",
    "classify",
    "coefficient_bound_check",
    "coefficient_ratio_stream",
    "compensated_sum",
    "complex_gamma",
    "conjecture_evidence",
    "derivative",
    "evaluate",
    "find_zeros",
    "jensen_chain_check",
    "jensen_inequality_check",
    "jensen_residual",
    "lambda_estimate",
    "mid_gap_radius",
    "zero_sum_residual",
    "optimize_radius",
    "power_sum_identity",
    "principal_log",
    "refine_newton",
    "verify_bound",
    "winding_count",
]
