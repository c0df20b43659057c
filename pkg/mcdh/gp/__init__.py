__all__ = [
    "TimeGrid", "SEKernelParams", "CovarianceMatrix",
    "se_kernel", "se_gram", "build_covariance", "cholesky_lower", "factorize_with_jitter", "se_cholesky_traced",
    "ConditionalGP", "gp_extrapolate",
]

from .kernels import TimeGrid, SEKernelParams, CovarianceMatrix, se_kernel, se_gram, build_covariance, cholesky_lower, factorize_with_jitter, se_cholesky_traced
from .conditional import ConditionalGP, gp_extrapolate
