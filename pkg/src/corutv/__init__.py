"""Compressed randomized UTV decompositions for low-rank approximation,
with rank-revealing baselines, robust PCA solvers, and a benchmark CLI.

The public surface re-exported here covers the dense kernels
(:mod:`corutv.dense`), the randomized decompositions (:mod:`corutv.sketch`),
the robust PCA solvers (:mod:`corutv.rpca`), the input generators
(:mod:`corutv.synth`), and matrix file I/O (:mod:`corutv.matio`).
"""

from .dense import (
    QrFactors,
    QrcpFactors,
    SvdFactors,
    frobenius_norm,
    householder_qr,
    jacobi_svd,
    matmul,
    pseudoinverse,
    qrcp,
    singular_values,
    spectral_norm,
)
from .errors import ConvergenceError, CorutvError
from .matio import read_matrix, write_matrix
from .rpca import (
    AlmConfig,
    RpcaSolution,
    alm_corutv,
    corutv_threshold,
    inexact_alm,
    shrink,
    svt,
    write_telemetry_csv,
)
from .sketch import (
    VARIANT_APPROX,
    VARIANT_EXACT,
    CorUtvFactors,
    PassCounter,
    SketchConfig,
    corutv,
    corutv_lowrank_error,
    count_passes,
    flop_estimate,
    gaussian_matrix,
    sor_svd,
    svd_flop_estimate,
    tsr_svd,
)
from .synth import (
    NoisyLowRankSpec,
    RpcaInstanceSpec,
    gen_noisy_lowrank,
    gen_rpca_instance,
)

__version__ = "0.1.0"

__all__ = [
    "AlmConfig",
    "ConvergenceError",
    "CorUtvFactors",
    "CorutvError",
    "NoisyLowRankSpec",
    "PassCounter",
    "QrFactors",
    "QrcpFactors",
    "RpcaInstanceSpec",
    "RpcaSolution",
    "SketchConfig",
    "SvdFactors",
    "VARIANT_APPROX",
    "VARIANT_EXACT",
    "alm_corutv",
    "corutv",
    "corutv_lowrank_error",
    "corutv_threshold",
    "count_passes",
    "flop_estimate",
    "frobenius_norm",
    "gaussian_matrix",
    "gen_noisy_lowrank",
    "gen_rpca_instance",
    "householder_qr",
    "inexact_alm",
    "jacobi_svd",
    "matmul",
    "pseudoinverse",
    "qrcp",
    "read_matrix",
    "shrink",
    "singular_values",
    "sor_svd",
    "spectral_norm",
    "svd_flop_estimate",
    "svt",
    "tsr_svd",
    "write_matrix",
    "write_telemetry_csv",
]
