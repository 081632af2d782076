"""Deterministic generators for the benchmark inputs.

Two families: square noisy matrices with a planted rank-k spectrum, and
low-rank-plus-sparse instances for the robust PCA experiments. Outputs are
bitwise reproducible from the spec's seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import frobenius_norm, householder_qr, spectral_norm

__all__ = [
    "NoisyLowRankSpec",
    "RpcaInstanceSpec",
    "gen_noisy_lowrank",
    "gen_rpca_instance",
]

_NOISE_NORMALIZATIONS = ("spectral", "frobenius", "entry")
_RAMP_SPANS = ("full", "rank")


@dataclass(frozen=True)
class NoisyLowRankSpec:
    """Square n x n matrix with numerical rank ``k``: orthonormal factors
    around a linearly decaying planted spectrum, plus scaled Gaussian noise.

    ``ramp_span`` controls the planted decay: ``"full"`` lays the line from
    ``sigma_max`` to ``sigma_min`` across all n indices and keeps the first
    k values (a slowly decaying head with a sharp cliff, the regime power
    iterations are built for); ``"rank"`` spans the line over the k kept
    values themselves. ``noise_normalization`` picks the noise scale
    convention: unit spectral norm, unit Frobenius norm, or entries scaled
    by 1/sqrt(n).
    """

    n: int
    k: int
    noise_coeff: float = 0.1
    sigma_max: float = 1.0
    sigma_min: float = 1e-9
    seed: int = 0
    noise_normalization: str = "spectral"
    ramp_span: str = "full"

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.sigma_max <= 0 or self.sigma_min <= 0:
            raise ValueError("spectrum endpoints must be positive")
        if self.sigma_max <= self.sigma_min:
            raise ValueError("sigma_max must exceed sigma_min")
        if self.noise_coeff < 0:
            raise ValueError("noise_coeff must be >= 0")
        if self.noise_normalization not in _NOISE_NORMALIZATIONS:
            raise ValueError(
                f"noise_normalization must be one of {_NOISE_NORMALIZATIONS}"
            )
        if self.ramp_span not in _RAMP_SPANS:
            raise ValueError(f"ramp_span must be one of {_RAMP_SPANS}")


def planted_spectrum(spec: NoisyLowRankSpec) -> np.ndarray:
    """The full length-n planted spectrum (zeros beyond index k)."""
    sig = np.zeros(spec.n)
    if spec.ramp_span == "full":
        sig[: spec.k] = np.linspace(spec.sigma_max, spec.sigma_min, spec.n)[: spec.k]
    else:
        sig[: spec.k] = np.linspace(spec.sigma_max, spec.sigma_min, spec.k)
    return sig


def gen_noisy_lowrank(spec: NoisyLowRankSpec):
    """Build the matrix; returns ``(a, planted)`` with the planted spectrum.

    Draw order (one PCG64 stream): left factor, right factor, then the
    noise matrix. The noise draw is skipped entirely when
    ``noise_coeff == 0`` so the noiseless plant is exact.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, k = spec.n, spec.k
    u = householder_qr(rng.standard_normal((n, k))).q
    v = householder_qr(rng.standard_normal((n, k))).q
    sig = planted_spectrum(spec)
    a = (u * sig[:k]) @ v.T
    if spec.noise_coeff > 0:
        e = rng.standard_normal((n, n))
        if spec.noise_normalization == "spectral":
            e /= spectral_norm(e)
        elif spec.noise_normalization == "frobenius":
            e /= frobenius_norm(e)
        else:
            e /= np.sqrt(n)
        a = a + (spec.noise_coeff * sig[k - 1]) * e
    return a, sig


@dataclass(frozen=True)
class RpcaInstanceSpec:
    """Low-rank-plus-sparse instance: rank-``k`` Gaussian product plus
    ``s`` spikes of size ``amplitude`` with random signs at distinct
    uniformly drawn positions."""

    n: int
    k: int
    s: int
    amplitude: float = 80.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not 0 <= self.s <= self.n * self.n:
            raise ValueError(f"need 0 <= s <= n^2, got s={self.s}")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")


def gen_rpca_instance(spec: RpcaInstanceSpec):
    """Build the instance; returns ``(m, l_true, s_true)`` with
    ``m = l_true + s_true``."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, k = spec.n, spec.k
    l_true = rng.standard_normal((n, k)) @ rng.standard_normal((k, n))
    s_true = np.zeros((n, n))
    if spec.s > 0:
        pos = rng.choice(n * n, size=spec.s, replace=False)
        signs = rng.integers(0, 2, size=spec.s) * 2 - 1
        s_true.flat[pos] = spec.amplitude * signs
    return l_true + s_true, l_true, s_true
