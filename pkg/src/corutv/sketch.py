"""Randomized low-rank decompositions.

The central routine is :func:`corutv`, a compressed randomized UTV
decomposition: sketch the input from both sides, optionally sharpened by
power iterations, compress to a small square matrix, take its
column-pivoted QR, and lift the factors back. Two companions,
:func:`tsr_svd` (single-pass two-sided randomized SVD) and
:func:`sor_svd` (same two-sided pipeline finished with an SVD of the
compressed matrix), serve as baselines.

Every routine accepts an optional :class:`PassCounter`, which counts full
sweeps over the input matrix: each product of the input (or its transpose)
against a dense block is one pass, a two-sided compression ``Q1' A Q2`` is
one pass, and a fused two-sided sketch reading the data once is one pass.

Randomness comes from numpy's PCG64 generator with the ziggurat normal
transform; all draws are reproducible from the integer seed in
:class:`SketchConfig`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import (
    SvdFactors,
    as_matrix,
    householder_qr,
    jacobi_svd,
    pseudoinverse,
    qrcp,
)

__all__ = [
    "VARIANT_EXACT",
    "VARIANT_APPROX",
    "SketchConfig",
    "CorUtvFactors",
    "PassCounter",
    "gaussian_matrix",
    "corutv",
    "corutv_lowrank_error",
    "tsr_svd",
    "sor_svd",
    "count_passes",
    "flop_estimate",
    "svd_flop_estimate",
]

#: Compress by projecting the input from both sides (three-pass family).
VARIANT_EXACT = "exact-d"
#: Approximate the compressed matrix from retained sketches (two-pass family).
VARIANT_APPROX = "approx-d"

_VARIANTS = (VARIANT_EXACT, VARIANT_APPROX)

# Seed offset separating the second sketch stream of tsr_svd from the first.
_SECOND_STREAM_OFFSET = 0x9E3779B9


def gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Standard-normal matrix, reproducible for a fixed seed (PCG64)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian_matrix needs positive dims, got {rows}x{cols}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((rows, cols))


@dataclass(frozen=True)
class SketchConfig:
    """Parameters of a randomized sketch.

    ``ell`` is the sample size (number of sketch columns), ``q_power`` the
    number of extra power iterations, ``seed`` the RNG seed, and ``variant``
    selects how the compressed matrix is formed.
    """

    ell: int
    q_power: int = 0
    seed: int = 0
    variant: str = VARIANT_EXACT

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.q_power < 0:
            raise ValueError(f"q_power must be >= 0, got {self.q_power}")
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}, got {self.variant!r}")

    def validated_for(self, m: int, n: int) -> "SketchConfig":
        if self.ell > min(m, n):
            raise ValueError(
                f"ell={self.ell} exceeds min(m, n)={min(m, n)} for a {m}x{n} input"
            )
        return self


@dataclass
class CorUtvFactors:
    """Rank-``ell`` UTV factors ``u @ t @ v.T`` of the input.

    ``u`` (m x ell) and ``v`` (n x ell) have orthonormal columns; ``t``
    (ell x ell) is upper triangular with ``|diag(t)|`` non-increasing, the
    diagonal magnitudes estimating the leading singular values.
    """

    u: np.ndarray
    t: np.ndarray
    v: np.ndarray
    ell: int
    q_power: int
    variant: str

    def lowrank(self) -> np.ndarray:
        """The rank-``ell`` approximation this factorization represents."""
        return self.u @ (self.t @ self.v.T)

    def diag_abs(self) -> np.ndarray:
        """Singular-value estimates: absolute diagonal of ``t``."""
        return np.abs(np.diag(self.t))


@dataclass
class PassCounter:
    """Counts full sweeps over the data matrix during a decomposition."""

    passes: int = 0

    def add(self, n: int = 1) -> None:
        self.passes += n


class _Tracked:
    """Wraps the input matrix so every data sweep increments the counter."""

    def __init__(self, a: np.ndarray, counter: PassCounter | None):
        self.a = a
        self.counter = counter if counter is not None else PassCounter()

    @property
    def shape(self):
        return self.a.shape

    def mult(self, b: np.ndarray) -> np.ndarray:
        self.counter.add()
        return self.a @ b

    def tmult(self, b: np.ndarray) -> np.ndarray:
        self.counter.add()
        return self.a.T @ b

    def compress(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        # Q1' A Q2 reads the data once
        self.counter.add()
        return q1.T @ (self.a @ q2)

    def fused_sketch(self, psi: np.ndarray, phi: np.ndarray):
        # A psi and A' phi are independent and can share a single sweep
        self.counter.add()
        return self.a @ psi, self.a.T @ phi


def _power_sketch(tracked: _Tracked, cfg: SketchConfig):
    """Run the two-sided power sketch loop.

    Returns ``(c1, c2, c2_entering)`` where ``c2_entering`` is the sketch
    that multiplied the data to produce the final ``c1`` (needed by the
    approximated compression).
    """
    n = tracked.shape[1]
    c2 = gaussian_matrix(n, cfg.ell, cfg.seed)
    for _ in range(cfg.q_power + 1):
        c2_entering = c2
        c1 = tracked.mult(c2)
        c2 = tracked.tmult(c1)
    return c1, c2, c2_entering


def corutv(a, cfg: SketchConfig, counter: PassCounter | None = None) -> CorUtvFactors:
    """Compressed randomized UTV decomposition with optional power iterations.

    Requires m >= n. Draw a Gaussian sketch, alternate it against the data
    ``q_power + 1`` times, orthonormalize both side sketches, compress to an
    ell x ell matrix (exactly, or approximately from the retained sketches),
    factor the compressed matrix by column-pivoted QR, and lift.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if m < n:
        raise ValueError(f"corutv requires rows >= cols, got {m}x{n}")
    cfg.validated_for(m, n)
    tracked = _Tracked(a, counter)

    c1, c2, c2_entering = _power_sketch(tracked, cfg)
    q1 = householder_qr(c1).q
    q2 = householder_qr(c2).q
    if cfg.variant == VARIANT_EXACT:
        d = tracked.compress(q1, q2)
    else:
        d = (q1.T @ c1) @ pseudoinverse(q2.T @ c2_entering)
    f = qrcp(d)
    u = q1 @ f.q
    v = q2[:, f.perm]
    return CorUtvFactors(u=u, t=f.r, v=v, ell=cfg.ell, q_power=cfg.q_power,
                         variant=cfg.variant)


def corutv_lowrank_error(a, cfg: SketchConfig,
                         counter: PassCounter | None = None) -> float:
    """Frobenius error of the rank-``ell`` approximation built by corutv."""
    a = as_matrix(a, "a")
    f = corutv(a, cfg, counter)
    resid = a - f.lowrank()
    return float(np.sqrt((resid * resid).sum()))


def tsr_svd(a, cfg: SketchConfig, counter: PassCounter | None = None) -> SvdFactors:
    """Two-sided randomized SVD from a single pass over the data.

    Independent Gaussian sketches of the columns and rows are formed in one
    fused sweep; the compressed core is recovered from the sketch equations
    by least squares, then factored by the Jacobi SVD and lifted. Accuracy
    is meaningful relative to the multi-pass methods, not in absolute terms.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    cfg.validated_for(m, n)
    tracked = _Tracked(a, counter)

    psi = gaussian_matrix(n, cfg.ell, cfg.seed)
    phi = gaussian_matrix(m, cfg.ell, (cfg.seed + _SECOND_STREAM_OFFSET) % 2**64)
    y, z = tracked.fused_sketch(psi, phi)
    q1 = householder_qr(y).q
    q2 = householder_qr(z).q
    # core c solves c (q2' psi) = q1' y in the least-squares sense
    core = (q1.T @ y) @ pseudoinverse(q2.T @ psi)
    f = jacobi_svd(core)
    return SvdFactors(u=q1 @ f.u, sigma=f.sigma, v=q2 @ f.v)


def sor_svd(a, cfg: SketchConfig, counter: PassCounter | None = None) -> SvdFactors:
    """Two-sided sketch pipeline finished with an SVD of the compressed
    matrix instead of a column-pivoted QR."""
    a = as_matrix(a, "a")
    m, n = a.shape
    if m < n:
        raise ValueError(f"sor_svd requires rows >= cols, got {m}x{n}")
    cfg.validated_for(m, n)
    tracked = _Tracked(a, counter)

    c1, c2, c2_entering = _power_sketch(tracked, cfg)
    q1 = householder_qr(c1).q
    q2 = householder_qr(c2).q
    if cfg.variant == VARIANT_EXACT:
        d = tracked.compress(q1, q2)
    else:
        d = (q1.T @ c1) @ pseudoinverse(q2.T @ c2_entering)
    f = jacobi_svd(d)
    return SvdFactors(u=q1 @ f.u, sigma=f.sigma, v=q2 @ f.v)


def count_passes(fn, a, cfg: SketchConfig) -> int:
    """Total data passes made by one run of ``fn(a, cfg)``."""
    counter = PassCounter()
    fn(a, cfg, counter)
    return counter.passes


def flop_estimate(m: int, n: int, ell: int, q_power: int = 0,
                  variant: str = VARIANT_EXACT) -> int:
    """Closed-form flop count for one corutv run.

    Itemized per stage, with the two data-multiplication stages repeated
    once per power iteration, so the dominant term is
    ``(2 q + 3) * 2 m n ell`` for the exact compression and
    ``(2 q + 2) * 2 m n ell`` for the approximated one.
    """
    if min(m, n, ell) < 1:
        raise ValueError("dimensions must be positive")
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}, got {variant!r}")
    reps = q_power + 1
    total = n * ell                          # draw the sketch
    total += reps * 2 * m * n * ell          # data times sketch
    total += reps * 2 * m * n * ell          # transposed data times sketch
    total += 2 * m * ell**2 + 2 * n * ell**2  # orthonormalize both sketches
    if variant == VARIANT_EXACT:
        total += m * ell**2 + 2 * m * n * ell  # two-sided compression
    else:
        total += 2 * m * ell**2 + 2 * n * ell**2 + 3 * ell**3
    total += (8 * ell**3) // 3               # pivoted QR of the core
    total += 2 * m * ell**2 + 2 * n * ell    # lift the factors
    return total


def svd_flop_estimate(m: int, n: int) -> int:
    """Textbook flop count of a full economy SVD (thin U and V), used when
    comparing solver costs against an SVD-based baseline."""
    if m < n:
        m, n = n, m
    return 14 * m * n**2 + 8 * n**3
