"""Robust PCA solvers.

Both solvers split a corrupted matrix M into a low-rank part L and a
sparse part S by inexact augmented-Lagrangian iteration

    L_{j+1} = T_{1/mu_j}(M - S_j + Y_j / mu_j)
    S_{j+1} = shrink(M - L_{j+1} + Y_j / mu_j, lambda / mu_j)
    Y_{j+1} = Y_j + mu_j (M - L_{j+1} - S_{j+1})
    mu_{j+1} = min(rho mu_j, mu_bar)

starting from Y_0 = S_0 = 0 and stopping once the feasibility residual
``|M - L - S|_F`` drops below ``tol * |M|_F``. The two solvers differ only
in the low-rank thresholding step T: :func:`alm_corutv` truncates a
compressed randomized UTV factorization by its diagonal, while
:func:`inexact_alm` soft-thresholds singular values from a full SVD.

Default constants follow the standard inexact-ALM practice:
``lambda = 1/sqrt(max(m, n))``, ``mu_0 = 1.25 / |M|_2``, ``rho = 1.5``,
``mu_bar = 1e7 mu_0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import as_matrix, jacobi_svd, singular_values, spectral_norm
from .errors import ConvergenceError
from .sketch import SketchConfig, corutv

__all__ = [
    "AlmConfig",
    "RpcaSolution",
    "shrink",
    "corutv_threshold",
    "svt",
    "alm_corutv",
    "inexact_alm",
    "write_telemetry_csv",
]

#: Entries of S with magnitude above this count as support.
NNZ_EPS = 1e-12
#: Relative cutoff defining the numerical rank of L.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class AlmConfig:
    """Tuning constants for the ALM solvers.

    Fields left at ``None`` are resolved from the input matrix when the
    solve starts. ``ell`` is the initial truncation dimension of the
    low-rank step (the usual choice is twice the expected rank); the
    solvers adapt it between iterations the way truncated-SVD ALM
    implementations predict their working rank. ``q_power``/``seed``
    configure the randomized thresholding step and are ignored by the
    SVD-based baseline.
    """

    lam: float | None = None
    mu0: float | None = None
    rho: float = 1.5
    mu_bar: float | None = None
    tol: float = 1e-5
    max_iter: int = 1000
    ell: int | None = None
    q_power: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.rho <= 1:
            raise ValueError("rho must exceed 1")
        if self.mu_bar is not None and self.mu0 is not None and self.mu_bar < self.mu0:
            raise ValueError("mu_bar must be >= mu0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class RpcaSolution:
    """Solver output: the recovered pair plus per-iteration telemetry."""

    l: np.ndarray
    s: np.ndarray
    iterations: int
    residuals: list[float]
    rank_of_l: int
    nnz_of_s: int
    rank_history: list[int] = field(default_factory=list)
    nnz_history: list[int] = field(default_factory=list)
    mu_history: list[float] = field(default_factory=list)
    ell_history: list[int] = field(default_factory=list)


def shrink(x, delta: float) -> np.ndarray:
    """Entrywise soft threshold: sgn(x) * max(|x| - delta, 0)."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    x = as_matrix(x, "x")
    return np.sign(x) * np.maximum(np.abs(x) - delta, 0.0)


def corutv_threshold(b, delta: float, cfg: SketchConfig):
    """Low-rank threshold via a compressed randomized UTV factorization.

    Keeps the leading ``r`` rows of the triangular factor, where ``r``
    counts diagonal magnitudes above ``delta``. Returns ``(matrix, r)``;
    ``r = 0`` yields the zero matrix.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    b = as_matrix(b, "b")
    f = corutv(b, cfg)
    mat, r, _ = _truncate_utv(f, delta)
    return mat, r


def _truncate_utv(f, delta: float):
    d = f.diag_abs()
    r = int((d > delta).sum())
    if r == 0:
        m, n = f.u.shape[0], f.v.shape[0]
        return np.zeros((m, n)), 0, np.zeros(0)
    head = f.t[:r, :]
    mat = f.u[:, :r] @ (head @ f.v.T)
    # singular values of the truncation equal those of its small core
    sig = singular_values(head)
    return mat, r, sig


def svt(b, delta: float):
    """Singular value threshold via the full Jacobi SVD.

    Soft-thresholds the spectrum and rebuilds; returns ``(matrix, r)`` with
    ``r`` the count of singular values above ``delta``. Desk-scale inputs
    only.
    """
    mat, r, _, _ = _svt_warm(b, delta, None)
    return mat, r


def _svt_warm(b, delta: float, v_init, cap: int | None = None):
    if delta < 0:
        raise ValueError("delta must be >= 0")
    b = as_matrix(b, "b")
    f = jacobi_svd(b, v_init=v_init)
    kept = np.maximum(f.sigma - delta, 0.0)
    r = int((kept > 0.0).sum())
    if cap is not None:
        r = min(r, cap)
    if r == 0:
        return np.zeros_like(b), 0, f.v, np.zeros(0)
    mat = (f.u[:, :r] * kept[:r]) @ f.v[:, :r].T
    return mat, r, f.v, kept[:r]


def _numerical_rank(sig: np.ndarray, shape) -> int:
    if sig.size == 0 or sig[0] <= 0.0:
        return 0
    return int((sig > max(shape) * sig[0] * RANK_RTOL).sum())


def _next_cap(cap: int, rank: int, limit: int, grow: int) -> int:
    """Working-dimension prediction: creep up by one while the threshold
    count stays inside the cap, jump when the cap saturates."""
    if rank < cap:
        return max(1, min(rank + 1, limit))
    return max(1, min(rank + grow, limit))


def _alm_loop(m_mat, cfg: AlmConfig, step, cap0: int):
    """Shared ALM iteration.

    ``step(g, delta, cap, j, state)`` performs the rank-``cap``-limited
    low-rank thresholding and returns (L, rank, sigma, state). The cap
    follows the usual truncated-SVD rank prediction, seeded at ``cap0``;
    without it the early iterations, where the threshold is loose and the
    iterate far from low-rank, pollute the dual variable with excess rank.
    """
    m_mat = as_matrix(m_mat, "m")
    h, w = m_mat.shape
    lam = cfg.lam if cfg.lam is not None else 1.0 / np.sqrt(max(h, w))
    norm_m = float(np.sqrt((m_mat * m_mat).sum()))
    if norm_m == 0.0:
        zero = np.zeros_like(m_mat)
        return RpcaSolution(l=zero, s=zero.copy(), iterations=1, residuals=[0.0],
                            rank_of_l=0, nnz_of_s=0, rank_history=[0],
                            nnz_history=[0], mu_history=[0.0], ell_history=[0])
    mu = cfg.mu0 if cfg.mu0 is not None else 1.25 / spectral_norm(m_mat)
    mu_bar = cfg.mu_bar if cfg.mu_bar is not None else 1e7 * mu
    limit = min(h, w)
    grow = max(1, round(0.05 * limit))
    cap = max(1, min(cap0, limit))
    y = np.zeros_like(m_mat)
    s = np.zeros_like(m_mat)
    residuals: list[float] = []
    ranks: list[int] = []
    nnzs: list[int] = []
    mus: list[float] = []
    caps: list[int] = []
    state = None
    sig = np.zeros(0)
    for j in range(cfg.max_iter):
        l, rank, sig, state = step(m_mat - s + y / mu, 1.0 / mu, cap, j, state)
        caps.append(cap)
        cap = _next_cap(cap, rank, limit, grow)
        g = m_mat - l + y / mu
        s = np.sign(g) * np.maximum(np.abs(g) - lam / mu, 0.0)
        z = m_mat - l - s
        y = y + mu * z
        zeta = float(np.sqrt((z * z).sum())) / norm_m
        nnz = int((np.abs(s) > NNZ_EPS).sum())
        residuals.append(zeta)
        ranks.append(rank)
        nnzs.append(nnz)
        mus.append(mu)
        if zeta < cfg.tol:
            return RpcaSolution(
                l=l, s=s, iterations=j + 1, residuals=residuals,
                rank_of_l=_numerical_rank(sig, m_mat.shape), nnz_of_s=nnz,
                rank_history=ranks, nnz_history=nnzs, mu_history=mus,
                ell_history=caps,
            )
        mu = min(cfg.rho * mu, mu_bar)
    raise ConvergenceError(
        f"ALM did not reach tol={cfg.tol:.1e} in {cfg.max_iter} iterations "
        f"(last residual {residuals[-1]:.3e})",
        residual=residuals[-1],
        history=residuals,
    )


def alm_corutv(m, cfg: AlmConfig) -> RpcaSolution:
    """Robust PCA with the randomized UTV thresholding step.

    ``cfg.ell`` must be set; it seeds the adaptive sketch size (twice the
    expected rank is the usual choice). A fresh Gaussian sketch is drawn
    every iteration, with the seed advanced deterministically from
    ``cfg.seed``.
    """
    if cfg.ell is None:
        raise ValueError("alm_corutv requires cfg.ell (sketch sample size)")

    def step(g, delta, cap, j, state):
        scfg = SketchConfig(ell=cap, q_power=cfg.q_power,
                            seed=(cfg.seed + j) % 2**64)
        f = corutv(g, scfg)
        mat, r, sig = _truncate_utv(f, delta)
        return mat, r, sig, None

    return _alm_loop(m, cfg, step, cap0=cfg.ell)


def inexact_alm(m, cfg: AlmConfig) -> RpcaSolution:
    """Robust PCA baseline with SVD-based singular value thresholding.

    The Jacobi SVD of each iterate is warm-started from the previous
    iterate's right singular factor, which leaves results unchanged but
    cuts the sweep count substantially. The kept rank is capped by the
    same prediction schedule the randomized solver uses.
    """

    def step(g, delta, cap, j, state):
        mat, r, v, kept = _svt_warm(g, delta, state, cap)
        return mat, r, kept, v

    m_arr = as_matrix(m, "m")
    cap0 = cfg.ell if cfg.ell is not None else min(m_arr.shape)
    return _alm_loop(m_arr, cfg, step, cap0=cap0)


def write_telemetry_csv(solution: RpcaSolution, path) -> None:
    """Per-iteration solver telemetry as CSV: iter,zeta,rank_l,nnz_s,mu."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("iter,zeta,rank_l,nnz_s,mu\n")
        rows = zip(solution.residuals, solution.rank_history,
                   solution.nnz_history, solution.mu_history)
        for i, (zeta, rank, nnz, mu) in enumerate(rows, start=1):
            fh.write(f"{i},{zeta!r},{rank},{nnz},{mu!r}\n")
