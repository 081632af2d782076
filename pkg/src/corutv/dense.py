"""Dense matrix kernels: QR, column-pivoted QR, one-sided Jacobi SVD,
pseudoinverse, and matrix norms.

Matrices throughout the package are 2-D ``numpy.ndarray`` objects holding
64-bit floats in row-major order. Kernels validate shape and finiteness on
entry and are pure functions: inputs are never modified, outputs are fresh
arrays, and the same input always produces the same output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "QrFactors",
    "QrcpFactors",
    "SvdFactors",
    "as_matrix",
    "matmul",
    "householder_qr",
    "qrcp",
    "jacobi_svd",
    "singular_values",
    "pseudoinverse",
    "frobenius_norm",
    "spectral_norm",
]

#: Relative off-diagonal threshold at which Jacobi sweeps stop.
JACOBI_TOL = 1e-14
#: Hard cap on Jacobi sweeps before giving up.
JACOBI_MAX_SWEEPS = 100
#: Dimension up to which spectral_norm uses the full Jacobi SVD.
_SPECTRAL_DIRECT_LIMIT = 64


def as_matrix(a, name: str = "matrix", require_finite: bool = True) -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting bad input."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {m.shape}")
    if require_finite and not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass
class QrFactors:
    """Thin QR factors: ``q`` has orthonormal columns, ``r`` is upper
    triangular with unnormalized diagonal signs."""

    q: np.ndarray
    r: np.ndarray


@dataclass
class QrcpFactors:
    """Column-pivoted QR factors of ``a``: ``q @ r == a[:, perm]`` with
    ``|diag(r)|`` non-increasing."""

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray


@dataclass
class SvdFactors:
    """Economy SVD factors: ``u * sigma @ v.T`` reconstructs the input;
    ``sigma`` is non-negative and non-increasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit dimension checking."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            "inner dimensions differ"
        )
    return a @ b


def frobenius_norm(a) -> float:
    a = as_matrix(a, "a")
    return float(np.sqrt((a * a).sum()))


# ---------------------------------------------------------------------------
# Householder QR and its column-pivoted variant
# ---------------------------------------------------------------------------


def _reflector(x: np.ndarray):
    """Householder vector v and scale tau with H = I - tau v v^T mapping x
    onto -sign(x0)*|x| e1. Returns (None, 0) for a zero column."""
    nx = np.sqrt((x * x).sum())
    if nx == 0.0:
        return None, 0.0
    v = x.copy()
    sign = 1.0 if v[0] >= 0.0 else -1.0
    v[0] += sign * nx
    tau = 2.0 / (v * v).sum()
    return v, tau


def _apply_reflectors_to_identity(reflectors, m: int, ncols: int) -> np.ndarray:
    """Form the first ``ncols`` columns of Q from stored reflectors."""
    q = np.zeros((m, ncols))
    q[np.arange(ncols), np.arange(ncols)] = 1.0
    for j in range(len(reflectors) - 1, -1, -1):
        ref = reflectors[j]
        if ref is None:
            continue
        v, tau = ref
        block = q[j:, :]
        w = tau * (v @ block)
        block -= np.outer(v, w)
    return q


def householder_qr(a) -> QrFactors:
    """Thin QR of an m x n matrix with m >= n via Householder reflectors."""
    a = as_matrix(a, "a")
    m, n = a.shape
    if m < n:
        raise ValueError(f"householder_qr requires rows >= cols, got {m}x{n}")
    r = a.copy()
    reflectors = []
    for j in range(n):
        v, tau = _reflector(r[j:, j].copy())
        reflectors.append(None if v is None else (v, tau))
        if v is None:
            continue
        block = r[j:, j:]
        w = tau * (v @ block)
        block -= np.outer(v, w)
    q = _apply_reflectors_to_identity(reflectors, m, n)
    return QrFactors(q=q, r=np.triu(r[:n, :]))


def qrcp(a) -> QrcpFactors:
    """Column-pivoted (rank-revealing) QR.

    At every step the pivot is the remaining column of largest residual
    2-norm; ties go to the lowest column index. Residual norms are tracked
    by downdating and recomputed exactly when cancellation makes the
    downdated value untrustworthy.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    kmax = min(m, n)
    r = a.copy()
    perm = np.arange(n)
    norms2 = np.einsum("ij,ij->j", r, r)
    ref2 = norms2.copy()
    reflectors = []
    for j in range(kmax):
        p = j + int(np.argmax(norms2[j:]))
        if p != j:
            r[:, [j, p]] = r[:, [p, j]]
            perm[[j, p]] = perm[[p, j]]
            norms2[[j, p]] = norms2[[p, j]]
            ref2[[j, p]] = ref2[[p, j]]
        v, tau = _reflector(r[j:, j].copy())
        reflectors.append(None if v is None else (v, tau))
        if v is not None:
            block = r[j:, j:]
            w = tau * (v @ block)
            block -= np.outer(v, w)
        if j + 1 < n:
            row = r[j, j + 1 :]
            norms2[j + 1 :] -= row * row
            np.maximum(norms2[j + 1 :], 0.0, out=norms2[j + 1 :])
            stale = norms2[j + 1 :] < 1e-10 * ref2[j + 1 :]
            if stale.any():
                idx = np.nonzero(stale)[0] + (j + 1)
                fresh = np.einsum("ij,ij->j", r[j + 1 :, idx], r[j + 1 :, idx])
                norms2[idx] = fresh
                ref2[idx] = fresh
    q = _apply_reflectors_to_identity(reflectors, m, kmax)
    return QrcpFactors(q=q, r=np.triu(r[:kmax, :]), perm=perm)


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD
# ---------------------------------------------------------------------------


def _round_robin_schedule(n: int):
    """Round-robin pairing: n-1 rounds of n/2 disjoint pairs covering every
    unordered pair exactly once per sweep. n must be even."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        top = np.array([players[0]] + players[1 : n // 2])
        bot = np.array(players[n // 2 :][::-1])
        rounds.append((top, bot))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds

_SCHEDULE_CACHE: dict[int, list] = {}


def _schedule(n: int):
    sched = _SCHEDULE_CACHE.get(n)
    if sched is None:
        sched = _round_robin_schedule(n)
        _SCHEDULE_CACHE[n] = sched
    return sched


def _jacobi_sweeps(x: np.ndarray, tol: float, max_sweeps: int, want_v: bool):
    """Orthogonalize the columns of ``x`` in place by plane rotations.

    Pairs are visited in a round-robin order so each round's rotations act
    on disjoint columns and can be applied vectorized. Column norms are
    cached and updated by the rotation identities, with an exact refresh at
    the end of every sweep. Returns (v, sweeps); ``v`` accumulates the
    rotations when requested.
    """
    m, n = x.shape
    if n == 1:
        return (np.eye(1) if want_v else None), 0
    v = np.eye(n, order="F") if want_v else None
    norms2 = np.einsum("ij,ij->j", x, x)
    for sweep in range(max_sweeps):
        off = 0.0
        for top, bot in _schedule(n):
            xt = x[:, top]
            xb = x[:, bot]
            gam = np.einsum("ij,ij->j", xt, xb)
            al = norms2[top]
            be = norms2[bot]
            den = np.sqrt(al * be)
            with np.errstate(invalid="ignore", divide="ignore"):
                rel = np.where(den > 0.0, np.abs(gam) / den, 0.0)
            round_max = float(rel.max())
            if round_max > off:
                off = round_max
            mask = rel > tol
            if not mask.any():
                continue
            ia = top[mask]
            ib = bot[mask]
            ga = gam[mask]
            aa = al[mask]
            bb = be[mask]
            tau = (bb - aa) / (2.0 * ga)
            t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            xa = xt[:, mask]
            xc = xb[:, mask]
            x[:, ia] = c * xa - s * xc
            x[:, ib] = s * xa + c * xc
            # rotation identities for the cached norms; clamp roundoff
            norms2[ia] = np.maximum(aa - t * ga, 0.0)
            norms2[ib] = np.maximum(bb + t * ga, 0.0)
            if want_v:
                va = v[:, ia]
                vb = v[:, ib]
                v[:, ia] = c * va - s * vb
                v[:, ib] = s * va + c * vb
        if off <= tol:
            return v, sweep + 1
        norms2 = np.einsum("ij,ij->j", x, x)
    raise ConvergenceError(
        f"one-sided Jacobi did not converge in {max_sweeps} sweeps; "
        f"relative off-diagonal residual {off:.3e} exceeds {tol:.1e}",
        residual=off,
    )


def _complete_orthonormal(u: np.ndarray, fill: np.ndarray) -> None:
    """Overwrite the columns of ``u`` indexed by ``fill`` with vectors that
    extend the remaining columns to an orthonormal set (Gram-Schmidt against
    unit-vector candidates; deterministic)."""
    m = u.shape[0]
    keep = np.setdiff1d(np.arange(u.shape[1]), fill)
    basis = [u[:, j] for j in keep]
    cand = 0
    for j in fill:
        while True:
            if cand >= m:
                raise ConvergenceError("orthonormal completion ran out of candidates")
            w = np.zeros(m)
            w[cand] = 1.0
            cand += 1
            for b in basis:
                w -= (b @ w) * b
            # one re-orthogonalization pass for numerical safety
            for b in basis:
                w -= (b @ w) * b
            nw = np.sqrt((w * w).sum())
            if nw > 0.1:
                w /= nw
                break
        u[:, j] = w
        basis.append(w)


def _jacobi_svd_tall(a, tol, max_sweeps, want_uv, v_init):
    m, n = a.shape
    if v_init is not None:
        v_init = as_matrix(v_init, "v_init")
        if v_init.shape != (n, n):
            raise ValueError(f"v_init must be {n}x{n}, got {v_init.shape}")
        x = a @ v_init
        q0 = None
    elif m > n:
        # QR preconditioning: sweep the small triangular factor instead
        f = householder_qr(a)
        x = np.array(f.r, order="F")
        q0 = f.q
    else:
        x = np.array(a, order="F")
        q0 = None
    x = np.asfortranarray(x)
    pad = x.shape[1] % 2 == 1 and x.shape[1] > 1
    if pad:
        x = np.concatenate([x, np.zeros((x.shape[0], 1))], axis=1)
    vrot, _ = _jacobi_sweeps(x, tol, max_sweeps, want_v=want_uv)
    if pad:
        x = x[:, :-1]
        if want_uv:
            # the pad column never rotates, so its row/column of vrot stay e_pad
            vrot = vrot[:-1, :-1]
    sig = np.sqrt(np.einsum("ij,ij->j", x, x))
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    if not want_uv:
        return None, sig, None
    u = x[:, order].copy()
    nz = sig > 0.0
    u[:, nz] /= sig[nz]
    if (~nz).any():
        _complete_orthonormal(u, np.nonzero(~nz)[0])
    if q0 is not None:
        u = q0 @ u
    v = vrot[:, order]
    if v_init is not None:
        v = v_init @ v
    return u, sig, v


def jacobi_svd(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS,
               v_init: np.ndarray | None = None) -> SvdFactors:
    """Economy SVD by one-sided Jacobi rotations.

    Intended for small compressed matrices and desk-scale oracle use
    (dimensions up to a couple of thousand). Sweeps run until every column
    pair satisfies ``|<x_i, x_j>| <= tol * |x_i| * |x_j|``; exceeding
    ``max_sweeps`` raises :class:`ConvergenceError` naming the residual.

    ``v_init`` optionally supplies an orthonormal warm start (e.g. the right
    factor from a nearby matrix); the result is the same decomposition,
    usually reached in far fewer sweeps.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if m >= n:
        u, sig, v = _jacobi_svd_tall(a, tol, max_sweeps, True, v_init)
        return SvdFactors(u=u, sigma=sig, v=v)
    u, sig, v = _jacobi_svd_tall(a.T, tol, max_sweeps, True, v_init)
    return SvdFactors(u=v, sigma=sig, v=u)


def singular_values(a, tol: float = JACOBI_TOL,
                    max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Singular values only, via the same one-sided Jacobi sweeps but
    skipping the accumulation of the singular vector factors."""
    a = as_matrix(a, "a")
    if a.shape[0] < a.shape[1]:
        a = a.T
    _, sig, _ = _jacobi_svd_tall(a, tol, max_sweeps, False, None)
    return sig


def pseudoinverse(a) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the Jacobi SVD.

    Singular values below ``max(m, n) * sigma_max * 1e-12`` are treated as
    zero (standard numerical-rank convention).
    """
    a = as_matrix(a, "a")
    f = jacobi_svd(a)
    if f.sigma.size == 0 or f.sigma[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]))
    cutoff = max(a.shape) * f.sigma[0] * 1e-12
    inv = np.where(f.sigma > cutoff, 1.0 / np.where(f.sigma > 0, f.sigma, 1.0), 0.0)
    return (f.v * inv) @ f.u.T


def spectral_norm(a, tol: float = 1e-10, max_iter: int = 5000) -> float:
    """Largest singular value.

    Small matrices go through the Jacobi SVD; larger ones use blocked power
    iteration on the Gram operator with a deterministic start, iterated to
    relative tolerance ``tol``.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if min(m, n) <= _SPECTRAL_DIRECT_LIMIT:
        return float(singular_values(a)[0])
    if m < n:
        a = a.T
        m, n = n, m
    b = min(24, n)
    # deterministic start: disjoint-support unit blocks (already orthonormal)
    v = np.zeros((n, b))
    for j in range(b):
        v[j::b, j] = 1.0
    v /= np.sqrt(np.einsum("ij,ij->j", v, v))
    prev = 0.0
    # successive-change test with a safety factor to cover the gap between
    # per-step change and true error under geometric convergence
    stop = 0.02 * tol
    for _ in range(max_iter):
        w = a @ v
        est = float(singular_values(householder_qr(w).r)[0])
        if est == 0.0:
            return 0.0
        if abs(est - prev) <= stop * est:
            return est
        prev = est
        v = householder_qr(a.T @ w).q
    raise ConvergenceError(
        f"spectral norm power iteration did not reach tol={tol:.1e} "
        f"in {max_iter} iterations (last estimate {prev:.6e})",
        residual=prev,
    )
