"""Experiment harness: wires the generators, decompositions, and solvers
into three reproducible experiments and emits CSV reports.

* ``sv-compare``   - singular-value estimates per method vs the SVD oracle
* ``lowrank-error``- low-rank approximation error over a sample-size sweep
* ``rpca-recovery``- low-rank + sparse recovery statistics per solver

One experiment uses one input matrix (from a seeded generator); the
randomized methods are re-run ``trials`` times with sketch seeds
``base_seed + trial_index`` and reported as mean/std. The SVD oracle and
other deterministic methods run once. Reports are byte-identical across
re-runs with the same config.

Flop columns are analytic estimates (hardware-independent); wall-clock is
deliberately not reported.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dense import jacobi_svd, qrcp, singular_values
from .matio import read_matrix, write_matrix
from .rpca import AlmConfig, alm_corutv, inexact_alm, write_telemetry_csv
from .sketch import (
    VARIANT_EXACT,
    PassCounter,
    SketchConfig,
    corutv,
    flop_estimate,
    sor_svd,
    svd_flop_estimate,
    tsr_svd,
)
from .errors import CorutvError
from .synth import (
    NoisyLowRankSpec,
    RpcaInstanceSpec,
    gen_noisy_lowrank,
    gen_rpca_instance,
)

EXPERIMENTS = ("sv-compare", "lowrank-error", "rpca-recovery")
METHODS = ("svd", "qrcp", "utv-approx", "corutv", "tsr-svd", "sor-svd")
SOLVERS = ("inexact-alm", "alm-corutv")

_RANDOMIZED = {"corutv", "tsr-svd", "sor-svd", "utv-approx"}

SV_COMPARE_HEADER = "index,method,value,trial_mean,trial_std"
LOWRANK_HEADER = "ell,method,ek_mean,ek_std,svd_optimal"
RPCA_HEADER = "n,solver,rank_l,nnz_s,iters,zeta,flops_est"


def _max_workers() -> int:
    raw = os.environ.get("CORUTV_THREADS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ValueError(f"CORUTV_THREADS must be an integer, got {raw!r}")
    return max(1, w)


def _run_trials(fn, trials: int):
    """Evaluate ``fn(trial_index)`` for each trial, optionally in parallel.

    Results are assembled in trial order, so the report is independent of
    scheduling.
    """
    workers = min(_max_workers(), trials)
    if workers == 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration shared by the three experiments."""

    experiment: str
    n: int = 400
    k: int = 20
    ell: int | None = None
    ell_sweep: tuple[int, ...] = ()
    q_power: int = 0
    trials: int = 20
    base_seed: int = 1
    matrix_seed: int = 0
    methods: tuple[str, ...] = ("svd", "corutv", "tsr-svd", "sor-svd", "qrcp")
    noise_coeff: float = 0.1
    sizes: tuple[int, ...] = ()
    rank_fraction: float = 0.05
    sparsity_fraction: float = 0.05
    amplitude: float = 80.0
    solvers: tuple[str, ...] = SOLVERS
    out_path: str | None = None
    telemetry_prefix: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}, expected one of {METHODS}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}, expected one of {SOLVERS}")
        for ell in self.ell_sweep:
            if not self.k <= ell <= self.n:
                raise ValueError(
                    f"sweep value ell={ell} outside [k, n] = [{self.k}, {self.n}]"
                )

    def resolved_ell(self) -> int:
        # sample size defaults to twice the target rank
        return self.ell if self.ell is not None else 2 * self.k

    def resolved_sweep(self) -> tuple[int, ...]:
        if self.ell_sweep:
            return self.ell_sweep
        k = self.k
        return (k, k + k // 2, 2 * k, 3 * k)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _method_sigma(method: str, a, ell: int, q_power: int, seed: int) -> np.ndarray:
    """Singular-value estimates of one method run (first ``ell`` values)."""
    n = min(a.shape)
    if method == "svd":
        return singular_values(a)[:ell]
    if method == "qrcp":
        return np.abs(np.diag(qrcp(a).r))[:ell]
    if method == "utv-approx":
        cfg = SketchConfig(ell=n, q_power=q_power, seed=seed, variant=VARIANT_EXACT)
        return corutv(a, cfg).diag_abs()[:ell]
    cfg = SketchConfig(ell=ell, q_power=q_power, seed=seed)
    if method == "corutv":
        return corutv(a, cfg).diag_abs()
    if method == "tsr-svd":
        return tsr_svd(a, cfg).sigma
    if method == "sor-svd":
        return sor_svd(a, cfg).sigma
    raise ValueError(f"unknown method {method!r}")


def run_sv_compare(cfg: ExperimentConfig):
    """Per-index singular-value estimates per method, averaged over trials
    for the randomized methods. Returns the report rows."""
    spec = NoisyLowRankSpec(n=cfg.n, k=cfg.k, seed=cfg.matrix_seed,
                            noise_coeff=cfg.noise_coeff)
    a, _ = gen_noisy_lowrank(spec)
    ell = cfg.resolved_ell()
    rows = []
    for method in cfg.methods:
        if method in _RANDOMIZED:
            ests = _run_trials(
                lambda t, m=method: _method_sigma(m, a, ell, cfg.q_power,
                                                  cfg.base_seed + t),
                cfg.trials,
            )
            stack = np.vstack(ests)
            mean = stack.mean(axis=0)
            std = stack.std(axis=0)
        else:
            est = _method_sigma(method, a, ell, cfg.q_power, cfg.base_seed)
            mean = est
            std = np.zeros_like(est)
        for i in range(len(mean)):
            rows.append((i + 1, method, float(mean[i]), float(mean[i]), float(std[i])))
    if cfg.out_path:
        write_csv(cfg.out_path, SV_COMPARE_HEADER, rows)
    return rows


def _method_lowrank_error(method: str, a, sig: np.ndarray, ell: int,
                          q_power: int, seed: int) -> float:
    """Frobenius error of one method's rank-``ell`` approximation."""
    if method == "svd":
        return float(np.sqrt((sig[ell:] ** 2).sum()))
    if method == "qrcp":
        f = qrcp(a)
        resid = a[:, f.perm] - f.q[:, :ell] @ f.r[:ell, :]
        return float(np.sqrt((resid * resid).sum()))
    cfg = SketchConfig(ell=ell, q_power=q_power, seed=seed)
    if method == "utv-approx":
        cfg = SketchConfig(ell=min(a.shape), q_power=q_power, seed=seed)
        f = corutv(a, cfg)
        approx = f.u[:, :ell] @ (f.t[:ell, :] @ f.v.T)
    elif method == "corutv":
        approx = corutv(a, cfg).lowrank()
    elif method == "tsr-svd":
        f = tsr_svd(a, cfg)
        approx = (f.u * f.sigma) @ f.v.T
    elif method == "sor-svd":
        f = sor_svd(a, cfg)
        approx = (f.u * f.sigma) @ f.v.T
    else:
        raise ValueError(f"unknown method {method!r}")
    resid = a - approx
    return float(np.sqrt((resid * resid).sum()))


def run_lowrank_error(cfg: ExperimentConfig):
    """Mean low-rank error per (sample size, method) over trials, with the
    optimal error alongside. Returns the report rows."""
    spec = NoisyLowRankSpec(n=cfg.n, k=cfg.k, seed=cfg.matrix_seed,
                            noise_coeff=cfg.noise_coeff)
    a, _ = gen_noisy_lowrank(spec)
    sig = singular_values(a)
    rows = []
    for ell in cfg.resolved_sweep():
        optimal = float(np.sqrt((sig[ell:] ** 2).sum()))
        for method in cfg.methods:
            if method in _RANDOMIZED:
                errs = _run_trials(
                    lambda t, m=method: _method_lowrank_error(
                        m, a, sig, ell, cfg.q_power, cfg.base_seed + t),
                    cfg.trials,
                )
                errs = np.array(errs)
                mean, std = float(errs.mean()), float(errs.std())
            else:
                mean = _method_lowrank_error(method, a, sig, ell, cfg.q_power,
                                             cfg.base_seed)
                std = 0.0
            rows.append((ell, method, mean, std, optimal))
    if cfg.out_path:
        write_csv(cfg.out_path, LOWRANK_HEADER, rows)
    return rows


def solver_flops(solver: str, n: int, q_power: int, sol) -> int:
    """Analytic flop estimate for a full solve: per-iteration thresholding
    plus the elementwise updates (8 n^2 per iteration)."""
    total = 0
    for i, r in enumerate(sol.rank_history):
        if solver == "alm-corutv":
            ell = max(1, sol.ell_history[i])
            total += flop_estimate(n, n, ell, q_power, VARIANT_EXACT)
            total += 2 * r * ell * n  # fold the kept rows of t into v
        else:
            total += svd_flop_estimate(n, n)
        total += 2 * n * n * r       # rebuild the thresholded matrix
        total += 8 * n * n           # shrink, residual, dual update
    return total


def run_rpca_recovery(cfg: ExperimentConfig):
    """Recovery statistics per (size, solver). Returns the report rows."""
    sizes = cfg.sizes if cfg.sizes else (cfg.n,)
    rows = []
    for n in sizes:
        k = max(1, round(cfg.rank_fraction * n))
        s = round(cfg.sparsity_fraction * n * n)
        spec = RpcaInstanceSpec(n=n, k=k, s=s, amplitude=cfg.amplitude,
                                seed=cfg.matrix_seed)
        m_mat, _, _ = gen_rpca_instance(spec)
        ell = cfg.ell if cfg.ell is not None else 2 * k
        for solver in cfg.solvers:
            alm_cfg = AlmConfig(ell=ell, q_power=max(cfg.q_power, 1),
                                seed=cfg.base_seed)
            try:
                sol = (alm_corutv if solver == "alm-corutv" else inexact_alm)(
                    m_mat, alm_cfg)
                flops = solver_flops(solver, n, alm_cfg.q_power, sol)
                rows.append((n, solver, sol.rank_of_l, sol.nnz_of_s,
                             sol.iterations, float(sol.residuals[-1]), flops))
                if cfg.telemetry_prefix:
                    write_telemetry_csv(
                        sol, f"{cfg.telemetry_prefix}.{n}.{solver}.csv")
            except CorutvError:
                # non-convergence is recorded in-row, not fatal to the report
                rows.append((n, solver, -1, -1, -1, float("nan"), -1))
    if cfg.out_path:
        write_csv(cfg.out_path, RPCA_HEADER, rows)
    return rows


def decompose_file(in_path, method: str, out_prefix, fmt: str = "csv",
                   ell: int | None = None, q_power: int = 0, seed: int = 0,
                   variant: str = VARIANT_EXACT):
    """Factor a matrix file and write u/t/v factor files plus a metadata
    sidecar. All methods write factors satisfying ``u @ t @ v.T ~= input``
    (up to the method's approximation error)."""
    a = read_matrix(in_path)
    m, n = a.shape
    counter = PassCounter()
    meta = {"method": method, "seed": seed, "q": q_power}
    if method == "svd":
        f = jacobi_svd(a)
        u, t, v = f.u, np.diag(f.sigma), f.v
        meta.update(ell=int(min(m, n)), passes=None, flops=svd_flop_estimate(m, n))
    elif method == "qrcp":
        f = qrcp(a)
        u, t = f.q, f.r
        v = np.eye(n)[:, f.perm]
        meta.update(ell=int(min(m, n)), passes=None, flops=None)
    elif method in ("corutv", "utv-approx"):
        use_ell = min(m, n) if method == "utv-approx" else ell
        if use_ell is None:
            raise ValueError(f"method {method} requires ell")
        cfg = SketchConfig(ell=use_ell, q_power=q_power, seed=seed, variant=variant)
        f = corutv(a, cfg, counter)
        u, t, v = f.u, f.t, f.v
        meta.update(ell=use_ell, passes=counter.passes,
                    flops=flop_estimate(m, n, use_ell, q_power, variant))
    elif method in ("tsr-svd", "sor-svd"):
        if ell is None:
            raise ValueError(f"method {method} requires ell")
        cfg = SketchConfig(ell=ell, q_power=q_power, seed=seed, variant=variant)
        f = (tsr_svd if method == "tsr-svd" else sor_svd)(a, cfg, counter)
        u, t, v = f.u, np.diag(f.sigma), f.v
        flops = (flop_estimate(m, n, ell, q_power, variant)
                 if method == "sor-svd" else None)
        meta.update(ell=ell, passes=counter.passes, flops=flops)
    else:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    ext = fmt
    paths = {part: f"{out_prefix}.{part}.{ext}" for part in ("u", "t", "v")}
    write_matrix(paths["u"], u, fmt)
    write_matrix(paths["t"], t, fmt)
    write_matrix(paths["v"], v, fmt)
    with open(f"{out_prefix}.meta.json", "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths, meta
