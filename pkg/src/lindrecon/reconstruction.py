"""Fitting a Lindbladian to measured outcome distributions.

The fit minimizes

    C = sqrt(mean over cells of d(P_model, P_measured)**2) + penalty(G)

with ``d`` the Kullback-Leibler divergence, over the 12 unconstrained
parameters of :class:`~lindrecon.core.LindbladParams`.  The penalty
suppresses generators with eigenvalues beyond the Nyquist rate of the time
grid.  The reported infidelity uses the same expression with the
root-mean-square pre-metric and no penalty, which is the RMS vertical gap
between model curves and data points.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.stats import spearmanr

from .core import (
    _DISSIPATOR_TENSOR,
    _FIDUCIAL_AFFINE,
    LindbladParams,
    _flat_to_factor,
    _matrix_powers,
    _uniform_step,
    cross_matrix,
    grid_propagators,
    params_to_generator,
)
from .synthetic import (
    ExperimentDesign,
    child_seed,
    generate_dataset,
    model_probabilities,
    random_lindbladian,
)

logger = logging.getLogger(__name__)

METRICS = ("kl", "c2")


def _as_pair(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError("expected a probability pair")
    if abs(x.sum() - 1.0) > 1e-9 or np.any(x < -1e-12):
        raise ValueError(f"not a probability distribution: {x}")
    return x


def _clamp_pair(x, eps):
    x = np.clip(x, eps, 1.0 - eps)
    return x / x.sum()


def kl_pre_metric(x, y, eps):
    """``sum_j x_j log(x_j / y_j)`` after clamping both pairs to ``[eps, 1-eps]``."""
    if not 0 <= eps < 0.5:
        raise ValueError("clamp must lie in [0, 0.5)")
    x = _clamp_pair(_as_pair(x), eps)
    y = _clamp_pair(_as_pair(y), eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > 0, x * np.log(x / y), 0.0)
    return max(0.0, float(terms.sum()))


def c2_pre_metric(x, y):
    """Root-mean-square difference ``sqrt(mean_j (x_j - y_j)**2)``."""
    x = _as_pair(x)
    y = _as_pair(y)
    d = np.abs(x - y)
    scale = d.max()
    if scale == 0:
        return 0.0
    # Scaling keeps tiny nonzero gaps from underflowing to zero when squared.
    return float(scale * np.sqrt(np.mean((d / scale) ** 2)))


@dataclass(frozen=True)
class CostConfig:
    """Cost settings.  ``clamp=None`` means ``1/(2M)`` for the dataset's M."""

    nyquist_rate: float
    penalty_weight: float = 10.0
    clamp: float | None = None
    reverse_kl: bool = False

    def __post_init__(self):
        if self.penalty_weight < 0:
            raise ValueError("penalty weight must be non-negative")
        if self.clamp is not None and not 0 < self.clamp < 0.5:
            raise ValueError("clamp must lie in (0, 0.5)")
        if not self.nyquist_rate > 0:
            raise ValueError("Nyquist rate must be positive")

    @classmethod
    def for_dataset(cls, data, **kwargs):
        return cls(nyquist_rate=data.design.nyquist_rate, **kwargs)

    def clamp_for(self, shots):
        return self.clamp if self.clamp is not None else 1.0 / (2 * shots)


def nyquist_penalty(G, cfg):
    """``lambda * sum_i max(0, |mu_i| - w_N)**2`` over eigenvalues ``mu_i`` of ``G``."""
    if cfg.penalty_weight == 0 or not np.isfinite(cfg.nyquist_rate):
        return 0.0
    G = np.asarray(G, dtype=float)
    # Spectral radius never exceeds the Frobenius norm.
    if np.sqrt(np.sum(G * G)) <= cfg.nyquist_rate:
        return 0.0
    excess = np.abs(np.linalg.eigvals(G)) - cfg.nyquist_rate
    return float(cfg.penalty_weight * np.sum(np.maximum(excess, 0.0) ** 2))


def _binary_kl(x, y):
    return x * np.log(x / y) + (1.0 - x) * np.log((1.0 - x) / (1.0 - y))


def _distances(p_model, p_data, metric, eps, reverse=False):
    if metric == "c2":
        # Both outcomes differ by the same amount, so the J=2 RMS is |dx|.
        return np.abs(p_model - p_data)
    if metric != "kl":
        raise ValueError(f"unknown metric {metric!r}")
    x = np.clip(p_model, eps, 1.0 - eps)
    y = np.clip(p_data, eps, 1.0 - eps)
    if reverse:
        x, y = y, x
    return np.maximum(_binary_kl(x, y), 0.0)


def cost(params, data, cfg, metric="kl"):
    """Fit cost of ``params`` against ``data``; penalty added outside the root."""
    G = params_to_generator(params)
    p_model = model_probabilities(G, data.design.times)
    d = _distances(
        p_model, data.probabilities, metric, cfg.clamp_for(data.design.shots), cfg.reverse_kl
    )
    return float(np.sqrt(np.mean(d**2)) + nyquist_penalty(G, cfg))


def infidelity(params, data):
    """RMS difference between modelled and measured P(+1) over all cells."""
    p_model = model_probabilities(params_to_generator(params), data.design.times)
    return float(np.sqrt(np.mean((p_model - data.probabilities) ** 2)))


def reconstruction_error(G_true, G_est):
    """Frobenius distance between two generators."""
    d = np.asarray(G_true, dtype=float) - np.asarray(G_est, dtype=float)
    return float(np.sqrt(np.trace(d.T @ d)))


def stopping_threshold(shots):
    """Projection-noise bound ``0.5 / sqrt(M)`` on the RMS infidelity."""
    return 0.5 / np.sqrt(shots)


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start Nelder-Mead settings.

    ``stop_threshold=None`` means ``0.5/sqrt(M)``.  After ``min_restarts``
    starts, restarting stops early when the best fit is below the threshold
    or when a second start has reproduced the best cost to within
    ``agreement`` (relative).
    """

    restarts: int = 8
    max_iters: int = 4000
    seed: int = 0
    tolerance: float = 1e-9
    stop_threshold: float | None = None
    min_restarts: int = 1
    polish_rounds: int = 3
    xatol: float = 1e-5
    agreement: float = 1e-4

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if self.min_restarts < 1:
            raise ValueError("min_restarts must be positive")


@dataclass(frozen=True)
class ReconstructionResult:
    params: LindbladParams
    generator: np.ndarray
    infidelity: float
    cost: float
    cost_trace: tuple = field(repr=False)
    restarts_used: int
    converged: bool
    evaluations: int = 0


class _Objective:
    """Fast flat-vector cost used inside the optimizer."""

    def __init__(self, data, cfg, metric="kl"):
        times = np.asarray(data.design.times)
        self.times = times
        self.step = _uniform_step(times) if times.size > 1 else None
        # (n, b, k) ordering matches the propagated fiducial block.
        self.p_data = data.probabilities.transpose(2, 0, 1)
        self.eps = cfg.clamp_for(data.design.shots)
        self.cfg = cfg
        self.metric = metric
        self.tensor = _DISSIPATOR_TENSOR.reshape(16, 9)
        self.calls = 0
        self.best = np.inf

    def generator(self, x):
        V = _flat_to_factor(x[3:])
        K = V.conj().T @ V
        G = (self.tensor @ K.ravel()).real.reshape(4, 4)
        G[1:, 1:] += cross_matrix(x[:3])
        return G

    def probabilities(self, G):
        if self.step is not None:
            props = _matrix_powers(expm(G * self.step), self.times.size)
            if self.times[0] != 0:
                props = props @ expm(G * self.times[0])
        else:
            props = grid_propagators(G, self.times)
        r = (props[:, 1:, :] @ _FIDUCIAL_AFFINE)
        return np.clip(0.5 * (1.0 + r), 0.0, 1.0)

    def __call__(self, x):
        self.calls += 1
        G = self.generator(x)
        if not np.all(np.isfinite(G)):
            return 1e10
        p_model = self.probabilities(G)
        d = _distances(p_model, self.p_data, self.metric, self.eps, self.cfg.reverse_kl)
        value = float(np.sqrt(np.mean(d * d)) + nyquist_penalty(G, self.cfg))
        if not np.isfinite(value):
            value = 1e10
        if value < self.best:
            self.best = value
        return value


def _parameter_scales(design):
    span = design.times[-1] - design.times[0] if len(design.times) > 1 else 1.0
    span = span if span > 0 else 1.0
    rate = min(1.0 / span, 0.1 * design.nyquist_rate)
    rotation = min(2 * np.pi / span, 0.2 * design.nyquist_rate)
    return rate, rotation


def _initial_simplex(x0, rate_scale, rotation_scale):
    steps = np.concatenate(
        [np.full(3, 0.5 * rotation_scale), np.full(9, 0.5 * np.sqrt(rate_scale))]
    )
    simplex = np.tile(x0, (13, 1))
    simplex[1:] += np.diag(steps)
    return simplex


def _nelder_mead(objective, x0, scales, max_iters, tolerance, xatol, trace):
    rate_scale, rotation_scale = scales

    def callback(xk):
        trace.append(objective.best)

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "initial_simplex": _initial_simplex(x0, rate_scale, rotation_scale),
            "maxiter": max_iters,
            "maxfev": 3 * max_iters,
            "xatol": xatol,
            "fatol": tolerance,
            "adaptive": True,
        },
    )
    return res.x, float(res.fun)


def reconstruct(data, cfg=None, opt=None, metric="kl"):
    """Fit a Lindbladian to ``data`` by multi-start Nelder-Mead.

    Each start draws random parameters with rates of order one over the
    measured time span, runs Nelder-Mead, then re-runs it from the result
    with a fresh simplex until the cost stops improving.  The lowest-cost
    fit over all starts is returned.
    """
    cfg = cfg if cfg is not None else CostConfig.for_dataset(data)
    opt = opt if opt is not None else OptimizerConfig()
    shots = data.design.shots
    threshold = opt.stop_threshold if opt.stop_threshold is not None else stopping_threshold(shots)
    scales = _parameter_scales(data.design)
    objective = _Objective(data, cfg, metric)

    best_x, best_cost = None, np.inf
    traces = []
    used = 0
    for start in range(opt.restarts):
        used += 1
        x = random_lindbladian(
            child_seed(opt.seed, start), scales[0], scales[1], data.design.nyquist_rate
        ).to_flat()
        objective.best = np.inf
        trace = []
        fx = np.inf
        for _ in range(1 + opt.polish_rounds):
            x, new = _nelder_mead(
                objective, x, scales, opt.max_iters, opt.tolerance, opt.xatol, trace
            )
            improved = fx - new
            fx = new
            if improved <= max(opt.tolerance, 1e-6 * abs(fx)):
                break
        traces.append(tuple(trace))
        agrees = abs(fx - best_cost) <= opt.agreement * abs(best_cost)
        if fx < best_cost:
            best_x, best_cost = x, fx
        fit = infidelity(LindbladParams.from_flat(best_x), data)
        logger.debug("start %d: cost %.6g, best infidelity %.6g", start, fx, fit)
        if used >= opt.min_restarts and (fit <= threshold or agrees):
            break

    params = LindbladParams.from_flat(best_x)
    fit = infidelity(params, data)
    return ReconstructionResult(
        params=params,
        generator=params_to_generator(params),
        infidelity=fit,
        cost=best_cost,
        cost_trace=tuple(traces),
        restarts_used=used,
        converged=bool(fit <= threshold),
        evaluations=objective.calls,
    )


@dataclass(frozen=True)
class BenchmarkRow:
    shots: int
    mean_error: float
    p16: float
    p84: float
    mean_infidelity: float

    @property
    def bound(self):
        return stopping_threshold(self.shots)


@dataclass(frozen=True)
class BenchmarkSettings:
    """Process distribution and time grid for :func:`benchmark`."""

    start: float = 0.0
    stop: float = 10.0
    count: int = 30
    rate_scale: float = 0.1
    rotation_scale: float = 1.0
    penalty_weight: float = 10.0


def _benchmark_task(args):
    seed, m_index, proc, shots, settings, opt = args
    design = ExperimentDesign.uniform(settings.start, settings.stop, settings.count, shots)
    truth = random_lindbladian(
        child_seed(seed, 0, proc),
        settings.rate_scale,
        settings.rotation_scale,
        design.nyquist_rate,
    )
    data = generate_dataset(truth, design, child_seed(seed, 1, m_index, proc))
    cfg = CostConfig.for_dataset(data, penalty_weight=settings.penalty_weight)
    run_opt = OptimizerConfig(
        restarts=opt.restarts,
        max_iters=opt.max_iters,
        seed=int(child_seed(seed, 2, m_index, proc).generate_state(1)[0]),
        tolerance=opt.tolerance,
        stop_threshold=opt.stop_threshold,
        min_restarts=opt.min_restarts,
        polish_rounds=opt.polish_rounds,
        xatol=opt.xatol,
        agreement=opt.agreement,
    )
    result = reconstruct(data, cfg, run_opt)
    err = reconstruction_error(params_to_generator(truth), result.generator)
    return err, result.infidelity


def benchmark_samples(shot_list, n, seed, settings=None, opt=None, workers=1):
    """Per-process ``(error, infidelity)`` arrays for each M, shape ``(len(M), n, 2)``.

    The same ``n`` true processes are used for every M.  Results do not
    depend on ``workers``.
    """
    if n < 10:
        raise ValueError("benchmark needs at least 10 processes per point")
    settings = settings or BenchmarkSettings()
    opt = opt or OptimizerConfig()
    tasks = [
        (seed, m_index, proc, int(shots), settings, opt)
        for m_index, shots in enumerate(shot_list)
        for proc in range(n)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_benchmark_task, tasks, chunksize=4))
    else:
        out = [_benchmark_task(t) for t in tasks]
    return np.array(out).reshape(len(shot_list), n, 2)


def summarize(shot_list, samples):
    rows = []
    for shots, block in zip(shot_list, samples):
        err, fid = block[:, 0], block[:, 1]
        p16, p84 = np.percentile(err, [16, 84])
        rows.append(BenchmarkRow(int(shots), float(err.mean()), float(p16), float(p84), float(fid.mean())))
    return rows


def benchmark(shot_list, n, seed, settings=None, opt=None, workers=1):
    """Mean reconstruction error, its 16-84 percentile band, and mean infidelity per M."""
    samples = benchmark_samples(shot_list, n, seed, settings, opt, workers)
    return summarize(shot_list, samples)


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def error_infidelity_correlation(samples):
    """Spearman correlation of infidelity and error, pooled over all M."""
    flat = samples.reshape(-1, 2)
    return float(spearmanr(flat[:, 1], flat[:, 0]).statistic)
