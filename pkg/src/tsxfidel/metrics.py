"""Local-fidelity metrics via Monte-Carlo feature ablation.

Two scores are computed per (window, horizon, ranking direction):

* area over the perturbation curve (AOPCR): the mean prediction change from
  removing the top-1 through top-K ranked cells, where removal replaces a
  cell with a draw from its feature's training marginal;
* ablation percentage threshold (APT): the smallest fraction of cells whose
  removal moves the prediction past ``(1 + alpha) * F(x)``, scoring 1.0 when
  the threshold is never crossed.

Within one Monte-Carlo sample the ablation prefixes are nested: the draw for
a cell is shared by every depth that removes it, which reduces variance.
Sampling stops once the Gaussian margin of error falls below the configured
threshold.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Iterable

import numpy as np

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.pool import AblationPool
from tsxfidel.dataset.windows import WindowInstance
from tsxfidel.errors import KOutOfRangeError, NearZeroPredictionError
from tsxfidel.explainers.base import Direction, Ranking, rank_cells
from tsxfidel.explainers.dispatch import ExplainerSpec, compute_importance
from tsxfidel.models.base import ForecastModel
from tsxfidel.validation import check_window

_SAMPLE_BATCH = 64


def z_score(confidence: float) -> float:
    """Two-sided Gaussian quantile; exactly 1.96 at the standard 95% level."""
    if confidence == 0.95:
        return 1.96
    return NormalDist().inv_cdf((1.0 + confidence) / 2.0)


@dataclass(frozen=True)
class MCConfig:
    threshold: float = 0.0005
    confidence: float = 0.95
    min_n: int = 30
    max_n: int = 10000

    def __post_init__(self) -> None:
        if self.min_n < 2:
            raise ValueError("min_n must be at least 2")
        if self.max_n < self.min_n:
            raise ValueError("max_n must be >= min_n")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    margin_of_error: float
    n_samples: int
    converged: bool


@dataclass(frozen=True)
class AblationDraw:
    """One ablated window: the first k ranked cells replaced by pool draws."""

    x_ablated: np.ndarray
    replaced: frozenset[tuple[int, int]]
    draw_seed: int | None = None


@dataclass(frozen=True)
class SkippedWindow:
    series_id: str
    t_anchor: int
    horizon: int
    reason: str


@dataclass(frozen=True)
class FidelityScore:
    """Per-horizon estimates and their discounted average for one metric row."""

    metric: str
    direction: str
    param: float
    gamma: float
    per_horizon: tuple[MCEstimate, ...]
    total: float
    n_windows: int = 1
    skipped: tuple[SkippedWindow, ...] = ()


def mc_run(sampler: Callable[[], float], config: MCConfig = MCConfig()) -> MCEstimate:
    """Draw sequentially until the margin of error drops below the threshold.

    After each draw from ``min_n`` on, the margin is ``z * s / sqrt(n)`` with
    the sample standard deviation ``s``; sampling stops at the first n where
    it beats the threshold, or at ``max_n`` with ``converged=False``.
    """
    z = z_score(config.confidence)
    n = 0
    mean = 0.0
    m2 = 0.0
    moe = math.inf
    while n < config.max_n:
        value = float(sampler())
        n += 1
        delta = value - mean
        mean += delta / n
        m2 += delta * (value - mean)
        if n >= config.min_n:
            moe = z * math.sqrt(m2 / (n - 1)) / math.sqrt(n)
            if moe < config.threshold:
                return MCEstimate(mean=mean, margin_of_error=moe, n_samples=n, converged=True)
    return MCEstimate(mean=mean, margin_of_error=moe, n_samples=n, converged=False)


class _BatchingSampler:
    """Sequential facade over a vectorized sampler.

    Keeps ``mc_run`` strictly one-draw-at-a-time while amortizing model calls
    over batches. Pre-drawn but unconsumed samples never influence results.
    """

    def __init__(self, batch_fn: Callable[[int], np.ndarray], batch_size: int = _SAMPLE_BATCH):
        self._batch_fn = batch_fn
        self._batch_size = batch_size
        self._cache: deque[float] = deque()

    def __call__(self) -> float:
        if not self._cache:
            self._cache.extend(self._batch_fn(self._batch_size).tolist())
        return self._cache.popleft()


def ablate(
    x: np.ndarray,
    ranking: Ranking,
    k: int,
    pool: AblationPool,
    rng: np.random.Generator | int,
) -> AblationDraw:
    """Replace the top-k ranked cells with independent marginal draws."""
    x = check_window(x)
    if not 1 <= k <= ranking.n_cells:
        raise KOutOfRangeError(f"k={k} outside [1, {ranking.n_cells}]")
    draw_seed = rng if isinstance(rng, int) else None
    rng = np.random.default_rng(rng)
    cells = ranking.cells[:k]
    ablated = x.copy()
    ablated[cells[:, 0], cells[:, 1]] = pool.draw_cells(cells[:, 0], rng)
    return AblationDraw(
        x_ablated=ablated,
        replaced=frozenset((int(j), int(l)) for j, l in cells),
        draw_seed=draw_seed,
    )


def _nested_ablations(x: np.ndarray, cells: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """(n, depth, J, L) matrices; depth d replaces the first d+1 ranked cells.

    Draws are shared across depths within a sample, so prefixes are nested.
    """
    n, depth = draws.shape
    mats = np.broadcast_to(x, (n, depth) + x.shape).copy()
    for idx in range(depth):
        j, l = cells[idx]
        mats[:, idx:, j, l] = draws[:, idx][:, None]
    return mats


def aopcr_sample_values(
    model: ForecastModel,
    x: np.ndarray,
    ranking: Ranking,
    horizon: int,
    k_top: int,
    pool: AblationPool,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    """n Monte-Carlo samples of the mean top-1..top-K ablation effect.

    One sample draws replacements for the top-K cells once and averages
    ``F(x) - F(x with the first k replaced)`` over k = 1..K.
    """
    x = check_window(x, model.window_shape)
    if not 1 <= k_top <= ranking.n_cells:
        raise KOutOfRangeError(f"K={k_top} outside [1, {ranking.n_cells}]")
    fx = float(model.predict_window(x)[horizon])
    cells = ranking.cells[:k_top]
    draws = pool.draw_cells(np.broadcast_to(cells[:, 0], (n, k_top)), rng)
    mats = _nested_ablations(x, cells, draws)
    preds = model.predict_horizon(mats.reshape(n * k_top, *x.shape), horizon).reshape(n, k_top)
    return (fx - preds).mean(axis=1)


def aopcr_tau(
    model: ForecastModel,
    x: np.ndarray,
    ranking: Ranking,
    horizon: int,
    k_top: int,
    pool: AblationPool,
    rng: np.random.Generator,
    config: MCConfig = MCConfig(),
) -> MCEstimate:
    """Monte-Carlo estimate of the mean top-1..top-K ablation effect."""
    sampler = _BatchingSampler(
        lambda n: aopcr_sample_values(model, x, ranking, horizon, k_top, pool, rng, n)
    )
    return mc_run(sampler, config)


def apt_sample_values(
    model: ForecastModel,
    x: np.ndarray,
    ranking: Ranking,
    horizon: int,
    alpha: float,
    pool: AblationPool,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    """n Monte-Carlo samples of the crossing fraction at threshold 1 + alpha.

    One sample walks k = 1..J*L under a single draw stream and returns the
    smallest k/(J*L) whose ablated prediction crosses ``(1 + alpha) * F(x)``
    (below it for negative alpha, above for positive); 1.0 if never crossed.
    """
    x = check_window(x, model.window_shape)
    if alpha == 0.0:
        raise ValueError("alpha must be non-zero")
    fx = float(model.predict_window(x)[horizon])
    cells = ranking.cells
    p = ranking.n_cells
    cutoff = (1.0 + alpha) * fx
    draws = pool.draw_cells(np.broadcast_to(cells[:, 0], (n, p)), rng)
    mats = _nested_ablations(x, cells, draws)
    preds = model.predict_horizon(mats.reshape(n * p, *x.shape), horizon).reshape(n, p)
    crossed = preds < cutoff if alpha < 0 else preds > cutoff
    first = np.argmax(crossed, axis=1)
    values = (first + 1.0) / p
    values[~crossed.any(axis=1)] = 1.0
    return values


def apt_tau(
    model: ForecastModel,
    x: np.ndarray,
    ranking: Ranking,
    horizon: int,
    alpha: float,
    pool: AblationPool,
    rng: np.random.Generator,
    config: MCConfig = MCConfig(),
    near_zero_eps: float = 1e-6,
) -> MCEstimate:
    """Monte-Carlo estimate of the crossing fraction at threshold 1 + alpha.

    Negative alpha detects a significant drop, positive alpha a significant
    rise. Raises NearZeroPredictionError when |F(x)| is too small for a
    relative threshold to mean anything.
    """
    fx = float(model.predict_window(check_window(x, model.window_shape))[horizon])
    if abs(fx) < near_zero_eps:
        raise NearZeroPredictionError(
            f"|F(x)|={abs(fx):.3g} below {near_zero_eps}; relative threshold undefined"
        )
    sampler = _BatchingSampler(
        lambda n: apt_sample_values(model, x, ranking, horizon, alpha, pool, rng, n)
    )
    return mc_run(sampler, config)


def discounted_total(means: Iterable[float], gamma: float = 1.0) -> float:
    """Discount-weighted average over horizons: (1/t0) * sum(gamma^tau * mean)."""
    means = np.asarray(list(means), dtype=np.float64)
    if means.size == 0:
        raise ValueError("no per-horizon values")
    weights = np.float64(gamma) ** np.arange(means.size)
    return float((weights * means).sum() / means.size)


def aopcr_total(estimates: Iterable[MCEstimate], gamma: float = 1.0) -> float:
    return discounted_total((e.mean for e in estimates), gamma)


def apt_total(estimates: Iterable[MCEstimate], gamma: float = 1.0) -> float:
    return discounted_total((e.mean for e in estimates), gamma)


@dataclass(frozen=True)
class EvalConfig:
    """Metric parameters for a dataset sweep."""

    metrics: tuple[str, ...] = ("aopcr", "apt")
    top_k: int = 10
    alpha: float = 0.10  # magnitude; the sign is resolved per ranking direction
    gamma: float = 1.0
    mc: MCConfig = MCConfig()
    near_zero_eps: float = 1e-6

    def __post_init__(self) -> None:
        unknown = set(self.metrics) - {"aopcr", "apt"}
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        if self.alpha <= 0:
            raise ValueError("alpha is a positive magnitude; its sign follows the direction")


@dataclass
class WindowEvaluation:
    """All metric estimates for one window, keyed (metric, direction, horizon)."""

    series_id: str
    t_anchor: int
    estimates: dict[tuple[str, str, int], MCEstimate]
    skipped: list[SkippedWindow]


def evaluate_window(
    model: ForecastModel,
    explainer: ExplainerSpec,
    window: WindowInstance,
    pool: AblationPool,
    global_means: np.ndarray | None,
    config: EvalConfig,
    master_seed: int,
) -> WindowEvaluation:
    """Explain one window at every horizon and estimate all configured metrics."""
    estimates: dict[tuple[str, str, int], MCEstimate] = {}
    skipped: list[SkippedWindow] = []
    k_top = min(config.top_k, window.x.size)
    for horizon in range(model.n_horizons):
        importance = compute_importance(explainer, model, window, horizon, pool, global_means, master_seed)
        for direction in Direction:
            ranking = rank_cells(importance, direction)
            if "aopcr" in config.metrics:
                rng = keyed_rng(
                    master_seed, window.series_id, window.t_anchor, horizon,
                    explainer.name, "aopcr", direction.value,
                )
                estimates[("aopcr", direction.value, horizon)] = aopcr_tau(
                    model, window.x, ranking, horizon, k_top, pool, rng, config.mc
                )
            if "apt" in config.metrics:
                alpha = -config.alpha if direction is Direction.MOST_POSITIVE else config.alpha
                rng = keyed_rng(
                    master_seed, window.series_id, window.t_anchor, horizon,
                    explainer.name, "apt", direction.value,
                )
                try:
                    estimates[("apt", direction.value, horizon)] = apt_tau(
                        model, window.x, ranking, horizon, alpha, pool, rng,
                        config.mc, config.near_zero_eps,
                    )
                except NearZeroPredictionError:
                    skipped.append(
                        SkippedWindow(window.series_id, window.t_anchor, horizon, "near_zero_prediction")
                    )
    return WindowEvaluation(window.series_id, window.t_anchor, estimates, skipped)


def _window_task(args) -> WindowEvaluation:
    model, explainer, window, pool, global_means, config, master_seed = args
    return evaluate_window(model, explainer, window, pool, global_means, config, master_seed)


def evaluate_dataset(
    model: ForecastModel,
    explainer: ExplainerSpec,
    windows: list[WindowInstance],
    pool: AblationPool,
    global_means: dict[str, np.ndarray] | None,
    config: EvalConfig = EvalConfig(),
    master_seed: int = 0,
    jobs: int = 1,
) -> list[FidelityScore]:
    """Evaluate a window population and aggregate to dataset-level scores.

    Window evaluations are independent (keyed streams), so any worker count
    yields identical results. Aggregation per horizon averages window means;
    the dataset margin of error is the z-scaled standard error over window
    means, which covers both Monte-Carlo noise and window spread. Totals then
    discount-average the per-horizon means. One bad window never aborts the
    sweep; skips are reported per score row.
    """
    if not windows:
        raise ValueError("no windows to evaluate")
    ordered = sorted(windows, key=lambda w: (w.series_id, w.t_anchor))
    tasks = [
        (
            model,
            explainer,
            window,
            pool,
            None if global_means is None else global_means.get(window.series_id),
            config,
            master_seed,
        )
        for window in ordered
    ]
    if jobs <= 1:
        results = [_window_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_window_task, tasks, chunksize=1))

    z = z_score(config.mc.confidence)
    t0 = model.n_horizons
    scores: list[FidelityScore] = []
    for metric in config.metrics:
        for direction in Direction:
            per_horizon: list[MCEstimate] = []
            skipped: list[SkippedWindow] = []
            for horizon in range(t0):
                key = (metric, direction.value, horizon)
                window_estimates = [r.estimates[key] for r in results if key in r.estimates]
                if metric == "apt":
                    skipped.extend(
                        s for r in results for s in r.skipped if s.horizon == horizon
                    )
                per_horizon.append(_aggregate(window_estimates, z))
            param = float(config.top_k) if metric == "aopcr" else (
                -config.alpha if direction is Direction.MOST_POSITIVE else config.alpha
            )
            scores.append(
                FidelityScore(
                    metric=metric,
                    direction=direction.value,
                    param=param,
                    gamma=config.gamma,
                    per_horizon=tuple(per_horizon),
                    total=discounted_total((e.mean for e in per_horizon), config.gamma),
                    n_windows=len(results),
                    skipped=tuple(dict.fromkeys(skipped)),
                )
            )
    return scores


def _aggregate(estimates: list[MCEstimate], z: float) -> MCEstimate:
    if not estimates:
        return MCEstimate(mean=math.nan, margin_of_error=math.nan, n_samples=0, converged=False)
    means = np.asarray([e.mean for e in estimates])
    n_total = int(sum(e.n_samples for e in estimates))
    if means.size == 1:
        only = estimates[0]
        return MCEstimate(float(means[0]), only.margin_of_error, n_total, only.converged)
    moe = float(z * means.std(ddof=1) / math.sqrt(means.size))
    return MCEstimate(
        mean=float(means.mean()),
        margin_of_error=moe,
        n_samples=n_total,
        converged=all(e.converged for e in estimates),
    )
