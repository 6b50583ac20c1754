"""Shapley-value attributions over window cells.

Both explainers treat each of the P = J*L cells as a player and share one
value function: absent cells are filled from a fixed set of replacement
windows drawn from the training pool, and the coalition value is the mean
prediction over those fills. Because the background draws depend only on the
seed, ``explain_kernel_shap`` with full coalition enumeration recovers
``exact_shapley`` on the same empirical game.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from tsxfidel.dataset.pool import AblationPool
from tsxfidel.errors import SingularSystemError, TooManyPlayersError
from tsxfidel.explainers.base import ImportanceMatrix
from tsxfidel.models.base import ForecastModel
from tsxfidel.validation import check_window

EXACT_PLAYER_LIMIT = 12
_VALUE_CHUNK_ROWS = 16384


def _draw_background(pool: AblationPool, n_background: int, window_len: int, rng: np.random.Generator) -> np.ndarray:
    """Replacement windows (n_background, J, L). Must be the first use of rng
    so kernel and exact explainers sample identical backgrounds per seed."""
    if n_background < 1:
        raise ValueError("n_background must be >= 1")
    return pool.draw_windows(n_background, window_len, rng)


def _coalition_values(
    model: ForecastModel,
    x: np.ndarray,
    horizon: int,
    background: np.ndarray,
    z: np.ndarray,
) -> np.ndarray:
    """Mean prediction per coalition row of ``z`` ((C, P) booleans)."""
    n_bg = background.shape[0]
    j_count, l_count = x.shape
    x_flat = x.ravel()
    bg_flat = background.reshape(n_bg, -1)
    values = np.empty(z.shape[0], dtype=np.float64)

    chunk = max(1, _VALUE_CHUNK_ROWS // n_bg)
    for start in range(0, z.shape[0], chunk):
        zc = z[start : start + chunk]
        filled = np.where(zc[:, None, :], x_flat[None, None, :], bg_flat[None, :, :])
        rows = filled.reshape(-1, j_count, l_count)
        preds = model.predict_horizon(rows, horizon).reshape(zc.shape[0], n_bg)
        values[start : start + chunk] = preds.mean(axis=1)
    return values


def _popcount(masks: np.ndarray, n_bits: int) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    for p in range(n_bits):
        counts += (masks >> p) & 1
    return counts


def exact_shapley(
    model: ForecastModel,
    x: np.ndarray,
    horizon: int,
    pool: AblationPool,
    n_background: int = 16,
    seed: int | np.random.Generator = 0,
) -> ImportanceMatrix:
    """Classical Shapley values over all 2^P coalitions.

    Serves as the oracle for ``explain_kernel_shap``; limited to P <= 12
    because cost is 2^P model batches of n_background rows.
    """
    x = check_window(x, model.window_shape)
    j_count, l_count = x.shape
    p = j_count * l_count
    if p > EXACT_PLAYER_LIMIT:
        raise TooManyPlayersError(f"exact enumeration limited to {EXACT_PLAYER_LIMIT} cells, got {p}")

    rng = np.random.default_rng(seed)
    background = _draw_background(pool, n_background, l_count, rng)

    masks = np.arange(2**p, dtype=np.int64)
    z = ((masks[:, None] >> np.arange(p)[None, :]) & 1).astype(bool)
    values = _coalition_values(model, x, horizon, background, z)

    sizes = _popcount(masks, p)
    fact = [math.factorial(i) for i in range(p + 1)]
    size_weight = np.asarray([fact[s] * fact[p - 1 - s] / fact[p] for s in range(p)], dtype=np.float64)

    phi = np.empty(p, dtype=np.float64)
    for i in range(p):
        without = masks[(masks >> i) & 1 == 0]
        w = size_weight[sizes[without]]
        phi[i] = float(np.sum(w * (values[without | (1 << i)] - values[without])))

    return ImportanceMatrix(
        phi=phi.reshape(j_count, l_count),
        horizon=horizon,
        method="exact-shapley",
        base_value=float(values[0]),
    )


def _kernel_weight(p: int, size: int) -> float:
    return (p - 1) / (math.comb(p, size) * size * (p - size))


def _class_mass(p: int, size: int) -> float:
    return (p - 1) / (size * (p - size))


def _enumerate_class(p: int, size: int) -> np.ndarray:
    z = np.zeros((math.comb(p, size), p), dtype=bool)
    for row, members in enumerate(combinations(range(p), size)):
        z[row, list(members)] = True
    return z


def _sample_coalitions(p: int, budget: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Coalition matrix and regression weights for non-trivial coalitions.

    Size classes are enumerated completely from both ends while they fit the
    budget (with their exact Shapley-kernel weights); the remaining budget is
    sampled from the leftover size classes, each sampled coalition carrying an
    equal share of the leftover kernel mass. Duplicate coalitions are merged
    by summing weights.
    """
    if 2**p - 2 <= budget:
        rows = []
        weights = []
        for size in range(1, p):
            block = _enumerate_class(p, size)
            rows.append(block)
            weights.append(np.full(block.shape[0], _kernel_weight(p, size)))
        return np.vstack(rows), np.concatenate(weights)

    rows = []
    weights = []
    remaining = budget
    leftover_sizes = set(range(1, p))
    for size in sorted(leftover_sizes, key=lambda s: min(s, p - s)):
        if size not in leftover_sizes:
            continue
        pair = {size, p - size}
        cost = sum(math.comb(p, s) for s in pair)
        if cost > remaining:
            continue
        for s in sorted(pair):
            block = _enumerate_class(p, s)
            rows.append(block)
            weights.append(np.full(block.shape[0], _kernel_weight(p, s)))
        remaining -= cost
        leftover_sizes -= pair

    if leftover_sizes and remaining > 0:
        sizes = np.asarray(sorted(leftover_sizes))
        mass = np.asarray([_class_mass(p, s) for s in sizes])
        total_mass = float(mass.sum())
        chosen = rng.choice(sizes, size=remaining, p=mass / total_mass)
        sampled = np.zeros((remaining, p), dtype=bool)
        for row, size in enumerate(chosen):
            sampled[row, rng.permutation(p)[:size]] = True
        merged: dict[bytes, tuple[np.ndarray, float]] = {}
        per_sample = total_mass / remaining
        for row in range(remaining):
            key = sampled[row].tobytes()
            if key in merged:
                merged[key] = (merged[key][0], merged[key][1] + per_sample)
            else:
                merged[key] = (sampled[row], per_sample)
        rows.append(np.stack([entry[0] for entry in merged.values()]))
        weights.append(np.asarray([entry[1] for entry in merged.values()]))

    if not rows:
        raise SingularSystemError(f"coalition budget {budget} admits no non-trivial coalitions for P={p}")
    return np.vstack(rows), np.concatenate(weights)


def explain_kernel_shap(
    model: ForecastModel,
    x: np.ndarray,
    horizon: int,
    pool: AblationPool,
    n_coalitions: int = 2048,
    n_background: int = 16,
    seed: int | np.random.Generator = 0,
) -> ImportanceMatrix:
    """Shapley-kernel weighted regression attribution.

    The empty and full coalitions are always included via the constraints
    ``base_value = v(empty)`` and ``base_value + sum(phi) = F(x)``, so local
    accuracy holds exactly by construction.
    """
    x = check_window(x, model.window_shape)
    j_count, l_count = x.shape
    p = j_count * l_count
    if n_coalitions < p + 2:
        raise ValueError(f"n_coalitions must be at least P + 2 = {p + 2}, got {n_coalitions}")

    rng = np.random.default_rng(seed)
    background = _draw_background(pool, n_background, l_count, rng)
    base = float(model.predict_horizon(background, horizon).mean())
    fx = float(model.predict_window(x)[horizon])
    delta = fx - base

    if p == 1:
        return ImportanceMatrix(
            phi=np.asarray([[delta]]), horizon=horizon, method="kernel-shap", base_value=base
        )

    z, weights = _sample_coalitions(p, n_coalitions - 2, rng)
    values = _coalition_values(model, x, horizon, background, z)

    # Eliminate the efficiency constraint by substituting the last player.
    z_last = z[:, -1].astype(np.float64)
    design = z[:, :-1].astype(np.float64) - z_last[:, None]
    target = values - base - z_last * delta
    weighted = design * weights[:, None]
    normal = weighted.T @ design
    moment = weighted.T @ target
    try:
        cond = np.linalg.cond(normal)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError
        head = np.linalg.solve(normal, moment)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            f"coalition sample of {z.shape[0]} rows is rank-deficient for P={p}; raise n_coalitions"
        ) from None
    phi = np.append(head, delta - head.sum())

    return ImportanceMatrix(
        phi=phi.reshape(j_count, l_count),
        horizon=horizon,
        method="kernel-shap",
        base_value=base,
    )
