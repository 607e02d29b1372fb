"""Two-moons sampling study: quantile uniformisation, neighbourhood
generation, true-distribution baselines, and the Wasserstein / surrogate
parameter-distance evaluation.

The quantile transform estimates each feature's CDF at m equally spaced
probability levels. Its forward map sends data to [0, 1]; neighbourhoods are
drawn uniformly in a box around the transformed query and mapped back with
the inverse, so m = 2 reproduces plain min-max box sampling while large m
draws approximately from the data distribution restricted to the box.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import derive_seed
from .errors import DimensionError, EmptyRegionError, ParameterError
from .forest import Forest, ForestConfig, train_forest
from .metrics import marginal_wasserstein
from .surrogate import RidgeConfig, explain_point2d, surrogate_param_distance

_REJECTION_BUDGET = 10**7


def two_moons(n: int, noise_std: float, seed: int = 0):
    """Two interleaving crescents with additive Gaussian noise.

    Moon 0 traces (cos t, sin t) and moon 1 traces (1 - cos t, 0.5 - sin t)
    on a uniform grid of t over [0, pi]; the first ceil(n/2) rows belong to
    moon 0. Returns (points, labels).
    """
    if n < 2:
        raise ParameterError("need at least 2 points")
    n0 = n - n // 2
    n1 = n // 2
    t0 = np.linspace(0.0, np.pi, n0)
    t1 = np.linspace(0.0, np.pi, n1)
    pts = np.concatenate(
        [
            np.column_stack([np.cos(t0), np.sin(t0)]),
            np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)]),
        ]
    )
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        pts = pts + rng.normal(0.0, noise_std, size=pts.shape)
    return pts, labels


@dataclass(frozen=True)
class QuantileTransform:
    """Per-feature empirical quantiles at levels i / (m - 1)."""

    quantiles: np.ndarray  # (m, d), non-decreasing along axis 0

    def __post_init__(self):
        q = np.asarray(self.quantiles, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] < 2:
            raise ParameterError("need an (m, d) quantile table with m >= 2")
        if (np.diff(q, axis=0) < 0).any():
            raise ParameterError("quantiles must be non-decreasing per feature")
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "quantiles", q)

    @property
    def n_quantiles(self) -> int:
        return self.quantiles.shape[0]

    @property
    def n_features(self) -> int:
        return self.quantiles.shape[1]


def fit_quantile_transform(X, n_quantiles: int) -> QuantileTransform:
    """Estimate the per-feature CDF at ``n_quantiles`` evenly spaced levels."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] < 2:
        raise ParameterError("need at least 2 samples")
    if n_quantiles < 2:
        raise ParameterError("n_quantiles must be >= 2")
    levels = np.linspace(0.0, 1.0, n_quantiles)
    q = np.quantile(X, levels, axis=0, method="linear")
    return QuantileTransform(q)


def forward(qt: QuantileTransform, x) -> np.ndarray:
    """Map data-space points into [0, 1]^d via the piecewise-linear CDF.

    Values outside the fitted range clip to the endpoints. Accepts a single
    d-vector or an (n, d) batch and preserves the input arity.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != qt.n_features:
        raise DimensionError(f"expected dimension {qt.n_features}, got {pts.shape[1]}")
    levels = np.linspace(0.0, 1.0, qt.n_quantiles)
    out = np.empty_like(pts)
    for f in range(qt.n_features):
        out[:, f] = np.interp(pts[:, f], qt.quantiles[:, f], levels)
    return out[0] if single else out


def inverse(qt: QuantileTransform, u) -> np.ndarray:
    """Map uniformised points back to data space (inverse CDF)."""
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    if pts.shape[1] != qt.n_features:
        raise DimensionError(f"expected dimension {qt.n_features}, got {pts.shape[1]}")
    if (pts < 0).any() or (pts > 1).any():
        raise ParameterError("uniformised coordinates must lie in [0, 1]")
    levels = np.linspace(0.0, 1.0, qt.n_quantiles)
    out = np.empty_like(pts)
    for f in range(qt.n_features):
        out[:, f] = np.interp(pts[:, f], levels, qt.quantiles[:, f])
    return out[0] if single else out


def sample_neighbourhood_2d(qt: QuantileTransform, query, halfwidth: float,
                            n: int, seed: int = 0) -> np.ndarray:
    """Draw a local neighbourhood around a query point.

    The box [u* - halfwidth, u* + halfwidth]^2, clipped to [0, 1]^2, lives in
    the uniformised space around the transformed query; samples drawn
    uniformly there are mapped back through the inverse transform.
    """
    if not halfwidth > 0:
        raise ParameterError("halfwidth must be > 0")
    if n < 1:
        raise ParameterError("n must be >= 1")
    u_star = forward(qt, np.asarray(query, dtype=np.float64).ravel())
    lo = np.clip(u_star - halfwidth, 0.0, 1.0)
    hi = np.clip(u_star + halfwidth, 0.0, 1.0)
    rng = np.random.default_rng(seed)
    u = rng.uniform(lo, hi, size=(n, qt.n_features))
    return inverse(qt, u)


def true_local_samples(noise_std: float, bbox, n: int, seed: int = 0,
                       max_draws: int = _REJECTION_BUDGET) -> np.ndarray:
    """Rejection-sample the two-moons distribution inside a data-space box.

    ``bbox`` is ((x_lo, y_lo), (x_hi, y_hi)). Raises EmptyRegionError when
    the draw budget is exhausted before ``n`` acceptances.
    """
    lo = np.asarray(bbox[0], dtype=np.float64)
    hi = np.asarray(bbox[1], dtype=np.float64)
    if lo.shape != (2,) or hi.shape != (2,) or (hi <= lo).any():
        raise ParameterError("bbox must span a positive area")
    if n < 1:
        raise ParameterError("n must be >= 1")
    accepted = []
    got = 0
    drawn = 0
    batch = max(1000, 4 * n)
    round_idx = 0
    while got < n:
        if drawn >= max_draws:
            raise EmptyRegionError(
                f"accepted {got}/{n} after {drawn} draws inside {bbox}"
            )
        pts, _ = two_moons(batch, noise_std, seed=derive_seed(seed, round_idx))
        drawn += batch
        keep = ((pts >= lo) & (pts <= hi)).all(axis=1)
        kept = pts[keep]
        accepted.append(kept)
        got += kept.shape[0]
        round_idx += 1
    return np.concatenate(accepted)[:n]


@dataclass(frozen=True)
class Synth2DConfig:
    n_train: int = 2000
    noise_std: float = 0.35
    n_queries: int = 50
    halfwidth: float = 0.2
    quantile_grid: tuple = (2, 5, 10, 20, 50, 100)
    n_neighbourhood: int = 500
    seed: int = 0
    forest: ForestConfig | None = None
    ridge: RidgeConfig = RidgeConfig()

    def __post_init__(self):
        if self.n_train < 2:
            raise ParameterError("n_train must be >= 2")
        if self.n_queries < 1:
            raise ParameterError("n_queries must be >= 1")
        if not self.halfwidth > 0:
            raise ParameterError("halfwidth must be > 0")
        if len(self.quantile_grid) < 1 or min(self.quantile_grid) < 2:
            raise ParameterError("quantile counts must be >= 2")
        if self.n_neighbourhood < 3:
            raise ParameterError("n_neighbourhood must be >= 3")
        object.__setattr__(self, "quantile_grid", tuple(int(m) for m in self.quantile_grid))


@dataclass
class SynthResult:
    rows: list  # dicts: n_quantiles, mean_wasserstein, mean_param_distance, n_effective_queries
    diagnostics: dict


def _evaluate_query(qt, query, forest, cfg: Synth2DConfig, q_idx: int, m: int):
    neigh = sample_neighbourhood_2d(qt, query, cfg.halfwidth,
                                    cfg.n_neighbourhood,
                                    seed=derive_seed(cfg.seed, q_idx, m, 0))
    bbox = (neigh.min(axis=0), neigh.max(axis=0))
    truth = true_local_samples(cfg.noise_std, bbox, cfg.n_neighbourhood,
                               seed=derive_seed(cfg.seed, q_idx, m, 1))
    w = marginal_wasserstein(neigh, truth)
    surr_sampled = explain_point2d(query, neigh, forest, cfg.ridge)
    surr_true = explain_point2d(query, truth, forest, cfg.ridge)
    return w, surrogate_param_distance(surr_sampled, surr_true)


def run_synth_experiment(cfg: Synth2DConfig = Synth2DConfig(),
                         threads: int = 1) -> SynthResult:
    """Full sampling study over the quantile grid; deterministic given seed.

    Per (query, quantile count): sample a neighbourhood, compare it to true
    two-moons samples inside the same data-space bounding box, and compare
    the surrogates fitted on both sets. Rows report per-quantile means over
    the queries that succeeded.
    """
    X, y = two_moons(cfg.n_train, cfg.noise_std, seed=cfg.seed)
    forest_cfg = cfg.forest or ForestConfig(seed=cfg.seed)
    forest = train_forest(X, y, forest_cfg)
    queries, _ = two_moons(max(cfg.n_queries, 2), cfg.noise_std, seed=cfg.seed + 1)
    queries = queries[: cfg.n_queries]
    transforms = {m: fit_quantile_transform(X, m) for m in cfg.quantile_grid}

    grid = cfg.quantile_grid
    w_table = np.full((len(queries), len(grid)), np.nan)
    p_table = np.full((len(queries), len(grid)), np.nan)
    failures = []

    def work(unit):
        q_idx, m_idx = unit
        m = grid[m_idx]
        try:
            w, p = _evaluate_query(transforms[m], queries[q_idx], forest, cfg, q_idx, m)
            w_table[q_idx, m_idx] = w
            p_table[q_idx, m_idx] = p
        except EmptyRegionError as exc:
            failures.append({"query": q_idx, "n_quantiles": m, "error": str(exc)})

    units = [(qi, mi) for qi in range(len(queries)) for mi in range(len(grid))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, units))
    else:
        for unit in units:
            work(unit)

    rows = []
    for m_idx, m in enumerate(grid):
        ok = ~np.isnan(w_table[:, m_idx])
        rows.append(
            {
                "n_quantiles": m,
                "mean_wasserstein": float(np.mean(w_table[ok, m_idx])) if ok.any() else float("nan"),
                "mean_param_distance": float(np.mean(p_table[ok, m_idx])) if ok.any() else float("nan"),
                "n_effective_queries": int(ok.sum()),
            }
        )
    failures.sort(key=lambda r: (r["query"], r["n_quantiles"]))
    return SynthResult(rows=rows, diagnostics={"failed_queries": failures})
