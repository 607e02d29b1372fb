#!/usr/bin/env python3
"""The 2D sampling study at demo scale.

A random forest is trained on noisy two moons. Around each query we sample
a neighbourhood through the inverse of a quantile uniformisation transform:
with 2 quantiles that is a plain uniform box, with many quantiles the
samples follow the data distribution inside the box. More quantiles bring
the samples closer to truth (Wasserstein) and the local surrogates closer
to surrogates fitted on true local data.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from surrex import (ForestConfig, Synth2DConfig, fit_quantile_transform,
                    run_synth_experiment, sample_neighbourhood_2d, two_moons)
from surrex.core import derive_seed

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

cfg = Synth2DConfig(n_train=1000, noise_std=0.35, n_queries=10, halfwidth=0.2,
                    quantile_grid=(2, 5, 10, 20, 50, 100), n_neighbourhood=300,
                    seed=3, forest=ForestConfig(n_trees=50, seed=3))
result = run_synth_experiment(cfg, threads=os.cpu_count() or 1)

print(f"{'quantiles':>10s} {'wasserstein':>12s} {'param dist':>11s}")
for row in result.rows:
    print(f"{row['n_quantiles']:>10d} {row['mean_wasserstein']:>12.4f} "
          f"{row['mean_param_distance']:>11.4f}")

fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
ms = [r["n_quantiles"] for r in result.rows]
axes[0].plot(ms, [r["mean_wasserstein"] for r in result.rows], "o-")
axes[0].set_xscale("log"); axes[0].set_xlabel("quantiles"); axes[0].set_ylabel("mean Wasserstein")
axes[1].plot(ms, [r["mean_param_distance"] for r in result.rows], "s-", color="tab:red")
axes[1].set_xscale("log"); axes[1].set_xlabel("quantiles"); axes[1].set_ylabel("mean surrogate distance")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "two_moons_trends.png"), dpi=130)

# neighbourhood scatter at both ends of the quantile scale
X, y = two_moons(cfg.n_train, cfg.noise_std, seed=cfg.seed)
queries, _ = two_moons(10, cfg.noise_std, seed=cfg.seed + 1)
query = queries[0]
fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, m in zip(axes, (2, 100)):
    qt = fit_quantile_transform(X, m)
    pts = sample_neighbourhood_2d(qt, query, cfg.halfwidth, 400,
                                  seed=derive_seed(cfg.seed, 0, m, 0))
    ax.scatter(X[:, 0], X[:, 1], s=3, c=y, cmap="coolwarm", alpha=0.15)
    ax.scatter(pts[:, 0], pts[:, 1], s=5, color="tab:green", alpha=0.6)
    ax.plot(*query, "k*", markersize=14)
    ax.set_title(f"{m} quantiles")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "two_moons_neighbourhoods.png"), dpi=130)
print(f"figures written to {OUT}/")
