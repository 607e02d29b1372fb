"""Command-line entry point.

Subcommands: explain, robustness, synth2d, distort, metric, segment.
Config files are JSON documents mirroring the typed config fields; explicit
flags override file values, and every file-producing run writes the fully
resolved configuration to a sidecar JSON. Exit codes: 0 success, 1 usage
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys

import numpy as np

from . import imagexp, synth2d
from .blackbox import builtin_quadrant_classifier, subprocess_adapter
from .core import Image, project_explanation
from .errors import SurrexError
from .forest import ForestConfig
from .imgio import read_image, write_image, write_label_pgm
from .metrics import KernelConfig, MsssimConfig, msssim, perceptual_distance
from .perturb import DistortionSpec, SamplerSpec, distort
from .segment import SegmentConfig, boundary_overlay, slic_segment
from .surrogate import ExplainConfig, RidgeConfig, explain_image


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _load_config_file(path):
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise _UsageError(f"config file {path!r} must hold a JSON object")
    return doc


def _sidecar(path_like: str, resolved: dict) -> None:
    out = path_like.rstrip("/")
    target = os.path.join(out, "config.json") if os.path.isdir(out) else out + ".config.json"
    with open(target, "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _make_blackbox(spec: str):
    if spec == "builtin:quadrant":
        return builtin_quadrant_classifier()
    if spec.startswith("cmd:"):
        return subprocess_adapter(shlex.split(spec[4:]))
    raise _UsageError(f"unknown black-box spec {spec!r}; use builtin:quadrant or cmd:\"...\"")


def _spec_pair(value) -> tuple:
    # accept ["noise", 0.05] / {"kind": ..., "level": ...} / "mean"
    if isinstance(value, str):
        return value, 0.0
    if isinstance(value, dict):
        return value["kind"], float(value.get("level", 0.0))
    kind, level = value
    return kind, float(level)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------- subcommands


def _cmd_metric(args):
    cfg_doc = _load_config_file(args.config)
    a = read_image(args.image_a)
    b = read_image(args.image_b)
    n_scales = cfg_doc.get("n_scales")
    if n_scales is None:
        cfg = MsssimConfig.for_min_side(min(a.height, a.width))
    else:
        w = np.asarray(cfg_doc["scale_weights"], dtype=np.float64)
        cfg = MsssimConfig(n_scales=int(n_scales), scale_weights=tuple(w))
    score = msssim(a, b, cfg)
    out = {
        "msssim": score,
        "perceptual_distance": max(1.0 - score, 0.0),
        "config": {"n_scales": cfg.n_scales, "scale_weights": list(cfg.scale_weights),
                   "window_size": cfg.window_size},
    }
    print(json.dumps(out))
    return 0


def _cmd_distort(args):
    spec = DistortionSpec(args.kind, args.level)
    img = read_image(args.input)
    write_image(distort(img, spec, rng_seed=args.seed), args.output)
    _sidecar(args.output, {"kind": args.kind, "level": args.level, "seed": args.seed,
                           "input": args.input})
    return 0


def _cmd_segment(args):
    img = read_image(args.input)
    seg = slic_segment(img, args.n_segments, args.compactness, args.max_iters, args.seed)
    overlay_path = args.out_prefix + "_overlay.png"
    labels_path = args.out_prefix + "_labels.pgm"
    write_image(boundary_overlay(img, seg), overlay_path)
    write_label_pgm(seg.labels, labels_path)
    _sidecar(overlay_path, {
        "n_segments": args.n_segments, "compactness": args.compactness,
        "max_iters": args.max_iters, "seed": args.seed,
        "realized_segments": seg.n_segments,
    })
    print(json.dumps({"n_segments": seg.n_segments,
                      "overlay": overlay_path, "labels": labels_path}))
    return 0


def _explain_config_from(doc: dict, seed: int) -> ExplainConfig:
    seg_doc = doc.get("segments", {})
    kind, level = _spec_pair(doc.get("sampler", "mean"))
    sigma = doc.get("sigma")  # None picks the per-distance default
    return ExplainConfig(
        n_samples=int(doc.get("n_samples", 1000)),
        sampler=SamplerSpec(kind, level),
        kernel=KernelConfig(sigma=None if sigma is None else float(sigma),
                            distance_kind=doc.get("distance", "cosine_mask")),
        ridge=RidgeConfig(alpha=float(doc.get("ridge", {}).get("alpha", 1.0)),
                          fit_intercept=bool(doc.get("ridge", {}).get("fit_intercept", True))),
        segments=SegmentConfig(
            n_segments=int(seg_doc.get("n_segments", 50)),
            compactness=float(seg_doc.get("compactness", 10.0)),
            max_iters=int(seg_doc.get("max_iters", 10)),
        ),
        seed=seed,
    )


def _resolved_explain_doc(cfg: ExplainConfig) -> dict:
    return {
        "n_samples": cfg.n_samples,
        "sampler": [cfg.sampler.kind, cfg.sampler.level],
        "distance": cfg.kernel.distance_kind,
        "sigma": cfg.kernel.sigma,
        "ridge": {"alpha": cfg.ridge.alpha, "fit_intercept": cfg.ridge.fit_intercept},
        "segments": {
            "n_segments": cfg.segments.n_segments,
            "compactness": cfg.segments.compactness,
            "max_iters": cfg.segments.max_iters,
        },
        "seed": cfg.seed,
    }


def _cmd_explain(args):
    doc = _load_config_file(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    cfg = _explain_config_from(doc, seed)
    img = read_image(args.image)
    box = _make_blackbox(args.blackbox)
    try:
        expl, _, seg = explain_image(img, box, cfg)
    finally:
        if hasattr(box, "close"):
            box.close()
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "explanation.json"), "w") as fh:
        fh.write(expl.to_json() + "\n")
    imagexp.render_heatmap(img, project_explanation(expl, seg),
                           os.path.join(args.out, "heatmap.png"))
    _sidecar(args.out, {**_resolved_explain_doc(cfg), "image": args.image,
                        "blackbox": args.blackbox})
    return 0


def _cmd_synth2d(args):
    doc = _load_config_file(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    cfg = synth2d.Synth2DConfig(
        n_train=int(doc.get("n_train", 2000)),
        noise_std=float(doc.get("noise_std", 0.35)),
        n_queries=int(doc.get("n_queries", 50)),
        halfwidth=float(doc.get("halfwidth", 0.2)),
        quantile_grid=tuple(doc.get("quantile_grid", (2, 5, 10, 20, 50, 100))),
        n_neighbourhood=int(doc.get("n_neighbourhood", 500)),
        seed=seed,
        forest=ForestConfig(n_trees=int(doc.get("n_trees", 100)), seed=seed),
    )
    result = synth2d.run_synth_experiment(cfg, threads=args.threads)
    _write_csv(
        args.out,
        ["n_quantiles", "mean_wasserstein", "mean_param_distance", "n_effective_queries"],
        [
            [r["n_quantiles"], r["mean_wasserstein"], r["mean_param_distance"],
             r["n_effective_queries"]]
            for r in result.rows
        ],
    )
    resolved = {
        "n_train": cfg.n_train, "noise_std": cfg.noise_std, "n_queries": cfg.n_queries,
        "halfwidth": cfg.halfwidth, "quantile_grid": list(cfg.quantile_grid),
        "n_neighbourhood": cfg.n_neighbourhood, "seed": cfg.seed,
        "n_trees": cfg.forest.n_trees, "threads": args.threads,
        "diagnostics": result.diagnostics,
    }
    _sidecar(args.out, resolved)
    if args.plots:
        _synth_plots(cfg, args.plots)
    return 0


def _synth_plots(cfg, plot_dir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .core import derive_seed
    from .forest import train_forest
    from .surrogate import explain_point2d

    os.makedirs(plot_dir, exist_ok=True)
    X, y = synth2d.two_moons(cfg.n_train, cfg.noise_std, seed=cfg.seed)
    forest = train_forest(X, y, cfg.forest or ForestConfig(seed=cfg.seed))
    queries, _ = synth2d.two_moons(max(cfg.n_queries, 2), cfg.noise_std, seed=cfg.seed + 1)
    query = queries[0]
    for m in cfg.quantile_grid:
        qt = synth2d.fit_quantile_transform(X, m)
        neigh = synth2d.sample_neighbourhood_2d(qt, query, cfg.halfwidth,
                                                cfg.n_neighbourhood,
                                                seed=derive_seed(cfg.seed, 0, m, 0))
        surr = explain_point2d(query, neigh, forest)
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.scatter(X[:, 0], X[:, 1], s=2, c=y, cmap="coolwarm", alpha=0.15)
        preds = forest.predict(neigh)
        ax.scatter(neigh[:, 0], neigh[:, 1], s=6, c=preds, cmap="coolwarm",
                   edgecolors="k", linewidths=0.2)
        cx, cy = surr.coefficients
        if abs(cy) > 1e-12:
            xs = np.linspace(neigh[:, 0].min(), neigh[:, 0].max(), 50)
            ax.plot(xs, (0.5 - surr.intercept - cx * xs) / cy, "g-", lw=1.5)
        ax.plot(*query, marker="*", color="k", markersize=12)
        ax.set_title(f"m = {m}")
        fig.tight_layout()
        fig.savefig(os.path.join(plot_dir, f"neighbourhood_m{m:03d}.png"), dpi=120)
        plt.close(fig)


_DEFAULT_GRID_SAMPLERS = (("zero", 0), ("mean", 0), ("noise", 0.01), ("noise", 0.05),
                          ("noise", 0.1), ("blur", 3), ("blur", 5), ("blur", 11),
                          ("contrast", 0.5))
_DEFAULT_GRID_DISTORTIONS = (("noise", 0.05), ("blur", 5), ("contrast", 0.5))


def _cmd_robustness(args):
    doc = _load_config_file(args.config)
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    resize_to = int(doc.get("resize_to", 64))
    samplers = [_spec_pair(s) for s in doc.get("samplers", _DEFAULT_GRID_SAMPLERS)]
    distances = list(doc.get("distances", ("cosine_mask", "msssim")))
    distortions = [_spec_pair(s) for s in doc.get("distortions", _DEFAULT_GRID_DISTORTIONS)]
    # desk-scale defaults: smaller images, fewer samples and segments
    merged = {"n_samples": 200, **doc}
    merged["segments"] = {"n_segments": 30, **doc.get("segments", {})}
    base = _explain_config_from(merged, seed)
    sigma = doc.get("sigma")  # None picks the per-distance default
    configs = []
    for kind, level in samplers:
        for dist in distances:
            configs.append(
                ExplainConfig(
                    n_samples=base.n_samples,
                    sampler=SamplerSpec(kind, level),
                    kernel=KernelConfig(sigma=None if sigma is None else float(sigma),
                                        distance_kind=dist),
                    ridge=base.ridge,
                    segments=base.segments,
                    seed=seed,
                )
            )
    pairs = imagexp.build_pairs(args.images,
                                [DistortionSpec(k, l) for k, l in distortions],
                                resize_to=resize_to, seed=seed)
    os.makedirs(args.out, exist_ok=True)
    box = _make_blackbox(args.blackbox)
    try:
        result = imagexp.run_robustness(pairs, configs, box, seed=seed,
                                        threads=args.threads)
        if args.heatmaps:
            _robustness_heatmaps(pairs, configs[0], box, args.out)
    finally:
        if hasattr(box, "close"):
            box.close()

    header = ["sampler", "distance", "distortion", "mean_dexp", "count"]
    _write_csv(os.path.join(args.out, "results.csv"), header,
               [[r["sampler"], r["distance"], r["distortion"], r["mean_dexp"], r["count"]]
                for r in result.rows])
    _write_csv(os.path.join(args.out, "normalized.csv"),
               ["sampler", "distance", "distortion", "normalized"],
               [[r["sampler"], r["distance"], r["distortion"], r["normalized"]]
                for r in result.rows])
    with open(os.path.join(args.out, "diagnostics.json"), "w") as fh:
        json.dump(result.diagnostics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    resolved_sigma = {
        d: KernelConfig(sigma=None if sigma is None else float(sigma),
                        distance_kind=d).sigma
        for d in distances
    }
    _sidecar(args.out, {
        "images": args.images, "blackbox": args.blackbox, "seed": seed,
        "threads": args.threads, "resize_to": resize_to,
        "n_samples": base.n_samples, "sigma": resolved_sigma,
        "segments": {"n_segments": base.segments.n_segments,
                     "compactness": base.segments.compactness,
                     "max_iters": base.segments.max_iters},
        "ridge": {"alpha": base.ridge.alpha, "fit_intercept": base.ridge.fit_intercept},
        "samplers": [list(s) for s in samplers],
        "distances": distances,
        "distortions": [list(d) for d in distortions],
    })
    return 0


def _robustness_heatmaps(pairs, base_cfg, box, out_dir):
    heat_dir = os.path.join(out_dir, "heatmaps")
    os.makedirs(heat_dir, exist_ok=True)
    for i, pair in enumerate(pairs):
        expl, _, seg = explain_image(pair.reference, box, base_cfg)
        imagexp.render_heatmap(pair.reference, project_explanation(expl, seg),
                               os.path.join(heat_dir, f"pair{i:03d}_{pair.source_id}.png"))


# -------------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="surrex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="MS-SSIM and perceptual distance of two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("distort", help="apply a whole-image distortion")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--kind", required=True, choices=["zero", "mean", "noise", "blur", "contrast"])
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_distort)

    p = sub.add_parser("segment", help="superpixel debug outputs")
    p.add_argument("input")
    p.add_argument("--n-segments", type=int, default=50)
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("explain", help="explain one image")
    p.add_argument("image")
    p.add_argument("--blackbox", default="builtin:quadrant")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("synth2d", help="two-moons quantile sampling study")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.add_argument("--plots")
    p.set_defaults(func=_cmd_synth2d)

    p = sub.add_parser("robustness", help="reference/distorted explanation study")
    p.add_argument("--images", required=True)
    p.add_argument("--blackbox", default="builtin:quadrant")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.add_argument("--heatmaps", action="store_true")
    p.set_defaults(func=_cmd_robustness)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SurrexError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
