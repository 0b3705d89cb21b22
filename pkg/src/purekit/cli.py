"""Command-line surface: purify, svd, isotropy, metrics, synth-bench.

Exit codes are a stable scripting contract: 0 success, 1 validation error,
2 I/O error, 3 numerical failure. Errors go to stderr as
``purekit: <ErrorName>: <message>``. The ``PURE_LOG`` environment variable
sets log verbosity only; it never changes numerical behavior.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import (
    InvalidConfig,
    IoFailure,
    NumericalError,
    PurekitError,
    ValidationError,
)
from .harness import DirectionMode, RobustnessReport, SynthConfig, run_experiment
from .isotropy import isotropy_report
from .linalg import exact_svd
from .metrics import compute_report, load_records_jsonl
from .npyio import read_instances, read_npy, write_npy
from .purify import Backend, Pooling, PurifyConfig, purify_batch
from .rsvd import RsvdConfig, rsvd

log = logging.getLogger("purekit")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3


def _configure_logging() -> None:
    level = os.environ.get("PURE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s %(message)s")


def _write_json(path, payload: dict) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _purify_config(args) -> PurifyConfig:
    return PurifyConfig(
        remove_k=args.k,
        alpha=args.alpha,
        backend=Backend(args.backend),
        rsvd=RsvdConfig(
            sketch_width_r=args.r,
            power_iters_q=args.q,
            target_rank_t=max(args.k, 1),
            seed=args.seed,
        ),
        min_tokens_for_removal=args.min_tokens,
        pooling=Pooling(args.pooling),
        center_first=args.center_first,
    )


def _config_dict(cfg: PurifyConfig) -> dict:
    out = asdict(cfg)
    out["backend"] = cfg.backend.value
    out["pooling"] = cfg.pooling.value
    return out


def cmd_purify(args) -> None:
    batch = read_instances(args.embeddings, args.meta)
    cfg = _purify_config(args)
    results = purify_batch(batch, cfg, workers=args.threads)
    pooled = np.stack([res.pooled for res in results])
    write_npy(pooled, args.out, precision=args.precision)
    log.info("purified %d instances -> %s", len(results), args.out)
    if args.report:
        _write_json(args.report, {
            "config": _config_dict(cfg),
            "n_instances": len(results),
            "dim": int(batch.tokens.shape[1]),
            "instances": [
                {
                    "id": batch.ids[i],
                    "removed_scales": [sigma for sigma, _ in res.removed_components],
                    "removal_shortfall": res.removal_shortfall,
                }
                for i, res in enumerate(results)
            ],
        })


def cmd_svd(args) -> None:
    A = read_npy(args.input)
    if args.rank < 1:
        raise ValidationError("--rank must be >= 1")
    if args.rank > min(A.shape):
        raise InvalidConfig(f"--rank {args.rank} exceeds min(rows, cols)={min(A.shape)}")
    if args.backend == "exact":
        res = exact_svd(A)
        sigma, V = res.sigma[: args.rank], res.V[:, : args.rank]
    else:
        cfg = RsvdConfig(sketch_width_r=args.r, power_iters_q=args.q,
                         target_rank_t=args.rank, seed=args.seed)
        res = rsvd(A, cfg)
        sigma, V = res.sigma, res.V
    # Singular values ship as a 1 x t row so every output stays a 2-D NPY.
    write_npy(sigma.reshape(1, -1), args.out_sigma)
    write_npy(V, args.out_v)
    log.info("wrote %d singular values", sigma.size)


def cmd_isotropy(args) -> None:
    batch = read_instances(args.embeddings, args.meta)
    report = isotropy_report(batch.instances(), n_pairs=args.pairs, seed=args.seed)
    _write_json(args.out, {
        "config": {"pairs": args.pairs, "seed": args.seed,
                   "embeddings": str(args.embeddings), "meta": str(args.meta)},
        **report.to_json_dict(),
    })


def cmd_metrics(args) -> None:
    records = load_records_jsonl(args.records)
    report = compute_report(records)
    _write_json(args.out, report.to_json_dict())


def _load_toml(path) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: invalid TOML: {exc}") from exc


def _take(section: dict, table: str, allowed: dict) -> dict:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ValidationError(f"[{table}] has unknown keys: {sorted(unknown)}")
    return {key: type_(section[key]) for key, type_ in allowed.items() if key in section}


def cmd_synth_bench(args) -> None:
    doc = _load_toml(args.config)
    synth_kwargs = _take(doc.get("synth", {}), "synth", {
        "n_instances": int, "tokens_per_instance": int, "dim": int,
        "dominant_scale": float, "class_separation": float, "seed": int,
    })
    purify_section = dict(doc.get("purify", {}))
    rsvd_kwargs = _take(purify_section, "purify", {
        "r": int, "q": int, "seed": int, "remove_k": int, "alpha": float,
        "backend": str, "pooling": str, "min_tokens_for_removal": int,
        "center_first": bool,
    })
    pert = _take(doc.get("perturbation", {}), "perturbation", {
        "epsilon": float, "direction": str,
    })

    synth_cfg = SynthConfig(**synth_kwargs)
    remove_k = rsvd_kwargs.get("remove_k", 1)
    purify_cfg = PurifyConfig(
        remove_k=remove_k,
        alpha=rsvd_kwargs.get("alpha", 1.5),
        backend=Backend(rsvd_kwargs.get("backend", "rsvd")),
        rsvd=RsvdConfig(
            sketch_width_r=rsvd_kwargs.get("r", 8),
            power_iters_q=rsvd_kwargs.get("q", 2),
            target_rank_t=max(remove_k, 1),
            seed=rsvd_kwargs.get("seed", synth_cfg.seed),
        ),
        min_tokens_for_removal=rsvd_kwargs.get("min_tokens_for_removal", 2),
        pooling=Pooling(rsvd_kwargs.get("pooling", "pfsa")),
        center_first=rsvd_kwargs.get("center_first", False),
    )
    epsilon = pert.get("epsilon", 2.0 * synth_cfg.class_separation)
    mode = DirectionMode(pert.get("direction", "top_pc"))

    report: RobustnessReport = run_experiment(synth_cfg, purify_cfg, epsilon, mode)
    _write_json(args.out, {
        "config": {
            "synth": asdict(synth_cfg),
            "purify": _config_dict(purify_cfg),
        },
        **report.to_json_dict(),
    })


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="purekit",
        description="Instance-level principal component removal for token embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("purify", help="purify instances and write pooled vectors")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--k", type=int, default=1, help="components to remove per instance")
    p.add_argument("--alpha", type=float, default=1.5, help="attention pooling scale")
    p.add_argument("--backend", choices=["exact", "rsvd"], default="rsvd")
    p.add_argument("--r", type=int, default=8, help="sketch width (Gaussian vectors)")
    p.add_argument("--q", type=int, default=2, help="subspace iterations")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--pooling", choices=["pfsa", "mean"], default="pfsa")
    p.add_argument("--min-tokens", type=int, default=2,
                   help="skip removal for instances shorter than this")
    p.add_argument("--center-first", action="store_true",
                   help="subtract the row mean before extracting components")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--precision", choices=["float32", "float64"], default="float64")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_purify)

    p = sub.add_parser("svd", help="decompose one matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--backend", choices=["exact", "rsvd"], default="exact")
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-sigma", required=True)
    p.add_argument("--out-v", required=True)
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("isotropy", help="corpus isotropy report")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_isotropy)

    p = sub.add_parser("metrics", help="aggregate attack records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth-bench", help="synthetic robustness bench")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_bench)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"purekit: {exc.name}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IoFailure as exc:
        print(f"purekit: {exc.name}: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"purekit: {exc.name}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PurekitError as exc:  # pragma: no cover - safety net
        print(f"purekit: {exc.name}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
