"""Command-line frontend: config parsing, experiment orchestration, output.

Subcommands:
    run          one (learner, k) cell over all seeds -> CSV + manifest
    sweep        full learner x k grid of a preset, one CSV per cell
    verify       numerical verification suite + theorem-bound check
    dump-stream  per-round stream dump (JSONL) + final actions per learner

Config files are INI ("flat key-value text with dotted sections"); CLI flags
override file values and the effective configuration is echoed into the run
manifest, which is itself a loadable config file. The env var ROBUST_OCO_SEED
rebases the default seed list (explicit seeds win). Exit codes: 0 success,
1 runtime failure or verification violation, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import harness, oracle
from . import stream as st
from .harness import EXPERTS, LEARN, OGD, TOPK, UTOPK, ExpertsSettings, RunConfig, preset_config, run_cell
from .losses import LearnParams, RoundLoss

SWEEP_LEARNERS = (OGD, LEARN, TOPK, UTOPK)


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _parse_seeds(text: str) -> list:
    parts = text.replace(",", " ").split()
    return [int(p) for p in parts]


def _default_seeds(n: int) -> list:
    base = os.environ.get("ROBUST_OCO_SEED")
    start = int(base) if base is not None else 1
    return list(range(start, start + n))


def load_config(path: str | None, preset: str | None, overrides: dict) -> RunConfig:
    """Build the effective RunConfig: preset defaults < config file < CLI flags."""
    cp = configparser.ConfigParser()
    if path is not None:
        if not os.path.exists(path):
            raise UsageError(f"config file not found: {path}")
        cp.read(path)

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    preset = overrides.get("preset") or preset or get("run", "preset")
    if preset is None:
        raise UsageError("no preset given (use --preset ridge|svm or set run.preset)")
    if preset not in ("ridge", "svm"):
        raise UsageError(f"unknown preset {preset!r}")

    scale = float(overrides.get("scale") or get("run", "scale", "1.0"))
    base = preset_config(preset)
    T = overrides.get("T") or get("run", "t")
    T = int(T) if T is not None else max(1, int(round(base.T * scale)))

    seeds_text = overrides.get("seeds") or get("run", "seeds")
    if seeds_text is not None:
        seeds = _parse_seeds(seeds_text) if isinstance(seeds_text, str) else list(seeds_text)
    else:
        seeds = _default_seeds(len(base.seeds))

    lam = float(overrides.get("lam") or get("loss", "lam", base.loss.lam))
    family = get("loss", "family", base.loss.family)
    a = float(overrides.get("a") or get("learn", "a", base.params.a))
    b = float(overrides.get("b") or get("learn", "b", base.params.b))

    gen = base.generator
    gen = replace(
        gen,
        dim=int(get("stream", "dim", gen.dim)),
        feature_std=float(get("stream", "feature_std", gen.feature_std)),
        noise_std=float(get("stream", "noise_std", gen.noise_std)),
        mislabel_prob=float(get("stream", "mislabel_prob", gen.mislabel_prob)),
        margin_band=float(get("stream", "margin_band", gen.margin_band)),
    )

    radius_text = overrides.get("radius") or get("run", "radius", "inf")
    radius = math.inf if str(radius_text).strip() in ("inf", "unbounded") else float(radius_text)

    alpha_text = overrides.get("alpha") or get("run", "alpha", "default")
    alpha_text = str(alpha_text).strip()
    step_mode, alpha = harness.FIXED, None
    if alpha_text == "theoretical":
        step_mode = harness.THEORETICAL
    elif alpha_text not in ("default", ""):
        alpha = float(alpha_text)

    experts = ExpertsSettings(
        a_max=float(get("experts", "a_max")) if get("experts", "a_max") else None,
        epsilon=float(get("experts", "epsilon", "1.0")),
        c=float(get("experts", "c", "1.0")),
        beta=float(get("experts", "beta")) if get("experts", "beta") else None,
    )

    def opt_float(section, key, override_key):
        v = overrides.get(override_key) or get(section, key)
        return float(v) if v is not None else None

    learner = overrides.get("learner") or get("run", "learner", LEARN)
    k_text = overrides.get("k") or get("run", "k", "0")
    topk_budget = overrides.get("topk_budget") or get("run", "topk_budget")

    try:
        return RunConfig(
            T=T,
            loss=RoundLoss(family=family, lam=lam),
            params=LearnParams(a=a, b=b),
            generator=gen,
            learner=learner,
            k=int(k_text),
            seeds=seeds,
            operator=get("corruption", "operator"),
            radius=radius,
            alpha=alpha,
            step_mode=step_mode,
            topk_budget=int(topk_budget) if topk_budget is not None else None,
            experts=experts,
            G=opt_float("bounds", "g", "G"),
            L=opt_float("bounds", "l", "L"),
            B=opt_float("bounds", "b", "B"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _preset_name(config: RunConfig) -> str:
    return "ridge" if config.generator.kind == st.RIDGE_MODEL else "svm"


def write_manifest(path: str, config: RunConfig, result: harness.CellResult):
    cp = configparser.ConfigParser()
    cp["run"] = {
        "preset": _preset_name(config),
        "t": str(config.T),
        "seeds": " ".join(str(s) for s in config.seeds),
        "learner": config.learner,
        "k": str(config.k),
        "alpha": ("theoretical" if config.step_mode == harness.THEORETICAL
                  else "default" if config.alpha is None else _fmt(config.alpha)),
        "radius": "inf" if config.radius == math.inf else _fmt(config.radius),
        "scale": "1.0",
    }
    if config.topk_budget is not None:
        cp["run"]["topk_budget"] = str(config.topk_budget)
    cp["loss"] = {"family": config.loss.family, "lam": _fmt(config.loss.lam)}
    cp["learn"] = {"a": _fmt(config.params.a), "b": _fmt(config.params.b)}
    gen = config.generator
    cp["stream"] = {
        "dim": str(gen.dim),
        "feature_std": _fmt(gen.feature_std),
        "noise_std": _fmt(gen.noise_std),
        "mislabel_prob": _fmt(gen.mislabel_prob),
        "margin_band": _fmt(gen.margin_band),
    }
    cp["corruption"] = {"operator": config.operator}
    cp["experts"] = {"epsilon": _fmt(config.experts.epsilon), "c": _fmt(config.experts.c)}
    if config.experts.a_max is not None:
        cp["experts"]["a_max"] = _fmt(config.experts.a_max)
    if config.experts.beta is not None:
        cp["experts"]["beta"] = _fmt(config.experts.beta)
    bounds = {}
    for key, val in (("g", config.G), ("l", config.L), ("b", config.B)):
        if val is not None:
            bounds[key] = _fmt(val)
    if bounds:
        cp["bounds"] = bounds
    for seed, curve in zip(config.seeds, result.curves):
        cp[f"result.seed.{seed}"] = {
            "final_regret": _fmt(curve.final),
            "v_t": _fmt(curve.v_t),
            "delta_s": _fmt(curve.delta_s),
            "comparator_radius": _fmt(curve.comparator_radius),
            "b_clean": _fmt(curve.b_clean),
        }
    cp["result"] = {
        "mean_final_regret": _fmt(float(result.mean[-1])),
        "stderr_final_regret": _fmt(float(result.stderr[-1])),
    }
    with open(path, "w", newline="\n") as fh:
        cp.write(fh)


def write_cell_csv(path: str, result: harness.CellResult):
    with open(path, "w", newline="\n") as fh:
        fh.write("t,mean_regret,stderr_regret\n")
        for t in range(len(result.mean)):
            fh.write(f"{t + 1},{_fmt(result.mean[t])},{_fmt(result.stderr[t])}\n")


def _run_one_cell(config: RunConfig, outdir: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    result = run_cell(config)
    csv_path = os.path.join(outdir, f"regret_{config.learner}_k{config.k}.csv")
    write_cell_csv(csv_path, result)
    write_manifest(os.path.join(outdir, f"manifest_{config.learner}_k{config.k}.ini"), config, result)
    return csv_path


def cmd_run(args) -> int:
    config = load_config(args.config, args.preset, _overrides(args))
    path = _run_one_cell(config, args.out)
    print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config, args.preset, _overrides(args))
    for k in st.k_grid(config.T):
        for learner in SWEEP_LEARNERS:
            cell = replace(config, learner=learner, k=k, topk_budget=None)
            path = _run_one_cell(cell, args.out)
            print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    reports = oracle.default_suite(samples=args.samples, seed=args.seed)
    failed = []
    for rep in oracle.group_reports(reports):
        print(rep.line())
        if rep.violations:
            failed.append(rep.name)
    for k in (0, st.k_grid(200)[1], st.k_grid(200)[2]):
        check, curve, _ = harness.run_theorem_check(T=200, k=k, seed=args.seed % 1000 + 1)
        status = "ok" if check.holds else "VIOLATED"
        print(f"{'theorem_bound[k=%d]' % k:28s} measured={check.measured:.6g} "
              f"bound={check.bound:.6g}  [{status}]")
        if not check.holds:
            failed.append(f"theorem_bound[k={k}]")
    if failed:
        print(f"FAILED checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def cmd_dump_stream(args) -> int:
    config = load_config(args.config, args.preset, _overrides(args))
    os.makedirs(args.out, exist_ok=True)
    seed = config.seeds[0]
    rngs = st.stream_rngs(seed)
    gen = st.resolve_theta_star(config.generator, rngs)
    X, y_clean = st.gen_clean_block(gen, rngs, config.T)
    plan = st.CorruptionPlan(
        k=config.k,
        outlier_rounds=st.sample_outlier_rounds(config.T, config.k, rngs.outliers),
        operator=config.operator,
    )
    y_emitted = st.apply_corruption_block(plan, y_clean, rngs.corruption)
    mask = st.outlier_mask(plan, config.T)

    rounds = np.arange(config.T)
    if args.subsample is not None and args.subsample < config.T:
        sub_rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD0)))
        rounds = np.sort(sub_rng.choice(config.T, size=args.subsample, replace=False))

    dump_path = os.path.join(args.out, "stream.jsonl")
    with open(dump_path, "w", newline="\n") as fh:
        for t in rounds:
            rec = {
                "t": int(t) + 1,
                "is_outlier": bool(mask[t]),
                "x": [float(v) for v in X[t]],
                "y_clean": float(y_clean[t]),
                "y_emitted": float(y_emitted[t]),
            }
            fh.write(json.dumps(rec) + "\n")

    thetas = {"theta_star": [float(v) for v in gen.theta_star]}
    for learner in SWEEP_LEARNERS:
        cell = replace(config, learner=learner, seeds=[seed], topk_budget=None)
        trace = harness.run_episode(cell, seed)
        thetas[learner] = [float(v) for v in trace.theta[-1]]
    thetas_path = os.path.join(args.out, "final_thetas.json")
    with open(thetas_path, "w", newline="\n") as fh:
        json.dump(thetas, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {dump_path} and {thetas_path}")
    return 0


def _overrides(args) -> dict:
    keys = ("T", "k", "seeds", "learner", "alpha", "a", "b", "lam", "radius",
            "scale", "topk_budget", "G", "L", "B", "preset")
    out = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-oco",
                                     description="outlier-robust online convex optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_cell=True):
        p.add_argument("--config", help="INI config file")
        p.add_argument("--preset", choices=("ridge", "svm"))
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--T", type=int)
        p.add_argument("--seeds", help="space/comma separated seed list")
        p.add_argument("--a", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--lam", type=float)
        p.add_argument("--alpha", help="step size: number, 'default' (1/sqrt(T)) or 'theoretical'")
        p.add_argument("--radius", help="domain radius, 'inf' for unbounded")
        p.add_argument("--scale", type=float, help="multiply preset T (k-grid recomputed)")
        if with_cell:
            p.add_argument("--learner", choices=(OGD, LEARN, TOPK, UTOPK, EXPERTS))
            p.add_argument("--k", type=int)
            p.add_argument("--topk-budget", dest="topk_budget", type=int)

    p_run = sub.add_parser("run", help="run one (learner, k) cell")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full learner x k grid")
    add_common(p_sweep, with_cell=False)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the numerical verification suite")
    p_verify.add_argument("--samples", type=int, default=100_000)
    p_verify.add_argument("--seed", type=int, default=2024)
    p_verify.set_defaults(func=cmd_verify)

    p_dump = sub.add_parser("dump-stream", help="dump the generated stream and final actions")
    add_common(p_dump)
    p_dump.add_argument("--subsample", type=int, help="randomly keep this many rounds")
    p_dump.set_defaults(func=cmd_dump_stream)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
