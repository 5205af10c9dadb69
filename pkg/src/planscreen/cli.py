"""Command-line surface: dataset generation, training, evaluation,
baselines, single-plan scoring, replanning experiments, gradient checks.

Every run echoes its fully resolved configuration into the output
directory; reruns from that file reproduce the outputs. Exit codes:
0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import config as cfgmod
from . import model as fm
from .autodiff import DiagGaussian, ParamSet, Tensor, gaussian_kl, grad_check, gru_cell, init_gru, sample_reparam
from .baselines import make_adapter
from .blockworld import load_episodes, save_episodes
from .config import ConfigError, echo_config, model_dims, parse_config, resolve, task_spec, train_config
from .evaluation import export_features, run_baseline, run_protocol
from .losses import total_loss
from .model import ModelDims
from .planner import generate_episode
from .replanning import run_experiment, write_results
from .training import Checkpoint, select_top_k, train


def _parent_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config field (repeatable)")
    p.add_argument("--out", type=str, default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override every seed")
    p.add_argument("--jobs", type=int, default=1, help="worker process cap")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _parent_parser()
    parser = argparse.ArgumentParser(prog="planscreen",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("gen-data", cmd_gen_data, "simulate plans into an episode JSONL file"),
        ("train", cmd_train, "train a model, writing checkpoints and metrics"),
        ("eval", cmd_eval, "run the repeated-split evaluation protocol"),
        ("baselines", cmd_baselines, "run the four internal baselines"),
        ("predict", cmd_predict, "score one episode's plan with a checkpoint"),
        ("replan", cmd_replan, "run the screening and replanning experiment"),
        ("gradcheck", cmd_gradcheck, "verify gradients against finite differences"),
    ):
        sp = sub.add_parser(name, parents=[parent], help=doc)
        sp.set_defaults(func=fn)
    return parser


def _load_config(args) -> dict:
    return parse_config(args.config, args.overrides, seed=args.seed)


def _dataset_path(cfg: dict) -> Path:
    return Path(cfg["paths"]["dataset"])


def _gen_one(packed):
    spec, seed, horizon, sigma, shuffle = packed
    return generate_episode(spec, seed, horizon, sigma, shuffle)


def cmd_gen_data(args, cfg: dict) -> int:
    rc = resolve(cfg)
    spec = task_spec(rc)
    t = rc["task"]
    base = rc["seeds"]["data"]
    work = [(spec, base * 1_000_003 + i, t["horizon"], t["sigma_plan"],
             t["shuffle_order"]) for i in range(t["n_episodes"])]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            episodes = list(pool.map(_gen_one, work, chunksize=16))
    else:
        episodes = [_gen_one(w) for w in work]
    path = _dataset_path(rc)
    save_episodes(path, episodes)
    echo_config(cfg, args.out)
    n_fail = sum(not e.label for e in episodes)
    print(f"wrote {len(episodes)} episodes to {path} "
          f"({n_fail} failures, {len(episodes) - n_fail} successes)")
    return 0


def save_checkpoint(path, ckpt: Checkpoint, model_kind: str, dims: ModelDims,
                    seed: int, horizon: int) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **ckpt.values)
    meta = {
        "dims": dims.to_dict(),
        "model": model_kind,
        "seed": seed,
        "epoch": ckpt.epoch,
        "val_balanced_accuracy": ckpt.val_balanced_accuracy,
        "config_hash": ckpt.config_hash,
        "horizon": horizon,
    }
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    path = Path(path)
    with open(path.with_suffix(".json")) as fh:
        meta = json.load(fh)
    blob = np.load(path)
    values = {k: blob[k] for k in blob.files}
    return values, meta


def _load_scorer(checkpoint_path):
    """Mean-mode scorer from one checkpoint file or a directory ensemble."""
    path = Path(checkpoint_path)
    files = sorted(path.glob("*.npz")) if path.is_dir() else [path]
    if not files:
        raise FileNotFoundError(f"no checkpoints under {path}")
    members = []
    meta = None
    for f in files:
        values, meta = load_checkpoint(f)
        members.append(values)
    dims = ModelDims.from_dict(meta["dims"])
    adapter = make_adapter(meta["model"], dims, meta["horizon"],
                           dtype=np.float32 if _blob_is_f32(members[0]) else np.float64)
    params = adapter.init(0)

    def scorer(obs1, actions):
        total = 0.0
        obs = np.asarray(obs1)[None, None, :]
        for values in members:
            params.load_values(values)
            total += float(adapter.score_batch(params, obs,
                                               np.asarray(actions)[None])[0])
        return total / len(members)

    return scorer, meta


def _blob_is_f32(values: dict) -> bool:
    return next(iter(values.values())).dtype == np.float32


def cmd_train(args, cfg: dict) -> int:
    rc = resolve(cfg)
    episodes = load_episodes(_dataset_path(rc))
    tc = train_config(rc)
    kind = rc["train"]["model"]
    horizon = episodes[0].horizon
    adapter = make_adapter(kind, tc.dims, horizon, dtype=tc.dtype)
    result = train(episodes, tc, adapter)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.jsonl", "w") as fh:
        for row in result.metrics:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "timing.jsonl", "w") as fh:
        for row in result.timings:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    top = select_top_k(result.checkpoints, rc["train"]["top_k"])
    for rank, ckpt in enumerate(top):
        save_checkpoint(out / "checkpoints" / f"top_{rank}.npz", ckpt, kind,
                        tc.dims, tc.seed, horizon)
    echo_config(cfg, args.out)
    best = top[0]
    summary = {
        "model": kind,
        "epochs_completed": len(result.checkpoints),
        "aborted": result.aborted,
        "best_epoch": best.epoch,
        "best_val_balanced_accuracy": best.val_balanced_accuracy,
    }
    with open(out / "train_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"trained {kind}: best val balanced accuracy "
          f"{best.val_balanced_accuracy:.4f} at epoch {best.epoch}")
    return 0


def cmd_eval(args, cfg: dict) -> int:
    rc = resolve(cfg)
    episodes = load_episodes(_dataset_path(rc))
    tc = train_config(rc)
    kind = rc["train"]["model"]
    report = run_protocol(episodes, tc, runs=rc["eval"]["runs"],
                          model_kind=kind, top_k=rc["train"]["top_k"],
                          threshold=rc["eval"]["threshold"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "eval_report.json", "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if rc["paths"]["checkpoint"]:
        values, meta = load_checkpoint(Path(rc["paths"]["checkpoint"]))
        dims = ModelDims.from_dict(meta["dims"])
        params = fm.init_params(dims, 0,
                                dtype=np.float32 if _blob_is_f32(values) else np.float64)
        params.load_values(values)
        export_features(params, episodes, out / "features.csv")
    echo_config(cfg, args.out)
    print(f"{kind}: balanced accuracy {report.mean:.4f} +- {report.std:.4f} "
          f"over {len(report.accuracies)} runs")
    return 0


def cmd_baselines(args, cfg: dict) -> int:
    rc = resolve(cfg)
    episodes = load_episodes(_dataset_path(rc))
    tc = train_config(rc)
    results = {}
    for kind in ("a_mlp", "a_mlp_enc", "gru", "oracle"):
        report = run_baseline(kind, episodes, tc, runs=rc["eval"]["runs"],
                              top_k=rc["train"]["top_k"],
                              threshold=rc["eval"]["threshold"])
        results[kind] = report.to_json_dict()
        print(f"{kind}: balanced accuracy {report.mean:.4f} +- {report.std:.4f}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "baselines_report.json", "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    echo_config(cfg, args.out)
    return 0


def cmd_predict(args, cfg: dict) -> int:
    rc = resolve(cfg)
    if not rc["paths"]["checkpoint"]:
        raise ConfigError("predict requires paths.checkpoint")
    episodes = load_episodes(_dataset_path(rc))
    idx = rc["predict"]["episode_index"]
    if not 0 <= idx < len(episodes):
        raise ConfigError(f"predict.episode_index {idx} outside dataset of "
                          f"{len(episodes)} episodes")
    ep = episodes[idx]
    scorer, meta = _load_scorer(rc["paths"]["checkpoint"])
    p = scorer(ep.observations[0], ep.action_matrix())
    threshold = rc["eval"]["threshold"]
    result = {
        "episode_index": idx,
        "p": p,
        "threshold": threshold,
        "accepted": bool(p >= threshold),
        "label": bool(ep.label),
    }
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_replan(args, cfg: dict) -> int:
    rc = resolve(cfg)
    if not rc["paths"]["checkpoint"]:
        raise ConfigError("replan requires paths.checkpoint")
    scorer, meta = _load_scorer(rc["paths"]["checkpoint"])
    spec = task_spec(rc, hazard_override=rc["replan"]["hazard_rate"])
    table = run_experiment(
        spec, scorer,
        n_trials=rc["replan"]["n_trials"],
        threshold=rc["replan"]["threshold"],
        max_iter=rc["replan"]["max_iter"],
        horizon=rc["task"]["horizon"],
        sigma=rc["replan"]["sigma"],
        seed=rc["seeds"]["replan"],
    )
    out = Path(args.out)
    write_results(table, out / "replan_report.json", out / "replan_report.csv")
    echo_config(cfg, args.out)
    for row in table["variants"]:
        extra = ("" if row["accepted_only_success_rate"] is None
                 else f", accepted-only {row['accepted_only_success_rate']:.2f}")
        print(f"{row['variant']}: success rate "
              f"{row['overall_success_rate']:.2f}{extra}")
    return 0


# ---------------------------------------------------------------------------
# gradient suite


def _sampled_coords(params: ParamSet, per_param: int, seed: int):
    rng = np.random.default_rng(seed)
    for name, t in params.items():
        size = t.values.size
        take = min(per_param, size)
        for i in sorted(rng.choice(size, size=take, replace=False)):
            yield name, int(i)


def _spot_check(f, params: ParamSet, per_param: int = 3, seed: int = 0,
                h: float = 1e-5) -> float:
    """Worst relative error over a seeded sample of coordinates."""
    params.zero_grad()
    y = f(params)
    y.backward()
    analytic = {k: (t.grad.copy() if t.grad is not None else np.zeros_like(t.values))
                for k, t in params.items()}
    worst = 0.0
    with ad.no_grad():
        for name, i in _sampled_coords(params, per_param, seed):
            flat = params[name].values.reshape(-1)
            orig = flat[i]
            flat[i] = orig + h
            up = float(f(params).values)
            flat[i] = orig - h
            dn = float(f(params).values)
            flat[i] = orig
            numeric = (up - dn) / (2 * h)
            a = analytic[name].reshape(-1)[i]
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
    return worst


def cmd_gradcheck(args, cfg: dict) -> int:
    rc = resolve(cfg)
    dims = model_dims(rc)
    failures = []

    def report(name, err, tol):
        status = "ok" if err < tol else "FAIL"
        print(f"gradcheck {name}: max rel err {err:.3e} (tol {tol:g}) {status}")
        if err >= tol:
            failures.append(name)

    rng = np.random.default_rng(0)
    ps = ParamSet()
    init_gru(ps, "", 5, 6, rng)
    h0, x, w = rng.normal(size=6), rng.normal(size=5), rng.normal(size=6)
    report("gru_cell", grad_check(
        lambda p: (gru_cell(h0, x, p) * Tensor(w)).sum(), ps, h=1e-4), 1e-5)

    ps = ParamSet()
    ps.add("mq", rng.normal(size=4))
    ps.add("rq", rng.normal(size=4) * 0.3)
    ps.add("mp", rng.normal(size=4))
    ps.add("rp", rng.normal(size=4) * 0.3)
    report("gaussian_kl", grad_check(
        lambda p: gaussian_kl(DiagGaussian(p["mq"], ad.exp(p["rq"])),
                              DiagGaussian(p["mp"], ad.exp(p["rp"]))), ps), 1e-5)

    ps = ParamSet()
    ps.add("m", rng.normal(size=4))
    ps.add("s", np.abs(rng.normal(size=4)) + 0.5)
    noise = rng.standard_normal(4)
    report("sample_reparam", grad_check(
        lambda p: ad.sigmoid(sample_reparam(
            DiagGaussian(p["m"], p["s"]), noise)).sum(), ps), 1e-5)

    # the full objective at the configured dims, spot-checked coordinates
    horizon = 8
    batch_rng = np.random.default_rng(1)
    batch = {
        "obs": batch_rng.standard_normal((2, horizon, dims.obs)) * 1.5,
        "actions": batch_rng.random((2, horizon, dims.action)),
        "labels": np.array([1.0, 0.0]),
        "categories": (np.arange(horizon) // 2) % 7,
    }
    params = fm.init_params(dims, 0)

    def f_total(p):
        total, _ = total_loss(batch, p, dims, lam=rc["train"]["lam"],
                              alpha=rc["train"]["alpha"], beta=rc["train"]["beta"],
                              taus=tuple(rc["train"]["overshoot_taus"]),
                              rng=np.random.default_rng(7))
        return total

    report("total_loss", _spot_check(f_total, params, per_param=3, seed=2), 1e-4)

    if failures:
        print(f"gradcheck failed: {', '.join(failures)}")
        return 1
    print("gradcheck passed")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except BrokenPipeError:
        return 1
    except (ConfigError, FileNotFoundError, ValueError, OSError,
            ad.NonFiniteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
