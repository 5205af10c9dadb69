"""Classification-experiment harness: repeated splits, balanced accuracy,
open-loop prediction error, internal baselines, and feature export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import model as fm
from .baselines import make_adapter
from .blockworld import Episode
from .model import ModelDims
from .training import (
    MetricError,
    TrainConfig,
    balanced_accuracy,
    batch_from_episodes,
    ensemble_score_batch,
    select_top_k,
    train,
)

PREDICTIVE_KINDS = ("firp",)


@dataclass
class EvalReport:
    """Balanced accuracies over repeated splits plus per-episode detail."""

    model: str
    accuracies: list
    per_episode: list        # per run: [{"p": float, "label": bool}, ...]
    prediction_errors: list  # per run: [float, ...]; empty for non-predictive models

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies))

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "accuracies": [float(a) for a in self.accuracies],
            "mean": self.mean,
            "std": self.std,
            "per_episode": self.per_episode,
            "prediction_errors": self.prediction_errors,
        }


def split_dataset(episodes, run_seed: int, test_fraction: float = 0.2):
    """Seeded shuffle into (training pool, held-out test)."""
    idx = np.random.default_rng(run_seed).permutation(len(episodes))
    n_test = max(1, int(round(test_fraction * len(episodes))))
    test = [episodes[i] for i in idx[:n_test]]
    pool = [episodes[i] for i in idx[n_test:]]
    return pool, test


def _run_seed(base_seed: int, run: int) -> int:
    return int(np.random.SeedSequence((base_seed, run)).generate_state(1)[0])


def run_protocol(episodes, cfg: TrainConfig, runs: int, model_kind: str = "firp",
                 top_k: int = 5, threshold: float = 0.5) -> EvalReport:
    """Fresh split, training, and top-k ensembling per run; mean and std
    of the held-out balanced accuracies across runs."""
    labels = [ep.label for ep in episodes]
    if all(labels) or not any(labels):
        raise MetricError("dataset labels contain a single class")
    horizon = episodes[0].horizon
    accs, per_episode, pred_errors = [], [], []
    for run in range(runs):
        seed = _run_seed(cfg.seed, run)
        pool, test = split_dataset(episodes, seed)
        run_cfg = replace(cfg, seed=seed)
        adapter = make_adapter(model_kind, cfg.dims, horizon, dtype=cfg.dtype)
        result = train(pool, run_cfg, adapter)
        ensemble = select_top_k(result.checkpoints, top_k)
        test_batch = batch_from_episodes(test)
        probs = ensemble_score_batch(ensemble, adapter,
                                     test_batch["obs"], test_batch["actions"])
        accs.append(balanced_accuracy(probs >= threshold,
                                      test_batch["labels"] >= 0.5))
        per_episode.append([
            {"p": float(p), "label": bool(ep.label)} for p, ep in zip(probs, test)
        ])
        if model_kind in PREDICTIVE_KINDS:
            params = adapter.init(0)
            params.load_values(ensemble[0].values)
            pred_errors.append([
                prediction_error(params, cfg.dims, ep) for ep in test
            ])
        else:
            pred_errors.append([])
    return EvalReport(model=model_kind, accuracies=accs, per_episode=per_episode,
                      prediction_errors=pred_errors)


def run_baseline(kind: str, episodes, cfg: TrainConfig, runs: int,
                 top_k: int = 5, threshold: float = 0.5) -> EvalReport:
    """The four internal baselines share the protocol code path."""
    if kind not in ("a_mlp", "a_mlp_enc", "gru", "oracle"):
        raise ValueError(f"unknown baseline {kind!r}")
    return run_protocol(episodes, cfg, runs, model_kind=kind, top_k=top_k,
                        threshold=threshold)


def prediction_error(params, dims: ModelDims, episode: Episode) -> float:
    """Euclidean distance between the last actual feature and the last
    feature predicted open-loop from the initial observation."""
    with ad.no_grad():
        e = fm.encode(episode.observations, params)
        feats, _ = fm.rollout_open_loop(e[0, :], episode.action_matrix(), params,
                                        dims, mode="mean")
        diff = e.values[-1] - feats[-1].values
    return float(np.sqrt(np.sum(diff * diff)))


def export_features(params, episodes, path) -> None:
    """CSV of encoded features: one row per time step, 9 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with ad.no_grad():
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            n_feat = None
            for idx, ep in enumerate(episodes):
                feats = fm.encode(ep.observations, params).values
                if n_feat is None:
                    n_feat = feats.shape[1]
                    writer.writerow(["episode", "t", "category"]
                                    + [f"e{i}" for i in range(n_feat)])
                cats = ep.category_ids()
                for t in range(feats.shape[0]):
                    writer.writerow([idx, t + 1, int(cats[t])]
                                    + [f"{v:.9g}" for v in feats[t]])


def load_feature_csv(path):
    """Reads an export_features file back into (ids, ts, categories, matrix)."""
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    ids = np.array([int(r[0]) for r in body])
    ts = np.array([int(r[1]) for r in body])
    cats = np.array([int(r[2]) for r in body])
    feats = np.array([[float(x) for x in r[3:]] for r in body])
    return ids, ts, cats, feats
