"""Optimization loop with the schedule semantics the experiments rely on.

Adam with global-norm gradient clipping; prediction losses join the
objective at a configurable start epoch; encoder parameters freeze after
a configurable stop epoch; every epoch ends with a validation pass whose
balanced accuracy is recorded on a parameter snapshot. Ensembles average
the scores of the top validation checkpoints.

Identical (dataset, config, seed) reproduce identical checkpoints and
metrics, bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as fm
from .autodiff import NonFiniteError, ParamSet
from .blockworld import Episode
from .losses import total_loss
from .model import ModelDims

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class MetricError(ValueError):
    """A metric is undefined for the given label distribution."""


def balanced_accuracy(preds, labels) -> float:
    """(TPR + TNR) / 2 over boolean predictions; needs both classes."""
    preds = np.asarray(preds, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    if preds.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    pos = labels.sum()
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        raise MetricError("balanced accuracy undefined: labels contain one class")
    tpr = float((preds & labels).sum()) / float(pos)
    tnr = float((~preds & ~labels).sum()) / float(neg)
    return (tpr + tnr) / 2.0


@dataclass(frozen=True)
class TrainConfig:
    dims: ModelDims = field(default_factory=ModelDims)
    lr: float = 1e-4
    clip_norm: float = 10.0
    lam: float = 1e-2
    alpha: float = 1e-2
    beta: float = 1e-2
    predict_start_epoch: int = 1      # first epoch the prediction losses count
    encoder_stop_epoch: int = 0       # last epoch the encoder updates; 0 = never stop
    epochs: int = 150
    batch_size: int = 16
    overshoot_taus: tuple = (2, 4, 8, 16)
    val_fraction: float = 0.2
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        # zero is allowed as a diagnostic (parameters must then stay put)
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if self.predict_start_epoch < 1:
            raise ValueError("predict_start_epoch must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    def effective_encoder_stop(self) -> int:
        return self.encoder_stop_epoch if self.encoder_stop_epoch >= 1 else self.epochs

    def to_dict(self) -> dict:
        d = {
            "dims": self.dims.to_dict(),
            "lr": self.lr, "clip_norm": self.clip_norm, "lam": self.lam,
            "alpha": self.alpha, "beta": self.beta,
            "predict_start_epoch": self.predict_start_epoch,
            "encoder_stop_epoch": self.encoder_stop_epoch,
            "epochs": self.epochs, "batch_size": self.batch_size,
            "overshoot_taus": list(self.overshoot_taus),
            "val_fraction": self.val_fraction, "seed": self.seed,
            "dtype": self.dtype,
        }
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Checkpoint:
    values: dict
    epoch: int
    val_balanced_accuracy: float
    config_hash: str


@dataclass
class TrainResult:
    checkpoints: list
    metrics: list     # one dict per epoch, deterministic fields only
    timings: list     # [{"epoch": int, "wall_time_s": float}]
    params: ParamSet  # final parameter values
    aborted: bool = False


# ---------------------------------------------------------------------------
# model adapters: the loop is shared between the main model and baselines


class FirpAdapter:
    """Latent-dynamics classifier with the full objective."""

    name = "firp"
    encoder_prefix = fm.ENCODER_PREFIX

    def __init__(self, dims: ModelDims, dtype=np.float64):
        self.dims = dims
        self.dtype = np.dtype(dtype)

    def init(self, seed: int) -> ParamSet:
        return fm.init_params(self.dims, seed, dtype=self.dtype)

    def batch_loss(self, params, batch, rng, cfg: TrainConfig, include_prediction):
        return total_loss(
            batch, params, self.dims,
            lam=cfg.lam, alpha=cfg.alpha, beta=cfg.beta,
            taus=cfg.overshoot_taus, rng=rng,
            include_prediction=include_prediction,
        )

    def score_batch(self, params, obs, actions) -> np.ndarray:
        obs = np.asarray(obs, dtype=self.dtype)
        actions = np.asarray(actions, dtype=self.dtype)
        return fm.score_episodes_batch(params, self.dims, obs[:, 0, :], actions)


def batch_from_episodes(episodes) -> dict:
    """Stack a homogeneous episode list into training arrays."""
    cats = episodes[0].category_ids()
    for ep in episodes[1:]:
        if not np.array_equal(ep.category_ids(), cats):
            raise ValueError("episodes mix different action grammars")
    return {
        "obs": np.stack([ep.observations for ep in episodes]),
        "actions": np.stack([ep.action_matrix() for ep in episodes]),
        "labels": np.array([float(ep.label) for ep in episodes]),
        "categories": cats[:-1],
    }


def _cast_batch(batch: dict, dtype) -> dict:
    out = dict(batch)
    for key in ("obs", "actions", "labels"):
        out[key] = np.asarray(batch[key], dtype=dtype)
    return out


# ---------------------------------------------------------------------------
# optimizer


class Adam:
    def __init__(self, params: ParamSet, lr: float):
        self.lr = lr
        self.step_count = 0
        self.m = {k: np.zeros_like(t.values) for k, t in params.items()}
        self.v = {k: np.zeros_like(t.values) for k, t in params.items()}

    def step(self, params: ParamSet, skip=()) -> None:
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - ADAM_BETA1**t
        bc2 = 1.0 - ADAM_BETA2**t
        for name, tensor in params.items():
            if name in skip or tensor.grad is None:
                continue
            g = tensor.grad
            self.m[name] = ADAM_BETA1 * self.m[name] + (1 - ADAM_BETA1) * g
            self.v[name] = ADAM_BETA2 * self.v[name] + (1 - ADAM_BETA2) * g * g
            m_hat = self.m[name] / bc1
            v_hat = self.v[name] / bc2
            tensor.values = tensor.values - self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def clip_global_norm(params: ParamSet, max_norm: float, skip=()) -> float:
    """Scale all gradients so their joint norm is at most max_norm."""
    total = 0.0
    for name, t in params.items():
        if name in skip or t.grad is None:
            continue
        total += float((t.grad * t.grad).sum())
    if not np.isfinite(total):
        raise NonFiniteError("non-finite gradient norm")
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for name, t in params.items():
            if name in skip or t.grad is None:
                continue
            t.grad = t.grad * scale
    return norm


# ---------------------------------------------------------------------------
# training loop


def split_train_val(episodes, val_fraction: float, seed: int):
    idx = np.random.default_rng(seed).permutation(len(episodes))
    n_val = max(1, int(round(val_fraction * len(episodes))))
    val = [episodes[i] for i in idx[:n_val]]
    train = [episodes[i] for i in idx[n_val:]]
    return train, val


def _validation_accuracy(adapter, params, val_batch) -> float:
    probs = adapter.score_batch(params, val_batch["obs"], val_batch["actions"])
    return balanced_accuracy(probs >= 0.5, val_batch["labels"] >= 0.5)


def _frozen_names(adapter, params, epoch: int, cfg: TrainConfig):
    if adapter.encoder_prefix is None or epoch <= cfg.effective_encoder_stop():
        return frozenset()
    return frozenset(n for n in params.names() if n.startswith(adapter.encoder_prefix))


def train(episodes, cfg: TrainConfig, adapter=None) -> TrainResult:
    """Run the full schedule over a training pool of episodes.

    The pool splits into train/validation once (seeded); every epoch
    records averaged loss terms and the balanced accuracy of a checkpoint
    snapshot. A non-finite loss aborts, keeping prior checkpoints.
    """
    if adapter is None:
        adapter = FirpAdapter(cfg.dims, dtype=cfg.dtype)
    train_eps, val_eps = split_train_val(episodes, cfg.val_fraction, cfg.seed)
    if not train_eps:
        raise ValueError("empty training split")
    val_batch = batch_from_episodes(val_eps)
    params = adapter.init(cfg.seed)
    opt = Adam(params, cfg.lr)
    cfg_hash = cfg.hash()

    checkpoints, metrics, timings = [], [], []
    aborted = False
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        include_prediction = epoch >= cfg.predict_start_epoch
        frozen = _frozen_names(adapter, params, epoch, cfg)
        order = np.random.default_rng(
            np.random.SeedSequence((cfg.seed, epoch))).permutation(len(train_eps))
        sums, n_batches = {}, 0
        try:
            for bi in range(0, len(order), cfg.batch_size):
                chunk = [train_eps[i] for i in order[bi:bi + cfg.batch_size]]
                batch = _cast_batch(batch_from_episodes(chunk), cfg.dtype)
                rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, epoch, bi)))
                params.zero_grad()
                total, report = adapter.batch_loss(params, batch, rng, cfg,
                                                   include_prediction)
                total.backward()
                for name in frozen:
                    params[name].grad = None
                clip_global_norm(params, cfg.clip_norm)
                opt.step(params, skip=frozen)
                for key, value in report.to_flat_dict().items():
                    sums[key] = sums.get(key, 0.0) + value
                n_batches += 1
        except NonFiniteError:
            aborted = True

        if aborted:
            break
        row = {"epoch": epoch}
        row.update({k: sums[k] / n_batches for k in sorted(sums)})
        row["val_balanced_accuracy"] = _validation_accuracy(adapter, params, val_batch)
        metrics.append(row)
        checkpoints.append(Checkpoint(
            values=params.copy_values(),
            epoch=epoch,
            val_balanced_accuracy=row["val_balanced_accuracy"],
            config_hash=cfg_hash,
        ))
        timings.append({"epoch": epoch, "wall_time_s": time.perf_counter() - t0})
    return TrainResult(checkpoints=checkpoints, metrics=metrics, timings=timings,
                       params=params, aborted=aborted)


def select_top_k(checkpoints, k: int = 5):
    """Best validation balanced accuracy; ties resolved by earlier epoch."""
    if not checkpoints:
        raise ValueError("no checkpoints to select from")
    ranked = sorted(checkpoints, key=lambda c: (-c.val_balanced_accuracy, c.epoch))
    return ranked[:k]


def ensemble_score(ensemble, adapter, obs1, actions) -> float:
    """Arithmetic mean of member scores for one (initial obs, plan) pair."""
    if not ensemble:
        raise ValueError("empty ensemble")
    params = adapter.init(0)
    total = 0.0
    for ckpt in ensemble:
        params.load_values(ckpt.values)
        total += float(adapter.score_batch(params, np.asarray(obs1)[None, None, :],
                                           np.asarray(actions)[None])[0])
    return total / len(ensemble)


def ensemble_score_batch(ensemble, adapter, obs_batch, actions_batch) -> np.ndarray:
    """Mean member scores for a batch of (initial obs, plan) pairs."""
    if not ensemble:
        raise ValueError("empty ensemble")
    params = adapter.init(0)
    acc = None
    for ckpt in ensemble:
        params.load_values(ckpt.values)
        probs = adapter.score_batch(params, obs_batch, actions_batch)
        acc = probs if acc is None else acc + probs
    return acc / len(ensemble)
