"""Latent-dynamics success classifier.

A deterministic recurrent feature h and a stochastic Gaussian feature s
evolve under the action sequence; the posterior transition reads the
encoded observation, the prior transition runs blind. Open-loop rollout
predicts the full feature trajectory from the initial observation alone,
and a prototype-pooled head turns the (actual plus predicted) feature
sequence into a success probability.

All step functions accept a single state vector or a batch of rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import DiagGaussian, ParamSet, Tensor, gru_cell, init_gru, sample_reparam

STDDEV_FLOOR = 1e-4


@dataclass(frozen=True)
class ModelDims:
    """Layer widths; defaults follow the desk-scale configuration."""

    obs: int = 9
    feat: int = 32
    det: int = 64
    stoch: int = 16
    pool: int = 32
    n_prototypes: int = 4
    temperature: float = 20.0
    action: int = 10

    def __post_init__(self):
        for name in ("obs", "feat", "det", "stoch", "pool", "n_prototypes", "action"):
            if getattr(self, name) < 1:
                raise ValueError(f"dimension {name} must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    def to_dict(self) -> dict:
        return {
            "obs": self.obs, "feat": self.feat, "det": self.det,
            "stoch": self.stoch, "pool": self.pool,
            "n_prototypes": self.n_prototypes,
            "temperature": self.temperature, "action": self.action,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelDims":
        return cls(**d)


@dataclass
class LatentState:
    """Deterministic feature, Gaussian over the stochastic feature, sample."""

    h: Tensor
    dist: DiagGaussian
    sample: Tensor


def _glorot(rng, n_in, n_out, dtype):
    s = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-s, s, (n_in, n_out)).astype(dtype)


def _add_mlp(params: ParamSet, name: str, n_in: int, n_hidden: int, n_out: int,
             rng, dtype) -> None:
    # tiny bias noise keeps relu-dead rows off the exact zero vector, where
    # the pooling cosine is defined as 0 and not differentiable
    params.add(f"{name}.w1", _glorot(rng, n_in, n_hidden, dtype))
    params.add(f"{name}.b1", rng.uniform(-0.01, 0.01, n_hidden).astype(dtype))
    params.add(f"{name}.w2", _glorot(rng, n_hidden, n_out, dtype))
    params.add(f"{name}.b2", rng.uniform(-0.01, 0.01, n_out).astype(dtype))


def _mlp(x, params: ParamSet, name: str) -> Tensor:
    return ad.mlp2(x, params[f"{name}.w1"], params[f"{name}.b1"],
                   params[f"{name}.w2"], params[f"{name}.b2"])


ENCODER_PREFIX = "enc."


def init_params(dims: ModelDims, seed: int, dtype=np.float64) -> ParamSet:
    """All trainable tensors, Glorot-initialized from one seeded stream."""
    rng = np.random.default_rng(seed)
    params = ParamSet()
    _add_mlp(params, "enc", dims.obs, dims.feat, dims.feat, rng, dtype)
    _add_mlp(params, "embed", dims.stoch + dims.action, dims.det, dims.det, rng, dtype)
    init_gru(params, "rnn.", dims.det, dims.det, rng, dtype)
    _add_mlp(params, "post", dims.det + dims.feat, 2 * dims.stoch, 2 * dims.stoch,
             rng, dtype)
    _add_mlp(params, "prior", dims.det, 2 * dims.stoch, 2 * dims.stoch, rng, dtype)
    _add_mlp(params, "dec", dims.stoch + dims.det, dims.feat, dims.feat, rng, dtype)
    _add_mlp(params, "q", dims.feat, dims.pool, dims.pool, rng, dtype)
    params.add("proto", rng.standard_normal((dims.n_prototypes, dims.pool)).astype(dtype))
    params.add("out.w", _glorot(rng, dims.pool, 1, dtype)[:, 0])
    params.add("out.b", np.zeros((), dtype=dtype))
    return params


def encode(obs, params: ParamSet) -> Tensor:
    """Observation vector(s) to feature vector(s) through the 2-layer MLP."""
    return _mlp(ad.as_tensor(obs), params, "enc")


def initial_latent(dims: ModelDims, batch: int | None = None,
                   dtype=np.float64) -> LatentState:
    """Zero h and zero s, the fixed start of every latent trajectory."""
    shape_h = (dims.det,) if batch is None else (batch, dims.det)
    shape_s = (dims.stoch,) if batch is None else (batch, dims.stoch)
    zero_h = Tensor(np.zeros(shape_h, dtype=dtype))
    zero_s = Tensor(np.zeros(shape_s, dtype=dtype))
    ones = Tensor(np.ones(shape_s, dtype=dtype))
    return LatentState(h=zero_h, dist=DiagGaussian(zero_s, ones), sample=zero_s)


def _gaussian_head(y: Tensor, stoch: int) -> DiagGaussian:
    mean = y[..., :stoch]
    std = ad.add(ad.softplus(y[..., stoch:]), STDDEV_FLOOR)
    return DiagGaussian(mean, std)


def deterministic_step(prev: LatentState, a, params: ParamSet) -> Tensor:
    """Shared recurrence: h_t from (h_{t-1}, s_{t-1}, a_t)."""
    x = _mlp(ad.concat([prev.sample, ad.as_tensor(a)], axis=-1), params, "embed")
    return gru_cell(prev.h, x, params, "rnn.")


def posterior_step(prev: LatentState, a, e, params: ParamSet,
                   noise: np.ndarray) -> LatentState:
    """Transition that reads the current observation feature."""
    h = deterministic_step(prev, a, params)
    y = _mlp(ad.concat([h, ad.as_tensor(e)], axis=-1), params, "post")
    dist = _gaussian_head(y, _stoch_of(params))
    return LatentState(h=h, dist=dist, sample=sample_reparam(dist, noise))


def prior_step(prev: LatentState, a, params: ParamSet,
               noise: np.ndarray | None = None) -> LatentState:
    """Blind transition; samples when noise is given, uses the mean otherwise."""
    h = deterministic_step(prev, a, params)
    dist = _gaussian_head(_mlp(h, params, "prior"), _stoch_of(params))
    sample = dist.mean if noise is None else sample_reparam(dist, noise)
    return LatentState(h=h, dist=dist, sample=sample)


def prior_head(h: Tensor, params: ParamSet) -> DiagGaussian:
    return _gaussian_head(_mlp(h, params, "prior"), _stoch_of(params))


def _stoch_of(params: ParamSet) -> int:
    return params["prior.w2"].values.shape[1] // 2


def decode_feature(z: LatentState, params: ParamSet) -> Tensor:
    """Feature estimate from whichever latent (posterior or prior) is given."""
    return _mlp(ad.concat([z.sample, z.h], axis=-1), params, "dec")


def rollout_open_loop(e1, actions, params: ParamSet, dims: ModelDims,
                      mode: str = "mean", rng: np.random.Generator | None = None):
    """Predict features for steps 2..T from the initial feature and the plan.

    Step 1 applies the posterior transition (the initial observation is
    available); later steps chain the prior transition on its own samples.
    Returns (predicted features, all latent states).
    """
    if mode not in ("mean", "sample"):
        raise ValueError(f"bad rollout mode {mode!r}")
    if mode == "sample" and rng is None:
        raise ValueError("sample mode needs an rng")
    e1 = ad.as_tensor(e1)
    acts = np.asarray(actions, dtype=e1.values.dtype)
    single = acts.ndim == 2
    if single:
        acts = acts[None]
    n, horizon = acts.shape[0], acts.shape[1]
    if horizon < 2:
        raise ValueError("rollout needs at least two steps")
    e1_b = e1 if e1.values.ndim == 2 else ad.reshape(e1, (1, dims.feat))

    def draw():
        if mode == "mean":
            return np.zeros((n, dims.stoch), dtype=acts.dtype)
        return rng.standard_normal((n, dims.stoch)).astype(acts.dtype)

    z = posterior_step(initial_latent(dims, batch=n, dtype=acts.dtype),
                       acts[:, 0], e1_b, params, draw())
    latents = [z]
    feats = []
    for t in range(1, horizon):
        noise = None if mode == "mean" else rng.standard_normal(
            (n, dims.stoch)).astype(acts.dtype)
        z = prior_step(z, acts[:, t], params, noise)
        latents.append(z)
        feats.append(decode_feature(z, params))
    if single:
        feats = [ad.reshape(f, (dims.feat,)) for f in feats]
    return feats, latents


def pool_weights(q, prototypes, temperature: float) -> Tensor:
    """Per-step weights from temperature-softmaxed prototype cosines.

    q has shape (..., T, pool); the softmax normalizes over the time axis
    and the M prototype channels are averaged, so the weights sum to one.
    """
    qn = ad.safe_normalize(ad.as_tensor(q))
    pn = ad.safe_normalize(ad.as_tensor(prototypes))
    cos = ad.matmul(qn, ad.transpose2d(pn) if pn.values.ndim == 2 else pn)
    scaled = ad.mul(cos, 1.0 / float(temperature))
    return ad.mean_(ad.softmax(scaled, axis=-2), axis=-1)


def score(features, params: ParamSet, dims: ModelDims) -> Tensor:
    """Success probability from a (..., T, feat) feature sequence."""
    feats = ad.as_tensor(features)
    q = _mlp(feats, params, "q")
    w = pool_weights(q, params["proto"], dims.temperature)
    pooled = ad.sum_(ad.mul(q, ad.reshape(w, w.values.shape + (1,))), axis=-2)
    logit = ad.add(ad.matmul(pooled, params["out.w"]), params["out.b"])
    return ad.sigmoid(logit)


def score_episode(params: ParamSet, dims: ModelDims, obs1, actions,
                  mode: str = "mean", rng=None) -> float:
    """Screening-path probability for one unexecuted plan."""
    e1 = encode(np.asarray(obs1), params)
    feats, _ = rollout_open_loop(e1, actions, params, dims, mode=mode, rng=rng)
    seq = ad.stack([e1] + feats, axis=0)
    return float(score(seq, params, dims).values)


def score_episodes_batch(params: ParamSet, dims: ModelDims, obs1_batch,
                         actions_batch) -> np.ndarray:
    """Deterministic (mean-mode) probabilities for a batch of plans."""
    e1 = encode(np.asarray(obs1_batch), params)
    feats, _ = rollout_open_loop(e1, actions_batch, params, dims, mode="mean")
    seq = ad.stack([e1] + feats, axis=1)
    return np.atleast_1d(score(seq, params, dims).values)


# ---------------------------------------------------------------------------
# checkpoint I/O


def save_params(path, params: ParamSet, dims: ModelDims, meta: dict) -> None:
    """Binary parameter blob plus a JSON sidecar describing the run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **params.copy_values())
    sidecar = dict(meta)
    sidecar["dims"] = dims.to_dict()
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path) -> tuple:
    """Returns (params, dims, meta) for a blob written by save_params."""
    path = Path(path)
    with open(path.with_suffix(".json")) as fh:
        sidecar = json.load(fh)
    dims = ModelDims.from_dict(sidecar.pop("dims"))
    blob = np.load(path if path.suffix == ".npz" else path.with_suffix(".npz"))
    dtype = blob[blob.files[0]].dtype
    params = init_params(dims, seed=0, dtype=dtype)
    params.load_values({k: blob[k] for k in blob.files})
    return params, dims, sidecar
