"""Internal baselines for the classification experiments.

  action_mlp:         three-layer MLP over the flattened action plan.
  action_mlp_encoder: same, with the encoded initial observation appended.
  gru_predictor:      plain recurrent feature predictor seeded from the
                      initial feature, feeding the shared scoring head.
  oracle:             the scoring head over encoded *executed* sequences,
                      an upper bound that never predicts anything.

Each is an adapter for training.train(); the gru and oracle baselines call
the exact score() routine the main model uses.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from . import model as fm
from .autodiff import ParamSet, Tensor, gru_cell, init_gru
from .losses import LossReport, loss_ce, loss_re
from .model import ModelDims

HIDDEN = 64


def _empty_report(l_ce: float, l_re: dict | None = None, total: float = 0.0) -> LossReport:
    return LossReport(
        l_ce=l_ce, l_kl={}, l_re=l_re or {}, r_sm=0.0, r_sp=0.0, r_ttc=0.0,
        s_w=0.0, s_b=0.0, r_atc=0.0, r_tcr=0.0, total=total,
    )


class ActionMlpAdapter:
    """Success classification from the action plan alone."""

    name = "a_mlp"
    encoder_prefix = None

    def __init__(self, dims: ModelDims, horizon: int, dtype=np.float64):
        self.dims = dims
        self.horizon = horizon
        self.dtype = np.dtype(dtype)

    def init(self, seed: int) -> ParamSet:
        rng = np.random.default_rng(seed)
        params = ParamSet()
        n_in = self.input_width()
        for i, (a, b) in enumerate(((n_in, HIDDEN), (HIDDEN, HIDDEN), (HIDDEN, 1))):
            s = np.sqrt(6.0 / (a + b))
            params.add(f"m.w{i + 1}", rng.uniform(-s, s, (a, b)).astype(self.dtype))
            params.add(f"m.b{i + 1}", np.zeros(b, dtype=self.dtype))
        return params

    def input_width(self) -> int:
        return self.horizon * self.dims.action

    def _features(self, params, obs, actions) -> Tensor:
        n = actions.shape[0]
        return Tensor(np.asarray(actions, dtype=self.dtype).reshape(n, -1))

    def probs(self, params, obs, actions) -> Tensor:
        x = self._features(params, obs, actions)
        h = ad.mlp2(x, params["m.w1"], params["m.b1"], params["m.w2"], params["m.b2"])
        logit = ad.linear(ad.relu(h), params["m.w3"], params["m.b3"])
        return ad.sigmoid(ad.reshape(logit, (actions.shape[0],)))

    def batch_loss(self, params, batch, rng, cfg, include_prediction):
        p = self.probs(params, batch["obs"], batch["actions"])
        ce = loss_ce(p, batch["labels"])
        return ce, _empty_report(ce.item(), total=ce.item())

    def score_batch(self, params, obs, actions) -> np.ndarray:
        obs = np.asarray(obs, dtype=self.dtype)
        actions = np.asarray(actions, dtype=self.dtype)
        return np.atleast_1d(self.probs(params, obs, actions).values)


class ActionMlpEncoderAdapter(ActionMlpAdapter):
    """Action plan plus the encoded initial observation."""

    name = "a_mlp_enc"
    encoder_prefix = fm.ENCODER_PREFIX

    def init(self, seed: int) -> ParamSet:
        params = super().init(seed)
        rng = np.random.default_rng(seed + 104729)
        d = self.dims
        for nm, (a, b) in (("enc.w1", (d.obs, d.feat)), ("enc.w2", (d.feat, d.feat))):
            s = np.sqrt(6.0 / (a + b))
            params.add(nm, rng.uniform(-s, s, (a, b)).astype(self.dtype))
        params.add("enc.b1", rng.uniform(-0.01, 0.01, d.feat).astype(self.dtype))
        params.add("enc.b2", rng.uniform(-0.01, 0.01, d.feat).astype(self.dtype))
        return params

    def input_width(self) -> int:
        return self.horizon * self.dims.action + self.dims.feat

    def _features(self, params, obs, actions) -> Tensor:
        n = actions.shape[0]
        obs = np.asarray(obs, dtype=self.dtype)
        actions = np.asarray(actions, dtype=self.dtype)
        e1 = fm.encode(obs[:, 0, :], params)
        return ad.concat([e1, Tensor(actions.reshape(n, -1))], axis=1)


class GruPredictorAdapter:
    """Deterministic recurrent predictor with the shared scoring head.

    h_0 is an affine map of the initial feature; each step consumes the
    action vector plus an observation-availability flag; features read
    out affinely. No stochastic latent, no KL: trained with the feature
    reconstruction and classification losses only.
    """

    name = "gru"
    encoder_prefix = fm.ENCODER_PREFIX

    def __init__(self, dims: ModelDims, dtype=np.float64):
        self.dims = dims
        self.dtype = np.dtype(dtype)

    def init(self, seed: int) -> ParamSet:
        rng = np.random.default_rng(seed)
        d = self.dims
        dt = self.dtype
        params = ParamSet()
        for nm, (a, b) in (("enc.w1", (d.obs, d.feat)), ("enc.w2", (d.feat, d.feat)),
                           ("h0.w", (d.feat, d.det)), ("read.w", (d.det, d.feat)),
                           ("q.w1", (d.feat, d.pool)), ("q.w2", (d.pool, d.pool))):
            s = np.sqrt(6.0 / (a + b))
            params.add(nm, rng.uniform(-s, s, (a, b)).astype(dt))
        params.add("enc.b1", rng.uniform(-0.01, 0.01, d.feat).astype(dt))
        params.add("enc.b2", rng.uniform(-0.01, 0.01, d.feat).astype(dt))
        params.add("h0.b", np.zeros(d.det, dtype=dt))
        params.add("read.b", np.zeros(d.feat, dtype=dt))
        params.add("q.b1", rng.uniform(-0.01, 0.01, d.pool).astype(dt))
        params.add("q.b2", rng.uniform(-0.01, 0.01, d.pool).astype(dt))
        init_gru(params, "rnn.", d.action + 1, d.det, rng, dtype=dt)
        params.add("proto", rng.standard_normal((d.n_prototypes, d.pool)).astype(dt))
        s = np.sqrt(6.0 / (d.pool + 1))
        params.add("out.w", rng.uniform(-s, s, d.pool).astype(dt))
        params.add("out.b", np.zeros((), dtype=dt))
        return params

    def _rollout(self, params, e1: Tensor, actions: np.ndarray) -> list:
        actions = np.asarray(actions, dtype=self.dtype)
        n, horizon = actions.shape[0], actions.shape[1]
        flags = np.zeros((horizon, n, 1), dtype=self.dtype)
        flags[0] = 1.0
        h = ad.linear(e1, params["h0.w"], params["h0.b"])
        feats = []
        for t in range(horizon):
            x = np.concatenate([actions[:, t], flags[t]], axis=1)
            h = gru_cell(h, Tensor(x), params, "rnn.")
            if t >= 1:
                feats.append(ad.linear(h, params["read.w"], params["read.b"]))
        return feats

    def _feature_sequence(self, params, obs1, actions) -> Tensor:
        e1 = fm.encode(np.asarray(obs1, dtype=self.dtype), params)
        feats = self._rollout(params, e1, np.asarray(actions))
        return ad.stack([e1] + feats, axis=1)

    def batch_loss(self, params, batch, rng, cfg, include_prediction):
        obs, actions = batch["obs"], batch["actions"]
        n, horizon = obs.shape[0], obs.shape[1]
        e = fm.encode(obs, params)
        p = fm.score(e, params, self.dims)
        ce = loss_ce(p, batch["labels"])
        total = ce
        re_val = 0.0
        if include_prediction:
            e1 = e[:, 0, :]
            feats = self._rollout(params, e1, actions)
            pred = ad.stack(feats, axis=1)
            re = loss_re(e[:, 1:, :], pred, horizon, n)
            total = ad.add(ce, re)
            re_val = re.item()
        report = _empty_report(ce.item(), l_re={1: re_val}, total=total.item())
        return total, report

    def score_batch(self, params, obs, actions) -> np.ndarray:
        seq = self._feature_sequence(params, np.asarray(obs)[:, 0, :], actions)
        return np.atleast_1d(fm.score(seq, params, self.dims).values)


class OracleAdapter:
    """Scores encoded executed observations; the screening upper bound."""

    name = "oracle"
    encoder_prefix = fm.ENCODER_PREFIX

    def __init__(self, dims: ModelDims, dtype=np.float64):
        self.dims = dims
        self.dtype = np.dtype(dtype)

    def init(self, seed: int) -> ParamSet:
        rng = np.random.default_rng(seed)
        d = self.dims
        dt = self.dtype
        params = ParamSet()
        for nm, (a, b) in (("enc.w1", (d.obs, d.feat)), ("enc.w2", (d.feat, d.feat)),
                           ("q.w1", (d.feat, d.pool)), ("q.w2", (d.pool, d.pool))):
            s = np.sqrt(6.0 / (a + b))
            params.add(nm, rng.uniform(-s, s, (a, b)).astype(dt))
        params.add("enc.b1", rng.uniform(-0.01, 0.01, d.feat).astype(dt))
        params.add("enc.b2", rng.uniform(-0.01, 0.01, d.feat).astype(dt))
        params.add("q.b1", rng.uniform(-0.01, 0.01, d.pool).astype(dt))
        params.add("q.b2", rng.uniform(-0.01, 0.01, d.pool).astype(dt))
        params.add("proto", rng.standard_normal((d.n_prototypes, d.pool)).astype(dt))
        s = np.sqrt(6.0 / (d.pool + 1))
        params.add("out.w", rng.uniform(-s, s, d.pool).astype(dt))
        params.add("out.b", np.zeros((), dtype=dt))
        return params

    def probs(self, params, obs) -> Tensor:
        e = fm.encode(np.asarray(obs, dtype=self.dtype), params)
        return fm.score(e, params, self.dims)

    def batch_loss(self, params, batch, rng, cfg, include_prediction):
        p = self.probs(params, batch["obs"])
        ce = loss_ce(p, batch["labels"])
        return ce, _empty_report(ce.item(), total=ce.item())

    def score_batch(self, params, obs, actions) -> np.ndarray:
        return np.atleast_1d(self.probs(params, obs).values)


def make_adapter(kind: str, dims: ModelDims, horizon: int, dtype=np.float64):
    from .training import FirpAdapter

    if kind == "firp":
        return FirpAdapter(dims, dtype=dtype)
    if kind == "a_mlp":
        return ActionMlpAdapter(dims, horizon, dtype=dtype)
    if kind == "a_mlp_enc":
        return ActionMlpEncoderAdapter(dims, horizon, dtype=dtype)
    if kind == "gru":
        return GruPredictorAdapter(dims, dtype=dtype)
    if kind == "oracle":
        return OracleAdapter(dims, dtype=dtype)
    raise ValueError(f"unknown model kind {kind!r}")
