"""Training signals: prediction losses, classification loss, and the
transition-consistency regularizers.

Prediction quality is scored two ways per prediction depth tau: a KL term
between the posterior stochastic feature and the tau-step-ahead prior,
and a squared feature reconstruction term. tau = 1 is the base loss;
larger tau (latent overshooting) re-rolls the prior transition from every
posterior latent simultaneously.

The regularizers act on encoded features of executed sequences only:
TTC penalizes second differences of the angles between consecutive
transition directions, ATC contrasts direction coherence within an
action-category run against similarity across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import DiagGaussian, DomainError, ParamSet, Tensor, gaussian_kl, sample_reparam
from .model import (
    ModelDims,
    decode_feature,
    deterministic_step,
    encode,
    initial_latent,
    posterior_step,
    prior_head,
    score,
)
from .model import LatentState

P_CLAMP = 1e-7


@dataclass
class LossReport:
    """Every scalar term for one batch; total is the optimized value."""

    l_ce: float
    l_kl: dict
    l_re: dict
    r_sm: float
    r_sp: float
    r_ttc: float
    s_w: float
    s_b: float
    r_atc: float
    r_tcr: float
    total: float

    def to_flat_dict(self) -> dict:
        out = {"l_ce": self.l_ce}
        for tau in sorted(self.l_kl):
            out[f"l_kl_{tau}"] = self.l_kl[tau]
        for tau in sorted(self.l_re):
            out[f"l_re_{tau}"] = self.l_re[tau]
        out.update(
            r_sm=self.r_sm, r_sp=self.r_sp, r_ttc=self.r_ttc,
            s_w=self.s_w, s_b=self.s_b, r_atc=self.r_atc,
            r_tcr=self.r_tcr, total=self.total,
        )
        return out


@dataclass
class DirectionSeq:
    """Consecutive feature differences and the action category causing each."""

    dirs: Tensor          # (T-1, feat) or (N, T-1, feat)
    categories: np.ndarray  # (T-1,) ints, shared across the batch

    def __post_init__(self):
        if self.dirs.values.shape[-2] != len(self.categories):
            raise ValueError("one category per direction required")


def directions(features, categories) -> DirectionSeq:
    """d_t = e_t - e_{t-1}, exactly; categories are carried through.

    Observation t reflects the first t-1 actions, so the transition into
    step t is induced by action t-1: categories[j] labels dirs[j] with the
    category of the j-th action (0-based).
    """
    f = ad.as_tensor(features)
    if f.values.shape[-2] < 2:
        raise ValueError("need at least two feature steps")
    dirs = ad.sub(f[..., 1:, :], f[..., :-1, :])
    return DirectionSeq(dirs, np.asarray(categories, dtype=int))


def _as_batch(dirs: DirectionSeq):
    d = dirs.dirs
    if d.values.ndim == 2:
        return ad.reshape(d, (1,) + d.values.shape), True
    return d, False


def _angles(d: Tensor) -> Tensor:
    """Angle between consecutive directions; zero-norm rows give angle 0."""
    u = d[:, 1:, :]
    v = d[:, :-1, :]
    un = ad.safe_normalize(u)
    vn = ad.safe_normalize(v)
    cos = ad.sum_(ad.mul(un, vn), axis=-1)
    norm_u = np.linalg.norm(u.values, axis=-1)
    norm_v = np.linalg.norm(v.values, axis=-1)
    degenerate = ((norm_u <= 1e-12) | (norm_v <= 1e-12)).astype(d.values.dtype)
    return ad.arccos_clipped(ad.add(cos, Tensor(degenerate)))


def r_ttc(dirs: DirectionSeq):
    """(R_sm, R_sp, R_TTC): smoothness and sparseness of angle changes.

    The second difference c_t = 2*theta_t - theta_{t-1} - theta_{t+1} is
    defined for t = 4..T-1; below five steps there is no valid term and
    all three values are zero. Batched input is averaged over sequences.
    """
    d, _ = _as_batch(dirs)
    n, j = d.values.shape[0], d.values.shape[1]
    if j < 4:
        zero = Tensor(np.zeros(()))
        return zero, zero, zero
    theta = _angles(d)  # (n, j-1), entry k is the angle at t = k+3
    c = ad.sub(ad.mul(2.0, theta[:, 1:-1]), ad.add(theta[:, :-2], theta[:, 2:]))
    r_sm = ad.mul(ad.sum_(ad.mul(c, c)), 1.0 / n)
    r_sp = ad.mul(ad.sum_(ad.abs_(c)), 1.0 / n)
    return r_sm, r_sp, ad.add(r_sm, r_sp)


def _category_runs(categories: np.ndarray) -> list:
    """Maximal runs of one category, as (start, stop) index pairs."""
    runs = []
    start = 0
    for i in range(1, len(categories) + 1):
        if i == len(categories) or categories[i] != categories[start]:
            runs.append((start, i))
            start = i
    return runs


def r_atc(dirs: DirectionSeq):
    """(S_w, S_b, R_ATC) for per-run direction coherence.

    S_w averages, over runs, the mean cosine between a run's directions
    and its mean direction. S_b averages the cosine over all run pairs
    (zero when only one run exists). R_ATC = S_b - S_w, so coherent runs
    with mutually dissimilar means minimize it.
    """
    d, _ = _as_batch(dirs)
    n = d.values.shape[0]
    runs = _category_runs(dirs.categories)
    mus, s_w_terms = [], []
    for start, stop in runs:
        seg = d[:, start:stop, :]
        mu = ad.mean_(seg, axis=1)  # (n, feat)
        mus.append(mu)
        mu_n = ad.safe_normalize(mu)
        seg_n = ad.safe_normalize(seg)
        cos = ad.sum_(ad.mul(ad.reshape(mu_n, (n, 1, -1)), seg_n), axis=-1)
        s_w_terms.append(ad.mean_(cos, axis=-1))
    c = len(runs)
    s_w = ad.mul(ad.sum_(ad.stack(s_w_terms, axis=1)), 1.0 / (c * n))
    if c == 1:
        s_b = Tensor(np.zeros(()))
    else:
        mu_stack = ad.stack(mus, axis=1)  # (n, C, feat)
        mu_norm = ad.safe_normalize(mu_stack)
        # sum over unordered pairs via the Gram identity:
        # ||sum_i u_i||^2 = sum_i ||u_i||^2 + 2 sum_{i<j} u_i . u_j
        total = ad.sum_(mu_norm, axis=1)
        sq_sum = ad.sum_(ad.mul(total, total), axis=-1)
        unit_count = Tensor(
            (np.linalg.norm(mu_stack.values, axis=-1) > 1e-12)
            .sum(axis=-1).astype(d.values.dtype)
        )
        pair_sum = ad.mul(ad.sub(sq_sum, unit_count), 0.5)
        n_pairs = c * (c - 1) / 2.0
        s_b = ad.mul(ad.sum_(pair_sum), 1.0 / (n_pairs * n))
    return s_w, s_b, ad.sub(s_b, s_w)


def loss_ce(p: Tensor, labels) -> Tensor:
    """Mean binary cross-entropy with probabilities clamped at 1e-7."""
    y = np.asarray(labels, dtype=p.values.dtype)
    if np.any(p.values < 0.0) or np.any(p.values > 1.0):
        raise DomainError("success probabilities must lie in [0, 1]")
    pc = ad.clip(p, P_CLAMP, 1.0 - P_CLAMP)
    terms = ad.add(
        ad.mul(Tensor(y), ad.log(pc)),
        ad.mul(Tensor(1.0 - y), ad.log(ad.sub(1.0, pc))),
    )
    return ad.mul(ad.sum_(terms), -1.0 / y.size)


def loss_kl(posteriors: DiagGaussian, priors: DiagGaussian, horizon: int,
            n_sequences: int) -> Tensor:
    """Summed KL(posterior || prior) over all stacked pairs, over N*T."""
    return ad.mul(gaussian_kl(posteriors, priors), 1.0 / (n_sequences * horizon))


def loss_re(targets, decoded, horizon: int, n_sequences: int) -> Tensor:
    """Summed squared feature error over all stacked pairs, over N*T."""
    diff = ad.sub(ad.as_tensor(targets), ad.as_tensor(decoded))
    return ad.mul(ad.sum_(ad.mul(diff, diff)), 1.0 / (n_sequences * horizon))


def _stack_dists(dists: list, axis: int = 1) -> DiagGaussian:
    return DiagGaussian(
        ad.stack([d.mean for d in dists], axis=axis),
        ad.stack([d.stddev for d in dists], axis=axis),
    )


def posterior_pass(e: Tensor, actions: np.ndarray, params: ParamSet,
                   dims: ModelDims, rng: np.random.Generator):
    """Filtered latents over a batch: h, posterior/prior dists, samples."""
    n, horizon = actions.shape[0], actions.shape[1]
    dtype = e.values.dtype
    z = initial_latent(dims, batch=n, dtype=dtype)
    hs, posts, samples = [], [], []
    for t in range(horizon):
        noise = rng.standard_normal((n, dims.stoch)).astype(dtype)
        z = posterior_step(z, actions[:, t], e[:, t, :], params, noise)
        hs.append(z.h)
        posts.append(z.dist)
        samples.append(z.sample)
    h_stack = ad.stack(hs, axis=1)                    # (n, T, det)
    prior_stack = prior_head(h_stack, params)         # one-step priors
    post_stack = _stack_dists(posts)
    sample_stack = ad.stack(samples, axis=1)
    return h_stack, post_stack, prior_stack, sample_stack


def _overshoot_priors(h_stack, sample_stack, actions, params, dims, taus, rng):
    """Multi-step priors from every posterior origin, one shared roll.

    Origin index o (0-based) holds the posterior latent of step o+1; roll
    depth k predicts step o+1+k. Valid origins for depth k are those with
    o + k <= T - 1; the rest roll on clamped actions and are discarded.
    """
    n, horizon = actions.shape[0], actions.shape[1]
    dtype = sample_stack.values.dtype
    taus = sorted(taus)
    max_tau = taus[-1]
    # an origin only matters while some requested depth can still reach a
    # real step from it, so the rolled width shrinks at each tau boundary
    width = horizon - 1
    h = ad.reshape(h_stack[:, :width, :], (n * width, dims.det))
    s = ad.reshape(sample_stack[:, :width, :], (n * width, dims.stoch))
    out = {}
    for k in range(1, max_tau + 1):
        needed = horizon - min(t for t in taus if t >= k)
        if needed < width:
            h = ad.reshape(h, (n, width, dims.det))[:, :needed, :]
            s = ad.reshape(s, (n, width, dims.stoch))[:, :needed, :]
            width = needed
            h = ad.reshape(h, (n * width, dims.det))
            s = ad.reshape(s, (n * width, dims.stoch))
        idx = np.minimum(np.arange(width) + k, horizon - 1)
        a_k = actions[:, idx, :].reshape((n * width, actions.shape[-1]))
        prev = LatentState(h=h, dist=None, sample=s)
        h = deterministic_step(prev, a_k, params)
        dist = prior_head(h, params)
        noise = rng.standard_normal((n * width, dims.stoch)).astype(dtype)
        s = sample_reparam(dist, noise)
        if k in taus:
            n_valid = horizon - k
            shape = (n, width)
            mean = ad.reshape(dist.mean, shape + (dims.stoch,))[:, :n_valid, :]
            std = ad.reshape(dist.stddev, shape + (dims.stoch,))[:, :n_valid, :]
            h_k = ad.reshape(h, shape + (dims.det,))[:, :n_valid, :]
            s_k = ad.reshape(s, shape + (dims.stoch,))[:, :n_valid, :]
            out[k] = (DiagGaussian(mean, std), h_k, s_k)
    return out


def total_loss(batch: dict, params: ParamSet, dims: ModelDims, *,
               lam: float, alpha: float, beta: float, taus,
               rng: np.random.Generator, include_prediction: bool = True):
    """Full objective on one batch; returns (total Tensor, LossReport).

    total = L_ce + L_f^1 + (lam / (T-1)) * sum_tau L_f^tau
            + alpha * R_TTC + beta * R_ATC

    Classification and the regularizers always run on encoded actual
    features; prediction terms are skipped entirely (reported as zero)
    when the schedule has not enabled them yet.
    """
    obs = np.asarray(batch["obs"])
    actions = np.asarray(batch["actions"])
    labels = np.asarray(batch["labels"])
    categories = np.asarray(batch["categories"], dtype=int)
    n, horizon = obs.shape[0], obs.shape[1]

    e = encode(obs, params)                           # (n, T, feat)
    p = score(e, params, dims)
    l_ce = loss_ce(p, labels)

    dirs = directions(e, categories[: horizon - 1])
    r_sm_t, r_sp_t, r_ttc_t = r_ttc(dirs)
    s_w_t, s_b_t, r_atc_t = r_atc(dirs)
    r_tcr_t = ad.add(ad.mul(alpha, r_ttc_t), ad.mul(beta, r_atc_t))

    total = ad.add(l_ce, r_tcr_t)
    # stable reporting keys: configured depths appear even when a schedule
    # or horizon keeps their contribution at zero
    report_taus = [1] + sorted(t for t in set(taus) if 2 <= t <= horizon - 1)
    kl_report = {t: 0.0 for t in report_taus}
    re_report = {t: 0.0 for t in report_taus}

    if include_prediction:
        h_stack, post_stack, prior_stack, sample_stack = posterior_pass(
            e, actions, params, dims, rng)
        # one-step terms skip t = 1 (no latent exists one step before it)
        post1 = DiagGaussian(post_stack.mean[:, 1:, :], post_stack.stddev[:, 1:, :])
        prior1 = DiagGaussian(prior_stack.mean[:, 1:, :], prior_stack.stddev[:, 1:, :])
        l_kl1 = loss_kl(post1, prior1, horizon, n)
        noise1 = rng.standard_normal(prior1.mean.values.shape).astype(e.values.dtype)
        s1 = sample_reparam(prior1, noise1)
        dec1 = decode_feature(LatentState(h=h_stack[:, 1:, :], dist=None, sample=s1),
                              params)
        l_re1 = loss_re(e[:, 1:, :], dec1, horizon, n)
        kl_report[1] = l_kl1.item()
        re_report[1] = l_re1.item()
        total = ad.add(total, ad.add(l_kl1, l_re1))

        valid_taus = sorted(t for t in set(taus) if 2 <= t <= horizon - 1)
        if valid_taus and lam > 0.0:
            rolled = _overshoot_priors(h_stack, sample_stack, actions, params,
                                       dims, valid_taus, rng)
            overshoot = None
            for tau in valid_taus:
                dist_tau, h_tau, s_tau = rolled[tau]
                post_tau = DiagGaussian(post_stack.mean[:, tau:, :],
                                        post_stack.stddev[:, tau:, :])
                l_kl_t = loss_kl(post_tau, dist_tau, horizon, n)
                dec_t = decode_feature(LatentState(h=h_tau, dist=None, sample=s_tau),
                                       params)
                l_re_t = loss_re(e[:, tau:, :], dec_t, horizon, n)
                kl_report[tau] = l_kl_t.item()
                re_report[tau] = l_re_t.item()
                term = ad.add(l_kl_t, l_re_t)
                overshoot = term if overshoot is None else ad.add(overshoot, term)
            total = ad.add(total, ad.mul(lam / (horizon - 1), overshoot))

    report = LossReport(
        l_ce=l_ce.item(),
        l_kl=kl_report,
        l_re=re_report,
        r_sm=r_sm_t.item(),
        r_sp=r_sp_t.item(),
        r_ttc=r_ttc_t.item(),
        s_w=s_w_t.item(),
        s_b=s_b_t.item(),
        r_atc=r_atc_t.item(),
        r_tcr=r_tcr_t.item(),
        total=total.item(),
    )
    return total, report
