"""Minimal reverse-mode automatic differentiation over dense numpy arrays.

Everything the latent-dynamics model and its losses need lives here: a
Tensor with a recorded operation graph, a small set of composite ops
(fused two-layer MLP, fused GRU cell, diagonal-Gaussian utilities), and a
central-difference gradient checker used as the independent oracle for
every loss term.

Conventions:
  * float64 is the reference precision; tests and gradient checks run in
    float64. float32 is permitted for training speed.
  * forward values are validated finite on construction; NaN/Inf raises
    instead of propagating.
  * randomness never originates here; callers pass explicit noise arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


class ShapeMismatchError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NonFiniteError(FloatingPointError):
    """A NaN or Inf appeared in a computed value."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


def _check_finite(values: np.ndarray, ctx: str) -> None:
    # Summing first makes this a single reduction; NaN/Inf both poison the sum.
    if not np.isfinite(values.sum()):
        raise NonFiniteError(f"non-finite values in {ctx}")


class Tensor:
    """Dense real array plus an optional gradient tape entry."""

    __slots__ = ("values", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, values, requires_grad=False, _parents=(), _backward=None):
        arr = np.asarray(values)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        _check_finite(arr, "tensor construction")
        self.values = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self):
        return self.values.size

    def item(self) -> float:
        return float(self.values)

    def detach(self) -> "Tensor":
        return Tensor(self.values)

    def __repr__(self):
        return f"Tensor(shape={self.values.shape}, grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean_(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def backward(self) -> None:
        """Reverse-mode sweep from a scalar output into leaf gradients."""
        if self.values.size != 1:
            raise ShapeMismatchError("backward() requires a scalar output")
        order = _toposort(self)
        self.grad = np.ones_like(self.values)
        for node in reversed(order):
            if node._backward is None or node.grad is None:
                continue
            grads = node._backward(node.grad)
            for parent, g in zip(node._parents, grads):
                if g is None or not parent.requires_grad:
                    continue
                # assignment may alias g; all later updates re-allocate
                parent.grad = g if parent.grad is None else parent.grad + g


def _toposort(root: Tensor) -> list:
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


_GRAD_DISABLED = 0


class no_grad:
    """Context that skips tape construction; forward values are unchanged."""

    def __enter__(self):
        global _GRAD_DISABLED
        _GRAD_DISABLED += 1
        return self

    def __exit__(self, *exc):
        global _GRAD_DISABLED
        _GRAD_DISABLED -= 1
        return False


def _make(values, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    if not _GRAD_DISABLED and any(p.requires_grad for p in parents):
        return Tensor(values, requires_grad=True, _parents=tuple(parents), _backward=backward)
    return Tensor(values)


# ---------------------------------------------------------------------------
# elementwise and structural ops


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values + b.values

    def bwd(g):
        return _unbroadcast(g, a.values.shape), _unbroadcast(g, b.values.shape)

    return _make(out, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values - b.values

    def bwd(g):
        return _unbroadcast(g, a.values.shape), _unbroadcast(-g, b.values.shape)

    return _make(out, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values * b.values

    def bwd(g):
        return (
            _unbroadcast(g * b.values, a.values.shape),
            _unbroadcast(g * a.values, b.values.shape),
        )

    return _make(out, (a, b), bwd)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.values / b.values

    def bwd(g):
        ga = g / b.values
        gb = -g * a.values / (b.values * b.values)
        return _unbroadcast(ga, a.values.shape), _unbroadcast(gb, b.values.shape)

    return _make(out, (a, b), bwd)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.values @ b.values
    except ValueError as exc:
        raise ShapeMismatchError(f"matmul {a.values.shape} @ {b.values.shape}") from exc
    av, bv = a.values, b.values

    def bwd(g):
        if av.ndim == 1 and bv.ndim == 2:
            return g @ bv.T, np.outer(av, g)
        if av.ndim == 2 and bv.ndim == 1:
            return np.outer(g, bv), av.T @ g
        if av.ndim == 1 and bv.ndim == 1:
            return g * bv, g * av
        if av.ndim >= 2 and bv.ndim == 1:
            # (..., k) @ (k,) -> (...,)
            ga = g[..., None] * bv
            gb = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1)
            return ga, gb
        if av.ndim > 2 and bv.ndim == 2:
            # batched rows against a shared matrix
            ga = g @ bv.T
            gb = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            return ga, gb
        if av.ndim == 2 and bv.ndim == 2:
            return g @ bv.T, av.T @ g
        raise ShapeMismatchError(
            f"unsupported matmul gradient for {av.shape} @ {bv.shape}"
        )

    return _make(out, (a, b), bwd)


def _is_basic_index(idx) -> bool:
    items = idx if isinstance(idx, tuple) else (idx,)
    return all(isinstance(i, (int, slice, type(Ellipsis), type(None))) for i in items)


def getitem(a: Tensor, idx) -> Tensor:
    out = a.values[idx]
    basic = _is_basic_index(idx)

    def bwd(g):
        full = np.zeros_like(a.values)
        if basic:
            # basic indices never alias, so a direct add is enough
            full[idx] += g
        else:
            np.add.at(full, idx, g)
        return (full,)

    return _make(out, (a,), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    out = a.values.reshape(shape)

    def bwd(g):
        return (g.reshape(a.values.shape),)

    return _make(out, (a,), bwd)


def transpose2d(a: Tensor) -> Tensor:
    out = a.values.T

    def bwd(g):
        return (g.T,)

    return _make(out, (a,), bwd)


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.values for t in ts], axis=axis)
    sizes = [t.values.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(out, ts, bwd)


def stack(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    out = np.stack([t.values for t in ts], axis=axis)

    def bwd(g):
        pieces = np.split(g, len(ts), axis=axis)
        return tuple(p.reshape(t.values.shape) for p, t in zip(pieces, ts))

    return _make(out, ts, bwd)


def sum_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.values.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, a.values.shape).copy(),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, a.values.shape).copy(),)

    return _make(out, (a,), bwd)


def mean_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    n = a.values.size if axis is None else np.prod(
        [a.values.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / float(n))


def _unary(a: Tensor, out: np.ndarray, dlocal: np.ndarray) -> Tensor:
    def bwd(g):
        return (g * dlocal,)

    return _make(out, (a,), bwd)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.values, 0.0)
    return _unary(a, out, (a.values > 0.0).astype(a.values.dtype))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.values))
    return _unary(a, out, out * (1.0 - out))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.values)
    return _unary(a, out, 1.0 - out * out)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.values)
    return _unary(a, out, out)


def log(a) -> Tensor:
    a = as_tensor(a)
    if np.any(a.values <= 0.0):
        raise DomainError("log of non-positive value")
    out = np.log(a.values)
    return _unary(a, out, 1.0 / a.values)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    if np.any(a.values < 0.0):
        raise DomainError("sqrt of negative value")
    out = np.sqrt(a.values)
    return _unary(a, out, 0.5 / np.maximum(out, 1e-300))


def softplus(a) -> Tensor:
    a = as_tensor(a)
    out = np.logaddexp(0.0, a.values)
    return _unary(a, out, 1.0 / (1.0 + np.exp(-a.values)))


def abs_(a) -> Tensor:
    a = as_tensor(a)
    return _unary(a, np.abs(a.values), np.sign(a.values))


def maximum_const(a: Tensor, c: float) -> Tensor:
    """Elementwise max against a constant; gradient passes where a > c."""
    a = as_tensor(a)
    out = np.maximum(a.values, c)
    return _unary(a, out, (a.values > c).astype(a.values.dtype))


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp to [lo, hi]; gradient is zero at and beyond the boundaries."""
    a = as_tensor(a)
    out = np.clip(a.values, lo, hi)
    inside = ((a.values > lo) & (a.values < hi)).astype(a.values.dtype)
    return _unary(a, out, inside)


def arccos_clipped(a: Tensor) -> Tensor:
    """arccos of a cosine-like input clamped to [-1, 1].

    At |x| >= 1 the forward value is exact (0 or pi) and the gradient is
    defined as zero, so collinear direction pairs contribute angle 0
    without poisoning the tape with infinities.
    """
    a = as_tensor(a)
    x = np.clip(a.values, -1.0, 1.0)
    out = np.arccos(x)
    inside = np.abs(a.values) < 1.0
    # (1-x)(1+x) avoids the cancellation in 1-x^2 near the boundaries; the
    # floor keeps the slope finite at values one ulp inside them
    tiny = np.finfo(a.values.dtype).tiny
    denom = np.sqrt(np.maximum((1.0 - x) * (1.0 + x), tiny))
    dlocal = np.where(inside, -1.0 / denom, 0.0)
    return _unary(a, out, dlocal.astype(a.values.dtype))


def linear(x, w: Tensor, b: Tensor) -> Tensor:
    return add(matmul(as_tensor(x), w), b)


def mlp2(x, w1: Tensor, b1: Tensor, w2: Tensor, b2: Tensor) -> Tensor:
    """Fused two-layer perceptron: relu(x @ w1 + b1) @ w2 + b2."""
    x = as_tensor(x)
    xv = x.values
    squeeze = xv.ndim == 1
    x2 = xv[None, :] if squeeze else xv
    pre = x2 @ w1.values + b1.values
    hid = np.maximum(pre, 0.0)
    out = hid @ w2.values + b2.values
    if squeeze:
        out = out[0]

    def bwd(g):
        g2 = g[None, :] if squeeze else g
        flat_g = g2.reshape(-1, g2.shape[-1])
        flat_h = hid.reshape(-1, hid.shape[-1])
        gh = (g2 @ w2.values.T) * (pre > 0.0)
        flat_gh = gh.reshape(-1, gh.shape[-1])
        flat_x = x2.reshape(-1, x2.shape[-1])
        gx = gh @ w1.values.T
        gx = gx[0] if squeeze else gx.reshape(xv.shape)
        return (
            gx,
            flat_x.T @ flat_gh,
            flat_gh.sum(axis=0),
            flat_h.T @ flat_g,
            flat_g.sum(axis=0),
        )

    return _make(out, (x, w1, b1, w2, b2), bwd)


# ---------------------------------------------------------------------------
# parameter container


class ParamSet:
    """Named, ordered map of trainable tensors with gradient slots."""

    def __init__(self):
        self._tensors: dict[str, Tensor] = {}

    def add(self, name: str, values: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(values), requires_grad=True)
        self._tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self):
        return iter(self._tensors)

    def __len__(self):
        return len(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    def zero_grad(self) -> None:
        for t in self._tensors.values():
            t.grad = None

    def subset(self, prefixes) -> "ParamSet":
        """View sharing the tensors whose names match any prefix."""
        ps = ParamSet()
        for name, t in self._tensors.items():
            if any(name.startswith(p) for p in prefixes):
                ps._tensors[name] = t
        return ps

    def copy_values(self) -> dict[str, np.ndarray]:
        return {k: t.values.copy() for k, t in self._tensors.items()}

    def load_values(self, blob: dict[str, np.ndarray]) -> None:
        for k, t in self._tensors.items():
            arr = np.asarray(blob[k], dtype=t.values.dtype)
            if arr.shape != t.values.shape:
                raise ShapeMismatchError(f"parameter {k}: {arr.shape} vs {t.values.shape}")
            t.values = arr

    def astype(self, dtype) -> "ParamSet":
        ps = ParamSet()
        for k, t in self._tensors.items():
            ps.add(k, t.values.astype(dtype))
        return ps


# ---------------------------------------------------------------------------
# distribution helpers


@dataclass
class DiagGaussian:
    """Diagonal Gaussian with strictly positive stddev, both on the tape."""

    mean: Tensor
    stddev: Tensor

    def __post_init__(self):
        if self.mean.values.shape != self.stddev.values.shape:
            raise ShapeMismatchError("mean/stddev shape mismatch")
        if np.any(self.stddev.values <= 0.0):
            raise DomainError("stddev must be strictly positive")

    @property
    def dim(self) -> int:
        return self.mean.values.shape[-1]


def gaussian_kl(q: DiagGaussian, p: DiagGaussian) -> Tensor:
    """KL(q || p) for diagonal Gaussians, closed form, summed over all dims."""
    if q.mean.values.shape != p.mean.values.shape:
        raise ShapeMismatchError("KL operands have different shapes")
    ratio = div(q.stddev, p.stddev)
    dm = div(sub(q.mean, p.mean), p.stddev)
    term = sub(mul(0.5, add(mul(ratio, ratio), mul(dm, dm))), add(log(ratio), 0.5))
    return term.sum()


def sample_reparam(d: DiagGaussian, noise: np.ndarray) -> Tensor:
    """mean + stddev * noise; gradient reaches mean and stddev only."""
    noise = np.asarray(noise)
    if noise.shape != d.mean.values.shape:
        raise ShapeMismatchError(f"noise shape {noise.shape} vs {d.mean.values.shape}")
    return add(d.mean, mul(d.stddev, Tensor(noise)))


# ---------------------------------------------------------------------------
# recurrent cell

GRU_PARAM_SUFFIXES = ("W_r", "U_r", "b_r", "W_z", "U_z", "b_z", "W_h", "U_h", "b_h")


def init_gru(params: ParamSet, prefix: str, x_dim: int, h_dim: int, rng: np.random.Generator,
             dtype=np.float64) -> None:
    """Glorot-uniform GRU parameters under `prefix.` names."""
    for gate in ("r", "z", "h"):
        sw = np.sqrt(6.0 / (x_dim + h_dim))
        su = np.sqrt(6.0 / (h_dim + h_dim))
        params.add(f"{prefix}W_{gate}", rng.uniform(-sw, sw, (x_dim, h_dim)).astype(dtype))
        params.add(f"{prefix}U_{gate}", rng.uniform(-su, su, (h_dim, h_dim)).astype(dtype))
        params.add(f"{prefix}b_{gate}", np.zeros(h_dim, dtype=dtype))


def gru_cell(h_prev, x, params: ParamSet, prefix: str = "") -> Tensor:
    """Gated recurrent update, fused into one tape node.

    r = sigmoid(x W_r + h U_r + b_r)
    z = sigmoid(x W_z + h U_z + b_z)
    c = tanh(x W_h + (r*h) U_h + b_h)
    h' = (1 - z) * h + z * c

    Accepts a single vector or a batch of row vectors for h_prev/x.
    """
    h_prev, x = as_tensor(h_prev), as_tensor(x)
    names = [f"{prefix}{s}" for s in GRU_PARAM_SUFFIXES]
    Wr, Ur, br, Wz, Uz, bz, Wh, Uh, bh = (params[n] for n in names)
    hv, xv = h_prev.values, x.values
    if hv.shape[-1] != Ur.values.shape[0] or xv.shape[-1] != Wr.values.shape[0]:
        raise ShapeMismatchError(
            f"gru_cell: h {hv.shape}, x {xv.shape} vs W {Wr.values.shape}, U {Ur.values.shape}"
        )
    squeeze = hv.ndim == 1
    h2 = hv[None, :] if squeeze else hv
    x2 = xv[None, :] if xv.ndim == 1 else xv
    if x2.shape[0] != h2.shape[0]:
        x2 = np.broadcast_to(x2, (h2.shape[0], x2.shape[-1]))
    n_h = h2.shape[-1]

    def sig(v):
        return 1.0 / (1.0 + np.exp(-v))

    # gates share two fused matmuls over [r|z|h]-stacked weights
    w_all = np.concatenate([Wr.values, Wz.values, Wh.values], axis=1)
    u_rz = np.concatenate([Ur.values, Uz.values], axis=1)
    xw = x2 @ w_all
    h_rz = h2 @ u_rz
    r = sig(xw[:, :n_h] + h_rz[:, :n_h] + br.values)
    z = sig(xw[:, n_h:2 * n_h] + h_rz[:, n_h:] + bz.values)
    rh = r * h2
    c = np.tanh(xw[:, 2 * n_h:] + rh @ Uh.values + bh.values)
    out2 = (1.0 - z) * h2 + z * c
    out = out2[0] if squeeze else out2

    def bwd(g):
        g2 = g[None, :] if squeeze else g
        da_c = g2 * z * (1.0 - c * c)
        da_z = g2 * (c - h2) * z * (1.0 - z)
        d_rh = da_c @ Uh.values.T
        da_r = d_rh * h2 * r * (1.0 - r)
        da_all = np.concatenate([da_r, da_z, da_c], axis=1)
        da_rz = da_all[:, :2 * n_h]
        gh = g2 * (1.0 - z) + d_rh * r + da_rz @ u_rz.T
        gx = da_all @ w_all.T
        if squeeze:
            gh_out, gx_out = gh[0], gx[0]
        else:
            gh_out = gh
            gx_out = gx if xv.ndim > 1 else gx.sum(axis=0)
        gw_all = x2.T @ da_all
        gu_rz = h2.T @ da_rz
        return (
            gh_out, gx_out,
            gw_all[:, :n_h], gu_rz[:, :n_h], da_r.sum(axis=0),
            gw_all[:, n_h:2 * n_h], gu_rz[:, n_h:], da_z.sum(axis=0),
            gw_all[:, 2 * n_h:], rh.T @ da_c, da_c.sum(axis=0),
        )

    return _make(out, (h_prev, x, Wr, Ur, br, Wz, Uz, bz, Wh, Uh, bh), bwd)


# ---------------------------------------------------------------------------
# geometry helpers shared by the regularizers and the pooling head


def safe_normalize(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Rows scaled to unit norm; zero-norm rows map to zero with zero grad."""
    x = as_tensor(x)
    sq = sum_(mul(x, x), axis=-1, keepdims=True)
    n = sqrt(maximum_const(sq, eps * eps))
    mask = Tensor((sq.values > eps * eps).astype(x.values.dtype))
    return mul(div(x, n), mask)


def cosine_rows(u: Tensor, v: Tensor) -> Tensor:
    """Cosine similarity along the last axis; zero-norm inputs give 0."""
    return sum_(mul(safe_normalize(u), safe_normalize(v)), axis=-1)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shift = Tensor(np.max(x.values, axis=axis, keepdims=True))
    e = exp(sub(x, shift))
    return div(e, sum_(e, axis=axis, keepdims=True))


# ---------------------------------------------------------------------------
# gradient checking


def grad_check(f: Callable[[ParamSet], Tensor], params: ParamSet, h: float = 1e-5) -> float:
    """Worst relative error between analytic and central-difference gradients.

    The analytic side comes from one backward() sweep; the numeric side
    perturbs every coordinate of every parameter by +-h. The relative
    error denominator is max(|analytic|, |numeric|, 1e-8).
    """
    params.zero_grad()
    y = f(params)
    if y.values.size != 1:
        raise ShapeMismatchError("grad_check target must be scalar")
    _check_finite(y.values, "grad_check output")
    y.backward()
    analytic = {
        k: (t.grad.copy() if t.grad is not None else np.zeros_like(t.values))
        for k, t in params.items()
    }
    worst = 0.0
    with no_grad():
        for name, t in params.items():
            flat = t.values.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up = float(f(params).values)
                flat[i] = orig - h
                dn = float(f(params).values)
                flat[i] = orig
                if not (np.isfinite(up) and np.isfinite(dn)):
                    raise NonFiniteError(f"non-finite f during grad_check at {name}[{i}]")
                numeric = (up - dn) / (2.0 * h)
                a = analytic[name].reshape(-1)[i]
                err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
                worst = max(worst, err)
    return worst
