"""Deterministic 2-D block world (x horizontal, y height) on the unit square.

The world supports two tasks: replacement (move every block from a source
interval to a target interval) and stacking (build one tower at a base
coordinate). Physics is snap-based: released blocks fall straight down to
the first support and tumble off deterministically when placed too far off
center; the gripper's swept segment pushes nearby free blocks.

Everything is a pure function of (spec, seed, actions).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

CATEGORIES = (
    "move",
    "grasp",
    "release",
    "hold",
    "move_before_grasp",
    "hold_before_release",
    "move_after_release",
)
CAT_MOVE, CAT_GRASP, CAT_RELEASE, CAT_HOLD, CAT_MOVE_BEFORE_GRASP, \
    CAT_HOLD_BEFORE_RELEASE, CAT_MOVE_AFTER_RELEASE = range(7)
N_CATEGORIES = 7
ACTION_DIM = N_CATEGORIES + 3  # one-hot + (dx, dy, grip)

_SETTLE_EPS = 1e-9
_MAX_TUMBLES = 8


class ConfigurationError(ValueError):
    """The task geometry cannot be instantiated."""


@dataclass(frozen=True)
class TaskSpec:
    """Task geometry and physical tolerances.

    The defaults are tuned so a 28-step, 3-block stacking plan is
    physically traversable and produces a mixed success/failure label
    distribution under small waypoint noise.
    """

    kind: str = "stacking"
    n_blocks: int = 3
    block_width: float = 0.05
    r_grasp: float = 0.012
    r_stable: float = 0.5
    r_col: float = 0.035
    push_dist: float = 0.05
    max_step: float = 0.15
    # replacement geometry
    source_box: tuple = (0.30, 0.46)
    target_box: tuple = (0.52, 0.72)
    # stacking geometry
    floor_span: tuple = (0.365, 0.635)
    base_x: float = 0.5
    base_tol: float = 0.015
    # fraction of seeds that spawn one block adjacent to the stack base
    hazard_rate: float = 0.0
    hazard_offset: tuple = (0.0185, 0.032)
    spawn_exclusion: float = 0.068
    min_separation: float = 0.055
    gripper_start: tuple = ((0.485, 0.515), (0.16, 0.20))

    def __post_init__(self):
        if self.kind not in ("replacement", "stacking"):
            raise ConfigurationError(f"unknown task kind {self.kind!r}")
        if self.n_blocks < 1:
            raise ConfigurationError("need at least one block")
        for name in ("block_width", "r_grasp", "r_stable", "r_col", "push_dist", "max_step"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")

    @property
    def rest_y(self) -> float:
        return self.block_width / 2.0

    @property
    def stable_tol(self) -> float:
        """Max horizontal offset from the support center that still rests."""
        return self.r_stable * self.block_width / 2.0


@dataclass(frozen=True)
class Block:
    x: float
    y: float
    width: float
    attached: bool = False


@dataclass(frozen=True)
class WorldState:
    spec: TaskSpec
    gripper: tuple
    grip_closed: bool
    blocks: tuple


@dataclass(frozen=True)
class Action:
    """One-hot action category plus a continuous (dx, dy, grip) command."""

    category: int
    dx: float = 0.0
    dy: float = 0.0
    grip: float = 0.0

    def __post_init__(self):
        if not 0 <= self.category < N_CATEGORIES:
            raise ValueError(f"bad action category {self.category}")
        if self.grip not in (0.0, 1.0):
            raise ValueError("grip must be 0 or 1")

    def vector(self) -> np.ndarray:
        v = np.zeros(ACTION_DIM)
        v[self.category] = 1.0
        v[N_CATEGORIES:] = (self.dx, self.dy, self.grip)
        return v

    @classmethod
    def from_vector(cls, v) -> "Action":
        v = np.asarray(v, dtype=float)
        if v.shape != (ACTION_DIM,):
            raise ValueError(f"action vector must have length {ACTION_DIM}")
        cat = int(np.argmax(v[:N_CATEGORIES]))
        return cls(cat, float(v[7]), float(v[8]), float(v[9]))


@dataclass(frozen=True)
class Episode:
    """One executed plan: T actions, T observations, a success label."""

    task: str
    seed: int
    label: bool
    actions: tuple
    observations: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def action_matrix(self) -> np.ndarray:
        return np.stack([a.vector() for a in self.actions])

    def category_ids(self) -> np.ndarray:
        return np.array([a.category for a in self.actions], dtype=int)

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "seed": int(self.seed),
            "label": bool(self.label),
            "actions": [[float(x) for x in a.vector()] for a in self.actions],
            "observations": [[float(x) for x in row] for row in self.observations],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Episode":
        return cls(
            task=d["task"],
            seed=int(d["seed"]),
            label=bool(d["label"]),
            actions=tuple(Action.from_vector(v) for v in d["actions"]),
            observations=np.array(d["observations"], dtype=float),
        )


def save_episodes(path, episodes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for ep in episodes:
            fh.write(json.dumps(ep.to_json_dict()) + "\n")


def load_episodes(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Episode.from_json_dict(json.loads(line)))
    return out


# ---------------------------------------------------------------------------
# construction


def _sample_positions(spec: TaskSpec, rng: np.random.Generator) -> list:
    """Block x coordinates at rest, pairwise separated; seeded and pure."""
    k = spec.n_blocks
    if spec.kind == "replacement":
        lo, hi = spec.source_box
        zones = [(lo, hi)]
        hazard_x = None
    else:
        lo, hi = spec.floor_span
        left = (lo, spec.base_x - spec.spawn_exclusion)
        right = (spec.base_x + spec.spawn_exclusion, hi)
        zones = [z for z in (left, right) if z[1] > z[0]]
        hazard_x = None
        if spec.hazard_rate > 0 and rng.random() < spec.hazard_rate:
            u = rng.uniform(*spec.hazard_offset)
            side = 1.0 if rng.random() < 0.5 else -1.0
            hazard_x = spec.base_x + side * u
    if not zones:
        raise ConfigurationError("no spawn region available")

    for _ in range(4000):
        xs = [] if hazard_x is None else [hazard_x]
        ok = True
        for _ in range(k - len(xs)):
            zone = zones[int(rng.integers(len(zones)))] if len(zones) > 1 else zones[0]
            x = rng.uniform(*zone)
            if any(abs(x - other) < spec.min_separation for other in xs):
                ok = False
                break
            xs.append(x)
        if ok and len(xs) == k:
            if hazard_x is not None:
                # hazard block lands at a random slot index
                j = int(rng.integers(k))
                xs[0], xs[j] = xs[j], xs[0]
            return xs
    raise ConfigurationError(
        f"could not place {k} non-overlapping blocks after 4000 attempts"
    )


def reset(spec: TaskSpec, seed: int) -> WorldState:
    """Seeded initial state: separated resting blocks plus the gripper."""
    rng = np.random.default_rng(seed)
    xs = _sample_positions(spec, rng)
    blocks = tuple(Block(x=float(x), y=spec.rest_y, width=spec.block_width) for x in xs)
    (gx_lo, gx_hi), (gy_lo, gy_hi) = spec.gripper_start
    gripper = (float(rng.uniform(gx_lo, gx_hi)), float(rng.uniform(gy_lo, gy_hi)))
    return WorldState(spec=spec, gripper=gripper, grip_closed=False, blocks=blocks)


# ---------------------------------------------------------------------------
# physics


def _segment_distance(p0, p1, c) -> float:
    px, py = p1[0] - p0[0], p1[1] - p0[1]
    qx, qy = c[0] - p0[0], c[1] - p0[1]
    denom = px * px + py * py
    if denom <= 0.0:
        return float(np.hypot(qx, qy))
    t = min(1.0, max(0.0, (qx * px + qy * py) / denom))
    return float(np.hypot(qx - t * px, qy - t * py))


def _drop(supports, x, from_y, width, spec: TaskSpec, depth=0):
    """Fall straight down from (x, from_y); tumble off unstable landings."""
    x = float(np.clip(x, width / 2.0, 1.0 - width / 2.0))
    candidates = [
        s for s in supports
        if abs(s.x - x) < (s.width + width) / 2.0
        and s.y + (s.width + width) / 2.0 <= from_y + _SETTLE_EPS
    ]
    if not candidates:
        return x, width / 2.0
    top = max(s.y for s in candidates)
    s = min((c for c in candidates if c.y == top), key=lambda c: (abs(c.x - x), c.x))
    offset = x - s.x
    rest_y = s.y + (s.width + width) / 2.0
    # closed tolerance, robust to float round-off at the exact boundary
    if abs(offset) <= spec.stable_tol + _SETTLE_EPS or depth >= _MAX_TUMBLES:
        return x, rest_y
    side = 1.0 if offset >= 0 else -1.0
    # clear the support footprint with a positive gap so the fall-through
    # below cannot re-select the same support on a float boundary
    nx = s.x + side * ((s.width + width) / 2.0 + 0.005)
    return _drop(supports, nx, rest_y, width, spec, depth + 1)


def _settle_all(blocks: list, spec: TaskSpec) -> list:
    """Re-derive every free block's rest position, lowest first."""
    order = sorted(
        (i for i, b in enumerate(blocks) if not b.attached),
        key=lambda i: (blocks[i].y, i),
    )
    placed = []
    out = list(blocks)
    for i in order:
        b = out[i]
        x, y = _drop(placed, b.x, b.y, b.width, spec)
        b = replace(b, x=x, y=y)
        out[i] = b
        placed.append(b)
    return out


def step(state: WorldState, action: Action) -> WorldState:
    """Advance one action. All actions are legal; bad ones have bad outcomes."""
    spec = state.spec
    ms = spec.max_step
    dx = float(np.clip(action.dx, -ms, ms))
    dy = float(np.clip(action.dy, -ms, ms))
    g0 = state.gripper
    g1 = (float(np.clip(g0[0] + dx, 0.0, 1.0)), float(np.clip(g0[1] + dy, 0.0, 1.0)))
    blocks = list(state.blocks)
    grip_closed = state.grip_closed

    for i, b in enumerate(blocks):
        if b.attached:
            blocks[i] = replace(b, x=g1[0], y=g1[1])

    moved = (g1[0] - g0[0], g1[1] - g0[1])
    norm = float(np.hypot(*moved))
    if norm > 0.0:
        ux, uy = moved[0] / norm, moved[1] / norm
        pushed = False
        for i, b in enumerate(blocks):
            if b.attached:
                continue
            if _segment_distance(g0, g1, (b.x, b.y)) <= spec.r_col:
                nx = float(np.clip(b.x + spec.push_dist * ux, 0.0, 1.0))
                ny = float(np.clip(b.y + spec.push_dist * uy, 0.0, 1.0))
                blocks[i] = replace(b, x=nx, y=ny)
                pushed = True
        if pushed:
            blocks = _settle_all(blocks, spec)

    if action.category == CAT_GRASP and action.grip >= 0.5:
        if not any(b.attached for b in blocks):
            free = [(i, b) for i, b in enumerate(blocks) if not b.attached]
            if free:
                i, b = min(free, key=lambda ib: (np.hypot(ib[1].x - g1[0], ib[1].y - g1[1]), ib[0]))
                if np.hypot(b.x - g1[0], b.y - g1[1]) <= spec.r_grasp:
                    blocks[i] = replace(b, x=g1[0], y=g1[1], attached=True)
                    grip_closed = True
    elif action.category == CAT_RELEASE:
        for i, b in enumerate(blocks):
            if b.attached:
                blocks[i] = replace(b, attached=False)
        blocks = _settle_all(blocks, spec)
        grip_closed = False

    return WorldState(spec=spec, gripper=g1, grip_closed=grip_closed, blocks=tuple(blocks))


def observe(state: WorldState) -> np.ndarray:
    """[grip_x, grip_y, grip_closed, b1_x, b1_y, ..., bK_x, bK_y]."""
    out = np.empty(3 + 2 * len(state.blocks))
    out[0], out[1] = state.gripper
    out[2] = 1.0 if state.grip_closed else 0.0
    for i, b in enumerate(state.blocks):
        out[3 + 2 * i] = b.x
        out[4 + 2 * i] = b.y
    return out


def evaluate_success(state: WorldState, spec: TaskSpec) -> bool:
    blocks = state.blocks
    if any(b.attached for b in blocks):
        return False
    if spec.kind == "replacement":
        lo, hi = spec.target_box
        return all(lo <= b.x <= hi for b in blocks)
    # stacking: one tower at the base, consecutive rest heights, offsets in
    # tolerance, bottom block at the base coordinate
    ordered = sorted(blocks, key=lambda b: b.y)
    bottom = ordered[0]
    if abs(bottom.x - spec.base_x) > spec.base_tol + _SETTLE_EPS:
        return False
    if abs(bottom.y - spec.rest_y) > _SETTLE_EPS:
        return False
    for lower, upper in zip(ordered, ordered[1:]):
        if abs(upper.y - lower.y - (lower.width + upper.width) / 2.0) > _SETTLE_EPS:
            return False
        if abs(upper.x - lower.x) > spec.stable_tol + _SETTLE_EPS:
            return False
    return True


def simulate(initial: WorldState, actions, spec: TaskSpec, seed: int = -1) -> Episode:
    """Roll the plan, recording observation t after the first t-1 actions."""
    actions = tuple(actions)
    if not actions:
        raise ValueError("empty action list")
    obs = [observe(initial)]
    state = initial
    for i, a in enumerate(actions):
        state = step(state, a)
        if i < len(actions) - 1:
            obs.append(observe(state))
    label = evaluate_success(state, spec)
    return Episode(
        task=spec.kind,
        seed=seed,
        label=label,
        actions=actions,
        observations=np.stack(obs),
    )
