"""Scripted plan generator for the block-world tasks.

Each block is handled by the seven-phase grammar

    move_before_grasp -> grasp -> hold -> move -> hold_before_release
        -> release -> move_after_release

with grasp and place waypoints perturbed by seeded Gaussian noise and
straight-line commands clamped per axis to the step limit. A plan is a
pure function of (initial state, spec, params).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .blockworld import (
    CAT_GRASP,
    CAT_HOLD,
    CAT_HOLD_BEFORE_RELEASE,
    CAT_MOVE,
    CAT_MOVE_AFTER_RELEASE,
    CAT_MOVE_BEFORE_GRASP,
    CAT_RELEASE,
    Action,
    ConfigurationError,
    Episode,
    TaskSpec,
    WorldState,
    reset,
    simulate,
)

# phase order and default share of the per-block step budget
PHASE_CATEGORIES = (
    CAT_MOVE_BEFORE_GRASP,
    CAT_GRASP,
    CAT_HOLD,
    CAT_MOVE,
    CAT_HOLD_BEFORE_RELEASE,
    CAT_RELEASE,
    CAT_MOVE_AFTER_RELEASE,
)
PHASE_FRACTIONS = (0.25, 0.05, 0.10, 0.35, 0.10, 0.05, 0.10)

# heights the gripper travels at; clear of resting blocks and of the
# tallest partial tower by more than the collision radius
HOVER_CLEARANCE = 0.08
CARRY_HEIGHT = 0.18


@dataclass(frozen=True)
class PlanParams:
    """Block visiting order (1-based), waypoint noise, per-phase budgets."""

    order: tuple
    sigma: float = 0.0
    phase_budgets: tuple = (2, 1, 1, 2, 1, 1, 1)
    seed: int = 0

    def __post_init__(self):
        k = len(self.order)
        if sorted(self.order) != list(range(1, k + 1)):
            raise ConfigurationError(f"order {self.order} is not a permutation of 1..{k}")
        if len(self.phase_budgets) != 7 or any(b < 1 for b in self.phase_budgets):
            raise ConfigurationError("phase budgets must be 7 positive integers")
        if self.sigma < 0:
            raise ConfigurationError("sigma must be non-negative")

    @property
    def steps_per_block(self) -> int:
        return sum(self.phase_budgets)


def default_phase_budgets(steps_per_block: int) -> tuple:
    """Fraction-based split with every phase >= 1; remainder to move."""
    if steps_per_block < 7:
        raise ConfigurationError(
            f"need at least 7 steps per block, got {steps_per_block}"
        )
    budgets = [max(1, math.floor(f * steps_per_block)) for f in PHASE_FRACTIONS]
    move_idx = 3
    others = sum(b for i, b in enumerate(budgets) if i != move_idx)
    budgets[move_idx] = steps_per_block - others
    if budgets[move_idx] < 1:
        # squeeze the largest non-move phases back to one step each
        budgets = [1] * 7
        budgets[move_idx] = steps_per_block - 6
        if budgets[move_idx] < 1:
            raise ConfigurationError("phase budgets do not fit the horizon")
    return tuple(budgets)


def plan_params_for(spec: TaskSpec, horizon: int, order=None, sigma: float = 0.0,
                    seed: int = 0) -> PlanParams:
    k = spec.n_blocks
    if order is None:
        order = tuple(range(1, k + 1))
    return PlanParams(
        order=tuple(order),
        sigma=sigma,
        phase_budgets=default_phase_budgets(horizon // k),
        seed=seed,
    )


def _advance(pos, waypoints, max_step):
    """One per-axis-clamped step toward the pending waypoint chain."""
    if not waypoints:
        return pos, waypoints, (0.0, 0.0)
    tx, ty = waypoints[0]
    dx = float(np.clip(tx - pos[0], -max_step, max_step))
    dy = float(np.clip(ty - pos[1], -max_step, max_step))
    new = (pos[0] + dx, pos[1] + dy)
    if abs(new[0] - tx) < 1e-12 and abs(new[1] - ty) < 1e-12:
        new = (tx, ty)
        waypoints = waypoints[1:]
    return new, waypoints, (dx, dy)


def make_plan(initial: WorldState, spec: TaskSpec, params: PlanParams,
              horizon: int | None = None) -> list:
    """Emit the per-block 7-phase action sequence for the given order.

    The nominal plan length is K * sum(phase_budgets); when a longer
    horizon is requested the remainder extends the final retreat phase.
    """
    k = spec.n_blocks
    if len(params.order) != k:
        raise ConfigurationError(f"order covers {len(params.order)} blocks, spec has {k}")
    nominal = k * params.steps_per_block
    if horizon is None:
        horizon = nominal
    if horizon < nominal:
        raise ConfigurationError(
            f"horizon {horizon} shorter than {k} x {params.steps_per_block} plan steps"
        )
    pad = horizon - nominal

    rng = np.random.default_rng(params.seed)
    planned = {i: (b.x, b.y) for i, b in enumerate(initial.blocks)}
    hover_y = spec.rest_y + HOVER_CLEARANCE
    if spec.kind == "replacement":
        lo, hi = spec.target_box
        slots = [lo + (j + 0.5) * (hi - lo) / k for j in range(k)]
    else:
        slots = None

    pos = initial.gripper
    actions = []
    level = 0
    for j, block_id in enumerate(params.order):
        idx = block_id - 1
        bx, by = planned[idx]
        eg = rng.normal(0.0, params.sigma, 2) if params.sigma > 0 else np.zeros(2)
        ep = rng.normal(0.0, params.sigma, 2) if params.sigma > 0 else np.zeros(2)
        grasp_pt = (bx + eg[0], by + eg[1])
        if spec.kind == "replacement":
            place_x, place_rest = slots[j], spec.rest_y
        else:
            place_x = spec.base_x
            place_rest = spec.rest_y + level * spec.block_width
            level += 1
        carry_pt = (place_x + ep[0], CARRY_HEIGHT + ep[1])
        planned[idx] = (place_x, place_rest)

        if spec.kind == "replacement":
            carry_chain = [(grasp_pt[0], CARRY_HEIGHT), carry_pt]
            retreat_chain = []
        else:
            carry_chain = [carry_pt]
            retreat_chain = [(spec.base_x, CARRY_HEIGHT)]

        phases = [
            ([(grasp_pt[0], hover_y), grasp_pt], CAT_MOVE_BEFORE_GRASP, 0.0),
            ([], CAT_GRASP, 1.0),
            ([], CAT_HOLD, 0.0),
            (carry_chain, CAT_MOVE, 0.0),
            ([], CAT_HOLD_BEFORE_RELEASE, 0.0),
            ([], CAT_RELEASE, 0.0),
            (retreat_chain, CAT_MOVE_AFTER_RELEASE, 0.0),
        ]
        for p, (chain, category, grip) in enumerate(phases):
            budget = params.phase_budgets[p]
            if p == 6 and j == k - 1:
                budget += pad
            for _ in range(budget):
                pos, chain, (dx, dy) = _advance(pos, chain, spec.max_step)
                actions.append(Action(category, dx, dy, grip))
    return actions


def reorder(params: PlanParams) -> PlanParams:
    """Next block order in the lexicographic cycle (wraps at K!)."""
    order = list(params.order)
    i = len(order) - 2
    while i >= 0 and order[i] >= order[i + 1]:
        i -= 1
    if i < 0:
        order = sorted(order)
    else:
        j = len(order) - 1
        while order[j] <= order[i]:
            j -= 1
        order[i], order[j] = order[j], order[i]
        order[i + 1:] = reversed(order[i + 1:])
    return replace(params, order=tuple(order))


def generate_episodes(spec: TaskSpec, n: int, horizon: int, sigma: float,
                      seed: int, shuffle_order: bool = True) -> list:
    """Simulate n seeded plan executions; the episode seed reconstructs all."""
    episodes = []
    for i in range(n):
        s = seed * 1_000_003 + i
        episodes.append(generate_episode(spec, s, horizon, sigma, shuffle_order))
    return episodes


def generate_episode(spec: TaskSpec, episode_seed: int, horizon: int, sigma: float,
                     shuffle_order: bool = True) -> Episode:
    state = reset(spec, episode_seed)
    order = tuple(range(1, spec.n_blocks + 1))
    if shuffle_order:
        perm = np.random.default_rng(episode_seed + 2).permutation(spec.n_blocks)
        order = tuple(int(p) + 1 for p in perm)
    params = plan_params_for(spec, horizon, order=order, sigma=sigma,
                             seed=episode_seed + 1)
    actions = make_plan(state, spec, params, horizon=horizon)
    return simulate(state, actions, spec, seed=episode_seed)
