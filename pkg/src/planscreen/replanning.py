"""Screening-and-replanning integration.

A candidate plan is scored without execution; on rejection the block
order advances to the next permutation and the waypoints are re-drawn.
After the iteration cap the last candidate executes regardless. The
experiment runs paired trials: the bare planner's first plan versus the
screened plan from the same initial state.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blockworld import TaskSpec, WorldState, observe, reset, simulate
from .planner import PlanParams, make_plan, plan_params_for, reorder


@dataclass
class TrialRecord:
    seed: int
    iterations: int
    steps: list             # [{"order": [...], "p": float, "accepted": bool}]
    final_accepted: bool
    executed_success: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "iterations": self.iterations,
            "steps": self.steps,
            "final_accepted": self.final_accepted,
            "executed_success": self.executed_success,
        }


def _iteration_seed(trial_seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence((trial_seed, iteration)).generate_state(1)[0])


def screen_and_replan(initial: WorldState, spec: TaskSpec, scorer,
                      threshold: float = 0.5, max_iter: int = 6,
                      horizon: int = 28, sigma: float = 0.005,
                      trial_seed: int = 0):
    """Iterate plan -> score -> accept-or-reorder; returns (plan, record).

    scorer(obs1, action_matrix) -> success probability. The plan of the
    final iteration is returned even when it was rejected.
    """
    obs1 = observe(initial)
    params = plan_params_for(spec, horizon, sigma=sigma,
                             seed=_iteration_seed(trial_seed, 0))
    steps = []
    actions = None
    for it in range(max_iter):
        actions = make_plan(initial, spec, params, horizon=horizon)
        mat = np.stack([a.vector() for a in actions])
        p = float(scorer(obs1, mat))
        accepted = p >= threshold
        steps.append({"order": list(params.order), "p": p, "accepted": accepted})
        if accepted:
            break
        nxt = reorder(params)
        params = PlanParams(order=nxt.order, sigma=sigma,
                            phase_budgets=params.phase_budgets,
                            seed=_iteration_seed(trial_seed, it + 1))
    record = TrialRecord(
        seed=trial_seed,
        iterations=len(steps),
        steps=steps,
        final_accepted=steps[-1]["accepted"],
    )
    return actions, record


def run_experiment(spec: TaskSpec, scorer, n_trials: int = 50,
                   threshold: float = 0.5, max_iter: int = 6,
                   horizon: int = 28, sigma: float = 0.005,
                   seed: int = 0) -> dict:
    """Paired baseline-vs-screened success rates over seeded trials.

    Both branches start from the same initial state; the baseline
    executes the first-order plan the screening loop would see first.
    """
    baseline_hits, screened_hits = 0, 0
    accepted_hits, accepted_n = 0, 0
    iterations_total = 0
    records = []
    for i in range(n_trials):
        trial_seed = seed * 1_000_003 + i
        initial = reset(spec, trial_seed)

        base_params = plan_params_for(spec, horizon, sigma=sigma,
                                      seed=_iteration_seed(trial_seed, 0))
        base_actions = make_plan(initial, spec, base_params, horizon=horizon)
        base_label = simulate(initial, base_actions, spec, seed=trial_seed).label
        baseline_hits += base_label

        actions, record = screen_and_replan(
            initial, spec, scorer, threshold=threshold, max_iter=max_iter,
            horizon=horizon, sigma=sigma, trial_seed=trial_seed)
        label = simulate(initial, actions, spec, seed=trial_seed).label
        record.executed_success = bool(label)
        screened_hits += label
        iterations_total += record.iterations
        if record.final_accepted:
            accepted_n += 1
            accepted_hits += label
        records.append(record)

    return {
        "n_trials": n_trials,
        "max_iter": max_iter,
        "threshold": threshold,
        "variants": [
            {
                "variant": "baseline",
                "overall_success_rate": baseline_hits / n_trials,
                "accepted_only_success_rate": None,
                "n": n_trials,
                "mean_iterations": 1.0,
            },
            {
                "variant": "screened",
                "overall_success_rate": screened_hits / n_trials,
                "accepted_only_success_rate": (
                    accepted_hits / accepted_n if accepted_n else None),
                "n": n_trials,
                "mean_iterations": iterations_total / n_trials,
            },
        ],
        "trials": [r.to_json_dict() for r in records],
    }


def write_results(table: dict, json_path, csv_path) -> None:
    json_path, csv_path = Path(json_path), Path(csv_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "overall_success_rate",
                         "accepted_only_success_rate", "n", "mean_iterations"])
        for row in table["variants"]:
            writer.writerow([
                row["variant"],
                f"{row['overall_success_rate']:.6g}",
                "" if row["accepted_only_success_rate"] is None
                else f"{row['accepted_only_success_rate']:.6g}",
                row["n"],
                f"{row['mean_iterations']:.6g}",
            ])
