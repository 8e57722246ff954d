"""Exponential-weight bandit for the controller's RB partitioning.

The controller treats each candidate partition as one arm. Every round it
mixes weight-proportional exploitation with uniform exploration,

    pi_i = (1 - alpha) * w_i / sum(w) + alpha / n,

plays an arm, maps the observed sum-rate reward into [0, 1) via
1 - 1/(1 + r), divides by the played arm's probability to compensate for
rarely chosen arms, and bumps only that arm's weight:

    w_i <- w_i * exp(alpha * (scaled / pi_i) / n).

Raw rewards are expected in Mbps; the [0, 1) squashing saturates immediately
if fed bps-scale numbers. Weights grow without bound, so when the largest one
passes 1e100 all weights are divided by it; probabilities are invariant to
that common factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .allocation import ControllerAssignment

FULL_MODE_BOUND = 4096
_RENORM_THRESHOLD = 1e100


@dataclass(frozen=True)
class ControllerActionSpace:
    """Enumerated partitions the controller can play.

    'full' mode lists every assignment of each RB to one cell (B**K arms);
    'coarse' mode lists contiguous-block splits by per-cell RB counts, which
    keeps the arm count polynomial when B**K is out of reach.
    """

    actions: tuple[ControllerAssignment, ...]
    mode: str

    def __len__(self) -> int:
        return len(self.actions)


def enumerate_controller_actions(num_gnbs: int, num_rbs: int, mode: str = "full") -> ControllerActionSpace:
    """Build the controller's arm list in deterministic lexicographic order."""
    if num_gnbs < 1 or num_rbs < 1:
        raise ValueError("need at least one gNodeB and one RB")
    if mode == "full":
        total = num_gnbs**num_rbs
        if total > FULL_MODE_BOUND:
            raise ValueError(
                f"full mode would enumerate {total} partitions "
                f"(bound {FULL_MODE_BOUND}); use coarse mode"
            )
        actions = tuple(
            ControllerAssignment(owner=owners)
            for owners in product(range(num_gnbs), repeat=num_rbs)
        )
    elif mode == "coarse":
        actions = []
        # Compositions of num_rbs into num_gnbs non-negative parts, in
        # lexicographic order; each part is a contiguous block of RBs.
        for bars in combinations(range(num_rbs + num_gnbs - 1), num_gnbs - 1):
            edges = (-1,) + bars + (num_rbs + num_gnbs - 1,)
            sizes = [edges[i + 1] - edges[i] - 1 for i in range(num_gnbs)]
            owner = []
            for b, size in enumerate(sizes):
                owner.extend([b] * size)
            actions.append(ControllerAssignment(owner=tuple(owner)))
        actions = tuple(actions)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ControllerActionSpace(actions=actions, mode=mode)


class Exp3State:
    """Weights, exploration rate, and round counter for one controller."""

    def __init__(self, num_actions: int, alpha: float = 0.1):
        if num_actions < 1:
            raise ValueError("need at least one action")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        self.weights = np.ones(num_actions, dtype=np.float64)
        self.alpha = float(alpha)
        self.round = 0

    @property
    def num_actions(self) -> int:
        return len(self.weights)


def action_probabilities(state: Exp3State) -> np.ndarray:
    """Mixture of normalized weights and the uniform distribution."""
    n = state.num_actions
    probs = (1.0 - state.alpha) * state.weights / state.weights.sum() + state.alpha / n
    return probs


def select_action(state: Exp3State, rng: np.random.Generator) -> int:
    """Sample one arm by inverting the CDF of the current probabilities."""
    probs = action_probabilities(state)
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(idx, state.num_actions - 1)


def scale_reward(reward: float) -> float:
    """Squash a non-negative reward into [0, 1) as 1 - 1/(1 + r)."""
    if reward < 0:
        raise ValueError("reward must be non-negative")
    return 1.0 - 1.0 / (1.0 + reward)


def update(state: Exp3State, index: int, raw_reward: float) -> Exp3State:
    """Exponential-weight update of the played arm; other weights untouched.

    The raw reward is squashed to [0, 1) and importance-weighted by the
    played arm's probability before entering the exponent.
    """
    if not 0 <= index < state.num_actions:
        raise ValueError(f"action index {index} out of range")
    probs = action_probabilities(state)
    estimated = scale_reward(raw_reward) / probs[index]
    state.weights[index] *= math.exp(state.alpha * estimated / state.num_actions)
    top = state.weights.max()
    if top > _RENORM_THRESHOLD:
        state.weights /= top
    state.round += 1
    return state
