"""The controller bandit in isolation.

Runs the exponential-weight controller against a synthetic environment whose
reward depends only on the chosen partition, and shows the probability mass
drifting toward the best arm.
"""

import numpy as np

from ranslice import (
    Exp3State,
    action_probabilities,
    enumerate_controller_actions,
    select_action,
    update,
)

space = enumerate_controller_actions(2, 6, mode="coarse")
print(f"coarse partitions of 6 RBs over 2 cells: {len(space)} arms")
for i, a in enumerate(space.actions):
    print(f"  arm {i}: owners {a.owner}")

# Synthetic preference: the environment likes a 4/2 split best.
target = (0, 0, 0, 0, 1, 1)
means = np.array(
    [8.0 - 2.0 * sum(x != y for x, y in zip(a.owner, target)) for a in space.actions]
)
means = np.clip(means, 0.5, None)  # Mbps-scale rewards
print("\narm mean rewards (Mbps):", np.round(means, 1))

state = Exp3State(len(space), alpha=0.1)
rng = np.random.default_rng(42)
print(f"\n{'round':>6} {'probabilities':^48} {'pulls of best arm'}")
pulls_best = 0
best_arm = int(np.argmax(means))
for t in range(1, 3001):
    arm = select_action(state, rng)
    reward = float(max(0.0, rng.normal(means[arm], 1.0)))
    update(state, arm, reward)
    pulls_best += arm == best_arm
    if t in (1, 10, 100, 500, 1000, 3000):
        probs = action_probabilities(state)
        bars = " ".join(f"{p:5.2f}" for p in probs)
        print(f"{t:>6} [{bars}] {pulls_best}")

probs = action_probabilities(state)
print(f"\nbest arm is {best_arm} {space.actions[best_arm].owner}; "
      f"final probability {probs[best_arm]:.2f}")
