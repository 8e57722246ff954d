"""Constraint checks and the exact oracle on a desk-size instance.

Builds a 4-user / 4-RB network, walks through the feasibility verdicts for a
hand-made allocation, then lets the exhaustive solver find the optimum for a
fixed partition and for the joint (partition + allocation) problem.
"""

import numpy as np

from ranslice import (
    Allocation,
    ControllerAssignment,
    KnapsackInstance,
    ScenarioConfig,
    alloc_to_text,
    exhaustive_solve,
    exhaustive_solve_joint,
    generate_topology,
    is_feasible,
    knapsack_solve,
    objective,
    sample_channel,
)

net = generate_topology(ScenarioConfig(num_embb=2, num_urllc=2, num_rbs=4, k_max=3), seed=11)
ch = sample_channel(net, np.random.default_rng(5))
assignment = ControllerAssignment(owner=(0, 0, 1, 1))

print("cells own:", {b: assignment.partition(b) for b in (0, 1)})
print("users per cell:", {b: net.users_of(b) for b in (0, 1)})

print()
print("=" * 64)
print("Hand-made allocations and their verdicts")
print("=" * 64)
one_each = np.zeros((4, 4), dtype=np.uint8)
for u, k in zip(range(4), range(4)):
    one_each[u, k] = 1
for name, x in (
    ("empty", np.zeros((4, 4), dtype=np.uint8)),
    ("one RB each", one_each),
):
    rep = is_feasible(Allocation(x=x, assignment=assignment), ch, net)
    val = objective(Allocation(x=x, assignment=assignment), ch, net)
    print(
        f"{name:>12}: fairness={rep.fairness} ofdma={rep.ofdma} borrowing={rep.borrowing}"
        f" rate={rep.rate} delay={rep.delay} -> feasible={rep.feasible}, {val / 1e6:.3f} Mbps"
    )
    if rep.witnesses:
        print(f"{'':>14}witnesses: {rep.witnesses}")

print()
print("=" * 64)
print("Exact optimum under the fixed (0,0,1,1) partition")
print("=" * 64)
sol = exhaustive_solve(net, ch, assignment)
print(f"value {sol.best_value / 1e6:.3f} Mbps after {sol.explored} candidates")
print("pairs (user rb):")
print(alloc_to_text(sol.best_alloc), end="")

print()
print("=" * 64)
print("Joint optimum over every partition")
print("=" * 64)
joint = exhaustive_solve_joint(net, ch)
print(f"value {joint.best_value / 1e6:.3f} Mbps, partition {joint.best_alloc.assignment.owner}")
print(f"gain over the fixed split: {(joint.best_value - sol.best_value) / 1e6:.3f} Mbps")

print()
print("=" * 64)
print("The single-cell core is a knapsack")
print("=" * 64)
inst = KnapsackInstance(items=((60, 10), (100, 20), (120, 30)), capacity=50)
subset, value = knapsack_solve(inst)
print(f"classic instance -> take items {subset}, value {value:g}")
