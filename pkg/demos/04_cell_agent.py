"""One cell agent learning on its own.

A single cell owns two of three RBs and serves two users. The agent explores
its enumerated action table with epsilon-greedy, stores transitions, and
trains its double-DQN until the greedy policy settles on high-rate feasible
allocations for whatever fading it observes.
"""

import numpy as np

from ranslice import (
    Allocation,
    ControllerAssignment,
    DdqnAgent,
    Experience,
    ScenarioConfig,
    agent_reward,
    encode_state,
    enumerate_agent_actions,
    epsilon_greedy,
    generate_topology,
    legal_action_mask,
    sample_channel,
    train_step,
)

net = generate_topology(
    ScenarioConfig(num_gnbs=1, num_embb=1, num_urllc=1, num_rbs=3, k_max=2), seed=9
)
assignment = ControllerAssignment(owner=(0, 0, 0))
own_mask = assignment.own_mask(0)
users = net.users_of(0)

master = enumerate_agent_actions(net.num_rbs, users, (), net.k_max)
legal = legal_action_mask(master, own_mask)
print(f"action table: {len(master)} rows, {int(legal.sum())} legal under this partition")

rng = np.random.default_rng(0)
agent = DdqnAgent(
    gnb_id=0,
    table=master,
    state_dim=len(users) * net.num_rbs + net.num_rbs + 2,
    rng=rng,
    hidden=64,
    batch_size=32,
    epsilon_decay=0.999,
    gamma=0.9,
)

channel_rng = np.random.default_rng(1)
explore_rng = np.random.default_rng(2)
replay_rng = np.random.default_rng(3)


def observe(ch):
    return encode_state(
        ch.gains[list(users)], own_mask, net.qos.r_min_bps, net.qos.d_max_s, -10.0, 2.0
    )


def reward_of(action, ch):
    x = np.zeros((net.num_users, net.num_rbs), dtype=np.uint8)
    ks, local = master.pairs(action)
    if len(ks):
        x[np.asarray(users)[local], ks] = 1
    return agent_reward(Allocation(x=x, assignment=assignment), ch, net, 0)


ch = sample_channel(net, channel_rng)
state = observe(ch)
print(f"\n{'step':>6} {'epsilon':>8} {'mean reward':>12} {'mean loss':>12}")
window_r, window_l = [], []
for step in range(1, 4001):
    action = epsilon_greedy(agent, state, explore_rng, legal=legal)
    r = reward_of(action, ch)
    ch = sample_channel(net, channel_rng)
    next_state = observe(ch)
    agent.buffer.push(Experience(state, action, r, next_state))
    loss = train_step(agent, replay_rng)
    state = next_state
    window_r.append(r)
    if loss is not None:
        window_l.append(loss)
    if step % 500 == 0:
        print(
            f"{step:>6} {agent.epsilon:>8.3f} {np.mean(window_r):>12.3f} "
            f"{np.mean(window_l) if window_l else float('nan'):>12.3f}"
        )
        window_r, window_l = [], []

print("\ngreedy allocations for three fresh fades:")
from ranslice import act_greedy

for _ in range(3):
    ch = sample_channel(net, channel_rng)
    a = act_greedy(agent, observe(ch), legal=legal)
    ks, local = master.pairs(a)
    pairs = [(int(np.asarray(users)[lu]), int(k)) for k, lu in zip(ks, local)]
    print(f"  action {a}: (user, rb) pairs {pairs}, reward {reward_of(a, ch):.3f} Mbps")
