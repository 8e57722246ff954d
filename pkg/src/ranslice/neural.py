"""From-scratch function approximation and the per-cell double-DQN agent.

The value network is a fully connected rectifier MLP ([in, 256, 256, out] by
default) trained with exact backpropagation and bias-corrected Adam, no
autograd involved. The squared loss is taken over the chosen-action outputs
only, so the backward pass through the wide output layer touches just one
column per sample and stays cheap even for action tables in the tens of
thousands.

Each cell's agent owns a main and a target network, a uniform replay ring,
and an enumerated action table. Action selection follows epsilon-greedy over
the actions that are legal under the current partition; targets decouple
selection (argmax on the main network) from evaluation (value from the
target network).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .allocation import Allocation
from .netmodel import (
    GAIN_LOG_FLOOR,
    ChannelState,
    NetworkInstance,
    SliceKind,
    UnstableQueue,
    link_rate,
    packet_delay,
)

ACTION_TABLE_BOUND = 65536
_ENUMERATION_BOUND = 4_194_304
_CHUNK = 65536

CHECKPOINT_MAGIC = b"QNET"
CHECKPOINT_VERSION = 1


class Mlp:
    """Affine-rectifier stack; hidden layers use ReLU, the output is linear."""

    def __init__(self, sizes, weights, biases):
        self.sizes = tuple(int(s) for s in sizes)
        self.weights = weights
        self.biases = biases
        for l, (w, b) in enumerate(zip(weights, biases)):
            if w.shape != (self.sizes[l], self.sizes[l + 1]) or b.shape != (self.sizes[l + 1],):
                raise ValueError("parameter shapes do not chain with the layer sizes")

    @property
    def dtype(self):
        return self.weights[0].dtype

    @classmethod
    def create(cls, sizes, rng: np.random.Generator, dtype=np.float64) -> "Mlp":
        """Seeded init: weights and biases uniform in +-1/sqrt(fan_in)."""
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype))
            biases.append(rng.uniform(-bound, bound, size=fan_out).astype(dtype))
        return cls(sizes, weights, biases)

    def copy(self) -> "Mlp":
        return Mlp(self.sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def copy_from(self, other: "Mlp") -> None:
        if self.sizes != other.sizes:
            raise ValueError("cannot copy parameters between different shapes")
        for w, ow in zip(self.weights, other.weights):
            w[...] = ow
        for b, ob in zip(self.biases, other.biases):
            b[...] = ob


def forward(mlp: Mlp, x) -> np.ndarray:
    """Full forward pass; accepts one sample (1-D) or a batch (2-D)."""
    a = np.asarray(x, dtype=mlp.dtype)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.shape[1] != mlp.sizes[0]:
        raise ValueError(f"input length {a.shape[1]} != expected {mlp.sizes[0]}")
    last = len(mlp.weights) - 1
    for l, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        a = a @ w + b
        if l != last:
            a = np.maximum(a, 0.0)
    return a[0] if single else a


def _hidden_stack(mlp: Mlp, x2d: np.ndarray) -> list[np.ndarray]:
    """Activations of every layer before the output: [input, h1, ..., h_last]."""
    a = np.asarray(x2d, dtype=mlp.dtype)
    acts = [a]
    for w, b in zip(mlp.weights[:-1], mlp.biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
        acts.append(a)
    return acts


def q_for_actions(mlp: Mlp, x2d: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """Per-sample outputs at the given action indices, skipping the full
    output layer (only the selected columns are evaluated)."""
    h = _hidden_stack(mlp, x2d)[-1]
    w_out, b_out = mlp.weights[-1], mlp.biases[-1]
    return np.einsum("nf,fn->n", h, w_out[:, actions]) + b_out[actions]


def _backward(mlp: Mlp, x2d, actions, targets):
    """Shared backward pass. Returns hidden-layer gradients (dense), the
    output-layer gradient in compact column form (unique columns plus the
    accumulated per-column rows), and the loss."""
    dt = mlp.dtype
    x2d = np.atleast_2d(np.asarray(x2d, dtype=dt))
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=dt)
    n = x2d.shape[0]
    if n == 0:
        raise ValueError("batch must be non-empty")
    acts = _hidden_stack(mlp, x2d)
    h = acts[-1]
    w_out, b_out = mlp.weights[-1], mlp.biases[-1]
    q = np.einsum("nf,fn->n", h, w_out[:, actions]) + b_out[actions]
    diff = q - targets
    loss = float(np.mean(diff.astype(np.float64) ** 2))
    g = diff * (2.0 / n)

    cols, inverse = np.unique(actions, return_inverse=True)
    col_w = np.zeros((len(cols), h.shape[1]), dtype=dt)
    np.add.at(col_w, inverse, h * g[:, None])
    col_b = np.zeros(len(cols), dtype=dt)
    np.add.at(col_b, inverse, g)

    hidden_w, hidden_b = [], []
    depth = len(mlp.weights)
    if depth > 1:
        delta = (g[:, None] * w_out[:, actions].T) * (acts[-1] > 0)
        for l in range(depth - 2, -1, -1):
            hidden_w.append(acts[l].T @ delta)
            hidden_b.append(delta.sum(axis=0))
            if l > 0:
                delta = (delta @ mlp.weights[l].T) * (acts[l] > 0)
        hidden_w.reverse()
        hidden_b.reverse()
    return hidden_w, hidden_b, cols, col_w, col_b, loss


def gradients(mlp: Mlp, inputs, actions, targets):
    """Exact gradients of the mean squared error over chosen-action outputs.

    Returns (grads_w, grads_b, loss) with one dense array per layer.
    """
    hidden_w, hidden_b, cols, col_w, col_b, loss = _backward(mlp, inputs, actions, targets)
    gw_out = np.zeros_like(mlp.weights[-1])
    gw_out[:, cols] = col_w.T
    gb_out = np.zeros_like(mlp.biases[-1])
    gb_out[cols] = col_b
    return hidden_w + [gw_out], hidden_b + [gb_out], loss


class AdamState:
    """First/second moment accumulators mirroring one Mlp's parameters.

    Carries one scratch buffer per tensor so updates run fully in place;
    the wide output layer dominates the cost otherwise.
    """

    def __init__(self, mlp: Mlp, learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m_w = [np.zeros_like(w) for w in mlp.weights]
        self.v_w = [np.zeros_like(w) for w in mlp.weights]
        self.m_b = [np.zeros_like(b) for b in mlp.biases]
        self.v_b = [np.zeros_like(b) for b in mlp.biases]
        self._scratch_w = [np.empty_like(w) for w in mlp.weights]
        self._scratch_b = [np.empty_like(b) for b in mlp.biases]


def adam_step(mlp: Mlp, grads_w, grads_b, state: AdamState) -> None:
    """One bias-corrected Adam update, in place on the network parameters."""
    state.step += 1
    c1 = 1.0 - state.beta1**state.step
    c2 = 1.0 - state.beta2**state.step
    for params, grads, ms, vs, scratch in (
        (mlp.weights, grads_w, state.m_w, state.v_w, state._scratch_w),
        (mlp.biases, grads_b, state.m_b, state.v_b, state._scratch_b),
    ):
        for p, g, m, v, t in zip(params, grads, ms, vs, scratch):
            _k.adam_dense(p, g, m, v, t, state.beta1, state.beta2, state.eps,
                          state.learning_rate / c1, c2)


def _fused_train_update(mlp: Mlp, state: AdamState, inputs, actions, targets) -> float:
    """Backward pass plus Adam in one call, arithmetic identical to
    gradients() followed by adam_step().

    The output layer's moments are updated only in the chosen columns (the
    dense gradient is zero elsewhere, so the decayed entries would gain
    exactly zero); the parameter update itself still sweeps every entry, as
    Adam requires.
    """
    hidden_w, hidden_b, cols, col_w, col_b, loss = _backward(mlp, inputs, actions, targets)
    state.step += 1
    c1 = 1.0 - state.beta1**state.step
    c2 = 1.0 - state.beta2**state.step
    lr_c1 = state.learning_rate / c1
    for l, (gw, gb) in enumerate(zip(hidden_w, hidden_b)):
        _k.adam_dense(mlp.weights[l], gw, state.m_w[l], state.v_w[l],
                      state._scratch_w[l], state.beta1, state.beta2, state.eps, lr_c1, c2)
        _k.adam_dense(mlp.biases[l], gb, state.m_b[l], state.v_b[l],
                      state._scratch_b[l], state.beta1, state.beta2, state.eps, lr_c1, c2)
    # Output layer: the gradient is zero outside the chosen columns, so the
    # moment decay gains exactly zero there and only those columns need adds.
    _k.adam_columns(mlp.weights[-1], cols, col_w, state.m_w[-1], state.v_w[-1],
                    state._scratch_w[-1], state.beta1, state.beta2, state.eps, lr_c1, c2)
    mb, vb = state.m_b[-1], state.v_b[-1]
    mb *= state.beta1
    mb[cols] += (1.0 - state.beta1) * col_b
    vb *= state.beta2
    vb[cols] += (1.0 - state.beta2) * col_b**2
    _k.adam_apply(mlp.biases[-1], mb, vb, state._scratch_b[-1], state.eps, lr_c1, c2)
    return loss


@dataclass
class Experience:
    """One transition of a cell agent.

    terminal marks the last step before an environment reset; its target
    does not bootstrap into the next episode.
    """

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool = False


class ReplayBuffer:
    """Fixed-capacity ring; once full, each push evicts the oldest entry."""

    def __init__(self, capacity: int, state_dim: int, dtype=np.float64):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim), dtype=dtype)
        self.next_states = np.zeros((capacity, state_dim), dtype=dtype)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=dtype)
        self.terminals = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.cursor = 0

    def __len__(self) -> int:
        return self.size

    def push(self, exp: Experience) -> None:
        i = self.cursor
        self.states[i] = exp.state
        self.next_states[i] = exp.next_state
        self.actions[i] = exp.action
        self.rewards[i] = exp.reward
        self.terminals[i] = exp.terminal
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int):
        """Uniform sample without replacement:
        (states, actions, rewards, next_states, terminals)."""
        idx = sample_without_replacement(rng, self.size, batch_size)
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.terminals[idx],
        )


def sample_without_replacement(rng: np.random.Generator, size: int, count: int) -> np.ndarray:
    """Floyd's O(count) uniform subset sampler; deterministic given the stream."""
    if count > size:
        raise ValueError(f"cannot draw {count} distinct items from {size}")
    seen: set[int] = set()
    out = np.empty(count, dtype=np.int64)
    for pos, j in enumerate(range(size - count, size)):
        t = int(rng.integers(0, j + 1))
        if t in seen:
            t = j
        seen.add(t)
        out[pos] = t
    return out


@dataclass(frozen=True)
class AgentActionSpace:
    """Enumerated allocation table of one cell.

    Row a assigns RB k to the cell's local user rb_user[a, k] (-1 leaves the
    RB unused). Rows are sorted by their flattened binary matrix, so the
    all-zero action is always row 0. Every row respects the per-user cap and
    within-cell exclusivity; rows that reach outside own_rbs exist only when
    all owned RBs are in use.
    """

    users: tuple[int, ...]
    num_rbs: int
    k_max: int
    own_rbs: tuple[int, ...]
    rb_user: np.ndarray
    user_counts: np.ndarray

    def __len__(self) -> int:
        return self.rb_user.shape[0]

    def pairs(self, action: int):
        """(rb indices, local user indices) used by one row."""
        row = self.rb_user[action]
        ks = np.flatnonzero(row >= 0)
        return ks, row[ks]

    def x_matrix(self, action: int) -> np.ndarray:
        """Binary local-users x RBs matrix of one row."""
        x = np.zeros((len(self.users), self.num_rbs), dtype=np.uint8)
        ks, us = self.pairs(action)
        x[us, ks] = 1
        return x


def enumerate_agent_actions(num_rbs: int, users, own_rbs, k_max: int) -> AgentActionSpace:
    """Enumerate every allocation row a cell may play.

    Kept rows satisfy, by construction: per-user count <= k_max, at most one
    of the cell's users per RB, and the borrowing gate (out-of-partition RBs
    only when every owned RB is assigned). The all-zero row is always
    included. Rows come out in lexicographic order of the flattened binary
    matrix. With own_rbs empty the gate is vacuous, which makes the result
    the master table: the union of the tables of every possible partition.
    """
    users = tuple(int(u) for u in users)
    own_rbs = tuple(int(k) for k in own_rbs)
    n_loc = len(users)
    if n_loc == 0:
        return AgentActionSpace(
            users=users,
            num_rbs=num_rbs,
            k_max=k_max,
            own_rbs=own_rbs,
            rb_user=np.full((1, num_rbs), -1, dtype=np.int8),
            user_counts=np.zeros((1, 0), dtype=np.int16),
        )
    space = (n_loc + 1) ** num_rbs
    if space > _ENUMERATION_BOUND:
        raise ValueError(
            f"action enumeration space {space} exceeds bound {_ENUMERATION_BOUND}; "
            "reduce the RB pool or the user count per cell"
        )
    own_mask = np.zeros(num_rbs, dtype=bool)
    own_mask[list(own_rbs)] = True
    radix = (n_loc + 1) ** np.arange(num_rbs, dtype=np.int64)
    kept = []
    for start in range(0, space, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, space), dtype=np.int64)
        digits = (codes[:, None] // radix[None, :]) % (n_loc + 1)
        rb_user = digits.astype(np.int16) - 1  # -1 = unused, else local user
        used = rb_user >= 0
        ok = np.ones(len(codes), dtype=bool)
        for u in range(n_loc):
            ok &= (rb_user == u).sum(axis=1) <= k_max
        uses_foreign = (used & ~own_mask[None, :]).any(axis=1)
        own_full = used[:, own_mask].all(axis=1)
        ok &= ~uses_foreign | own_full
        kept.append(rb_user[ok])
    rb_user = np.concatenate(kept).astype(np.int8)
    if rb_user.shape[0] > ACTION_TABLE_BOUND:
        raise ValueError(
            f"action table has {rb_user.shape[0]} rows "
            f"(bound {ACTION_TABLE_BOUND}); reduce the RB pool or k_max"
        )
    # Sort rows by the flattened binary matrix (user-major).
    flat = np.zeros((rb_user.shape[0], n_loc * num_rbs), dtype=np.uint8)
    rows, ks = np.nonzero(rb_user >= 0)
    flat[rows, rb_user[rows, ks].astype(np.int64) * num_rbs + ks] = 1
    order = np.lexsort(flat.T[::-1])
    rb_user = rb_user[order]
    counts = np.zeros((rb_user.shape[0], n_loc), dtype=np.int16)
    for u in range(n_loc):
        counts[:, u] = (rb_user == u).sum(axis=1)
    return AgentActionSpace(
        users=users,
        num_rbs=num_rbs,
        k_max=k_max,
        own_rbs=own_rbs,
        rb_user=rb_user,
        user_counts=counts,
    )


def legal_action_mask(table: AgentActionSpace, own_mask: np.ndarray) -> np.ndarray:
    """Rows of a master table that are playable under a given ownership mask."""
    used = table.rb_user >= 0
    uses_foreign = (used & ~own_mask[None, :]).any(axis=1)
    own_full = used[:, own_mask].all(axis=1)
    return ~uses_foreign | own_full


def encode_state(gains_b: np.ndarray, own_mask: np.ndarray, r_min_bps: float,
                 d_max_s: float, norm_mean: float = 0.0, norm_std: float = 1.0) -> np.ndarray:
    """Fixed-length observation of one cell agent.

    Concatenates the z-normalized log10 gains of the cell's users over the
    whole RB pool, the K-bit ownership mask of the current partition, and the
    two service targets (rate floor in Mbps, delay ceiling in ms). Length is
    always users*K + K + 2.
    """
    gains_b = np.asarray(gains_b, dtype=np.float64)
    own_mask = np.asarray(own_mask)
    if gains_b.ndim != 2 or own_mask.shape != (gains_b.shape[1],):
        raise ValueError("gains must be (users x K) and the mask length K")
    z = (np.log10(gains_b + GAIN_LOG_FLOOR) - norm_mean) / norm_std
    return np.concatenate(
        [z.ravel(), own_mask.astype(np.float64), [r_min_bps / 1e6, d_max_s * 1e3]]
    )


class DdqnAgent:
    """One cell's learner: main/target networks, replay, and its action table.

    The network indexes the partition-independent master table; which rows
    are playable depends on the partition, whose ownership bits ride inside
    every encoded state. Bootstrap argmaxes are restricted to the playable
    rows of each stored state (an untrained, never-playable row must not
    steer the targets).

    Training runs in float32 by default; checkpoints on disk are always
    64-bit floats.
    """

    def __init__(self, gnb_id: int, table: AgentActionSpace, state_dim: int,
                 rng: np.random.Generator, hidden: int = 256, learning_rate: float = 0.001,
                 gamma: float = 0.996, epsilon: float = 1.0, epsilon_min: float = 0.01,
                 epsilon_decay: float = 0.9995, replay_capacity: int = 100000,
                 batch_size: int = 64, target_sync_steps: int = 1000,
                 dtype=np.float32):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if state_dim < (len(table.users) + 1) * table.num_rbs:
            raise ValueError(
                "state_dim too small to carry the gain block and ownership mask"
            )
        self.gnb_id = gnb_id
        self.table = table
        self.state_dim = state_dim
        sizes = (state_dim, hidden, hidden, len(table))
        self.main = Mlp.create(sizes, rng, dtype=dtype)
        self.target = self.main.copy()
        self.adam = AdamState(self.main, learning_rate)
        self.buffer = ReplayBuffer(replay_capacity, state_dim, dtype=dtype)
        self.gamma = gamma
        self.epsilon = epsilon
        self.epsilon_min = epsilon_min
        self.epsilon_decay = epsilon_decay
        self.batch_size = batch_size
        self.target_sync_steps = target_sync_steps
        self.train_steps = 0
        self._mask_offset_cache: dict[bytes, np.ndarray] = {}

    def sync_target(self) -> None:
        self.target.copy_from(self.main)

    def _mask_slice(self, states: np.ndarray) -> np.ndarray:
        """Ownership bits carried inside encoded states."""
        start = len(self.table.users) * self.table.num_rbs
        return states[:, start : start + self.table.num_rbs]

    def legality_offsets(self, states: np.ndarray) -> np.ndarray:
        """Per-sample additive offsets (0 for playable rows, -inf otherwise)
        for restricting argmaxes to each state's partition."""
        bits = self._mask_slice(np.atleast_2d(states)) > 0.5
        out = np.empty((bits.shape[0], len(self.table)), dtype=self.main.dtype)
        for i, row in enumerate(bits):
            key = row.tobytes()
            offset = self._mask_offset_cache.get(key)
            if offset is None:
                legal = legal_action_mask(self.table, row)
                offset = np.where(legal, 0.0, -np.inf).astype(self.main.dtype)
                self._mask_offset_cache[key] = offset
            out[i] = offset
        return out


def act_greedy(agent: DdqnAgent, state: np.ndarray, legal: np.ndarray | None = None) -> int:
    """Argmax of the main network; ties resolve to the lowest index."""
    q = forward(agent.main, state)
    if legal is not None:
        q = np.where(legal, q, -np.inf)
    return int(np.argmax(q))


def epsilon_greedy(agent: DdqnAgent, state: np.ndarray, rng: np.random.Generator,
                   legal: np.ndarray | None = None) -> int:
    """Uniform random action with probability epsilon, else the greedy one."""
    u = rng.random()
    if u < agent.epsilon:
        if legal is not None:
            candidates = np.flatnonzero(legal)
        else:
            candidates = np.arange(len(agent.table))
        return int(candidates[rng.integers(len(candidates))])
    return act_greedy(agent, state, legal)


def compute_targets(batch, main: Mlp, target: Mlp, gamma: float,
                    legality_offsets: np.ndarray | None = None) -> np.ndarray:
    """Per-sample targets: reward + gamma * Q_target(s', argmax_a Q_main(s', a)).

    The batch is (states, actions, rewards, next_states[, terminals]);
    terminal samples take the bare reward, cutting the bootstrap at episode
    resets. When legality offsets are given (0 where playable, -inf where
    not), the selection argmax ranges only over each next state's playable
    actions, the action space the agent actually faces there.
    """
    rewards, next_states = batch[2], batch[3]
    terminals = batch[4] if len(batch) > 4 else None
    q_next = forward(main, np.atleast_2d(next_states))
    if legality_offsets is not None:
        q_next += legality_offsets
    best = np.argmax(q_next, axis=1)
    q_eval = q_for_actions(target, np.atleast_2d(next_states), best)
    if terminals is not None:
        q_eval = np.where(terminals, 0.0, q_eval)
    return rewards + gamma * q_eval


def agent_reward(alloc: Allocation, ch: ChannelState, net: NetworkInstance, gnb_id: int) -> float:
    """Reward of one cell under a joint allocation: its own sum rate in Mbps
    when its part of the allocation is feasible, -1 otherwise.

    Feasibility covers the per-user cap, within-cell exclusivity, the
    borrowing gate, cross-cell conflicts on every RB this cell borrowed
    (a borrowed RB also used by anyone else voids the action), and the QoS
    of the cell's own users.
    """
    rows = list(net.users_of(gnb_id))
    if not rows:
        return 0.0
    xb = alloc.x[rows]
    own = alloc.assignment.own_mask(gnb_id)
    if np.any(xb.sum(axis=1) > net.k_max):
        return -1.0
    if np.any(xb.sum(axis=0) > 1):
        return -1.0
    borrowed = np.flatnonzero(xb.any(axis=0) & ~own)
    if borrowed.size and int(xb[:, own].sum()) != int(own.sum()):
        return -1.0
    if borrowed.size and np.any(alloc.x[:, borrowed].sum(axis=0) > 1):
        return -1.0
    total = 0.0
    for i, uid in enumerate(rows):
        user = net.users[uid]
        rate = float(np.dot(xb[i], link_rate(ch.gains[uid], net.phys)))
        if user.slice == SliceKind.EMBB:
            if rate < net.qos.r_min_bps:
                return -1.0
        else:
            try:
                delay = packet_delay(rate, user.packet_len_bits, user.arrival_rate_pps)
            except UnstableQueue:
                return -1.0
            if delay > net.qos.d_max_s:
                return -1.0
        total += rate
    return total / 1e6


def train_step(agent: DdqnAgent, rng: np.random.Generator) -> float | None:
    """One learning update: sample a batch, fit targets, Adam step.

    No-op (returns None) while the buffer holds fewer than batch_size
    transitions. Synchronizes the target network every target_sync_steps
    updates and decays epsilon multiplicatively down to its floor.
    """
    if len(agent.buffer) < agent.batch_size:
        return None
    batch = agent.buffer.sample(rng, agent.batch_size)
    offsets = agent.legality_offsets(batch[3])
    targets = compute_targets(batch, agent.main, agent.target, agent.gamma,
                              legality_offsets=offsets)
    loss = _fused_train_update(agent.main, agent.adam, batch[0], batch[1], targets)
    agent.train_steps += 1
    if agent.train_steps % agent.target_sync_steps == 0:
        agent.sync_target()
    agent.epsilon = max(agent.epsilon_min, agent.epsilon * agent.epsilon_decay)
    return loss


def save_mlp(path, mlp: Mlp) -> None:
    """Flat binary checkpoint: magic, version, layer sizes, then row-major
    64-bit parameters (weights then bias, layer by layer)."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(mlp.sizes)))
        f.write(np.asarray(mlp.sizes, dtype="<u4").tobytes())
        for w, b in zip(mlp.weights, mlp.biases):
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_mlp(path) -> Mlp:
    """Read a checkpoint written by save_mlp, validating header and length."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a network checkpoint")
    version, n_sizes = struct.unpack_from("<II", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    off = 12
    sizes = np.frombuffer(blob, dtype="<u4", count=n_sizes, offset=off).astype(int)
    off += 4 * n_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(blob, dtype="<f8", count=fan_in * fan_out, offset=off)
        off += 8 * fan_in * fan_out
        b = np.frombuffer(blob, dtype="<f8", count=fan_out, offset=off)
        off += 8 * fan_out
        weights.append(w.reshape(fan_in, fan_out).copy())
        biases.append(b.copy())
    if off != len(blob):
        raise ValueError(f"{path}: trailing or missing bytes in checkpoint")
    return Mlp(tuple(int(s) for s in sizes), weights, biases)
