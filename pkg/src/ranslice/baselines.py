"""Greedy single-stage scheduler used as a comparison policy.

Each cell serves its users in one pass over its own partition, URLLC users
first (then ascending user id). A user's demand is derived from its queued
bits and the spectral efficiency of its best free RB; the demand is then
covered with the free owned RBs in descending-SNR order. No borrowing: the
scheduler never reaches outside the cell's partition, so its output always
passes the exclusivity, fairness, and borrowing checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import Allocation, ControllerAssignment
from .netmodel import ChannelState, NetworkInstance, SliceKind

T_SLOT_S = 1e-3  # converts SE * W into bits per scheduling slot


@dataclass
class UserQueue:
    """Backlog of one user; defaults to a single queued packet."""

    user: int
    queue_len_bits: float

    def __post_init__(self):
        if self.queue_len_bits < 0:
            raise ValueError("queue length must be non-negative")


def greedy_single_stage(
    net: NetworkInstance,
    ch: ChannelState,
    assignment: ControllerAssignment,
    queues: list[UserQueue] | None = None,
    t_slot_s: float = T_SLOT_S,
) -> Allocation:
    """Schedule every cell greedily by best SNR, URLLC before eMBB.

    For each user in priority order: find the free owned RB with the highest
    SNR, turn its spectral efficiency into a per-slot bit budget, request
    ceil(queue / budget) RBs (capped at k_max), and take that many free owned
    RBs in descending-SNR order (ties to the lowest RB index). Users whose
    best RB has zero SNR are skipped; users may end up (partially) unserved
    when the partition runs out of free RBs.
    """
    snr = net.phys.tx_power_w * ch.gains / net.phys.noise_power_w
    if queues is None:
        backlog = {u.id: u.packet_len_bits for u in net.users}
    else:
        backlog = {u.id: 0.0 for u in net.users}
        for q in queues:
            backlog[q.user] = q.queue_len_bits
    x = np.zeros((net.num_users, net.num_rbs), dtype=np.uint8)
    for g in net.gnbs:
        free = set(assignment.partition(g.id))
        order = sorted(
            net.users_of(g.id),
            key=lambda uid: (net.users[uid].slice != SliceKind.URLLC, uid),
        )
        for uid in order:
            if not free:
                break
            ranked = sorted(free, key=lambda k: (-snr[uid, k], k))
            best = ranked[0]
            if snr[uid, best] <= 0.0:
                continue
            se = math.log2(1.0 + snr[uid, best])
            bits_per_slot = se * net.phys.rb_bandwidth_hz * t_slot_s
            needed = math.ceil(backlog[uid] / bits_per_slot) if backlog[uid] > 0 else 0
            needed = min(needed, net.k_max)
            for k in ranked[:needed]:
                x[uid, k] = 1
                free.discard(k)
    return Allocation(x=x, assignment=assignment)
