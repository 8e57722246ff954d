"""Exact solvers for desk-scale instances.

exhaustive_solve enumerates every assignment of RBs to users (or to nobody)
under a fixed controller partition, keeps the feasible ones, and returns the
objective maximizer. exhaustive_solve_joint additionally maximizes over all
partitions. Both refuse instances whose search space would exceed a hard
candidate bound. knapsack_solve is the classic 0-1 dynamic program used as an
independent reference for the restricted single-cell problem.

Tie-breaks are deterministic so results can serve as golden values:
  * within a partition, the winner is the lexicographically smallest
    flattened x (user-major) among the value maximizers;
  * across partitions, ties prefer the lexicographically smallest owner
    vector, then the smallest x.

Objective sums are accumulated user by user in ascending index order so that
independently coded enumerators using the same order match bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .allocation import Allocation, ControllerAssignment, FeasibilityReport, is_feasible
from .netmodel import ChannelState, NetworkInstance, SliceKind, rate_matrix

SEARCH_BOUND = 10_000_000
_CHUNK = 65536


class SearchSpaceError(ValueError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class KnapsackInstance:
    """Items as (profit, integer weight) pairs and an integer capacity."""

    items: tuple[tuple[float, int], ...]
    capacity: int

    def __post_init__(self):
        items = tuple((float(p), int(w)) for p, w in self.items)
        object.__setattr__(self, "items", items)
        if any(w < 0 for _, w in items):
            raise ValueError("weights must be non-negative integers")
        if self.capacity < 0:
            raise ValueError("capacity must be a non-negative integer")
        if not all(np.isfinite(p) for p, _ in items):
            raise ValueError("profits must be finite")


@dataclass
class OracleSolution:
    best_alloc: Allocation
    best_value: float
    explored: int
    feasible: bool
    report: FeasibilityReport


def _x_bytes(owners: np.ndarray, num_users: int) -> bytes:
    """Flattened user-major binary matrix of one candidate, for lexicographic ties."""
    num_rbs = owners.shape[0]
    x = np.zeros((num_users, num_rbs), dtype=np.uint8)
    for k, u in enumerate(owners):
        if u < num_users:
            x[u, k] = 1
    return x.tobytes()


def _alloc_from_owners(owners, num_users: int, assignment: ControllerAssignment) -> Allocation:
    num_rbs = len(owners)
    x = np.zeros((num_users, num_rbs), dtype=np.uint8)
    for k, u in enumerate(owners):
        if u < num_users:
            x[u, k] = 1
    return Allocation(x=x, assignment=assignment)


def _evaluate_chunk(codes, net: NetworkInstance, rates: np.ndarray, assignment: ControllerAssignment):
    """Vectorized feasibility + objective for a block of candidate codes.

    Each candidate is a base-(U+1) code whose k-th digit names the user RB k
    goes to, with digit U meaning 'unassigned'. Ownership of at most one user
    per RB is structural in this encoding, so the OFDMA check never fails.
    Returns (values, feasible, owners) for the block.
    """
    num_users = net.num_users
    num_rbs = net.num_rbs
    radix = (num_users + 1) ** np.arange(num_rbs, dtype=np.int64)
    owners = (codes[:, None] // radix[None, :]) % (num_users + 1)

    values = np.zeros(len(codes))
    feasible = np.ones(len(codes), dtype=bool)

    # Fairness and QoS per user, in ascending user order for reproducible sums.
    for u in net.users:
        held = owners == u.id
        counts = held.sum(axis=1)
        feasible &= counts <= net.k_max
        user_rate = (held * rates[u.id][None, :]).sum(axis=1)
        values = values + user_rate
        if u.slice == SliceKind.EMBB:
            feasible &= user_rate >= net.qos.r_min_bps
        else:
            mu = user_rate / u.packet_len_bits
            lam = u.arrival_rate_pps
            # delay <= d_max, rearranged to avoid dividing by (mu - lam)
            feasible &= (mu > lam) & (1.0 <= net.qos.d_max_s * (mu - lam))

    # Borrowing gate per cell.
    home_of = np.full(num_users + 1, -1, dtype=np.int64)
    for u in net.users:
        home_of[u.id] = u.home_gnb
    cell_of = home_of[owners]  # -1 where unassigned
    for g in net.gnbs:
        own = assignment.own_mask(g.id)
        held_by_b = cell_of == g.id
        uses_foreign = (held_by_b & ~own[None, :]).any(axis=1)
        own_used = (held_by_b & own[None, :]).sum(axis=1)
        feasible &= ~uses_foreign | (own_used == int(own.sum()))

    return values, feasible, owners


def _search_partition(net: NetworkInstance, rates: np.ndarray, assignment: ControllerAssignment):
    """Best (value, owners) over every candidate under one partition."""
    num_users = net.num_users
    total = (num_users + 1) ** net.num_rbs
    best_value = None
    best_owners = None
    best_key = None
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        values, feasible, owners = _evaluate_chunk(codes, net, rates, assignment)
        if not feasible.any():
            continue
        vals = np.where(feasible, values, -np.inf)
        chunk_max = vals.max()
        if best_value is not None and chunk_max < best_value:
            continue
        for i in np.flatnonzero(vals == chunk_max):
            key = _x_bytes(owners[i], num_users)
            if (
                best_value is None
                or chunk_max > best_value
                or (chunk_max == best_value and key < best_key)
            ):
                best_value = float(chunk_max)
                best_owners = owners[i].copy()
                best_key = key
    return best_value, best_owners, total


def exhaustive_solve(net: NetworkInstance, ch: ChannelState, assignment: ControllerAssignment) -> OracleSolution:
    """Exact maximizer of the objective over all feasible allocations under a
    given partition. Every RB may also stay unassigned.

    Raises SearchSpaceError when (U+1)**K exceeds the candidate bound. When no
    allocation is feasible the empty allocation is returned with value 0 and
    its (QoS-infeasible) report attached.
    """
    space = (net.num_users + 1) ** net.num_rbs
    if space > SEARCH_BOUND:
        raise SearchSpaceError(f"search space {space} exceeds bound {SEARCH_BOUND}")
    rates = rate_matrix(ch, net.phys)
    best_value, best_owners, explored = _search_partition(net, rates, assignment)
    if best_owners is None:
        alloc = _alloc_from_owners([net.num_users] * net.num_rbs, net.num_users, assignment)
        return OracleSolution(
            best_alloc=alloc,
            best_value=0.0,
            explored=explored,
            feasible=False,
            report=is_feasible(alloc, ch, net),
        )
    alloc = _alloc_from_owners(best_owners, net.num_users, assignment)
    return OracleSolution(
        best_alloc=alloc,
        best_value=best_value,
        explored=explored,
        feasible=True,
        report=is_feasible(alloc, ch, net),
    )


def exhaustive_solve_joint(net: NetworkInstance, ch: ChannelState) -> OracleSolution:
    """Exact maximizer over (partition, allocation) pairs.

    Raises SearchSpaceError when B**K * (U+1)**K exceeds the candidate bound.
    """
    inner = (net.num_users + 1) ** net.num_rbs
    outer = net.num_gnbs**net.num_rbs
    if outer * inner > SEARCH_BOUND:
        raise SearchSpaceError(
            f"search space {outer * inner} exceeds bound {SEARCH_BOUND}"
        )
    rates = rate_matrix(ch, net.phys)
    best = None  # (value, owner_tuple, x_bytes, owners, assignment)
    explored = 0
    first_assignment = None
    for owner_vec in product(range(net.num_gnbs), repeat=net.num_rbs):
        assignment = ControllerAssignment(owner=owner_vec)
        if first_assignment is None:
            first_assignment = assignment
        value, owners, count = _search_partition(net, rates, assignment)
        explored += count
        if value is None:
            continue
        key = _x_bytes(owners, net.num_users)
        cand = (value, owner_vec, key)
        if best is None or cand[0] > best[0] or (
            cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2])
        ):
            best = (value, owner_vec, key, owners, assignment)
    if best is None:
        alloc = _alloc_from_owners(
            [net.num_users] * net.num_rbs, net.num_users, first_assignment
        )
        return OracleSolution(
            best_alloc=alloc,
            best_value=0.0,
            explored=explored,
            feasible=False,
            report=is_feasible(alloc, ch, net),
        )
    alloc = _alloc_from_owners(best[3], net.num_users, best[4])
    return OracleSolution(
        best_alloc=alloc,
        best_value=float(best[0]),
        explored=explored,
        feasible=True,
        report=is_feasible(alloc, ch, net),
    )


def knapsack_solve(inst: KnapsackInstance):
    """0-1 knapsack by dynamic programming over capacity.

    Returns (subset, value) with subset a tuple of selected item indices.
    Ties prefer excluding an item, which makes the reconstruction
    deterministic.
    """
    n = len(inst.items)
    cap = inst.capacity
    if cap > 1_000_000 * max(n, 1):
        raise SearchSpaceError(f"capacity {cap} exceeds DP table bound")
    dp = np.zeros(cap + 1)
    take = np.zeros((n, cap + 1), dtype=bool)
    for i, (profit, weight) in enumerate(inst.items):
        if weight > cap:
            continue
        if weight == 0:
            if profit > 0:
                take[i, :] = True
                dp += profit
            continue
        cand = dp[: cap + 1 - weight] + profit
        better = cand > dp[weight:]
        take[i, weight:] = better
        dp[weight:] = np.where(better, cand, dp[weight:])
    value = float(dp[cap])
    subset = []
    w = cap
    for i in range(n - 1, -1, -1):
        if take[i, w]:
            subset.append(i)
            w -= inst.items[i][1]
    return tuple(reversed(subset)), value
