"""Allocation data model, constraint verdicts, and the objective.

An allocation is the binary matrix x[user][rb] together with the controller
partition that says which cell owns each RB. The checks below are the single
source of truth for what counts as a valid allocation:

  * fairness      -- no user holds more than k_max RBs (counting borrowed ones);
  * ofdma         -- each RB carries at most one user, enforced globally so a
                     borrowed RB can never be double-used across cells;
  * borrowing     -- a cell's users may hold out-of-partition RBs only while
                     every RB the cell owns is assigned to its own users;
  * rate / delay  -- eMBB users meet the rate floor, URLLC users the delay
                     ceiling (an unstable queue counts as a delay violation).

All functions are pure; verdicts are deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netmodel import (
    ChannelState,
    NetworkInstance,
    SliceKind,
    UnstableQueue,
    link_rate,
    packet_delay,
    user_total_rate,
)


@dataclass(frozen=True)
class ControllerAssignment:
    """Partition of the RB pool: owner[k] is the cell that RB k belongs to."""

    owner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "owner", tuple(int(b) for b in self.owner))

    @property
    def num_rbs(self) -> int:
        return len(self.owner)

    def partition(self, gnb_id: int) -> tuple[int, ...]:
        """RBs owned by one cell."""
        return tuple(k for k, b in enumerate(self.owner) if b == gnb_id)

    def own_mask(self, gnb_id: int) -> np.ndarray:
        """Boolean ownership mask over the RB pool."""
        return np.array([b == gnb_id for b in self.owner], dtype=bool)


@dataclass
class Allocation:
    """Binary user-by-RB assignment plus the partition it executes under."""

    x: np.ndarray
    assignment: ControllerAssignment

    def __post_init__(self):
        x = np.asarray(self.x)
        if x.ndim != 2:
            raise ValueError("x must be a 2-D (users x RBs) matrix")
        if not np.isin(x, (0, 1)).all():
            raise ValueError("x entries must be 0 or 1")
        if x.shape[1] != self.assignment.num_rbs:
            raise ValueError("x column count must match the partition size")
        self.x = x.astype(np.uint8)

    @property
    def num_users(self) -> int:
        return self.x.shape[0]

    @property
    def num_rbs(self) -> int:
        return self.x.shape[1]


@dataclass
class FeasibilityReport:
    """Per-constraint verdicts with the witnesses that broke each one.

    Witnesses are (constraint, index) pairs: the offending user for fairness
    and QoS checks, the RB for exclusivity, the cell for borrowing.
    """

    fairness: bool
    ofdma: bool
    borrowing: bool
    rate: bool
    delay: bool
    witnesses: list[tuple[str, int]] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.fairness and self.ofdma and self.borrowing and self.rate and self.delay


def check_fairness(alloc: Allocation, k_max: int) -> bool:
    """True iff every user's RB count (borrowed RBs included) is <= k_max."""
    return bool(np.all(alloc.x.sum(axis=1) <= k_max))


def check_ofdma(alloc: Allocation) -> bool:
    """True iff every RB column holds at most one user, across all cells."""
    return bool(np.all(alloc.x.sum(axis=0) <= 1))


def check_borrowing(alloc: Allocation, net: NetworkInstance) -> bool:
    """True iff every cell that reaches outside its partition has first
    assigned all of its own RBs to its own users."""
    for g in net.gnbs:
        rows = list(net.users_of(g.id))
        if not rows:
            continue
        own = alloc.assignment.own_mask(g.id)
        xb = alloc.x[rows]
        borrows = bool(xb[:, ~own].any())
        if borrows and int(xb[:, own].sum()) != int(own.sum()):
            return False
    return True


def check_qos(alloc: Allocation, ch: ChannelState, net: NetworkInstance):
    """QoS verdicts for every user.

    Returns (ok, rates, delays): rates in bps for all users, delays in
    seconds for all users (np.inf where the queue is unstable). eMBB users
    pass on rate >= r_min, URLLC users on delay <= d_max; both comparisons
    are inclusive.
    """
    rates = np.array([user_total_rate(alloc, ch, net, u.id) for u in net.users])
    delays = np.full(net.num_users, np.inf)
    ok = True
    for u in net.users:
        try:
            delays[u.id] = packet_delay(rates[u.id], u.packet_len_bits, u.arrival_rate_pps)
        except UnstableQueue:
            pass
        if u.slice == SliceKind.EMBB:
            if rates[u.id] < net.qos.r_min_bps:
                ok = False
        else:
            if delays[u.id] > net.qos.d_max_s:
                ok = False
    return ok, rates, delays


def objective(alloc: Allocation, ch: ChannelState, net: NetworkInstance) -> float:
    """Total sum rate over all users and slices, in bps."""
    return float(sum(user_total_rate(alloc, ch, net, u.id) for u in net.users))


def is_feasible(alloc: Allocation, ch: ChannelState, net: NetworkInstance) -> FeasibilityReport:
    """Run every constraint check and collect witnesses for the failures."""
    witnesses: list[tuple[str, int]] = []

    counts = alloc.x.sum(axis=1)
    fairness = bool(np.all(counts <= net.k_max))
    witnesses += [("fairness", int(u)) for u in np.flatnonzero(counts > net.k_max)]

    col = alloc.x.sum(axis=0)
    ofdma = bool(np.all(col <= 1))
    witnesses += [("ofdma", int(k)) for k in np.flatnonzero(col > 1)]

    borrowing = True
    for g in net.gnbs:
        rows = list(net.users_of(g.id))
        if not rows:
            continue
        own = alloc.assignment.own_mask(g.id)
        xb = alloc.x[rows]
        if bool(xb[:, ~own].any()) and int(xb[:, own].sum()) != int(own.sum()):
            borrowing = False
            witnesses.append(("borrowing", g.id))

    _, rates, delays = check_qos(alloc, ch, net)
    rate_ok = True
    delay_ok = True
    for u in net.users:
        if u.slice == SliceKind.EMBB:
            if rates[u.id] < net.qos.r_min_bps:
                rate_ok = False
                witnesses.append(("rate", u.id))
        else:
            if delays[u.id] > net.qos.d_max_s:
                delay_ok = False
                witnesses.append(("delay", u.id))

    return FeasibilityReport(
        fairness=fairness,
        ofdma=ofdma,
        borrowing=borrowing,
        rate=rate_ok,
        delay=delay_ok,
        witnesses=witnesses,
    )


def alloc_to_text(alloc: Allocation) -> str:
    """Line-oriented form: one 'user rb' pair per line, ascending, newline-terminated."""
    lines = [f"{u} {k}" for u, k in zip(*np.nonzero(alloc.x))]
    return "\n".join(lines) + ("\n" if lines else "")


def alloc_from_text(
    text: str, num_users: int, assignment: ControllerAssignment
) -> Allocation:
    """Parse the line-oriented form back into an Allocation."""
    x = np.zeros((num_users, assignment.num_rbs), dtype=np.uint8)
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        u_str, k_str = line.split()
        x[int(u_str), int(k_str)] = 1
    return Allocation(x=x, assignment=assignment)
