"""Network domain model and physical-layer formulas.

Holds the immutable scenario objects (cells, end-users, channel state) and
the rate/delay arithmetic everything else is built on: Shannon rate per
resource block (RB), per-user total rate over an allocation, and the M/M/1
queueing delay of a served packet stream.

Conventions:
  * powers are configured in dBm and converted to watts as 10**((dBm-30)/10);
  * channel gains are dimensionless linear power gains toward the user's
    serving cell, one entry per (user, RB) over the full RB pool;
  * all randomness flows through an explicit numpy Generator, so identical
    (config, seed) pairs reproduce instances and channel draws bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Log-distance path loss: PL(d) = (d / PATHLOSS_REF_M) ** -PATHLOSS_EXPONENT,
# distances clamped to the reference so the model stays finite at the mast.
PATHLOSS_EXPONENT = 3.5
PATHLOSS_REF_M = 1.0

# Floor added to gains before taking log10 in state encodings.
GAIN_LOG_FLOOR = 1e-20


class UnstableQueue(Exception):
    """Service rate does not exceed the arrival rate; the queue diverges."""


class SliceKind(Enum):
    EMBB = "embb"
    URLLC = "urllc"


@dataclass(frozen=True)
class PhysConfig:
    """Radio constants shared by every link.

    rb_bandwidth_hz: bandwidth of one RB.
    tx_power_dbm: downlink transmit power, uniform over users and slices.
    noise_power_dbm: AWGN power over one RB bandwidth.
    area_side_m: side length of the square deployment area.
    """

    rb_bandwidth_hz: float = 180e3
    tx_power_dbm: float = 30.0
    noise_power_dbm: float = -114.0
    area_side_m: float = 1000.0

    def __post_init__(self):
        if self.rb_bandwidth_hz <= 0:
            raise ValueError("rb_bandwidth_hz must be positive")
        if self.area_side_m <= 0:
            raise ValueError("area_side_m must be positive")

    @property
    def tx_power_w(self) -> float:
        return dbm_to_watts(self.tx_power_dbm)

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)


@dataclass(frozen=True)
class QosConfig:
    """Per-slice service targets: eMBB rate floor, URLLC delay ceiling."""

    r_min_bps: float = 100e3
    d_max_s: float = 10e-3

    def __post_init__(self):
        if self.r_min_bps <= 0:
            raise ValueError("r_min_bps must be positive")
        if self.d_max_s <= 0:
            raise ValueError("d_max_s must be positive")


@dataclass(frozen=True)
class Gnb:
    id: int
    position: tuple[float, float]


@dataclass(frozen=True)
class EndUser:
    id: int
    slice: SliceKind
    position: tuple[float, float]
    packet_len_bits: float
    arrival_rate_pps: float
    home_gnb: int


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to instantiate a network: sizes plus constants."""

    num_gnbs: int = 2
    num_embb: int = 4
    num_urllc: int = 4
    num_rbs: int = 6
    k_max: int = 3
    phys: PhysConfig = PhysConfig()
    qos: QosConfig = QosConfig()
    embb_packet_bits: float = 400.0
    urllc_packet_bits: float = 120.0
    arrival_rate_pps: float = 100.0

    @property
    def num_users(self) -> int:
        return self.num_embb + self.num_urllc


@dataclass(frozen=True)
class NetworkInstance:
    """One concrete network an episode runs over.

    Users keep their serving cell for the lifetime of the instance; position
    redraws (see redraw_positions) deliberately do not trigger handover so
    that per-cell user counts, and with them learned-model shapes, stay fixed.
    """

    gnbs: tuple[Gnb, ...]
    users: tuple[EndUser, ...]
    num_rbs: int
    phys: PhysConfig
    qos: QosConfig
    k_max: int

    def __post_init__(self):
        if len(self.gnbs) < 1:
            raise ValueError("instance needs at least one gNodeB")
        if self.num_rbs < 1:
            raise ValueError("instance needs at least one RB")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        ids = {g.id for g in self.gnbs}
        for u in self.users:
            if u.home_gnb not in ids:
                raise ValueError(f"user {u.id} serves from unknown gNodeB {u.home_gnb}")

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_gnbs(self) -> int:
        return len(self.gnbs)

    def users_of(self, gnb_id: int) -> tuple[int, ...]:
        return tuple(u.id for u in self.users if u.home_gnb == gnb_id)

    def slice_users(self, kind: SliceKind) -> tuple[int, ...]:
        return tuple(u.id for u in self.users if u.slice == kind)


@dataclass(frozen=True)
class ChannelState:
    """Linear power gains, one row per user, one column per RB in the pool."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=np.float64)
        if g.ndim != 2:
            raise ValueError("gains must be a 2-D (users x RBs) matrix")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gains must be finite and non-negative")
        g.flags.writeable = False
        object.__setattr__(self, "gains", g)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _gnb_positions(num_gnbs: int, side: float) -> list[tuple[float, float]]:
    # Deterministic placement: cells sit at the centers of equal vertical
    # strips, mid-height. Keeps instances comparable across seeds.
    return [(side * (2 * b + 1) / (2 * num_gnbs), side / 2.0) for b in range(num_gnbs)]


def generate_topology(cfg: ScenarioConfig, seed: int) -> NetworkInstance:
    """Draw a network instance: uniform user drop, nearest-cell association.

    Deterministic for fixed (cfg, seed). Users are numbered with the eMBB
    block first, then URLLC.
    """
    if cfg.num_gnbs < 1:
        raise ValueError("config must request at least one gNodeB")
    if cfg.num_rbs < 1:
        raise ValueError("config must request at least one RB")
    rng = np.random.default_rng(seed)
    side = cfg.phys.area_side_m
    gnbs = tuple(Gnb(b, pos) for b, pos in enumerate(_gnb_positions(cfg.num_gnbs, side)))
    positions = rng.uniform(0.0, side, size=(cfg.num_users, 2))
    gnb_xy = np.array([g.position for g in gnbs])
    users = []
    for i in range(cfg.num_users):
        d2 = np.sum((gnb_xy - positions[i]) ** 2, axis=1)
        home = int(np.argmin(d2))
        kind = SliceKind.EMBB if i < cfg.num_embb else SliceKind.URLLC
        packet = cfg.embb_packet_bits if kind == SliceKind.EMBB else cfg.urllc_packet_bits
        users.append(
            EndUser(
                id=i,
                slice=kind,
                position=(float(positions[i, 0]), float(positions[i, 1])),
                packet_len_bits=packet,
                arrival_rate_pps=cfg.arrival_rate_pps,
                home_gnb=home,
            )
        )
    return NetworkInstance(
        gnbs=gnbs,
        users=tuple(users),
        num_rbs=cfg.num_rbs,
        phys=cfg.phys,
        qos=cfg.qos,
        k_max=cfg.k_max,
    )


def redraw_positions(net: NetworkInstance, rng: np.random.Generator) -> NetworkInstance:
    """Move every user to a fresh uniform position, keeping its serving cell."""
    side = net.phys.area_side_m
    positions = rng.uniform(0.0, side, size=(net.num_users, 2))
    users = tuple(
        EndUser(
            id=u.id,
            slice=u.slice,
            position=(float(positions[i, 0]), float(positions[i, 1])),
            packet_len_bits=u.packet_len_bits,
            arrival_rate_pps=u.arrival_rate_pps,
            home_gnb=u.home_gnb,
        )
        for i, u in enumerate(net.users)
    )
    return NetworkInstance(
        gnbs=net.gnbs,
        users=users,
        num_rbs=net.num_rbs,
        phys=net.phys,
        qos=net.qos,
        k_max=net.k_max,
    )


def sample_channel(net: NetworkInstance, rng: np.random.Generator) -> ChannelState:
    """Draw gains G[u][k] = PL(d_u) * F[u][k] toward each user's serving cell.

    PL is log-distance path loss with exponent 3.5 and 1 m reference;
    F is i.i.d. unit-mean exponential (Rayleigh power) fading per (user, RB).
    """
    gnb_xy = {g.id: np.array(g.position) for g in net.gnbs}
    dists = np.array(
        [
            max(PATHLOSS_REF_M, float(np.hypot(*(np.array(u.position) - gnb_xy[u.home_gnb]))))
            for u in net.users
        ]
    )
    pathloss = (dists / PATHLOSS_REF_M) ** (-PATHLOSS_EXPONENT)
    fading = rng.exponential(1.0, size=(net.num_users, net.num_rbs))
    return ChannelState(gains=pathloss[:, None] * fading)


def link_rate(gain, phys: PhysConfig):
    """Achievable rate of one RB: W * log2(1 + P * gain / noise), in bps.

    Accepts scalars or arrays of gains.
    """
    snr = phys.tx_power_w * np.asarray(gain, dtype=np.float64) / phys.noise_power_w
    rate = phys.rb_bandwidth_hz * np.log2(1.0 + snr)
    if np.ndim(gain) == 0:
        return float(rate)
    return rate


def rate_matrix(ch: ChannelState, phys: PhysConfig) -> np.ndarray:
    """Per-(user, RB) rates for a channel draw."""
    return link_rate(ch.gains, phys)


def user_total_rate(alloc, ch: ChannelState, net: NetworkInstance, user: int) -> float:
    """Total rate of one user: sum of its assigned RBs' rates.

    Borrowed RBs count the same as owned ones; the serving cell transmits on
    whatever the user holds, so the gain row is always the home-cell row.
    """
    row = np.asarray(alloc.x[user], dtype=np.float64)
    rates = link_rate(ch.gains[user], net.phys)
    return float(np.dot(row, rates))


def packet_delay(rate_bps: float, packet_len_bits: float, arrival_pps: float) -> float:
    """M/M/1 sojourn time 1 / (mu - lambda) with mu = rate / packet length.

    The link rate is converted to a packet service rate before the queueing
    formula so both terms are in packets/s. Raises UnstableQueue when the
    service rate cannot keep up (mu <= lambda); callers that need a verdict
    rather than an error treat that as a delay-constraint violation.
    """
    if rate_bps < 0:
        raise ValueError("rate must be non-negative")
    mu = rate_bps / packet_len_bits
    if mu <= arrival_pps:
        raise UnstableQueue(f"service rate {mu:.3f} pps <= arrival rate {arrival_pps:.3f} pps")
    return 1.0 / (mu - arrival_pps)
