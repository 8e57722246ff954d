"""Physical-layer formulas, topology generation, and channel sampling."""

import math

import numpy as np
import pytest

from ranslice import (
    ChannelState,
    PhysConfig,
    ScenarioConfig,
    SliceKind,
    UnstableQueue,
    dbm_to_watts,
    generate_topology,
    link_rate,
    packet_delay,
    redraw_positions,
    sample_channel,
    user_total_rate,
)
from ranslice.allocation import Allocation, ControllerAssignment

# Frozen from a 50-digit arbitrary-precision evaluation of the rate and
# delay formulas at the default constants.
RATE_AT_GAIN_1E10 = 2630977.3891953424592
DELAY_AT_2631K = 1.5438054805094558086e-4


def default_phys():
    return PhysConfig()


class TestTopology:
    def test_deterministic_for_fixed_seed(self):
        cfg = ScenarioConfig(num_gnbs=2, num_embb=4, num_urllc=4, num_rbs=6)
        a = generate_topology(cfg, seed=42)
        b = generate_topology(cfg, seed=42)
        assert a == b

    def test_different_seeds_move_users(self):
        cfg = ScenarioConfig()
        a = generate_topology(cfg, seed=1)
        b = generate_topology(cfg, seed=2)
        assert a.users[0].position != b.users[0].position

    def test_home_gnb_in_range(self):
        net = generate_topology(ScenarioConfig(), seed=3)
        assert all(u.home_gnb in (0, 1) for u in net.users)

    def test_default_scenario_matches_table_constants(self):
        net = generate_topology(ScenarioConfig(), seed=0)
        assert net.num_gnbs == 2
        assert net.num_users == 8
        assert net.phys.rb_bandwidth_hz == 180e3
        assert net.phys.tx_power_dbm == 30.0
        assert net.phys.noise_power_dbm == -114.0
        assert net.phys.area_side_m == 1000.0
        assert net.qos.r_min_bps == 100e3
        assert net.qos.d_max_s == 10e-3
        embb = [u for u in net.users if u.slice == SliceKind.EMBB]
        urllc = [u for u in net.users if u.slice == SliceKind.URLLC]
        assert len(embb) == 4 and len(urllc) == 4
        assert all(u.packet_len_bits == 400 for u in embb)
        assert all(u.packet_len_bits == 120 for u in urllc)
        assert all(u.arrival_rate_pps == 100 for u in net.users)

    def test_nearest_assignment(self):
        net = generate_topology(ScenarioConfig(), seed=11)
        gnb_xy = {g.id: np.array(g.position) for g in net.gnbs}
        for u in net.users:
            d_home = np.linalg.norm(np.array(u.position) - gnb_xy[u.home_gnb])
            for g in net.gnbs:
                assert d_home <= np.linalg.norm(np.array(u.position) - gnb_xy[g.id]) + 1e-12

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            generate_topology(ScenarioConfig(num_gnbs=0), seed=0)
        with pytest.raises(ValueError):
            generate_topology(ScenarioConfig(num_rbs=0), seed=0)

    def test_redraw_keeps_association(self):
        net = generate_topology(ScenarioConfig(), seed=5)
        moved = redraw_positions(net, np.random.default_rng(0))
        assert [u.home_gnb for u in moved.users] == [u.home_gnb for u in net.users]
        assert any(u.position != v.position for u, v in zip(moved.users, net.users))


class TestChannel:
    def test_deterministic_replay(self):
        net = generate_topology(ScenarioConfig(), seed=9)
        a = sample_channel(net, np.random.default_rng(123))
        b = sample_channel(net, np.random.default_rng(123))
        assert np.array_equal(a.gains, b.gains)

    def test_gains_nonnegative_finite(self):
        net = generate_topology(ScenarioConfig(), seed=9)
        ch = sample_channel(net, np.random.default_rng(4))
        assert ch.gains.shape == (net.num_users, net.num_rbs)
        assert np.all(ch.gains >= 0) and np.all(np.isfinite(ch.gains))

    def test_fading_unit_mean(self):
        # Monte Carlo check that the fading factor has unit mean: divide the
        # drawn gains by each user's deterministic path loss and average.
        net = generate_topology(ScenarioConfig(num_embb=1, num_urllc=0, num_rbs=100), seed=2)
        rng = np.random.default_rng(77)
        draws = []
        for _ in range(1000):
            draws.append(sample_channel(net, rng).gains.ravel())
        gains = np.concatenate(draws)  # 1e5 samples
        u = net.users[0]
        g = np.array(net.gnbs[u.home_gnb].position)
        d = max(1.0, float(np.hypot(*(np.array(u.position) - g))))
        fading = gains / d**-3.5
        assert 0.99 <= fading.mean() <= 1.01

    def test_rejects_negative_gains(self):
        with pytest.raises(ValueError):
            ChannelState(gains=np.array([[-1.0]]))


class TestLinkRate:
    def test_zero_gain_zero_rate(self):
        assert link_rate(0.0, default_phys()) == 0.0

    def test_snr_one_gives_bandwidth(self):
        phys = default_phys()
        gain = phys.noise_power_w / phys.tx_power_w  # SNR exactly 1
        assert link_rate(gain, phys) == pytest.approx(180e3, rel=1e-12)

    def test_frozen_high_precision_value(self):
        assert link_rate(1e-10, default_phys()) == pytest.approx(RATE_AT_GAIN_1E10, rel=1e-12)

    def test_monotone_in_gain(self):
        phys = default_phys()
        gains = np.sort(np.random.default_rng(0).uniform(0, 1e-8, 200))
        rates = link_rate(gains, phys)
        assert np.all(np.diff(rates) >= 0)

    def test_dbm_conversion(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-15)
        assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)


class TestUserTotalRate:
    def _setup(self):
        net = generate_topology(ScenarioConfig(num_embb=2, num_urllc=2, num_rbs=4), seed=21)
        ch = sample_channel(net, np.random.default_rng(3))
        assignment = ControllerAssignment(owner=(0, 0, 1, 1))
        return net, ch, assignment

    def test_no_rbs_zero(self):
        net, ch, assignment = self._setup()
        alloc = Allocation(x=np.zeros((4, 4), dtype=np.uint8), assignment=assignment)
        assert user_total_rate(alloc, ch, net, 0) == 0.0

    def test_single_rb_snr_one(self):
        net, ch, assignment = self._setup()
        gain = net.phys.noise_power_w / net.phys.tx_power_w
        ch1 = ChannelState(gains=np.full((4, 4), gain))
        x = np.zeros((4, 4), dtype=np.uint8)
        x[1, 2] = 1
        alloc = Allocation(x=x, assignment=assignment)
        assert user_total_rate(alloc, ch1, net, 1) == pytest.approx(180e3, rel=1e-12)

    def test_two_rbs_additive_against_resummation(self):
        net, ch, assignment = self._setup()
        x = np.zeros((4, 4), dtype=np.uint8)
        x[2, 0] = 1
        x[2, 3] = 1
        alloc = Allocation(x=x, assignment=assignment)
        expected = link_rate(ch.gains[2, 0], net.phys) + link_rate(ch.gains[2, 3], net.phys)
        assert user_total_rate(alloc, ch, net, 2) == pytest.approx(expected, rel=1e-12)

    def test_adding_rb_never_decreases(self):
        net, ch, assignment = self._setup()
        x = np.zeros((4, 4), dtype=np.uint8)
        prev = 0.0
        for k in range(4):
            x[0, k] = 1
            cur = user_total_rate(Allocation(x=x.copy(), assignment=assignment), ch, net, 0)
            assert cur >= prev
            prev = cur


class TestPacketDelay:
    def test_mu_twice_lambda(self):
        # mu = 2*lambda => delay = 1/lambda
        assert packet_delay(2 * 100 * 400, 400, 100) == pytest.approx(0.01, rel=1e-12)

    def test_frozen_value(self):
        assert packet_delay(2.631e6, 400, 100) == pytest.approx(DELAY_AT_2631K, rel=1e-12)

    def test_boundary_unstable(self):
        with pytest.raises(UnstableQueue):
            packet_delay(100 * 400, 400, 100)  # mu == lambda
        with pytest.raises(UnstableQueue):
            packet_delay(0.0, 400, 100)

    def test_strictly_decreasing_in_rate(self):
        rates = np.linspace(41000, 5e6, 50)  # all stable for lam=100, L=400
        delays = [packet_delay(r, 400, 100) for r in rates]
        assert all(a > b for a, b in zip(delays, delays[1:]))
