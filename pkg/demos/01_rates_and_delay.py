"""Physical-layer walkthrough: per-RB rates and queueing delay.

Shows how the Shannon rate behaves over distance and fading, and how the
M/M/1 delay reacts to the served rate, including the unstable region.
"""

import numpy as np

from ranslice import (
    PhysConfig,
    ScenarioConfig,
    UnstableQueue,
    generate_topology,
    link_rate,
    packet_delay,
    sample_channel,
)

phys = PhysConfig()  # 180 kHz RBs, 30 dBm transmit, -114 dBm noise

print("=" * 64)
print("Per-RB rate vs distance (no fading, pure path loss)")
print("=" * 64)
print(f"{'distance (m)':>14} {'gain':>12} {'SNR (dB)':>10} {'rate (Mbps)':>12}")
for d in (10, 50, 100, 250, 500, 1000, 1400):
    gain = d ** -3.5
    snr_db = 10 * np.log10(phys.tx_power_w * gain / phys.noise_power_w)
    print(f"{d:>14} {gain:>12.3e} {snr_db:>10.1f} {link_rate(gain, phys) / 1e6:>12.3f}")

print()
print("=" * 64)
print("Fading spread at 500 m: ten random draws of one RB")
print("=" * 64)
rng = np.random.default_rng(7)
for f in rng.exponential(1.0, size=10):
    rate = link_rate(500.0**-3.5 * f, phys)
    bar = "#" * int(rate / 2e5)
    print(f"fading {f:5.2f} -> {rate / 1e6:6.3f} Mbps {bar}")

print()
print("=" * 64)
print("M/M/1 delay of a 400-bit packet stream at 100 packets/s")
print("=" * 64)
print(f"{'rate (kbps)':>12} {'service (pps)':>14} {'delay':>12}")
for rate_kbps in (20, 41, 60, 100, 400, 2631):
    rate = rate_kbps * 1e3
    mu = rate / 400.0
    try:
        delay = packet_delay(rate, 400.0, 100.0)
        print(f"{rate_kbps:>12} {mu:>14.1f} {delay * 1e3:>10.3f} ms")
    except UnstableQueue:
        print(f"{rate_kbps:>12} {mu:>14.1f} {'unstable':>12}")

print()
print("=" * 64)
print("A drawn topology: who serves whom")
print("=" * 64)
net = generate_topology(ScenarioConfig(), seed=3)
ch = sample_channel(net, np.random.default_rng(0))
for u in net.users:
    d = np.hypot(
        u.position[0] - net.gnbs[u.home_gnb].position[0],
        u.position[1] - net.gnbs[u.home_gnb].position[1],
    )
    best = ch.gains[u.id].max()
    print(
        f"user {u.id} ({u.slice.value:5s}) at ({u.position[0]:6.1f}, {u.position[1]:6.1f})"
        f" -> cell {u.home_gnb}, {d:6.1f} m, best RB rate {link_rate(best, phys) / 1e6:6.3f} Mbps"
    )
