"""Exact solvers against independent enumerators."""

import itertools

import numpy as np
import pytest

from ranslice import (
    ChannelState,
    KnapsackInstance,
    ScenarioConfig,
    SearchSpaceError,
    exhaustive_solve,
    exhaustive_solve_joint,
    generate_topology,
    is_feasible,
    knapsack_solve,
    link_rate,
    sample_channel,
)
from ranslice.allocation import Allocation, ControllerAssignment


# ---------------------------------------------------------------------------
# Independent reference enumerator: plain nested loops, literal constraint
# transcription, value accumulated user-by-user in ascending order, and the
# documented tie-breaks (smallest flattened x, then smallest owner vector at
# the joint level). Shares no code with the library's vectorized search.


def ref_solve(net, ch, owner_vec):
    num_users, num_rbs = net.num_users, net.num_rbs
    best = None  # (value, x_bytes, x)
    for cells in itertools.product(range(num_users + 1), repeat=num_rbs):
        x = np.zeros((num_users, num_rbs), dtype=np.uint8)
        for k, c in enumerate(cells):
            if c < num_users:
                x[c, k] = 1
        # per-user cap
        if any(int(x[u].sum()) > net.k_max for u in range(num_users)):
            continue
        # one user per RB (structural here, but re-check literally)
        if any(int(x[:, k].sum()) > 1 for k in range(num_rbs)):
            continue
        # borrowing gate per cell
        legal = True
        for g in net.gnbs:
            rows = net.users_of(g.id)
            own = [k for k in range(num_rbs) if owner_vec[k] == g.id]
            foreign = [k for k in range(num_rbs) if owner_vec[k] != g.id]
            borrows = any(x[u, k] for u in rows for k in foreign)
            own_used = sum(int(x[u, k]) for u in rows for k in own)
            if borrows and own_used != len(own):
                legal = False
                break
        if not legal:
            continue
        # QoS and value
        value = 0.0
        ok = True
        for u in net.users:
            rate = sum(
                float(link_rate(ch.gains[u.id, k], net.phys))
                for k in range(num_rbs)
                if x[u.id, k]
            )
            value += rate
            if u.slice.value == "embb":
                if rate < net.qos.r_min_bps:
                    ok = False
                    break
            else:
                mu = rate / u.packet_len_bits
                lam = u.arrival_rate_pps
                if not (mu > lam and 1.0 <= net.qos.d_max_s * (mu - lam)):
                    ok = False
                    break
        if not ok:
            continue
        key = x.tobytes()
        if best is None or value > best[0] or (value == best[0] and key < best[1]):
            best = (value, key, x)
    return best  # None when nothing is feasible


def ref_solve_joint(net, ch):
    best = None  # (value, owner_vec, x_bytes, x)
    for owner_vec in itertools.product(range(net.num_gnbs), repeat=net.num_rbs):
        inner = ref_solve(net, ch, owner_vec)
        if inner is None:
            continue
        value, key, x = inner
        cand = (value, owner_vec, key, x)
        if (
            best is None
            or cand[0] > best[0]
            or (cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2]))
        ):
            best = cand
    return best


def random_instance(rng, num_gnbs=2, max_users=4, max_rbs=4, qos_scale=1.0):
    n_users = int(rng.integers(2, max_users + 1))
    n_embb = int(rng.integers(1, n_users))
    cfg = ScenarioConfig(
        num_gnbs=num_gnbs,
        num_embb=n_embb,
        num_urllc=n_users - n_embb,
        num_rbs=int(rng.integers(2, max_rbs + 1)),
        k_max=int(rng.integers(1, 4)),
    )
    net = generate_topology(cfg, seed=int(rng.integers(0, 2**31)))
    ch = sample_channel(net, rng)
    return net, ch


class TestExhaustiveSolve:
    def test_single_user_single_rb_assigned_iff_gain_positive(self):
        cfg = ScenarioConfig(num_gnbs=1, num_embb=1, num_urllc=0, num_rbs=1, k_max=1)
        net = generate_topology(cfg, seed=1)
        import dataclasses

        from ranslice import QosConfig

        # QoS off for the eMBB user: any rate >= tiny floor passes.
        net = dataclasses.replace(net, qos=QosConfig(r_min_bps=1e-300, d_max_s=1.0))
        assignment = ControllerAssignment(owner=(0,))
        sol = exhaustive_solve(net, ChannelState(gains=np.array([[1e-9]])), assignment)
        assert sol.best_alloc.x[0, 0] == 1 and sol.best_value > 0
        sol0 = exhaustive_solve(net, ChannelState(gains=np.array([[0.0]])), assignment)
        # Zero gain ties assign/skip at value 0; smallest x wins, so unassigned.
        assert sol0.best_alloc.x[0, 0] == 0 and sol0.best_value == 0.0

    def test_two_users_equal_gains_symmetric_value(self):
        import dataclasses

        from ranslice import QosConfig

        cfg = ScenarioConfig(num_gnbs=1, num_embb=2, num_urllc=0, num_rbs=2, k_max=1)
        net = generate_topology(cfg, seed=2)
        net = dataclasses.replace(net, qos=QosConfig(r_min_bps=1e-300, d_max_s=1.0))
        gain = 1e-9
        ch = ChannelState(gains=np.full((2, 2), gain))
        sol = exhaustive_solve(net, ch, ControllerAssignment(owner=(0, 0)))
        single = float(link_rate(gain, net.phys))
        assert sol.best_value == pytest.approx(2 * single, rel=1e-12)

    def test_matches_reference_enumerator(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            net, ch = random_instance(rng, max_users=3, max_rbs=4)
            owner_vec = tuple(int(rng.integers(0, net.num_gnbs)) for _ in range(net.num_rbs))
            sol = exhaustive_solve(net, ch, ControllerAssignment(owner=owner_vec))
            ref = ref_solve(net, ch, owner_vec)
            if ref is None:
                assert not sol.feasible and sol.best_value == 0.0
                assert sol.best_alloc.x.sum() == 0
            else:
                assert sol.feasible
                assert sol.best_value == ref[0]
                assert sol.best_alloc.x.tobytes() == ref[1]

    def test_winner_is_feasible(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            net, ch = random_instance(rng)
            owner_vec = tuple(int(rng.integers(0, net.num_gnbs)) for _ in range(net.num_rbs))
            sol = exhaustive_solve(net, ch, ControllerAssignment(owner=owner_vec))
            if sol.feasible:
                assert is_feasible(sol.best_alloc, ch, net).feasible
                assert sol.report.feasible

    def test_gain_scaling_never_decreases_value(self):
        rng = np.random.default_rng(12)
        net, ch = random_instance(rng)
        owner_vec = tuple(0 for _ in range(net.num_rbs))
        lo = exhaustive_solve(net, ch, ControllerAssignment(owner=owner_vec))
        ch_hi = ChannelState(gains=ch.gains * 4.0)
        hi = exhaustive_solve(net, ch_hi, ControllerAssignment(owner=owner_vec))
        assert hi.best_value >= lo.best_value

    def test_k_max_relaxation_never_decreases_value(self):
        import dataclasses

        rng = np.random.default_rng(13)
        net, ch = random_instance(rng)
        owner_vec = tuple(0 for _ in range(net.num_rbs))
        tight = exhaustive_solve(net, ch, ControllerAssignment(owner=owner_vec))
        net_loose = dataclasses.replace(net, k_max=net.k_max + 1)
        loose = exhaustive_solve(net_loose, ch, ControllerAssignment(owner=owner_vec))
        assert loose.best_value >= tight.best_value

    def test_size_guard(self):
        cfg = ScenarioConfig(num_gnbs=1, num_embb=10, num_urllc=10, num_rbs=10, k_max=3)
        net = generate_topology(cfg, seed=1)
        ch = sample_channel(net, np.random.default_rng(0))
        with pytest.raises(SearchSpaceError):
            exhaustive_solve(net, ch, ControllerAssignment(owner=tuple([0] * 10)))


class TestExhaustiveSolveJoint:
    def test_single_gnb_degenerates_to_inner_solve(self):
        rng = np.random.default_rng(14)
        net, ch = random_instance(rng, num_gnbs=1, max_users=3, max_rbs=3)
        joint = exhaustive_solve_joint(net, ch)
        inner = exhaustive_solve(net, ch, ControllerAssignment(owner=tuple([0] * net.num_rbs)))
        assert joint.best_value == inner.best_value
        assert np.array_equal(joint.best_alloc.x, inner.best_alloc.x)

    def test_label_swap_symmetry(self):
        # Swapping the two cell labels everywhere leaves the optimum value alone.
        cfg = ScenarioConfig(num_gnbs=2, num_embb=1, num_urllc=1, num_rbs=2, k_max=2)
        net = generate_topology(cfg, seed=8)
        ch = sample_channel(net, np.random.default_rng(3))
        base = exhaustive_solve_joint(net, ch)
        import dataclasses

        from ranslice.netmodel import EndUser, Gnb

        swapped_gnbs = tuple(
            Gnb(id=1 - g.id, position=g.position) for g in reversed(net.gnbs)
        )
        swapped_users = tuple(
            EndUser(
                id=u.id,
                slice=u.slice,
                position=u.position,
                packet_len_bits=u.packet_len_bits,
                arrival_rate_pps=u.arrival_rate_pps,
                home_gnb=1 - u.home_gnb,
            )
            for u in net.users
        )
        net_swapped = dataclasses.replace(net, gnbs=swapped_gnbs, users=swapped_users)
        other = exhaustive_solve_joint(net_swapped, ch)
        assert other.best_value == pytest.approx(base.best_value, rel=1e-12)

    def test_matches_reference_joint_enumerator(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            net, ch = random_instance(rng, max_users=4, max_rbs=3)
            sol = exhaustive_solve_joint(net, ch)
            ref = ref_solve_joint(net, ch)
            if ref is None:
                assert not sol.feasible
            else:
                assert sol.best_value == ref[0]
                assert sol.best_alloc.assignment.owner == ref[1]
                assert sol.best_alloc.x.tobytes() == ref[2]

    def test_size_guard(self):
        cfg = ScenarioConfig(num_gnbs=2, num_embb=5, num_urllc=5, num_rbs=9, k_max=3)
        net = generate_topology(cfg, seed=1)
        ch = sample_channel(net, np.random.default_rng(0))
        with pytest.raises(SearchSpaceError):
            exhaustive_solve_joint(net, ch)


class TestKnapsack:
    def test_zero_capacity(self):
        inst = KnapsackInstance(items=((10.0, 1), (5.0, 2)), capacity=0)
        subset, value = knapsack_solve(inst)
        assert subset == () and value == 0.0

    def test_classic_instance(self):
        inst = KnapsackInstance(items=((60, 10), (100, 20), (120, 30)), capacity=50)
        subset, value = knapsack_solve(inst)
        assert value == 220.0
        assert subset == (1, 2)

    def test_matches_subset_enumeration(self):
        rng = np.random.default_rng(16)
        for _ in range(40):
            n = int(rng.integers(1, 13))
            items = tuple(
                (float(rng.integers(0, 200)), int(rng.integers(0, 15))) for _ in range(n)
            )
            cap = int(rng.integers(0, 40))
            inst = KnapsackInstance(items=items, capacity=cap)
            _, value = knapsack_solve(inst)
            best = 0.0
            for mask in range(2**n):
                w = sum(items[i][1] for i in range(n) if mask >> i & 1)
                if w > cap:
                    continue
                p = sum(items[i][0] for i in range(n) if mask >> i & 1)
                best = max(best, p)
            assert value == best

    def test_selected_subset_consistent(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(1, 10))
            items = tuple(
                (float(rng.integers(0, 100)), int(rng.integers(1, 10))) for _ in range(n)
            )
            cap = int(rng.integers(0, 30))
            inst = KnapsackInstance(items=items, capacity=cap)
            subset, value = knapsack_solve(inst)
            assert sum(items[i][1] for i in subset) <= cap
            assert sum(items[i][0] for i in subset) == value

    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError):
            KnapsackInstance(items=((1.0, -1),), capacity=5)


class TestKnapsackReduction:
    def test_restricted_problem_maps_to_knapsack(self):
        # Single cell, eMBB only, each user pinned to a fixed RB bundle:
        # picking which users to serve is exactly a knapsack with profit the
        # bundle rate and weight the bundle size.
        import dataclasses

        from ranslice import QosConfig

        cfg = ScenarioConfig(num_gnbs=1, num_embb=3, num_urllc=0, num_rbs=4, k_max=4)
        net = generate_topology(cfg, seed=30)
        net = dataclasses.replace(net, qos=QosConfig(r_min_bps=1e-300, d_max_s=1.0))
        ch = sample_channel(net, np.random.default_rng(18))
        bundles = {0: (0,), 1: (1, 2), 2: (3,)}  # disjoint fixed bundles
        capacity = 2  # pretend the cell owns only 2 RBs worth of budget
        profits = {
            u: sum(float(link_rate(ch.gains[u, k], net.phys)) for k in bundles[u])
            for u in bundles
        }
        inst = KnapsackInstance(
            items=tuple((profits[u], len(bundles[u])) for u in sorted(bundles)),
            capacity=capacity,
        )
        _, dp_value = knapsack_solve(inst)
        # Brute force over which users to serve with their fixed bundles.
        best = 0.0
        for chosen in itertools.chain.from_iterable(
            itertools.combinations(sorted(bundles), r) for r in range(4)
        ):
            weight = sum(len(bundles[u]) for u in chosen)
            if weight > capacity:
                continue
            best = max(best, sum(profits[u] for u in chosen))
        assert dp_value == pytest.approx(best, rel=1e-12)
