"""Event engine semantics: delays, ordering, timers, reliability, replay."""

import random

import pytest

from cuplab.simnet import (
    DelayPolicy,
    Effects,
    Network,
    cluster_partition_rule,
    uniform_pre_rule,
)


class Recorder:
    """Minimal handler that records deliveries and timer fires."""

    def __init__(self):
        self.deliveries = []
        self.timers = []

    def on_start(self, now):
        return Effects()

    def on_deliver(self, now, sender, payload):
        self.deliveries.append((now, sender, payload))
        return Effects()

    def on_timer(self, now, tag):
        self.timers.append((now, tag))
        return Effects()


def make_net(gst=0, delta=10, correct=(1, 2, 3), pre=None, seed=5):
    policy = DelayPolicy(
        gst=gst,
        delta=delta,
        pre_rule=pre or uniform_pre_rule(1, 30),
        correct=frozenset(correct),
    )
    net = Network(policy, random.Random(seed))
    handlers = {pid: Recorder() for pid in correct}
    for pid, h in handlers.items():
        net.register(pid, h)
    return net, handlers


def drain(net):
    while net.step() is not None:
        pass


class TestDelays:
    def test_post_gst_bound(self):
        net, handlers = make_net(gst=0, delta=7)
        for _ in range(50):
            net.send(1, 2, "x")
        drain(net)
        for when, sender, _ in handlers[2].deliveries:
            assert 1 <= when <= 7

    def test_pre_gst_rule_applies(self):
        net, handlers = make_net(gst=100, pre=lambda s, r, t, rng: 42)
        net.send(1, 2, "x")
        drain(net)
        assert handlers[2].deliveries == [(42, 1, "x")]

    def test_byzantine_pairs_use_pre_rule_after_gst(self):
        net, handlers = make_net(gst=0, correct=(1, 2), pre=lambda s, r, t, rng: 99)
        net.register(9, Recorder())
        net.send(1, 9, "x")
        drain(net)
        assert net.now == 99

    def test_reliability_exactly_once(self):
        net, handlers = make_net()
        net.send(1, 2, "a")
        net.send(1, 2, "a")
        drain(net)
        assert len(handlers[2].deliveries) == 2
        assert net.sent_count == net.delivered_count == 2

    def test_unknown_endpoint(self):
        net, _ = make_net()
        with pytest.raises(ValueError):
            net.send(1, 99, "x")


class TestOrdering:
    def test_equal_time_insertion_order(self):
        net, handlers = make_net(pre=lambda s, r, t, rng: 5, gst=10**9)
        net.send(1, 3, "first")
        net.send(2, 3, "second")
        drain(net)
        assert [p for _, _, p in handlers[3].deliveries] == ["first", "second"]

    def test_empty_queue_returns_none(self):
        net, _ = make_net()
        assert net.step() is None

    def test_replay_digest_stability(self):
        def run_once():
            net, _ = make_net(seed=77)
            for i in range(20):
                net.send(1 + i % 3, 1 + (i + 1) % 3, f"m{i}")
            drain(net)
            return net.trace_digest()

        assert run_once() == run_once()

    def test_different_seeds_differ(self):
        def run_once(seed):
            net, _ = make_net(seed=seed)
            for i in range(20):
                net.send(1 + i % 3, 1 + (i + 1) % 3, f"m{i}")
            drain(net)
            return net.trace_digest()

        assert run_once(1) != run_once(2)


class TestTimers:
    def test_fires_once_at_deadline(self):
        net, handlers = make_net()
        net.set_timer(1, 5, "ping")
        drain(net)
        assert handlers[1].timers == [(5, "ping")]

    def test_cancel(self):
        net, handlers = make_net()
        tid = net.set_timer(1, 5, "ping")
        net.cancel_timer(tid)
        drain(net)
        assert handlers[1].timers == []
        net.cancel_timer(999)  # unknown id is a no-op

    def test_rejects_zero_delay(self):
        net, _ = make_net()
        with pytest.raises(ValueError):
            net.set_timer(1, 0, "now")

    def test_periodic_rearm(self):
        class Periodic(Recorder):
            def on_start(self, now):
                return Effects().timer(4, "tick")

            def on_timer(self, now, tag):
                super().on_timer(now, tag)
                return Effects().timer(4, "tick") if now < 12 else Effects()

        net, _ = make_net()
        p = Periodic()
        net.register(8, p)
        net.start_all()
        drain(net)
        assert [t for t, _ in p.timers] == [4, 8, 12]


def test_cluster_partition_rule():
    groups = (frozenset({1, 2}), frozenset({3}))
    rule = cluster_partition_rule(groups, slow_delay=10_000, fast_lo=1, fast_hi=1)
    rng = random.Random(0)
    assert rule(1, 2, 0, rng) == 1
    assert rule(1, 3, 0, rng) == 10_000
    assert rule(3, 2, 0, rng) == 10_000


def test_run_stops_at_horizon():
    net, handlers = make_net(pre=lambda s, r, t, rng: 50, gst=10**9)
    net.send(1, 2, "late")
    net.run(horizon=10)
    assert handlers[2].deliveries == []
    net.run(horizon=100)
    assert handlers[2].deliveries
