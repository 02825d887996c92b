"""Deterministic discrete-event network with partial synchrony.

Channels are reliable and authenticated but not FIFO: each envelope gets an
independent delay draw, which reorders messages and stresses the protocol
layer harder than the model strictly requires.  Before GST the scenario's
pre-GST rule shapes delays arbitrarily (but finitely); from GST on, delays
between correct processes are bounded by delta.  Ties in the event queue
break by insertion sequence so equal seeds replay identically.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Protocol, Tuple

from .graphs import ProcessId

SimTime = int

PreGstRule = Callable[[ProcessId, ProcessId, SimTime, random.Random], int]


def uniform_pre_rule(lo: int, hi: int) -> PreGstRule:
    def rule(sender: ProcessId, receiver: ProcessId, t: SimTime, rng: random.Random) -> int:
        return rng.randint(lo, hi)

    return rule


def cluster_partition_rule(
    groups: Tuple[frozenset, ...], slow_delay: int, fast_lo: int = 1, fast_hi: int = 5
) -> PreGstRule:
    """Fast delivery inside each group, ``slow_delay`` across groups.

    Used to reproduce split-brain schedules: pick ``slow_delay`` beyond the
    scenario horizon and the clusters never hear from each other in time.
    """

    def rule(sender: ProcessId, receiver: ProcessId, t: SimTime, rng: random.Random) -> int:
        for group in groups:
            if sender in group and receiver in group:
                return rng.randint(fast_lo, fast_hi)
        return slow_delay

    return rule


@dataclass
class DelayPolicy:
    gst: SimTime
    delta: int
    pre_rule: PreGstRule
    correct: frozenset

    def delay(self, sender: ProcessId, receiver: ProcessId, t: SimTime, rng: random.Random) -> int:
        if t >= self.gst and sender in self.correct and receiver in self.correct:
            return rng.randint(1, self.delta)
        d = int(self.pre_rule(sender, receiver, t, rng))
        return max(1, d)


@dataclass(frozen=True)
class Envelope:
    sender: ProcessId
    receiver: ProcessId
    payload: object
    send_time: SimTime
    deliver_time: SimTime
    seq: int


class ProcessHandler(Protocol):
    def on_start(self, now: SimTime) -> "Effects": ...

    def on_deliver(self, now: SimTime, sender: ProcessId, payload: object) -> "Effects": ...

    def on_timer(self, now: SimTime, tag: str) -> "Effects": ...


@dataclass
class Effects:
    """Outbound messages and timer operations produced by one handler call."""

    sends: List[Tuple[ProcessId, object]] = field(default_factory=list)
    timers: List[Tuple[int, str]] = field(default_factory=list)
    cancels: List[int] = field(default_factory=list)

    def send(self, to: ProcessId, payload: object) -> "Effects":
        self.sends.append((to, payload))
        return self

    def timer(self, delay: int, tag: str) -> "Effects":
        self.timers.append((delay, tag))
        return self


_DELIVER = "deliver"
_TIMER = "timer"


class Network:
    """Single-threaded event engine driving registered process handlers."""

    def __init__(self, policy: DelayPolicy, rng: random.Random):
        self.policy = policy
        self.rng = rng
        self.now: SimTime = 0
        self._seq = 0
        self._queue: List[Tuple[SimTime, int, str, object]] = []
        self._handlers: Dict[ProcessId, ProcessHandler] = {}
        self._cancelled: set = set()
        self._next_timer_id = 1
        self.trace: List[str] = []
        self.sent_count = 0
        self.delivered_count = 0

    # -- wiring ------------------------------------------------------------

    def register(self, pid: ProcessId, handler: ProcessHandler) -> None:
        if pid in self._handlers:
            raise ValueError(f"process {pid} already registered")
        self._handlers[pid] = handler

    def start_all(self) -> None:
        for pid in sorted(self._handlers):
            self._trace("start", pid, pid, "")
            self._apply(pid, self._handlers[pid].on_start(self.now))

    # -- primitives --------------------------------------------------------

    def send(self, sender: ProcessId, receiver: ProcessId, payload: object) -> None:
        if sender not in self._handlers or receiver not in self._handlers:
            raise ValueError(f"unknown endpoint in send {sender}->{receiver}")
        delay = self.policy.delay(sender, receiver, self.now, self.rng)
        env = Envelope(sender, receiver, payload, self.now, self.now + delay, self._bump())
        heapq.heappush(self._queue, (env.deliver_time, env.seq, _DELIVER, env))
        self.sent_count += 1

    def set_timer(self, owner: ProcessId, delay: int, tag: str) -> int:
        if delay < 1:
            raise ValueError("timer delay must be at least 1")
        timer_id = self._next_timer_id
        self._next_timer_id += 1
        heapq.heappush(
            self._queue, (self.now + delay, self._bump(), _TIMER, (owner, tag, timer_id))
        )
        return timer_id

    def cancel_timer(self, timer_id: int) -> None:
        self._cancelled.add(timer_id)

    # -- event loop --------------------------------------------------------

    def step(self) -> Optional[Tuple[SimTime, str, object]]:
        """Pop and dispatch the next event; None when the queue is empty."""
        while self._queue:
            when, seq, kind, item = heapq.heappop(self._queue)
            if kind == _TIMER and item[2] in self._cancelled:
                continue
            self.now = max(self.now, when)
            if kind == _DELIVER:
                env: Envelope = item
                self.delivered_count += 1
                self._trace("deliver", env.sender, env.receiver, _summary(env.payload))
                effects = self._handlers[env.receiver].on_deliver(
                    self.now, env.sender, env.payload
                )
                self._apply(env.receiver, effects)
            else:
                owner, tag, _ = item
                self._trace("timer", owner, owner, tag)
                self._apply(owner, self._handlers[owner].on_timer(self.now, tag))
            return self.now, kind, item
        return None

    def next_event_time(self) -> Optional[SimTime]:
        while self._queue:
            when, seq, kind, item = self._queue[0]
            if kind == _TIMER and item[2] in self._cancelled:
                heapq.heappop(self._queue)
                continue
            return when
        return None

    def run(self, horizon: SimTime, stop: Callable[[], bool] = lambda: False) -> None:
        """Dispatch events until the horizon passes, the queue drains, or stop()."""
        while not stop():
            upcoming = self.next_event_time()
            if upcoming is None or upcoming > horizon:
                break
            self.step()

    # -- internals -----------------------------------------------------------

    def _apply(self, pid: ProcessId, effects: Optional[Effects]) -> None:
        if effects is None:
            return
        for to, payload in effects.sends:
            self._trace("send", pid, to, _summary(payload))
            self.send(pid, to, payload)
        for delay, tag in effects.timers:
            self.set_timer(pid, delay, tag)
        for timer_id in effects.cancels:
            self.cancel_timer(timer_id)

    def _bump(self) -> int:
        self._seq += 1
        return self._seq

    def _trace(self, kind: str, a: ProcessId, b: ProcessId, summary: str) -> None:
        self.trace.append(f"{self.now}\t{kind}\t{a}\t{b}\t{summary}")

    def trace_digest(self) -> str:
        return hashlib.sha256("\n".join(self.trace).encode()).hexdigest()


def _summary(payload: object) -> str:
    s = getattr(payload, "summary", None)
    if callable(s):
        return s()
    return str(payload)
