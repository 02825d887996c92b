"""Byzantine behaviors driving faulty processes.

Strategies wrap a protocol-faithful process and bend specific behaviors:
staying silent, crashing at a scheduled tick, lying about the own
participant detector (uniformly or per receiver), or equivocating as the
inner-consensus leader.  Strategies may read the whole scenario, but they
can only sign with their own key, so records owned by correct processes
stay unforgeable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Optional, Tuple

from .auth import KeyHandle, SignedPD, SigningAuthority
from .graphs import ProcessId
from .messages import InnerPropose, SetPds, propose_payload, value_digest
from .auth import message_payload
from .protocol import Process, ProcessConfig
from .simnet import Effects


@dataclass(frozen=True)
class Silent:
    kind: str = "silent"


@dataclass(frozen=True)
class Crash:
    at: int
    kind: str = "crash"


@dataclass(frozen=True)
class FakePd:
    claimed: FrozenSet[ProcessId]
    kind: str = "fakePd"


@dataclass(frozen=True)
class EquivocatePd:
    per_receiver: Tuple[Tuple[ProcessId, FrozenSet[ProcessId]], ...]
    default: Optional[FrozenSet[ProcessId]] = None
    kind: str = "equivocatePd"

    def claim_for(self, receiver: ProcessId, real: FrozenSet[ProcessId]) -> FrozenSet[ProcessId]:
        for r, claim in self.per_receiver:
            if r == receiver:
                return claim
        return self.default if self.default is not None else real


@dataclass(frozen=True)
class InnerEquivocate:
    kind: str = "innerEquivocate"


@dataclass(frozen=True)
class FollowProtocol:
    kind: str = "followProtocol"


@dataclass(frozen=True)
class Composite:
    parts: Tuple[object, ...]
    kind: str = "composite"


Strategy = object


class ByzantineDriver:
    """Engine-facing wrapper applying a strategy around a faithful process."""

    def __init__(
        self,
        self_id: ProcessId,
        real_pd: FrozenSet[ProcessId],
        strategy: Strategy,
        config: ProcessConfig,
        authority: SigningAuthority,
        key: KeyHandle,
        rng: random.Random,
    ):
        self.self_id = self_id
        self.real_pd = frozenset(real_pd)
        self.authority = authority
        self.key = key
        self.rng = rng
        parts = strategy.parts if isinstance(strategy, Composite) else (strategy,)
        self.silent = any(isinstance(p, Silent) for p in parts)
        crashes = [p.at for p in parts if isinstance(p, Crash)]
        self.crash_at: Optional[int] = min(crashes) if crashes else None
        fakes = [p for p in parts if isinstance(p, FakePd)]
        self.equivocate: Optional[EquivocatePd] = next(
            (p for p in parts if isinstance(p, EquivocatePd)), None
        )
        self.inner_equivocate = any(isinstance(p, InnerEquivocate) for p in parts)
        operating_pd = fakes[0].claimed if fakes else self.real_pd
        self.process = Process(self_id, operating_pd, config, authority, key)
        self._claim_cache: Dict[FrozenSet[ProcessId], SignedPD] = {}
        self.sent_anything = False

    # -- gates -------------------------------------------------------------

    def _gagged(self, now: int) -> bool:
        if self.silent:
            return True
        return self.crash_at is not None and now >= self.crash_at

    # -- handler API -----------------------------------------------------------

    def on_start(self, now: int) -> Effects:
        if self._gagged(now):
            return Effects()
        return self._shape(now, self.process.on_start(now))

    def on_timer(self, now: int, tag: str) -> Effects:
        if self._gagged(now):
            return Effects()
        return self._shape(now, self.process.on_timer(now, tag))

    def on_deliver(self, now: int, sender: ProcessId, msg: object) -> Effects:
        if self._gagged(now):
            return Effects()
        return self._shape(now, self.process.on_deliver(now, sender, msg))

    # -- strategy shaping ----------------------------------------------------------

    def _shape(self, now: int, eff: Effects) -> Effects:
        shaped = Effects(timers=eff.timers, cancels=eff.cancels)
        for to, msg in eff.sends:
            if isinstance(msg, SetPds) and self.equivocate is not None:
                msg = self._equivocated_records(to, msg)
            elif isinstance(msg, InnerPropose) and self.inner_equivocate:
                msg = self._split_proposal(to, msg)
            shaped.send(to, msg)
        if shaped.sends:
            self.sent_anything = True
        return shaped

    def _equivocated_records(self, receiver: ProcessId, msg: SetPds) -> SetPds:
        claim = self.equivocate.claim_for(receiver, self.real_pd) - {self.self_id}
        rec = self._claim_cache.get(claim)
        if rec is None:
            rec = self.authority.sign_pd(self.key, self.self_id, claim)
            self._claim_cache[claim] = rec
        others = tuple(r for r in msg.records if r.owner != self.self_id)
        return SetPds(tuple(sorted(others + (rec,), key=lambda r: (r.owner, sorted(r.pd)))))

    def _split_proposal(self, receiver: ProcessId, msg: InnerPropose) -> InnerPropose:
        if self.process.inner is None:
            return msg
        members = [m for m in self.process.inner.members if m != self.self_id]
        half = members.index(receiver) % 2 if receiver in members else 0
        value = msg.value if half == 0 else f"{msg.value}#alt"
        if value == msg.value:
            return msg
        auth = self.authority.sign_bytes(
            self.key,
            self.self_id,
            message_payload(propose_payload(msg.view, value_digest(value))),
        )
        return InnerPropose(msg.view, value, msg.justification, auth)
