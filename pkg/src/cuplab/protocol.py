"""Discovery, sink/core identification, and the outer consensus lifecycle.

Each process grows a local view by periodically pulling signed participant
detector records from everyone it knows.  On every view change it re-checks
the waiting condition: a received subset R whose induced strong
connectivity beats the threshold while at most threshold-many outside
vertices are strongly reachable from all of R.  With a known fault
threshold the check runs at that single level; without one it scans
thresholds upward from zero.  The returned member set then either runs the
inner agreement (members) or polls it for the decided value (outsiders).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, FrozenSet, List, Optional, Set, Tuple

from .auth import KeyHandle, SignedPD, SigningAuthority
from .graphs import KnowledgeGraph, ProcessId, disjoint_paths, kappa_at_least
from .inner import InnerConsensus
from .messages import (
    DecidedVal,
    GetDecidedVal,
    GetPds,
    InnerCommit,
    InnerPropose,
    InnerViewChange,
    InnerVote,
    SetPds,
    value_digest,
)
from .simnet import Effects

DISCOVERY_TIMER = "discovery"
INNER_TIMER_PREFIX = "inner:"


@dataclass
class LocalView:
    """The evolving knowledge state of one process."""

    self_id: ProcessId
    pd_self: FrozenSet[ProcessId]
    s_pd: Set[SignedPD] = field(default_factory=set)
    s_known: Set[ProcessId] = field(default_factory=set)
    s_received: Set[ProcessId] = field(default_factory=set)
    version: int = 0

    @staticmethod
    def fresh(self_id: ProcessId, pd: FrozenSet[ProcessId], own_record: SignedPD) -> "LocalView":
        return LocalView(
            self_id=self_id,
            pd_self=frozenset(pd),
            s_pd={own_record},
            s_known=set(pd) | {self_id},
            s_received={self_id},
        )

    def merge_records(
        self, sender: ProcessId, records: Tuple[SignedPD, ...], authority: SigningAuthority
    ) -> bool:
        """Guarded merge: ignore the batch unless the sender's own record
        verifies; then fold in every individually verifying record."""
        if not any(r.owner == sender and authority.verify_pd(r) for r in records):
            return False
        before = (len(self.s_pd), len(self.s_known), len(self.s_received))
        for rec in sorted(records, key=lambda r: (r.owner, sorted(r.pd))):
            if rec in self.s_pd or not authority.verify_pd(rec):
                continue
            self.s_pd.add(rec)
            self.s_known |= rec.pd
            self.s_received.add(rec.owner)
        changed = before != (len(self.s_pd), len(self.s_known), len(self.s_received))
        if changed:
            self.version += 1
        return changed

    def graph(self) -> KnowledgeGraph:
        """Graph formed by the held records plus the process's own detector."""
        vertices = frozenset(self.s_known | self.s_received)
        edges = {(self.self_id, p) for p in self.pd_self}
        for rec in self.s_pd:
            for member in rec.pd:
                edges.add((rec.owner, member))
        return KnowledgeGraph(vertices, frozenset(edges))


@dataclass(frozen=True)
class Acceptance:
    """A satisfied waiting condition: members R, boundary Kstar, threshold y."""

    members_r: FrozenSet[ProcessId]
    kstar: FrozenSet[ProcessId]
    y: int

    @property
    def result(self) -> FrozenSet[ProcessId]:
        return self.members_r | self.kstar


@dataclass(frozen=True)
class DiscoveryOutcome:
    members: FrozenSet[ProcessId]
    y: Optional[int]
    kind: str  # "sink" | "core"


def _level_search(
    g: KnowledgeGraph,
    received: FrozenSet[ProcessId],
    universe: FrozenSet[ProcessId],
    y: int,
) -> Optional[Acceptance]:
    """Find the first acceptable R at threshold y, in the pinned order.

    Candidates run size-descending, lexicographic within a size.  Two sound
    prunes keep this fast: shrinking R only grows its boundary set, so a
    level whose full-received boundary is already too big is dead; and
    induced connectivity never exceeds whole-graph connectivity, so the
    pairwise path matrix filters before any induced flow runs.
    """
    received_sorted = sorted(received)
    if len(received_sorted) < y + 2:
        return None

    dp_memo: Dict[Tuple[ProcessId, ProcessId], int] = {}

    def dp(a: ProcessId, b: ProcessId) -> int:
        key = (a, b)
        if key not in dp_memo:
            dp_memo[key] = disjoint_paths(g, a, b)
        return dp_memo[key]

    def kstar_of(members: Tuple[ProcessId, ...], bail_above: int) -> Optional[List[ProcessId]]:
        found: List[ProcessId] = []
        for t in sorted(universe - frozenset(members)):
            if all(dp(r, t) > y for r in members):
                found.append(t)
                if len(found) > bail_above:
                    return None
        return found

    full = tuple(received_sorted)
    full_kstar = kstar_of(full, y)
    if full_kstar is None:
        return None
    for size in range(len(received_sorted), y + 1, -1):
        for combo in combinations(received_sorted, size):
            if any(
                dp(a, b) < y + 1 for a in combo for b in combo if a != b
            ):
                continue
            kstar = kstar_of(combo, y) if combo != full else full_kstar
            if kstar is None:
                continue
            if not kappa_at_least(g, frozenset(combo), y + 1):
                continue
            return Acceptance(frozenset(combo), frozenset(kstar), y)
    return None


def sink_check(view: LocalView, f: int) -> Optional[Acceptance]:
    """Known-threshold waiting condition at level f."""
    g = view.graph()
    return _level_search(g, frozenset(view.s_received), frozenset(g.vertices), f)


def core_check(view: LocalView) -> Optional[Acceptance]:
    """Unknown-threshold condition: scan levels upward, members as in sink_check."""
    g = view.graph()
    received = frozenset(view.s_received)
    universe = frozenset(g.vertices)
    for y in range(0, max(0, len(received) - 1)):
        hit = _level_search(g, received, universe, y)
        if hit is not None:
            return hit
    return None


@dataclass
class ProcessConfig:
    mode: str  # "knownF" | "unknownF"
    f: Optional[int]
    proposal: object
    valid: Callable[[object], bool] = lambda value: True
    discovery_period: int = 20
    inner_timeout_base: int = 80
    f_inner_rule: str = "y"  # "y" | "floorThird"

    def __post_init__(self) -> None:
        if self.mode not in ("knownF", "unknownF"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "knownF" and (self.f is None or self.f < 0):
            raise ValueError("knownF mode needs f >= 0")
        if self.f_inner_rule not in ("y", "floorThird"):
            raise ValueError(f"unknown inner fault rule {self.f_inner_rule!r}")


INNER_MESSAGES = (InnerPropose, InnerVote, InnerCommit, InnerViewChange)


class Process:
    """Correct-process state machine: discovery, identification, consensus."""

    def __init__(
        self,
        self_id: ProcessId,
        pd: FrozenSet[ProcessId],
        config: ProcessConfig,
        authority: SigningAuthority,
        key: KeyHandle,
    ):
        self.self_id = self_id
        self.config = config
        self.authority = authority
        self.key = key
        own_record = authority.sign_pd(key, self_id, pd)
        self.view = LocalView.fresh(self_id, frozenset(pd), own_record)
        self.outcome: Optional[DiscoveryOutcome] = None
        self.acceptance: Optional[Acceptance] = None
        self.accept_time: Optional[int] = None
        self.inner: Optional[InnerConsensus] = None
        self.val: Optional[object] = None
        self.decide_time: Optional[int] = None
        self.config_error: Optional[str] = None
        self._pending_requests: List[ProcessId] = []
        self._fetch_tally: Dict[str, Set[ProcessId]] = {}
        self._fetch_values: Dict[str, object] = {}
        # Inner traffic can arrive before this process accepts its own
        # member set; buffer it so reliable delivery carries through.
        self._inner_backlog: List[Tuple[ProcessId, object]] = []

    # -- engine entry points -------------------------------------------------

    def on_start(self, now: int) -> Effects:
        eff = self._discovery_burst(Effects())
        eff.timer(self.config.discovery_period, DISCOVERY_TIMER)
        self._check_condition(now, eff)
        return eff

    def on_timer(self, now: int, tag: str) -> Effects:
        eff = Effects()
        if tag == DISCOVERY_TIMER:
            self._discovery_burst(eff)
            eff.timer(self.config.discovery_period, DISCOVERY_TIMER)
        elif tag.startswith(INNER_TIMER_PREFIX) and self.inner is not None:
            view_no = int(tag[len(INNER_TIMER_PREFIX):])
            self.inner.on_timer(now, view_no, eff)
            self._absorb_decision(now, eff)
        return eff

    def on_deliver(self, now: int, sender: ProcessId, msg: object) -> Effects:
        eff = Effects()
        if isinstance(msg, GetPds):
            eff.send(sender, SetPds(self._records_snapshot()))
        elif isinstance(msg, SetPds):
            if self.view.merge_records(sender, msg.records, self.authority):
                self._check_condition(now, eff)
        elif isinstance(msg, GetDecidedVal):
            if self.val is not None:
                eff.send(sender, DecidedVal(self.val))
            elif sender not in self._pending_requests:
                self._pending_requests.append(sender)
        elif isinstance(msg, DecidedVal):
            self._on_decided_val(now, sender, msg.value, eff)
        elif isinstance(msg, INNER_MESSAGES):
            if self.inner is None:
                self._inner_backlog.append((sender, msg))
            else:
                self.inner.on_message(now, sender, msg, eff)
                self._absorb_decision(now, eff)
        return eff

    # -- discovery -------------------------------------------------------------

    def _discovery_burst(self, eff: Effects) -> Effects:
        for peer in sorted(self.view.s_known - {self.self_id}):
            eff.send(peer, GetPds())
        return eff

    def _records_snapshot(self) -> Tuple[SignedPD, ...]:
        return tuple(sorted(self.view.s_pd, key=lambda r: (r.owner, sorted(r.pd))))

    # -- waiting condition -------------------------------------------------------

    def _check_condition(self, now: int, eff: Effects) -> None:
        if self.outcome is not None:
            return
        if self.config.mode == "knownF":
            hit = sink_check(self.view, self.config.f)
            kind = "sink"
        else:
            hit = core_check(self.view)
            kind = "core"
        if hit is None:
            return
        self.acceptance = hit
        self.accept_time = now
        members = hit.result
        self.outcome = DiscoveryOutcome(
            members, hit.y if self.config.mode == "unknownF" else None, kind
        )
        if self.self_id in members:
            self._start_inner(now, members, hit.y, eff)
            # Members also poll: identified sets may differ on the Byzantine
            # margin, and a member whose set (hence quorum) is larger than
            # its peers' can otherwise outlive their retired instances.  A
            # majority of the member set always contains a correct decider.
            for target in sorted(members - {self.self_id}):
                eff.send(target, GetDecidedVal())
        else:
            for target in sorted(members):
                eff.send(target, GetDecidedVal())

    def _start_inner(self, now: int, members: FrozenSet[ProcessId], y: int, eff: Effects) -> None:
        if self.config.mode == "knownF":
            f_inner = self.config.f
        elif self.config.f_inner_rule == "floorThird":
            f_inner = (len(members) - 1) // 3
        else:
            f_inner = y
        self.inner = InnerConsensus(
            self_id=self.self_id,
            members=tuple(sorted(members)),
            f_inner=f_inner,
            proposal=self.config.proposal,
            valid=self.config.valid,
            authority=self.authority,
            key=self.key,
            timeout_base=self.config.inner_timeout_base,
        )
        start_eff = self.inner.start(now)
        eff.sends.extend(start_eff.sends)
        eff.timers.extend(start_eff.timers)
        if self.inner.config_error:
            self.config_error = self.inner.config_error
        for sender, msg in self._inner_backlog:
            self.inner.on_message(now, sender, msg, eff)
        self._inner_backlog.clear()
        self._absorb_decision(now, eff)

    # -- decision plumbing ---------------------------------------------------------

    def _absorb_decision(self, now: int, eff: Effects) -> None:
        if self.inner is None or self.inner.decided is None or self.val is not None:
            return
        self.val = self.inner.decided
        self.decide_time = now
        for requester in self._pending_requests:
            eff.send(requester, DecidedVal(self.val))
        self._pending_requests.clear()

    def _on_decided_val(self, now: int, sender: ProcessId, value: object, eff: Effects) -> None:
        if self.val is not None or self.outcome is None:
            return
        members = self.outcome.members
        if sender not in members or sender == self.self_id:
            return
        digest = value_digest(value)
        self._fetch_values[digest] = value
        holders = self._fetch_tally.setdefault(digest, set())
        holders.add(sender)
        need = (len(members) + 2) // 2  # ceil((|S|+1)/2)
        if len(holders) >= need:
            self.val = value
            self.decide_time = now
            for requester in self._pending_requests:
                eff.send(requester, DecidedVal(self.val))
            self._pending_requests.clear()
