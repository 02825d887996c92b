"""Single-shot leader-based Byzantine agreement among a fixed member set.

Views rotate through the members in id order.  A quorum of
ceil((|S| + f + 1) / 2) matching votes certifies a value; certified values
are locked and a decision needs the same quorum of matching commits.  A
leader taking over after a view change must re-propose the highest locked
certificate carried by the view-change quorum, and members refuse to vote
against their own lock unless shown an at-least-as-recent certificate.
Tolerates up to f Byzantine members once |S| >= 3f + 1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Set, Tuple

from .auth import Authenticator, KeyHandle, SigningAuthority, message_payload
from .graphs import ProcessId
from .messages import (
    Certificate,
    InnerCommit,
    InnerPropose,
    InnerViewChange,
    InnerVote,
    commit_payload,
    propose_payload,
    value_digest,
    view_change_payload,
    vote_payload,
)
from .simnet import Effects

MAX_TIMEOUT_DOUBLINGS = 20


def quorum_size(n_members: int, f_inner: int) -> int:
    """Smallest vote count whose pairwise overlap exceeds f_inner members."""
    return (n_members + f_inner + 2) // 2


def leader_of(view: int, members: Tuple[ProcessId, ...]) -> ProcessId:
    """View-salted deterministic leader choice.

    Members may disagree about which Byzantine processes belong to the set
    (discovery only guarantees agreement on the correct part), so a plain
    rotation over locally-sorted members can run schedules of different
    lengths that never align on a common leader.  Salting by view keeps the
    choice deterministic while guaranteeing that views whose winner lies in
    the common correct part recur, whatever extra members anyone carries.
    """
    return min(
        members,
        key=lambda m: (hashlib.sha256(f"leader|{view}|{m}".encode()).hexdigest(), m),
    )


@dataclass
class InnerConsensus:
    self_id: ProcessId
    members: Tuple[ProcessId, ...]
    f_inner: int
    proposal: object
    valid: Callable[[object], bool]
    authority: SigningAuthority
    key: KeyHandle
    timeout_base: int

    view: int = 0
    decided: Optional[object] = None
    decide_view: int = -1
    locked: Optional[Certificate] = None
    voted: Set[int] = field(default_factory=set)
    committed: Set[int] = field(default_factory=set)
    proposed: Set[int] = field(default_factory=set)
    config_error: Optional[str] = None

    _values: Dict[Tuple[int, str], object] = field(default_factory=dict)
    _votes: Dict[Tuple[int, str], Dict[ProcessId, Authenticator]] = field(default_factory=dict)
    _commits: Dict[Tuple[int, str], Dict[ProcessId, InnerCommit]] = field(default_factory=dict)
    _view_changes: Dict[int, Dict[ProcessId, Optional[Certificate]]] = field(default_factory=dict)
    _pending_proposals: Dict[int, "InnerPropose"] = field(default_factory=dict)
    _nudged: Set[ProcessId] = field(default_factory=set)
    _decide_key: Optional[Tuple[int, str]] = None

    def __post_init__(self) -> None:
        self.members = tuple(sorted(self.members))
        if self.self_id not in self.members:
            raise ValueError("instance owner must belong to the member set")
        if len(self.members) < 3 * self.f_inner + 1:
            self.config_error = (
                f"{len(self.members)} members cannot tolerate f={self.f_inner}"
            )

    # -- protocol facts ------------------------------------------------------

    @property
    def quorum(self) -> int:
        return quorum_size(len(self.members), self.f_inner)

    def leader(self, view: int) -> ProcessId:
        return leader_of(view, self.members)

    def _others(self):
        return [m for m in self.members if m != self.self_id]

    # -- lifecycle -----------------------------------------------------------

    def start(self, now: int) -> Effects:
        eff = Effects()
        if self.config_error:
            return eff
        if len(self.members) == 1:
            self.decided = self.proposal
            self.decide_view = 0
            return eff
        self._arm(eff)
        if self.leader(0) == self.self_id:
            self._propose(0, self.proposal, None, eff)
        return eff

    def on_timer(self, now: int, view: int, eff: Effects) -> Effects:
        if self.decided is not None or self.config_error or view != self.view:
            return eff
        self._send_view_change(view + 1, eff)
        self._advance(view + 1, eff)
        return eff

    def on_message(self, now: int, sender: ProcessId, msg: object, eff: Effects) -> Effects:
        if self.config_error:
            return eff
        if sender not in self.members:
            return eff
        if self.decided is not None:
            self._nudge(sender, eff)
            return eff
        # Evidence is attributed to its signer: commits forwarded by another
        # member still count for the member that signed them.
        signer = msg.auth.owner
        if signer not in self.members:
            return eff
        if isinstance(msg, InnerPropose):
            self._on_propose(signer, msg, eff)
        elif isinstance(msg, InnerVote):
            self._on_vote(signer, msg, eff)
        elif isinstance(msg, InnerCommit):
            self._on_commit(signer, msg, eff)
        elif isinstance(msg, InnerViewChange):
            self._on_view_change(signer, msg, eff)
        return eff

    # -- leader side -----------------------------------------------------------

    def _propose(self, view: int, value: object, just: Optional[Certificate], eff: Effects) -> None:
        if view in self.proposed:
            return
        self.proposed.add(view)
        digest = value_digest(value)
        auth = self.authority.sign_bytes(
            self.key, self.self_id, message_payload(propose_payload(view, digest))
        )
        msg = InnerPropose(view, value, just, auth)
        for m in self._others():
            eff.send(m, msg)
        self._consider_vote(self.self_id, msg, eff)

    def _maybe_lead(self, view: int, eff: Effects) -> None:
        if self.leader(view) != self.self_id or view != self.view or view in self.proposed:
            return
        store = self._view_changes.get(view, {})
        if len(store) < self.quorum:
            return
        # Re-propose the highest reported lock this process can itself back
        # with a local vote quorum; own lock counts as backed by definition.
        candidates = [c for c in store.values() if c is not None and self._justified(c)]
        if self.locked is not None:
            candidates.append(self.locked)
        best: Optional[Certificate] = None
        for cert in sorted(candidates, key=lambda c: (c.view, c.digest())):
            if best is None or cert.view > best.view:
                best = cert
        if best is not None:
            self._propose(view, best.value, best, eff)
        else:
            self._propose(view, self.proposal, None, eff)

    # -- member side -----------------------------------------------------------

    def _on_propose(self, sender: ProcessId, msg: InnerPropose, eff: Effects) -> None:
        if sender != self.leader(msg.view) or msg.view < self.view:
            return
        payload = message_payload(propose_payload(msg.view, value_digest(msg.value)))
        if not self.authority.verify_bytes(sender, payload, msg.auth):
            return
        if msg.view > self.view:
            self._pending_proposals.setdefault(msg.view, msg)
        self._consider_vote(sender, msg, eff)

    def _consider_vote(self, sender: ProcessId, msg: InnerPropose, eff: Effects) -> None:
        digest = value_digest(msg.value)
        self._values[(msg.view, digest)] = msg.value
        if msg.justification is not None:
            self._merge_cert_votes(msg.justification, eff)
        if msg.view != self.view or msg.view in self.voted:
            return
        if not self.valid(msg.value):
            return
        if self.locked is not None and msg.value != self.locked.value:
            just = msg.justification
            if just is None or just.view < self.locked.view or not self._justified(just):
                return
        self.voted.add(msg.view)
        auth = self.authority.sign_bytes(
            self.key, self.self_id, message_payload(vote_payload(msg.view, digest))
        )
        vote = InnerVote(msg.view, digest, auth)
        for m in self._others():
            eff.send(m, vote)
        self._tally_vote(self.self_id, vote, eff)

    def _on_vote(self, sender: ProcessId, msg: InnerVote, eff: Effects) -> None:
        payload = message_payload(vote_payload(msg.view, msg.digest))
        if not self.authority.verify_bytes(sender, payload, msg.auth):
            return
        self._tally_vote(sender, msg, eff)

    def _tally_vote(self, sender: ProcessId, msg: InnerVote, eff: Effects) -> None:
        key = (msg.view, msg.digest)
        self._votes.setdefault(key, {})[sender] = msg.auth
        self._try_certify(key, eff)

    def _try_certify(self, key: Tuple[int, str], eff: Effects) -> None:
        view, digest = key
        votes = self._votes.get(key, {})
        if len(votes) < self.quorum or key not in self._values:
            return
        if view in self.committed:
            return
        cert = Certificate(
            view, self._values[key], tuple(sorted(votes.items()))
        )
        self._adopt_lock(cert)
        self.committed.add(view)
        auth = self.authority.sign_bytes(
            self.key, self.self_id, message_payload(commit_payload(view, digest))
        )
        commit = InnerCommit(view, cert, auth)
        for m in self._others():
            eff.send(m, commit)
        self._tally_commit(self.self_id, commit, eff)

    def _on_commit(self, sender: ProcessId, msg: InnerCommit, eff: Effects) -> None:
        digest = msg.certificate.digest()
        payload = message_payload(commit_payload(msg.view, digest))
        if not self.authority.verify_bytes(sender, payload, msg.auth):
            return
        if msg.view != msg.certificate.view:
            return
        # The embedded certificate serves as vote transport: member sets may
        # disagree on Byzantine margins, so quorums are only ever judged
        # against the local tally, never against a transported bundle.
        self._merge_cert_votes(msg.certificate, eff)
        self._tally_commit(sender, msg, eff)

    def _tally_commit(self, sender: ProcessId, msg: InnerCommit, eff: Effects) -> None:
        key = (msg.view, msg.certificate.digest())
        self._values.setdefault(key, msg.certificate.value)
        holders = self._commits.setdefault(key, {})
        holders[sender] = msg
        if len(holders) >= self.quorum and self.decided is None:
            self.decided = self._values[key]
            self.decide_view = msg.view
            self._decide_key = key

    def _on_view_change(self, sender: ProcessId, msg: InnerViewChange, eff: Effects) -> None:
        locked_view = msg.locked.view if msg.locked else -1
        locked_digest = msg.locked.digest() if msg.locked else ""
        payload = message_payload(view_change_payload(msg.view, locked_view, locked_digest))
        if not self.authority.verify_bytes(sender, payload, msg.auth):
            return
        if msg.locked is not None:
            self._merge_cert_votes(msg.locked, eff)
        store = self._view_changes.setdefault(msg.view, {})
        store[sender] = msg.locked
        if msg.view > self.view and len(store) > self.f_inner:
            # Someone correct is ahead of us; join the view change.
            self._send_view_change(msg.view, eff)
            self._advance(msg.view, eff)
        self._maybe_lead(msg.view, eff)

    # -- shared helpers ----------------------------------------------------------

    def _send_view_change(self, view: int, eff: Effects) -> None:
        store = self._view_changes.setdefault(view, {})
        if self.self_id in store:
            return
        locked_view = self.locked.view if self.locked else -1
        locked_digest = self.locked.digest() if self.locked else ""
        auth = self.authority.sign_bytes(
            self.key,
            self.self_id,
            message_payload(view_change_payload(view, locked_view, locked_digest)),
        )
        msg = InnerViewChange(view, self.locked, auth)
        for m in self._others():
            eff.send(m, msg)
        store[self.self_id] = self.locked

    def _advance(self, view: int, eff: Effects) -> None:
        if view <= self.view:
            return
        self.view = view
        self._arm(eff)
        self._maybe_lead(view, eff)
        # A proposal for this view may already have arrived while we lagged.
        pending = self._pending_proposals.pop(view, None)
        if pending is not None:
            self._consider_vote(self.leader(view), pending, eff)
        self._replay_pending(eff)

    def _replay_pending(self, eff: Effects) -> None:
        for key in sorted(self._votes):
            self._try_certify(key, eff)

    def _arm(self, eff: Effects) -> None:
        exponent = min(self.view, MAX_TIMEOUT_DOUBLINGS)
        eff.timer(self.timeout_base * (2**exponent), f"inner:{self.view}")

    def _adopt_lock(self, cert: Certificate) -> None:
        if self.locked is None or cert.view > self.locked.view:
            self.locked = cert

    def _merge_cert_votes(self, cert: Certificate, eff: Effects) -> None:
        """Fold a transported certificate's individually-signed votes into
        the local tallies; certification is only ever judged locally."""
        digest = cert.digest()
        key = (cert.view, digest)
        self._values.setdefault(key, cert.value)
        payload = message_payload(vote_payload(cert.view, digest))
        tally = self._votes.setdefault(key, {})
        for voter, auth in cert.votes:
            if voter in tally or voter not in self.members:
                continue
            if self.authority.verify_bytes(voter, payload, auth):
                tally[voter] = auth
        self._try_certify(key, eff)

    def _justified(self, cert: Certificate) -> bool:
        """A certificate counts once the local tally backs it at full quorum."""
        tally = self._votes.get((cert.view, cert.digest()), {})
        return len(tally) >= self.quorum

    def _nudge(self, sender: ProcessId, eff: Effects) -> None:
        """Hand a straggler the full deciding commit quorum, once per peer.

        Commit messages are transferable (signed by their original senders),
        so forwarding the stored quorum lets the straggler decide directly.
        """
        if sender in self._nudged or self._decide_key is None:
            return
        self._nudged.add(sender)
        for _, commit in sorted(self._commits.get(self._decide_key, {}).items()):
            eff.send(sender, commit)
