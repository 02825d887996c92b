"""Wire message types exchanged by the protocol state machines.

The encoding only has to be canonical within one run (trace digests and
authenticator payloads); cross-version stability is a non-goal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Tuple

from .auth import Authenticator, SignedPD
from .graphs import ProcessId


def value_digest(value: object) -> str:
    blob = json.dumps(value, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class GetPds:
    def summary(self) -> str:
        return "GetPDs"


@dataclass(frozen=True)
class SetPds:
    records: Tuple[SignedPD, ...]

    def summary(self) -> str:
        return "SetPDs[" + ",".join(r.summary() for r in self.records) + "]"


@dataclass(frozen=True)
class GetDecidedVal:
    def summary(self) -> str:
        return "GetDecidedVal"


@dataclass(frozen=True)
class DecidedVal:
    value: object

    def summary(self) -> str:
        return f"DecidedVal({value_digest(self.value)})"


@dataclass(frozen=True)
class Certificate:
    """Quorum of signed votes binding one value to one view."""

    view: int
    value: object
    votes: Tuple[Tuple[ProcessId, Authenticator], ...]

    def digest(self) -> str:
        return value_digest(self.value)

    def summary(self) -> str:
        return f"cert(v{self.view},{self.digest()[:6]},{len(self.votes)})"


@dataclass(frozen=True)
class InnerPropose:
    view: int
    value: object
    justification: Optional[Certificate]
    auth: Authenticator

    def summary(self) -> str:
        just = self.justification.summary() if self.justification else "-"
        return f"Propose(v{self.view},{value_digest(self.value)[:6]},{just})"


@dataclass(frozen=True)
class InnerVote:
    view: int
    digest: str
    auth: Authenticator

    def summary(self) -> str:
        return f"Vote(v{self.view},{self.digest[:6]})"


@dataclass(frozen=True)
class InnerCommit:
    view: int
    certificate: Certificate
    auth: Authenticator

    def summary(self) -> str:
        return f"Commit(v{self.view},{self.certificate.digest()[:6]})"


@dataclass(frozen=True)
class InnerViewChange:
    view: int
    locked: Optional[Certificate]
    auth: Authenticator

    def summary(self) -> str:
        lock = self.locked.summary() if self.locked else "-"
        return f"ViewChange(v{self.view},{lock})"


def propose_payload(view: int, digest: str) -> dict:
    return {"kind": "inner-propose", "view": view, "digest": digest}


def vote_payload(view: int, digest: str) -> dict:
    return {"kind": "inner-vote", "view": view, "digest": digest}


def commit_payload(view: int, digest: str) -> dict:
    return {"kind": "inner-commit", "view": view, "digest": digest}


def view_change_payload(view: int, locked_view: int, locked_digest: str) -> dict:
    return {
        "kind": "inner-view-change",
        "view": view,
        "lockedView": locked_view,
        "lockedDigest": locked_digest,
    }
