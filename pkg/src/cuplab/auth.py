"""Simulated unforgeable authenticators for protocol records.

A per-run signing authority hands each process an opaque key handle and
binds (owner, payload) pairs to tags derived from a private salt.  Nothing
exposed through the simulation API lets an adversary mint a verifying tag
for another process, which is all the protocol correctness arguments need;
the interface admits a real signature scheme as a drop-in.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable

from .graphs import ProcessId

KeyHandle = str


class AuthorityViolation(RuntimeError):
    """Signing attempted with a key that does not belong to the owner."""


@dataclass(frozen=True)
class Authenticator:
    owner: ProcessId
    tag: str


@dataclass(frozen=True)
class SignedPD:
    """A participant-detector record bound to its owner."""

    owner: ProcessId
    pd: FrozenSet[ProcessId]
    auth: Authenticator

    def summary(self) -> str:
        return f"{self.owner}->{sorted(self.pd)}"


def pd_payload(pd: Iterable[ProcessId]) -> bytes:
    return json.dumps(sorted(pd)).encode()


def message_payload(fields: dict) -> bytes:
    return json.dumps(fields, sort_keys=True, separators=(",", ":")).encode()


class SigningAuthority:
    """Issues keys and verifies tags for one simulation run."""

    def __init__(self, salt: int):
        self._salt = salt
        self._keys: Dict[ProcessId, KeyHandle] = {}

    def register(self, owner: ProcessId) -> KeyHandle:
        key = self._keys.get(owner)
        if key is None:
            key = hashlib.sha256(f"key|{self._salt}|{owner}".encode()).hexdigest()[:24]
            self._keys[owner] = key
        return key

    def _tag(self, owner: ProcessId, payload: bytes) -> str:
        digest = hashlib.sha256(payload).hexdigest()
        return hashlib.sha256(
            f"tag|{self._salt}|{owner}|{digest}".encode()
        ).hexdigest()[:32]

    def sign_bytes(self, key: KeyHandle, owner: ProcessId, payload: bytes) -> Authenticator:
        if self._keys.get(owner) != key:
            raise AuthorityViolation(f"key does not belong to process {owner}")
        return Authenticator(owner, self._tag(owner, payload))

    def verify_bytes(self, owner: ProcessId, payload: bytes, auth: Authenticator) -> bool:
        return auth.owner == owner and auth.tag == self._tag(owner, payload)

    def sign_pd(self, key: KeyHandle, owner: ProcessId, pd: Iterable[ProcessId]) -> SignedPD:
        pd_set = frozenset(pd)
        if owner in pd_set:
            raise ValueError("a participant detector never lists its own process")
        auth = self.sign_bytes(key, owner, pd_payload(pd_set))
        return SignedPD(owner, pd_set, auth)

    def verify_pd(self, rec: SignedPD) -> bool:
        if rec.owner in rec.pd:
            return False
        return self.verify_bytes(rec.owner, pd_payload(rec.pd), rec.auth)
