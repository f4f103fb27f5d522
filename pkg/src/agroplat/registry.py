"""User accounts, authentication, sessions, and the farm/crop registry."""
from __future__ import annotations

import hashlib
import hmac
import secrets
import time
from dataclasses import dataclass

from .errors import (BadCredentials, DuplicateName, MissingField, NotOwner,
                     SpecError, Unauthenticated, UnknownCrop, UnknownFarm,
                     UnknownUser, VersionConflict, WeakSecret)
from .store import DocumentStore, new_id

ROLE_FARMER = "farmer"
ROLE_AGRONOMIST = "agronomist"
ROLE_MERCHANT = "merchant"
ROLES = (ROLE_FARMER, ROLE_AGRONOMIST, ROLE_MERCHANT)

SESSION_TTL = 24 * 3600
MIN_SECRET_LEN = 8

_SCRYPT_R = 8
_SCRYPT_P = 1
_DKLEN = 32


@dataclass(frozen=True)
class UserAccount:
    id: str
    name: str
    role: str
    contact: dict
    created_at: float


@dataclass(frozen=True)
class Farm:
    id: str
    farmer_id: str
    name: str
    locality: str
    created_at: float


@dataclass(frozen=True)
class Crop:
    id: str
    farm_id: str
    farmer_id: str
    kind: str
    planted_at: str
    notes: str
    created_at: float


class Registry:
    """Accounts and their farms/crops, persisted in the document store.

    clock is injectable for deterministic expiry tests; scrypt_log_n can be
    lowered in tests where hashing cost dominates.
    """

    def __init__(self, store: DocumentStore, clock=time.time, scrypt_log_n: int = 14):
        self.store = store
        self.clock = clock
        self.scrypt_log_n = scrypt_log_n
        # verified against when the username is unknown, so lookup misses
        # take the same time as a wrong secret
        self._decoy = self._hash_secret("decoy-secret", b"\x00" * 16)

    # -- credentials -------------------------------------------------------

    def _hash_secret(self, secret: str, salt: bytes) -> bytes:
        return hashlib.scrypt(secret.encode("utf-8"), salt=salt,
                              n=1 << self.scrypt_log_n, r=_SCRYPT_R, p=_SCRYPT_P,
                              maxmem=256 * 1024 * 1024, dklen=_DKLEN)

    def register(self, name: str, role: str, contact: dict, secret: str):
        """Create an account and an initial session. Returns (UserAccount, token)."""
        if not name or not name.strip():
            raise MissingField("name must be nonempty")
        if role not in ROLES:
            raise SpecError(f"unknown role {role!r}; expected one of {ROLES}")
        if not isinstance(contact, dict) or not contact.get("phone") or not contact.get("locality"):
            raise MissingField("contact record needs phone and locality")
        if len(secret) < MIN_SECRET_LEN:
            raise WeakSecret(f"secret must be at least {MIN_SECRET_LEN} characters")
        user_id = new_id()
        # claim the name first; CAS create loses iff someone holds it
        try:
            self.store.put("usernames", name.strip().lower(), {"user_id": user_id}, 0)
        except VersionConflict:
            raise DuplicateName(name) from None
        salt = secrets.token_bytes(16)
        payload = {
            "name": name.strip(),
            "role": role,
            "contact": {"phone": contact["phone"], "locality": contact["locality"]},
            "credential": {
                "salt": salt.hex(),
                "log_n": self.scrypt_log_n,
                "r": _SCRYPT_R,
                "p": _SCRYPT_P,
                "hash": self._hash_secret(secret, salt).hex(),
            },
            "created_at": self.clock(),
        }
        self.store.put("users", user_id, payload, 0)
        return self._account(user_id, payload), self.issue_session(user_id)

    def authenticate(self, name: str, secret: str) -> str:
        """Verify credentials, return a fresh session token.

        Unknown names verify against a decoy hash so the failure is not
        distinguishable from a wrong secret by timing.
        """
        try:
            mapping = self.store.get("usernames", (name or "").strip().lower())
        except Exception:
            self._hash_secret(secret, b"\x00" * 16)
            raise BadCredentials() from None
        user = self.store.get("users", mapping.payload["user_id"])
        cred = user.payload["credential"]
        digest = hashlib.scrypt(secret.encode("utf-8"), salt=bytes.fromhex(cred["salt"]),
                                n=1 << cred["log_n"], r=cred["r"], p=cred["p"],
                                maxmem=256 * 1024 * 1024, dklen=_DKLEN)
        if not hmac.compare_digest(digest, bytes.fromhex(cred["hash"])):
            raise BadCredentials()
        return self.issue_session(user.id)

    # -- sessions ----------------------------------------------------------

    def issue_session(self, user_id: str) -> str:
        token = secrets.token_hex(32)
        self.store.put("sessions", token,
                       {"user_id": user_id, "expires_at": self.clock() + SESSION_TTL}, 0)
        return token

    def resolve_token(self, token: str) -> UserAccount:
        try:
            session = self.store.get("sessions", token or "")
        except Exception:
            raise Unauthenticated("unknown token") from None
        if self.clock() >= session.payload["expires_at"]:
            raise Unauthenticated("token expired")
        return self.get_user(session.payload["user_id"])

    # -- users -------------------------------------------------------------

    def _account(self, user_id: str, payload: dict) -> UserAccount:
        return UserAccount(id=user_id, name=payload["name"], role=payload["role"],
                           contact=dict(payload["contact"]),
                           created_at=payload["created_at"])

    def get_user(self, user_id: str) -> UserAccount:
        try:
            doc = self.store.get("users", user_id)
        except Exception:
            raise UnknownUser(user_id) from None
        return self._account(doc.id, doc.payload)

    # -- farms and crops ----------------------------------------------------

    def create_farm(self, farmer_id: str, name: str, locality: str) -> Farm:
        user = self.get_user(farmer_id)
        if user.role != ROLE_FARMER:
            raise NotOwner("only farmers hold farms")
        if not name:
            raise MissingField("farm name must be nonempty")
        farm_id = new_id()
        payload = {"farmer_id": farmer_id, "name": name, "locality": locality or "",
                   "created_at": self.clock()}
        self.store.put("farms", farm_id, payload, 0)
        return Farm(farm_id, farmer_id, name, payload["locality"], payload["created_at"])

    def get_farm(self, farm_id: str) -> Farm:
        try:
            doc = self.store.get("farms", farm_id)
        except Exception:
            raise UnknownFarm(farm_id) from None
        p = doc.payload
        return Farm(doc.id, p["farmer_id"], p["name"], p["locality"], p["created_at"])

    def list_farms(self, farmer_id: str) -> list:
        docs = self.store.list("farms", where={"farmer_id": farmer_id}, order_by="created_at")
        return [Farm(d.id, d.payload["farmer_id"], d.payload["name"],
                     d.payload["locality"], d.payload["created_at"]) for d in docs]

    def create_crop(self, farmer_id: str, farm_id: str, kind: str,
                    planted_at: str = "", notes: str = "") -> Crop:
        farm = self.get_farm(farm_id)
        if farm.farmer_id != farmer_id:
            raise NotOwner(f"farm {farm_id} belongs to another farmer")
        if not kind:
            raise MissingField("crop kind must be nonempty")
        crop_id = new_id()
        payload = {"farm_id": farm_id, "farmer_id": farmer_id, "kind": kind,
                   "planted_at": planted_at, "notes": notes, "created_at": self.clock()}
        self.store.put("crops", crop_id, payload, 0)
        return Crop(crop_id, farm_id, farmer_id, kind, planted_at, notes,
                    payload["created_at"])

    def get_crop(self, crop_id: str) -> Crop:
        try:
            doc = self.store.get("crops", crop_id)
        except Exception:
            raise UnknownCrop(crop_id) from None
        p = doc.payload
        return Crop(doc.id, p["farm_id"], p["farmer_id"], p["kind"],
                    p["planted_at"], p["notes"], p["created_at"])

    def list_crops(self, farmer_id: str = None, farm_id: str = None) -> list:
        where = {}
        if farmer_id:
            where["farmer_id"] = farmer_id
        if farm_id:
            where["farm_id"] = farm_id
        docs = self.store.list("crops", where=where or None, order_by="created_at")
        return [Crop(d.id, d.payload["farm_id"], d.payload["farmer_id"],
                     d.payload["kind"], d.payload["planted_at"], d.payload["notes"],
                     d.payload["created_at"]) for d in docs]
