"""Pairwise messaging with contiguous per-thread sequence numbers."""
from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass

from .errors import (EmptyBody, NotFound, NotParticipant, SelfThread, TooLong,
                     VersionConflict)
from .events import Event, EventBus
from .registry import Registry
from .store import DocumentStore

MAX_BODY_LEN = 4096


@dataclass(frozen=True)
class Thread:
    id: str
    participants: tuple
    created_at: float


@dataclass(frozen=True)
class Message:
    thread_id: str
    seq: int
    sender_id: str
    body: str
    sent_at: float


def thread_id_for(a: str, b: str) -> str:
    """Deterministic id for the unordered pair, so open is naturally idempotent."""
    lo, hi = sorted((a, b))
    return hashlib.sha256(f"{lo}|{hi}".encode()).hexdigest()[:32]


class ChatService:
    """Messages live inside the thread document, so appending a message and
    claiming its sequence number is a single CAS write: contiguous numbering
    holds under any interleaving, and the emit-under-lock keeps realtime
    delivery in sequence order.
    """

    def __init__(self, store: DocumentStore, registry: Registry, bus: EventBus,
                 clock=time.time):
        self.store = store
        self.registry = registry
        self.bus = bus
        self.clock = clock
        self._locks = {}
        self._locks_guard = threading.Lock()

    def _thread_lock(self, thread_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(thread_id)
            if lock is None:
                lock = self._locks[thread_id] = threading.Lock()
            return lock

    def open_thread(self, a: str, b: str) -> Thread:
        if a == b:
            raise SelfThread("cannot open a thread with yourself")
        self.registry.get_user(a)
        self.registry.get_user(b)
        tid = thread_id_for(a, b)
        try:
            doc = self.store.get("threads", tid)
        except NotFound:
            payload = {"participants": sorted((a, b)), "created_at": self.clock(),
                       "messages": []}
            try:
                self.store.put("threads", tid, payload, 0)
                return Thread(tid, tuple(payload["participants"]), payload["created_at"])
            except VersionConflict:
                doc = self.store.get("threads", tid)  # lost the create race
        p = doc.payload
        return Thread(tid, tuple(p["participants"]), p["created_at"])

    def _load(self, thread_id: str):
        try:
            return self.store.get("threads", thread_id)
        except NotFound:
            raise NotFound(f"thread {thread_id}") from None

    def send_message(self, sender_id: str, thread_id: str, body: str) -> Message:
        if not body:
            raise EmptyBody("message body must be nonempty")
        if len(body) > MAX_BODY_LEN:
            raise TooLong(f"message body exceeds {MAX_BODY_LEN} characters")
        with self._thread_lock(thread_id):
            doc = self._load(thread_id)
            participants = doc.payload["participants"]
            if sender_id not in participants:
                raise NotParticipant(sender_id)
            seq = len(doc.payload["messages"]) + 1
            entry = {"seq": seq, "sender_id": sender_id, "body": body,
                     "sent_at": self.clock()}
            doc.payload["messages"].append(entry)
            self.store.put("threads", thread_id, doc.payload, doc.version)
            counterpart = next(p for p in participants if p != sender_id)
            self.bus.emit(Event(
                type="chat.message",
                topic=f"thread/{thread_id}",
                payload={"thread_id": thread_id, **entry},
                recipients=(counterpart,),
            ))
        return Message(thread_id, seq, sender_id, body, entry["sent_at"])

    def fetch_history(self, user_id: str, thread_id: str, after: int = 0,
                      limit: int = None) -> list:
        doc = self._load(thread_id)
        if user_id not in doc.payload["participants"]:
            raise NotParticipant(user_id)
        out = [Message(thread_id, m["seq"], m["sender_id"], m["body"], m["sent_at"])
               for m in doc.payload["messages"] if m["seq"] > after]
        out.sort(key=lambda m: m.seq)
        if limit is not None:
            out = out[:limit]
        return out

    def get_thread(self, user_id: str, thread_id: str) -> Thread:
        doc = self._load(thread_id)
        if user_id not in doc.payload["participants"]:
            raise NotParticipant(user_id)
        return Thread(doc.id, tuple(doc.payload["participants"]),
                      doc.payload["created_at"])

    def list_threads(self, user_id: str) -> list:
        """Threads the user participates in, with the last sequence number
        (clients derive unread counts from it)."""
        out = []
        for doc in self.store.list("threads"):
            p = doc.payload
            if user_id in p["participants"]:
                out.append({
                    "id": doc.id,
                    "participants": list(p["participants"]),
                    "created_at": p["created_at"],
                    "last_seq": len(p["messages"]),
                })
        out.sort(key=lambda t: (t["created_at"], t["id"]))
        return out
