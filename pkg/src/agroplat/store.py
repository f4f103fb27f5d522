"""Embedded document store with CAS versioning, plus a content-addressed blob store.

Each collection persists as an append-only JSONL journal beside an optional
snapshot written by compact(). Lines are canonical JSON (sorted keys) of the
form {"id": ..., "v": ..., "p": ...}. On load the snapshot is read first and
the journal replayed over it; a torn final line (crash mid-append) is
discarded, anything else malformed is an error.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass

from .errors import FormatError, NotFound, VersionConflict


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def new_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class Document:
    collection: str
    id: str
    version: int
    payload: dict


def _copy(payload):
    # documents are plain JSON data, round-tripping is a cheap deep copy
    return json.loads(canonical_json(payload))


class DocumentStore:
    """Thread-safe in-memory map journaled to disk.

    All writes go through compare-and-set: expected version 0 creates, any
    other value must match the stored version exactly. Failed CAS raises
    VersionConflict carrying both versions.
    """

    def __init__(self, root: str, fsync: bool = False):
        self.root = root
        self.fsync = fsync
        self._lock = threading.RLock()
        self._data = {}      # collection -> {id: (version, payload)}
        self._journals = {}  # collection -> open append handle
        os.makedirs(root, exist_ok=True)
        self._load()

    # -- loading ---------------------------------------------------------

    def _load(self):
        names = set()
        for fname in os.listdir(self.root):
            if fname.endswith(".snapshot.json"):
                names.add(fname[:-len(".snapshot.json")])
            elif fname.endswith(".journal.jsonl"):
                names.add(fname[:-len(".journal.jsonl")])
        for name in sorted(names):
            docs = {}
            spath = self._snapshot_path(name)
            if os.path.exists(spath):
                with open(spath, encoding="utf-8") as fh:
                    try:
                        snap = json.load(fh)
                    except ValueError as exc:
                        raise FormatError(f"collection {name!r}: bad snapshot: {exc}") from exc
                for doc_id, entry in snap.items():
                    docs[doc_id] = (entry["v"], entry["p"])
            jpath = self._journal_path(name)
            if os.path.exists(jpath):
                with open(jpath, "rb") as fh:
                    lines = fh.read().split(b"\n")
                for i, line in enumerate(lines):
                    if not line:
                        continue
                    try:
                        entry = json.loads(line)
                        docs[entry["id"]] = (entry["v"], entry["p"])
                    except (ValueError, KeyError, TypeError) as exc:
                        trailing = all(not rest for rest in lines[i + 1:])
                        if trailing:
                            break  # torn final append, drop it
                        raise FormatError(
                            f"collection {name!r}: corrupt journal line {i + 1}") from exc
            self._data[name] = docs

    # -- paths -----------------------------------------------------------

    def _snapshot_path(self, collection):
        return os.path.join(self.root, f"{collection}.snapshot.json")

    def _journal_path(self, collection):
        return os.path.join(self.root, f"{collection}.journal.jsonl")

    def _journal(self, collection):
        fh = self._journals.get(collection)
        if fh is None:
            fh = open(self._journal_path(collection), "ab")
            self._journals[collection] = fh
        return fh

    # -- operations ------------------------------------------------------

    def put(self, collection: str, doc_id: str, payload: dict, expected_version: int) -> int:
        with self._lock:
            docs = self._data.setdefault(collection, {})
            found = docs[doc_id][0] if doc_id in docs else 0
            if found != expected_version:
                raise VersionConflict(expected_version, found)
            version = found + 1
            line = canonical_json({"id": doc_id, "v": version, "p": payload})
            fh = self._journal(collection)
            fh.write(line.encode("utf-8") + b"\n")
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())
            docs[doc_id] = (version, _copy(payload))
            return version

    def get(self, collection: str, doc_id: str) -> Document:
        with self._lock:
            docs = self._data.get(collection, {})
            if doc_id not in docs:
                raise NotFound(f"{collection}/{doc_id}")
            version, payload = docs[doc_id]
            return Document(collection, doc_id, version, _copy(payload))

    def list(self, collection: str, where: dict = None, order_by: str = None,
             after=None, limit: int = None) -> list:
        """Filtered, ordered scan.

        where: field -> required payload value (equality). order_by: payload
        field; documents sort by (field value, id) so pagination is stable.
        after: the (field value, id) pair of the previous page's last item.
        """
        with self._lock:
            docs = self._data.get(collection, {})
            out = []
            for doc_id, (version, payload) in docs.items():
                if where and any(payload.get(k) != v for k, v in where.items()):
                    continue
                out.append(Document(collection, doc_id, version, _copy(payload)))
        if order_by:
            out.sort(key=lambda d: (d.payload.get(order_by), d.id))
        else:
            out.sort(key=lambda d: d.id)
        if after is not None:
            if order_by:
                key = tuple(after)
                out = [d for d in out if (d.payload.get(order_by), d.id) > key]
            else:
                out = [d for d in out if d.id > after]
        if limit is not None:
            out = out[:limit]
        return out

    def collections(self) -> list:
        with self._lock:
            return sorted(self._data)

    def compact(self, collection: str = None):
        """Fold the journal into the snapshot and truncate it."""
        with self._lock:
            targets = [collection] if collection else sorted(self._data)
            for name in targets:
                docs = self._data.get(name, {})
                snap = {doc_id: {"v": v, "p": p} for doc_id, (v, p) in docs.items()}
                tmp = self._snapshot_path(name) + f".tmp.{os.getpid()}"
                with open(tmp, "w", encoding="utf-8") as fh:
                    fh.write(canonical_json(snap))
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, self._snapshot_path(name))
                fh = self._journals.pop(name, None)
                if fh is not None:
                    fh.close()
                with open(self._journal_path(name), "wb"):
                    pass

    def close(self):
        with self._lock:
            for fh in self._journals.values():
                fh.close()
            self._journals.clear()


class BlobStore:
    """Content-addressed byte store: key is the SHA-256 hex digest.

    Writes land in a temp file renamed into place, so a key either resolves
    to complete content or nothing; storing the same bytes twice is a no-op.
    """

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def _path(self, key: str) -> str:
        if len(key) != 64 or any(c not in "0123456789abcdef" for c in key):
            raise NotFound(f"bad blob key {key!r}")
        return os.path.join(self.root, key[:2], key[2:])

    def put(self, data: bytes) -> str:
        key = hashlib.sha256(data).hexdigest()
        path = self._path(key)
        if os.path.exists(path):
            return key
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + f".tmp.{uuid.uuid4().hex}"
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return key

    def get(self, key: str) -> bytes:
        path = self._path(key)
        try:
            with open(path, "rb") as fh:
                return fh.read()
        except FileNotFoundError:
            raise NotFound(f"blob {key}") from None

    def has(self, key: str) -> bool:
        try:
            return os.path.exists(self._path(key))
        except NotFound:
            return False
