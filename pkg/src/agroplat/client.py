"""HTTP and realtime clients for the gateway (used by tests and the CLI)."""
from __future__ import annotations

import base64
import json
import os
import socket
import urllib.parse

import requests

from .errors import PlatformError
from .gateway import frames


class ApiError(PlatformError):
    code = "api_error"

    def __init__(self, status: int, error: str, message: str):
        super().__init__(f"[{status}] {error}: {message}")
        self.status = status
        self.error = error


class ApiClient:
    """Thin typed wrapper over the JSON endpoints."""

    def __init__(self, base_url: str, token: str = None):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self._session = requests.Session()

    def request(self, method: str, path: str, body: dict = None,
                token: str = ...):
        """Raw call; returns (status, decoded payload). No raising."""
        tok = self.token if token is ... else token
        headers = {"Authorization": f"Bearer {tok}"} if tok else {}
        resp = self._session.request(method, self.base_url + path,
                                     json=body, headers=headers, timeout=30)
        content_type = resp.headers.get("Content-Type", "")
        if content_type.startswith("application/json"):
            return resp.status_code, resp.json()
        return resp.status_code, resp.content

    def call(self, method: str, path: str, body: dict = None):
        status, payload = self.request(method, path, body)
        if status >= 400:
            if isinstance(payload, dict):
                raise ApiError(status, payload.get("error", "error"),
                               payload.get("message", ""))
            raise ApiError(status, "error", repr(payload))
        return payload

    # -- auth ---------------------------------------------------------------

    def register(self, name, role, contact, secret):
        out = self.call("POST", "/auth/register",
                        {"name": name, "role": role, "contact": contact,
                         "secret": secret})
        self.token = out["token"]
        return out

    def login(self, name, secret):
        out = self.call("POST", "/auth/login", {"name": name, "secret": secret})
        self.token = out["token"]
        return out

    # -- registry -------------------------------------------------------------

    def create_farm(self, name, locality=""):
        return self.call("POST", "/farms", {"name": name, "locality": locality})

    def list_farms(self):
        return self.call("GET", "/farms")["farms"]

    def create_crop(self, farm_id, kind, planted_at="", notes=""):
        return self.call("POST", f"/farms/{farm_id}/crops",
                         {"kind": kind, "planted_at": planted_at, "notes": notes})

    def list_crops(self, farm_id=None):
        path = "/crops" + (f"?farm_id={farm_id}" if farm_id else "")
        return self.call("GET", path)["crops"]

    # -- diagnosis ---------------------------------------------------------------

    def submit_sample(self, crop_id, image_bytes: bytes):
        return self.call("POST", "/diagnosis/samples",
                         {"crop_id": crop_id,
                          "image": base64.b64encode(image_bytes).decode("ascii")})

    def list_requests(self, state=None):
        path = "/diagnosis/requests" + (f"?state={state}" if state else "")
        return self.call("GET", path)["requests"]

    def get_request(self, request_id):
        return self.call("GET", f"/diagnosis/requests/{request_id}")

    def claim_request(self, request_id):
        return self.call("POST", f"/diagnosis/requests/{request_id}/claim")

    def file_report(self, request_id, diagnosis, confirmed_label=None,
                    recommendations=""):
        return self.call("POST", f"/diagnosis/requests/{request_id}/report",
                         {"diagnosis": diagnosis, "confirmed_label": confirmed_label,
                          "recommendations": recommendations})

    def history(self):
        return self.call("GET", "/diagnosis/history")["reports"]

    # -- marketplace ----------------------------------------------------------------

    def publish_listing(self, **kwargs):
        return self.call("POST", "/market/listings", kwargs)

    def list_listings(self, status="open"):
        return self.call("GET", f"/market/listings?status={status}")["listings"]

    def get_listing(self, listing_id):
        return self.call("GET", f"/market/listings/{listing_id}")

    def place_offer(self, listing_id, amount):
        return self.call("POST", f"/market/listings/{listing_id}/offers",
                         {"amount": amount})

    def purchases(self):
        return self.call("GET", "/market/purchases")["purchases"]

    # -- chat ---------------------------------------------------------------------------

    def open_thread(self, peer_id):
        return self.call("POST", "/chat/threads", {"peer_id": peer_id})

    def list_threads(self):
        return self.call("GET", "/chat/threads")["threads"]

    def send_message(self, thread_id, body):
        return self.call("POST", f"/chat/threads/{thread_id}/messages",
                         {"body": body})

    def fetch_messages(self, thread_id, after=0, limit=None):
        path = f"/chat/threads/{thread_id}/messages?after={after}"
        if limit is not None:
            path += f"&limit={limit}"
        return self.call("GET", path)["messages"]

    # -- analytics and blobs ---------------------------------------------------------------

    def usage(self):
        return self.call("GET", "/analytics/usage")

    def trend(self, span=None, degree=None):
        params = []
        if span is not None:
            params.append(f"span={span}")
        if degree is not None:
            params.append(f"degree={degree}")
        qs = "?" + "&".join(params) if params else ""
        return self.call("GET", f"/analytics/downloads/trend{qs}")

    def blob(self, digest) -> bytes:
        return self.call("GET", f"/blobs/{digest}")


class RtClient:
    """Realtime channel client: handshake, masked sends, frame reads."""

    def __init__(self, host: str, port: int, token: str, timeout: float = 10.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self.sock.makefile("rb")
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        path = f"/api/v1/rt?token={urllib.parse.quote(token)}"
        handshake = (
            f"GET {path} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            f"Upgrade: websocket\r\n"
            f"Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            f"Sec-WebSocket-Version: 13\r\n\r\n"
        )
        self.sock.sendall(handshake.encode("ascii"))
        status_line = self._file.readline().decode("latin-1")
        headers = {}
        while True:
            line = self._file.readline().decode("latin-1").rstrip("\r\n")
            if not line:
                break
            name, _, value = line.partition(":")
            headers[name.strip().lower()] = value.strip()
        if " 101 " not in status_line:
            body = b""
            length = int(headers.get("content-length", 0) or 0)
            if length:
                body = self._file.read(length)
            raise ApiError(int(status_line.split()[1]), "handshake", body.decode("utf-8", "replace"))
        if headers.get("sec-websocket-accept") != frames.accept_key(key):
            raise ApiError(500, "handshake", "bad accept digest")

    def send_op(self, op: str, topic: str = ""):
        payload = json.dumps({"op": op, "topic": topic}).encode("utf-8")
        self.sock.sendall(frames.encode_frame(frames.OP_TEXT, payload, mask=True))

    def subscribe(self, topic: str):
        self.send_op("subscribe", topic)

    def unsubscribe(self, topic: str):
        self.send_op("unsubscribe", topic)

    def recv(self, timeout: float = 10.0) -> dict:
        """Next JSON frame; transparently answers pings."""
        self.sock.settimeout(timeout)
        while True:
            opcode, payload = frames.read_frame(self._file)
            if opcode == frames.OP_TEXT:
                return json.loads(payload)
            if opcode == frames.OP_PING:
                self.sock.sendall(frames.encode_frame(frames.OP_PONG, payload,
                                                      mask=True))
                continue
            if opcode == frames.OP_CLOSE:
                raise ConnectionError("server closed the channel")

    def close(self):
        try:
            self.sock.sendall(frames.encode_frame(frames.OP_CLOSE, b"", mask=True))
        except OSError:
            pass
        try:
            self._file.close()
        finally:
            self.sock.close()
