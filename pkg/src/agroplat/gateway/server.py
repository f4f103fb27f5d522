"""HTTP API + realtime frame channel on top of a Platform instance.

All endpoints live under /api/v1 and speak canonical JSON. /rt upgrades the
connection and carries {type, topic, seq, payload} frames; seq is gapless and
strictly increasing per connection. Authentication is a bearer token from
/auth/register or /auth/login, accepted in the Authorization header or as a
?token= query parameter (the latter matters for image tags and /rt).
"""
from __future__ import annotations

import base64
import binascii
import json
import logging
import queue
import re
import threading
import urllib.parse
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .. import analytics
from ..errors import (BadCredentials, Forbidden, NotAssignee, NotFound,
                      NotOwner, NotParticipant, MissingField, PlatformError,
                      StateConflict, Unauthenticated, UnknownCrop, UnknownFarm,
                      UnknownUser, VersionConflict)
from ..registry import ROLE_AGRONOMIST, ROLE_FARMER, ROLE_MERCHANT
from ..store import canonical_json
from . import frames

log = logging.getLogger("agroplat.gateway")

_ALL = (ROLE_FARMER, ROLE_AGRONOMIST, ROLE_MERCHANT)

# endpoint name -> roles allowed to touch it ("public" needs no token)
ROLE_MATRIX = {
    "auth.register": "public",
    "auth.login": "public",
    "health": "public",
    "farms.create": (ROLE_FARMER,),
    "farms.list": (ROLE_FARMER,),
    "crops.create": (ROLE_FARMER,),
    "crops.list": (ROLE_FARMER,),
    "diagnosis.submit": (ROLE_FARMER,),
    "diagnosis.requests": (ROLE_FARMER, ROLE_AGRONOMIST),
    "diagnosis.request": (ROLE_FARMER, ROLE_AGRONOMIST),
    "diagnosis.claim": (ROLE_AGRONOMIST,),
    "diagnosis.report": (ROLE_AGRONOMIST,),
    "diagnosis.history": (ROLE_FARMER, ROLE_AGRONOMIST),
    "market.publish": (ROLE_FARMER,),
    "market.listings": (ROLE_FARMER, ROLE_MERCHANT),
    "market.listing": (ROLE_FARMER, ROLE_MERCHANT),
    "market.offer": (ROLE_MERCHANT,),
    "market.purchases": (ROLE_FARMER, ROLE_MERCHANT),
    "chat.open": _ALL,
    "chat.threads": _ALL,
    "chat.send": _ALL,
    "chat.messages": _ALL,
    "analytics.usage": (ROLE_AGRONOMIST,),
    "analytics.trend": (ROLE_AGRONOMIST,),
    "blobs.get": _ALL,
    "rt": _ALL,
}


def authorize(role: str, endpoint: str) -> bool:
    """Static role-matrix lookup; unknown endpoints deny."""
    allowed = ROLE_MATRIX.get(endpoint)
    if allowed is None:
        return False
    if allowed == "public":
        return True
    return role in allowed


def _status_for(exc: PlatformError) -> int:
    if isinstance(exc, (Unauthenticated, BadCredentials)):
        return 401
    if isinstance(exc, (Forbidden, NotOwner, NotParticipant, NotAssignee)):
        return 403
    if isinstance(exc, (NotFound, UnknownUser, UnknownFarm, UnknownCrop)):
        return 404
    if isinstance(exc, (VersionConflict, StateConflict)) or exc.code == "duplicate_name":
        return 409
    return 422


class RtConnection:
    """One upgraded client connection: subscription set, FIFO outbound queue,
    dedicated writer thread, per-connection gapless seq over JSON frames."""

    def __init__(self, user, sock):
        self.user = user
        self.sock = sock
        self.subscriptions = set()
        self._queue = queue.SimpleQueue()
        self._seq = 0
        self._lock = threading.Lock()
        self._writer = threading.Thread(target=self._write_loop, daemon=True,
                                        name="rt-writer")
        self.closed = threading.Event()

    def start(self):
        self._writer.start()

    def enqueue(self, frame_type: str, topic: str, payload: dict):
        with self._lock:
            if self.closed.is_set():
                return
            self._seq += 1
            self._queue.put(("json", {"type": frame_type, "topic": topic,
                                      "seq": self._seq, "payload": payload}))

    def enqueue_raw(self, opcode: int, payload: bytes):
        self._queue.put(("raw", opcode, payload))

    def _write_loop(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            try:
                if item[0] == "json":
                    data = canonical_json(item[1]).encode("utf-8")
                    self.sock.sendall(frames.encode_frame(frames.OP_TEXT, data))
                else:
                    self.sock.sendall(frames.encode_frame(item[1], item[2]))
            except OSError:
                self.closed.set()
                return

    def shutdown(self):
        with self._lock:
            self.closed.set()
        self._queue.put(None)


class Gateway:
    """Routing, authorization, and realtime fan-out for one Platform."""

    def __init__(self, platform):
        self.platform = platform
        self._conn_lock = threading.Lock()
        self._user_conns = {}   # user id -> set of RtConnection
        self._topic_subs = {}   # topic -> set of RtConnection
        self._request_counts = {}
        self._counts_lock = threading.Lock()
        self._detach = platform.bus.attach(self._on_event)
        self.routes = self._build_routes()

    def close(self):
        self._detach()
        with self._conn_lock:
            conns = {c for s in self._user_conns.values() for c in s}
            self._user_conns.clear()
            self._topic_subs.clear()
        for conn in conns:
            conn.shutdown()

    # -- realtime fan-out ---------------------------------------------------

    def _on_event(self, event):
        with self._conn_lock:
            targets = set(self._topic_subs.get(event.topic, ()))
            for uid in event.recipients:
                targets |= self._user_conns.get(uid, set())
            targets = sorted(targets, key=id)
        for conn in targets:
            conn.enqueue(event.type, event.topic, event.payload)

    def register_conn(self, conn):
        with self._conn_lock:
            self._user_conns.setdefault(conn.user.id, set()).add(conn)

    def drop_conn(self, conn):
        with self._conn_lock:
            conns = self._user_conns.get(conn.user.id)
            if conns:
                conns.discard(conn)
                if not conns:
                    self._user_conns.pop(conn.user.id, None)
            for subs in self._topic_subs.values():
                subs.discard(conn)
        conn.shutdown()

    def subscribe(self, conn, topic: str):
        if not self._topic_visible(conn.user, topic):
            raise Forbidden(f"topic {topic!r} is not visible to this user")
        with self._conn_lock:
            self._topic_subs.setdefault(topic, set()).add(conn)
            conn.subscriptions.add(topic)

    def unsubscribe(self, conn, topic: str):
        with self._conn_lock:
            subs = self._topic_subs.get(topic)
            if subs:
                subs.discard(conn)
            conn.subscriptions.discard(topic)

    def _topic_visible(self, user, topic: str) -> bool:
        kind, _, entity_id = topic.partition("/")
        if not entity_id:
            return False
        try:
            if kind == "thread":
                doc = self.platform.store.get("threads", entity_id)
                return user.id in doc.payload["participants"]
            if kind == "request":
                if user.role == ROLE_AGRONOMIST:
                    self.platform.store.get("requests", entity_id)
                    return True
                doc = self.platform.store.get("requests", entity_id)
                return doc.payload["farmer_id"] == user.id
            if kind == "listing":
                doc = self.platform.store.get("listings", entity_id)
                if user.role == ROLE_MERCHANT:
                    return True
                return doc.payload["farmer_id"] == user.id
        except NotFound:
            return False
        return False

    # -- request accounting ---------------------------------------------------

    def count_request(self, token: str):
        cap = self.platform.config.request_cap
        with self._counts_lock:
            n = self._request_counts.get(token, 0) + 1
            self._request_counts[token] = n
        if n > cap:
            raise Forbidden("session request cap exceeded")

    # -- route table ------------------------------------------------------------

    def _build_routes(self):
        p = "/api/v1"
        table = [
            ("POST", f"{p}/auth/register", "auth.register", self.h_register),
            ("POST", f"{p}/auth/login", "auth.login", self.h_login),
            ("GET", f"{p}/healthz", "health", self.h_health),
            ("POST", f"{p}/farms", "farms.create", self.h_create_farm),
            ("GET", f"{p}/farms", "farms.list", self.h_list_farms),
            ("POST", f"{p}/farms/(?P<farm_id>[0-9a-f]+)/crops", "crops.create", self.h_create_crop),
            ("GET", f"{p}/crops", "crops.list", self.h_list_crops),
            ("POST", f"{p}/diagnosis/samples", "diagnosis.submit", self.h_submit_sample),
            ("GET", f"{p}/diagnosis/requests", "diagnosis.requests", self.h_list_requests),
            ("GET", f"{p}/diagnosis/requests/(?P<request_id>[0-9a-f]+)", "diagnosis.request", self.h_get_request),
            ("POST", f"{p}/diagnosis/requests/(?P<request_id>[0-9a-f]+)/claim", "diagnosis.claim", self.h_claim),
            ("POST", f"{p}/diagnosis/requests/(?P<request_id>[0-9a-f]+)/report", "diagnosis.report", self.h_report),
            ("GET", f"{p}/diagnosis/history", "diagnosis.history", self.h_history),
            ("POST", f"{p}/market/listings", "market.publish", self.h_publish),
            ("GET", f"{p}/market/listings", "market.listings", self.h_list_listings),
            ("GET", f"{p}/market/listings/(?P<listing_id>[0-9a-f]+)", "market.listing", self.h_get_listing),
            ("POST", f"{p}/market/listings/(?P<listing_id>[0-9a-f]+)/offers", "market.offer", self.h_offer),
            ("GET", f"{p}/market/purchases", "market.purchases", self.h_purchases),
            ("POST", f"{p}/chat/threads", "chat.open", self.h_open_thread),
            ("GET", f"{p}/chat/threads", "chat.threads", self.h_list_threads),
            ("POST", f"{p}/chat/threads/(?P<thread_id>[0-9a-f]+)/messages", "chat.send", self.h_send_message),
            ("GET", f"{p}/chat/threads/(?P<thread_id>[0-9a-f]+)/messages", "chat.messages", self.h_messages),
            ("GET", f"{p}/analytics/usage", "analytics.usage", self.h_usage),
            ("GET", f"{p}/analytics/downloads/trend", "analytics.trend", self.h_trend),
            ("GET", f"{p}/blobs/(?P<digest>[0-9a-f]{{64}})", "blobs.get", self.h_blob),
            ("GET", f"{p}/rt", "rt", None),
        ]
        return [(m, re.compile(pattern), name, fn) for m, pattern, name, fn in table]

    # -- views -------------------------------------------------------------------

    @staticmethod
    def _user_view(user):
        return {"id": user.id, "name": user.name, "role": user.role,
                "contact": dict(user.contact), "created_at": user.created_at}

    @staticmethod
    def _listing_view(listing):
        d = asdict(listing)
        d["photo_refs"] = list(listing.photo_refs)
        d["offers"] = [asdict(o) for o in listing.offers]
        d["best_offer"] = d["offers"][-1]["amount"] if d["offers"] else None
        return d

    @staticmethod
    def _request_view(request):
        return asdict(request)

    # -- handlers ------------------------------------------------------------------

    def h_health(self, user, m, query, body):
        return 200, {"ok": True}

    def h_register(self, user, m, query, body):
        account, token = self.platform.registry.register(
            name=body.get("name", ""), role=body.get("role", ""),
            contact=body.get("contact") or {}, secret=body.get("secret", ""))
        return 201, {"user": self._user_view(account), "token": token}

    def h_login(self, user, m, query, body):
        token = self.platform.registry.authenticate(body.get("name", ""),
                                                    body.get("secret", ""))
        account = self.platform.registry.resolve_token(token)
        return 200, {"user": self._user_view(account), "token": token}

    def h_create_farm(self, user, m, query, body):
        farm = self.platform.registry.create_farm(user.id, body.get("name", ""),
                                                  body.get("locality", ""))
        return 201, asdict(farm)

    def h_list_farms(self, user, m, query, body):
        return 200, {"farms": [asdict(f) for f in
                               self.platform.registry.list_farms(user.id)]}

    def h_create_crop(self, user, m, query, body):
        crop = self.platform.registry.create_crop(
            user.id, m.group("farm_id"), body.get("kind", ""),
            planted_at=body.get("planted_at", ""), notes=body.get("notes", ""))
        return 201, asdict(crop)

    def h_list_crops(self, user, m, query, body):
        farm_id = query.get("farm_id", [None])[0]
        crops = self.platform.registry.list_crops(farmer_id=user.id, farm_id=farm_id)
        return 200, {"crops": [asdict(c) for c in crops]}

    def h_submit_sample(self, user, m, query, body):
        encoded = body.get("image", "")
        try:
            image_bytes = base64.b64decode(encoded, validate=True)
        except (binascii.Error, ValueError):
            raise MissingField("image must be base64-encoded bytes") from None
        request = self.platform.diagnosis.submit_sample(
            user.id, body.get("crop_id", ""), image_bytes)
        return 201, self._request_view(request)

    def h_list_requests(self, user, m, query, body):
        state = query.get("state", [None])[0]
        if user.role == ROLE_AGRONOMIST:
            items = self.platform.diagnosis.list_requests(state=state)
        else:
            items = self.platform.diagnosis.list_requests(state=state,
                                                          farmer_id=user.id)
        return 200, {"requests": [self._request_view(r) for r in items]}

    def h_get_request(self, user, m, query, body):
        request = self.platform.diagnosis.get_request(m.group("request_id"))
        if user.role != ROLE_AGRONOMIST and request.farmer_id != user.id:
            raise NotOwner("not your diagnosis request")
        return 200, self._request_view(request)

    def h_claim(self, user, m, query, body):
        request = self.platform.diagnosis.claim_request(user.id, m.group("request_id"))
        return 200, self._request_view(request)

    def h_report(self, user, m, query, body):
        report = self.platform.diagnosis.file_report(
            user.id, m.group("request_id"), body.get("diagnosis", ""),
            confirmed_label=body.get("confirmed_label"),
            recommendations=body.get("recommendations", ""))
        return 201, asdict(report)

    def h_history(self, user, m, query, body):
        reports = self.platform.diagnosis.history(user.id, user.role)
        return 200, {"reports": [asdict(r) for r in reports]}

    def h_publish(self, user, m, query, body):
        listing = self.platform.market.publish_listing(
            user.id, product=body.get("product", ""),
            quantity=body.get("quantity", 0), unit=body.get("unit", ""),
            starting_price=body.get("starting_price", 0),
            ends_at=body.get("ends_at", 0),
            description=body.get("description", ""),
            photo_refs=body.get("photo_refs") or (),
            crop_id=body.get("crop_id", ""))
        return 201, self._listing_view(listing)

    def h_list_listings(self, user, m, query, body):
        status = query.get("status", ["open"])[0]
        if status == "mine":
            if user.role != ROLE_FARMER:
                raise Forbidden("only farmers have their own listings")
            items = self.platform.market.list_mine(user.id)
        elif status == "open":
            items = self.platform.market.list_onsale()
        else:
            raise MissingField(f"unknown status filter {status!r}")
        return 200, {"listings": [self._listing_view(l) for l in items]}

    def h_get_listing(self, user, m, query, body):
        listing = self.platform.market.get_listing(m.group("listing_id"))
        if user.role == ROLE_FARMER and listing.farmer_id != user.id:
            raise NotOwner("not your listing")
        return 200, self._listing_view(listing)

    def h_offer(self, user, m, query, body):
        offer = self.platform.market.place_offer(user.id, m.group("listing_id"),
                                                 body.get("amount"))
        return 201, asdict(offer)

    def h_purchases(self, user, m, query, body):
        records = self.platform.market.purchase_history(user.id)
        return 200, {"purchases": [asdict(r) for r in records]}

    def h_open_thread(self, user, m, query, body):
        thread = self.platform.chat.open_thread(user.id, body.get("peer_id", ""))
        return 201, {"id": thread.id, "participants": list(thread.participants),
                     "created_at": thread.created_at}

    def h_list_threads(self, user, m, query, body):
        threads = self.platform.chat.list_threads(user.id)
        for t in threads:
            names = {}
            for pid in t["participants"]:
                try:
                    names[pid] = self.platform.registry.get_user(pid).name
                except UnknownUser:
                    names[pid] = pid
            t["names"] = names
        return 200, {"threads": threads}

    def h_send_message(self, user, m, query, body):
        msg = self.platform.chat.send_message(user.id, m.group("thread_id"),
                                              body.get("body", ""))
        return 201, asdict(msg)

    def h_messages(self, user, m, query, body):
        after = int(query.get("after", ["0"])[0])
        limit_raw = query.get("limit", [None])[0]
        limit = int(limit_raw) if limit_raw else None
        messages = self.platform.chat.fetch_history(user.id, m.group("thread_id"),
                                                    after=after, limit=limit)
        return 200, {"messages": [asdict(msg) for msg in messages]}

    def h_usage(self, user, m, query, body):
        return 200, asdict(self.platform.usage_stats())

    def h_trend(self, user, m, query, body):
        span = float(query.get("span", [str(self.platform.config.loess_span)])[0])
        degree = int(query.get("degree", [str(self.platform.config.loess_degree)])[0])
        series = self.platform.downloads()
        fit = analytics.loess_fit(series, span=span, degree=degree)
        return 200, {"days": list(series.days), "counts": list(series.counts),
                     "fitted": list(fit.fitted), "lower": list(fit.lower),
                     "upper": list(fit.upper), "span": fit.span,
                     "degree": fit.degree}

    def h_blob(self, user, m, query, body):
        data = self.platform.blobs.get(m.group("digest"))
        return 200, data  # bytes pass through, content type sniffed at write


class GatewayHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "agroplat"
    # one request can be large (base64 photo upload)
    MAX_BODY = 32 * 1024 * 1024

    @property
    def gateway(self) -> Gateway:
        return self.server.gateway

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.client_address[0], *args)

    # -- plumbing ------------------------------------------------------------

    def _send_json(self, status: int, payload):
        body = canonical_json(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self._cors()
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, data: bytes):
        content_type = "image/png" if data[:8] == b"\x89PNG\r\n\x1a\n" else \
            "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self._cors()
        self.end_headers()
        self.wfile.write(data)

    def _cors(self):
        # the browser client is served from its own origin during development
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")

    def _error(self, status: int, code: str, message: str):
        self._send_json(status, {"error": code, "message": message})

    def _token(self, query) -> str:
        header = self.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            return header[len("Bearer "):].strip()
        return query.get("token", [""])[0]

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str):
        path, _, qs = self.path.partition("?")
        query = urllib.parse.parse_qs(qs)
        # consume the declared body up front: an unread body would be parsed
        # as the next request line on this keep-alive connection
        try:
            length = int(self.headers.get("Content-Length") or 0)
        except ValueError:
            self.close_connection = True
            return self._error(422, "format_error", "bad Content-Length")
        if length > self.MAX_BODY:
            self.close_connection = True
            return self._error(422, "too_long", "request body too large")
        raw = self.rfile.read(length) if length else b""
        route = None
        for m, pattern, name, fn in self.gateway.routes:
            match = pattern.fullmatch(path)
            if match:
                if m == method:
                    route = (match, name, fn)
                    break
        if route is None:
            return self._error(404, "not_found", f"no route for {method} {path}")
        match, name, fn = route
        try:
            user = None
            if ROLE_MATRIX[name] != "public":
                token = self._token(query)
                user = self.gateway.platform.registry.resolve_token(token)
                if not authorize(user.role, name):
                    raise Forbidden(f"role {user.role} may not call {name}")
                try:
                    self.gateway.count_request(token)
                except Forbidden as exc:
                    return self._error(429, "too_many_requests", str(exc))
            if name == "rt":
                return self._serve_rt(user)
            body = {}
            if method == "POST":
                try:
                    body = json.loads(raw or b"{}")
                except ValueError:
                    return self._error(422, "format_error", "body is not valid JSON")
                if not isinstance(body, dict):
                    return self._error(422, "format_error", "body must be a JSON object")
            status, payload = fn(user, match, query, body)
            if isinstance(payload, bytes):
                return self._send_bytes(payload)
            return self._send_json(status, payload)
        except PlatformError as exc:
            return self._error(_status_for(exc), exc.code, str(exc))
        except (ValueError, TypeError) as exc:
            return self._error(422, "bad_request", str(exc))
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:
            log.exception("handler failure on %s %s", method, path)
            try:
                self._error(500, "internal", f"unexpected failure: {exc}")
            except OSError:
                pass

    # -- realtime channel -------------------------------------------------------

    def _serve_rt(self, user):
        key = self.headers.get("Sec-WebSocket-Key", "")
        if self.headers.get("Upgrade", "").lower() != "websocket" or not key:
            return self._error(422, "format_error", "expected a websocket upgrade")
        self.send_response(101, "Switching Protocols")
        self.send_header("Upgrade", "websocket")
        self.send_header("Connection", "Upgrade")
        self.send_header("Sec-WebSocket-Accept", frames.accept_key(key))
        self.end_headers()
        self.wfile.flush()
        self.close_connection = True

        conn = RtConnection(user, self.connection)
        gateway = self.gateway
        gateway.register_conn(conn)
        conn.start()
        conn.enqueue("rt.welcome", "", {"user_id": user.id, "role": user.role})
        try:
            while not conn.closed.is_set():
                opcode, payload = frames.read_frame(self.rfile)
                if opcode == frames.OP_CLOSE:
                    conn.enqueue_raw(frames.OP_CLOSE, payload[:2])
                    break
                if opcode == frames.OP_PING:
                    conn.enqueue_raw(frames.OP_PONG, payload)
                    continue
                if opcode != frames.OP_TEXT:
                    continue
                self._handle_rt_op(gateway, conn, payload)
        except (ConnectionError, OSError, PlatformError):
            pass
        finally:
            gateway.drop_conn(conn)

    def _handle_rt_op(self, gateway, conn, payload: bytes):
        try:
            op = json.loads(payload)
            if not isinstance(op, dict):
                raise ValueError("frame must be an object")
        except ValueError:
            conn.enqueue("rt.error", "", {"error": "format_error",
                                          "message": "frames must be JSON objects"})
            return
        kind = op.get("op")
        topic = op.get("topic", "")
        if kind == "subscribe":
            try:
                gateway.subscribe(conn, topic)
                conn.enqueue("rt.subscribed", topic, {})
            except Forbidden as exc:
                conn.enqueue("rt.error", topic, {"error": "forbidden",
                                                 "message": str(exc)})
        elif kind == "unsubscribe":
            gateway.unsubscribe(conn, topic)
            conn.enqueue("rt.unsubscribed", topic, {})
        elif kind == "ping":
            conn.enqueue("rt.pong", "", {})
        else:
            conn.enqueue("rt.error", "", {"error": "unknown_op",
                                          "message": f"unknown op {kind!r}"})


class GatewayServer:
    """ThreadingHTTPServer wrapper: start()/stop(), bound port discovery."""

    def __init__(self, platform, host: str = None, port: int = None):
        self.platform = platform
        self.gateway = Gateway(platform)
        host = host if host is not None else platform.config.listen_host
        port = port if port is not None else platform.config.listen_port
        self._httpd = ThreadingHTTPServer((host, port), GatewayHandler)
        self._httpd.daemon_threads = True
        self._httpd.gateway = self.gateway
        self._thread = None

    @property
    def address(self):
        host, port = self._httpd.server_address[:2]
        return host, port

    @property
    def base_url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}/api/v1"

    def start(self):
        self.platform.start()
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        kwargs={"poll_interval": 0.05},
                                        name="gateway", daemon=True)
        self._thread.start()

    def serve_forever(self):
        self.platform.start()
        self._httpd.serve_forever()

    def stop(self):
        self._httpd.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
        self.gateway.close()
        self._httpd.server_close()
        self.platform.stop()
