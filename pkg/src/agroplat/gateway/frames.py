"""Minimal RFC 6455 framing: handshake digest, frame encode/decode.

Covers what the realtime channel needs: text, close, ping/pong, client
masking, 16- and 64-bit extended lengths, and reassembly of continuation
fragments. Used by both the server and the test/CLI client.
"""
from __future__ import annotations

import base64
import hashlib
import os
import struct

from ..errors import FormatError

GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA

MAX_PAYLOAD = 1 << 22  # 4 MiB, far above any frame we exchange


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(opcode: int, payload: bytes, mask: bool = False) -> bytes:
    """One unfragmented frame. Clients must set mask=True, servers must not."""
    head = bytes([0x80 | (opcode & 0x0F)])
    n = len(payload)
    mask_bit = 0x80 if mask else 0
    if n < 126:
        head += bytes([mask_bit | n])
    elif n < (1 << 16):
        head += bytes([mask_bit | 126]) + struct.pack(">H", n)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", n)
    if not mask:
        return head + payload
    key = os.urandom(4)
    masked = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return head + key + masked


def _read_exact(reader, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = reader.read(n - len(buf))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf += chunk
    return buf


def read_frame(reader):
    """Read one complete message, reassembling continuations.

    Returns (opcode, payload). Control frames are returned as-is (they may
    not be fragmented per the RFC).
    """
    opcode = None
    payload = b""
    while True:
        b1, b2 = _read_exact(reader, 2)
        fin = bool(b1 & 0x80)
        op = b1 & 0x0F
        if b1 & 0x70:
            raise FormatError("reserved frame bits set")
        masked = bool(b2 & 0x80)
        n = b2 & 0x7F
        if n == 126:
            (n,) = struct.unpack(">H", _read_exact(reader, 2))
        elif n == 127:
            (n,) = struct.unpack(">Q", _read_exact(reader, 8))
        if n > MAX_PAYLOAD:
            raise FormatError(f"frame of {n} bytes exceeds limit")
        key = _read_exact(reader, 4) if masked else None
        data = _read_exact(reader, n)
        if key:
            data = bytes(b ^ key[i % 4] for i, b in enumerate(data))
        if op >= OP_CLOSE:  # control frame, never fragmented
            if not fin:
                raise FormatError("fragmented control frame")
            return op, data
        if opcode is None:
            if op == OP_CONT:
                raise FormatError("continuation frame with nothing to continue")
            opcode = op
        elif op != OP_CONT:
            raise FormatError("interleaved data frames")
        payload += data
        if len(payload) > MAX_PAYLOAD:
            raise FormatError("fragmented message exceeds limit")
        if fin:
            return opcode, payload
