"""Minimal RFC 6455 WebSocket framing over plain sockets.

Covers what the session service and its tests need: the HTTP upgrade
handshake (both sides), text frames, ping/pong, close, and continuation
fragments. Client-to-server frames are masked per the RFC; server
frames are not.
"""

import base64
import hashlib
import os
import socket
import struct

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT, OP_TEXT, OP_CLOSE, OP_PING, OP_PONG = 0x0, 0x1, 0x8, 0x9, 0xA


class HandshakeError(Exception):
    pass


def accept_key(client_key):
    digest = hashlib.sha1((client_key + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _read_headers(sock):
    data = b""
    while b"\r\n\r\n" not in data:
        more = sock.recv(4096)
        if not more:
            raise HandshakeError("peer closed during handshake")
        data = data + more
        if len(data) > 65536:
            raise HandshakeError("oversized handshake")
    head, _, rest = data.partition(b"\r\n\r\n")
    lines = head.decode("latin-1").split("\r\n")
    headers = {}
    for line in lines[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    return lines[0], headers, rest


def server_handshake(sock):
    """Answer an HTTP upgrade request; returns leftover bytes."""
    request, headers, rest = _read_headers(sock)
    if headers.get("upgrade", "").lower() != "websocket" or "sec-websocket-key" not in headers:
        sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        raise HandshakeError(f"not a websocket upgrade: {request}")
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(headers['sec-websocket-key'])}\r\n"
        "\r\n"
    )
    sock.sendall(response.encode("ascii"))
    return rest


def client_handshake(sock, host, path="/"):
    """Send an upgrade request and verify the accept key; returns
    leftover bytes."""
    key = base64.b64encode(os.urandom(16)).decode("ascii")
    request = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\n"
        "Sec-WebSocket-Version: 13\r\n"
        "\r\n"
    )
    sock.sendall(request.encode("ascii"))
    status, headers, rest = _read_headers(sock)
    if " 101 " not in status + " ":
        raise HandshakeError(f"upgrade refused: {status}")
    if headers.get("sec-websocket-accept") != accept_key(key):
        raise HandshakeError("bad Sec-WebSocket-Accept")
    return rest


def encode_frame(payload, opcode=OP_TEXT, masked=False, fin=True):
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    head = bytes([(0x80 if fin else 0) | opcode])
    mask_bit = 0x80 if masked else 0
    n = len(payload)
    if n < 126:
        head += bytes([mask_bit | n])
    elif n < 65536:
        head += bytes([mask_bit | 126]) + struct.pack(">H", n)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", n)
    if masked:
        mask = os.urandom(4)
        body = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return head + mask + body
    return head + payload


class FrameReader:
    """Incremental frame parser bound to a socket; hands back complete
    text messages and transparently answers pings."""

    def __init__(self, sock, initial=b""):
        self.sock = sock
        self.buf = bytearray(initial)

    def _fill(self, n):
        while len(self.buf) < n:
            more = self.sock.recv(4096)
            if not more:
                raise ConnectionError("peer closed")
            self.buf.extend(more)

    def _read_frame(self):
        self._fill(2)
        b0, b1 = self.buf[0], self.buf[1]
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        n = b1 & 0x7F
        at = 2
        if n == 126:
            self._fill(at + 2)
            n = struct.unpack(">H", bytes(self.buf[at:at + 2]))[0]
            at += 2
        elif n == 127:
            self._fill(at + 8)
            n = struct.unpack(">Q", bytes(self.buf[at:at + 8]))[0]
            at += 8
        mask = b""
        if masked:
            self._fill(at + 4)
            mask = bytes(self.buf[at:at + 4])
            at += 4
        self._fill(at + n)
        payload = bytes(self.buf[at:at + n])
        del self.buf[:at + n]
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return fin, opcode, payload

    def recv_text(self):
        """Next complete text message, or None on clean close."""
        message = b""
        while True:
            fin, opcode, payload = self._read_frame()
            if opcode == OP_CLOSE:
                try:
                    self.sock.sendall(encode_frame(payload, opcode=OP_CLOSE))
                except OSError:
                    pass
                return None
            if opcode == OP_PING:
                self.sock.sendall(encode_frame(payload, opcode=OP_PONG))
                continue
            if opcode == OP_PONG:
                continue
            if opcode in (OP_TEXT, OP_CONT):
                message += payload
                if fin:
                    return message.decode("utf-8")
                continue
            raise ConnectionError(f"unsupported opcode {opcode}")


def send_text(sock, text, masked=False):
    sock.sendall(encode_frame(text, opcode=OP_TEXT, masked=masked))


def send_close(sock, masked=False):
    try:
        sock.sendall(encode_frame(b"", opcode=OP_CLOSE, masked=masked))
    except OSError:
        pass


def connect(addr, path="/", timeout=5.0):
    """Convenience client: returns (socket, FrameReader)."""
    sock = socket.create_connection(addr, timeout=timeout)
    rest = client_handshake(sock, f"{addr[0]}:{addr[1]}", path)
    return sock, FrameReader(sock, rest)
