"""Length-prefixed JSON frames and the TCP handshake (one handshake per connection).

    initiator                         responder
    hello {params_hash, cert, x, φ_a(x)}  ->
                                      <-  reply {φ_b(x)}
                                      <-  confirm {responder MAC}
    confirm {initiator MAC}           ->
"""
from __future__ import annotations

import base64
import json
import logging
import os
import random
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass

from . import kex
from .kex import Certificate, Message1, Message2, PublicParams, SecretKey
from .rackcore import MembershipError

log = logging.getLogger(__name__)

DEFAULT_PORT = 46121
MAX_BODY = 16 * 1024 * 1024
PROTOCOL_VERSION = 1

FIELDS = {
    "hello": ("type", "version", "params_hash", "cert", "x", "phi_a_x"),
    "reply": ("type", "phi_b_x"),
    "confirm": ("type", "role", "mac"),
    "error": ("type", "code", "message"),
}


class FrameError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class HandshakeError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


def _canonical(msg: dict) -> dict:
    kind = msg.get("type")
    if kind not in FIELDS:
        raise FrameError("unknown_type", f"unknown message type {kind!r}")
    fields = FIELDS[kind]
    missing = [f for f in fields if f not in msg]
    extra = [f for f in msg if f not in fields]
    if missing or extra:
        raise FrameError("malformed", f"{kind} frame fields: missing {missing}, unexpected {extra}")
    return {f: msg[f] for f in fields}


def encode_frame(msg: dict) -> bytes:
    body = json.dumps(_canonical(msg), separators=(",", ":"), ensure_ascii=True).encode()
    if len(body) > MAX_BODY:
        raise FrameError("too_large", f"frame body of {len(body)} bytes exceeds {MAX_BODY}")
    return struct.pack(">I", len(body)) + body


def decode_body(body: bytes) -> dict:
    try:
        msg = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError("malformed", f"frame body is not JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise FrameError("malformed", "frame body is not an object")
    return _canonical(msg)


def decode_frame(data: bytes) -> dict:
    """Decode exactly one frame from ``data``."""
    if len(data) < 4:
        raise FrameError("truncated", "frame shorter than its length prefix")
    (n,) = struct.unpack_from(">I", data)
    if n > MAX_BODY:
        raise FrameError("too_large", f"declared body length {n} exceeds {MAX_BODY}")
    if len(data) - 4 < n:
        raise FrameError("truncated", f"frame declares {n} bytes, only {len(data) - 4} present")
    if len(data) - 4 > n:
        raise FrameError("malformed", f"{len(data) - 4 - n} trailing bytes after frame")
    return decode_body(data[4:])


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise FrameError("truncated", f"connection closed after {len(buf)} of {n} bytes")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock: socket.socket) -> dict:
    (n,) = struct.unpack(">I", _recv_exact(sock, 4))
    if n > MAX_BODY:
        raise FrameError("too_large", f"declared body length {n} exceeds {MAX_BODY}")
    return decode_body(_recv_exact(sock, n))


def send_frame(sock: socket.socket, msg: dict):
    sock.sendall(encode_frame(msg))


def error_frame(code: str, message: str = "") -> dict:
    return {"type": "error", "code": code, "message": message}


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text) -> bytes:
    try:
        return base64.b64decode(str(text).encode("ascii"), validate=True)
    except (ValueError, UnicodeEncodeError) as exc:
        raise FrameError("malformed", f"bad base64 field: {exc}") from exc


def _expect(msg: dict, kind: str) -> dict:
    if msg["type"] == "error":
        raise HandshakeError(msg["code"], msg["message"])
    if msg["type"] != kind:
        raise HandshakeError("unexpected_frame", f"expected {kind}, got {msg['type']}")
    return msg


def default_rng() -> random.Random:
    seed = os.environ.get("RACKKEX_SEED")
    return random.Random(int(seed)) if seed is not None else random.Random(int.from_bytes(os.urandom(16), "big"))


# ---------------------------------------------------------------------------
# Responder


@dataclass
class SessionResult:
    key: bytes
    peer: str

    @property
    def fingerprint(self) -> str:
        return kex.fingerprint(self.key)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        srv: ResponderServer = self.server
        sock = self.request
        sock.settimeout(srv.timeout_s)
        try:
            result = srv.handshake(sock)
        except HandshakeError as exc:
            log.warning("handshake with %s failed: %s", self.client_address, exc)
            srv.record_failure(exc.code)
            self._try_send(error_frame(exc.code, exc.message))
        except FrameError as exc:
            log.warning("bad frame from %s: %s", self.client_address, exc)
            srv.record_failure(exc.code)
            self._try_send(error_frame(exc.code, exc.message))
        except (OSError, socket.timeout) as exc:
            log.warning("connection error with %s: %s", self.client_address, exc)
            srv.record_failure("io")
        else:
            log.info("session with %s key %s", self.client_address, result.fingerprint)
            srv.record_success(result)

    def _try_send(self, msg):
        try:
            send_frame(self.request, msg)
        except OSError:
            pass


class ResponderServer(socketserver.ThreadingMixIn, socketserver.TCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, addr, params: PublicParams, ttp_public_key: bytes, b_policy="ephemeral",
                 rng: random.Random | None = None, timeout_s: float = 10.0):
        super().__init__(addr, _Handler)
        self.params = params
        self.ttp_public_key = ttp_public_key
        self.b_policy = b_policy
        self.rng = rng or default_rng()
        self.timeout_s = timeout_s
        self._lock = threading.Lock()
        self.sessions: list = []
        self.failures: list = []

    def record_success(self, result: SessionResult):
        with self._lock:
            self.sessions.append(result)

    def record_failure(self, code: str):
        with self._lock:
            self.failures.append(code)

    def _choose_b(self):
        if self.b_policy == "ephemeral":
            with self._lock:
                return kex.random_rack_word(self.params, self.rng)
        return self.b_policy

    def handshake(self, sock) -> SessionResult:
        params = self.params
        hello = _expect(read_frame(sock), "hello")
        if hello["version"] != PROTOCOL_VERSION:
            raise HandshakeError("version_mismatch", f"unsupported version {hello['version']!r}")
        if hello["params_hash"] != params.params_hash.hex():
            raise HandshakeError("params_mismatch", "initiator uses different public parameters")
        cert = Certificate.from_dict(hello["cert"]) if isinstance(hello["cert"], dict) else None
        if cert is None or not kex.verify_cert(self.ttp_public_key, cert, params):
            raise HandshakeError("cert_invalid", "certificate failed verification")
        msg1 = Message1(_unb64(hello["x"]), _unb64(hello["phi_a_x"]))
        try:
            msg2, secret = kex.respond(params, cert, self._choose_b(), msg1)
        except MembershipError as exc:
            raise HandshakeError("membership", str(exc)) from exc
        key = kex.session_key(params, secret, msg1, msg2)
        send_frame(sock, {"type": "reply", "phi_b_x": _b64(msg2.phi_b_x)})
        send_frame(sock, {"type": "confirm", "role": "responder",
                          "mac": _b64(kex.confirm_tag(key, kex.ROLE_RESPONDER))})
        conf = _expect(read_frame(sock), "confirm")
        if conf["role"] != "initiator" or not kex.check_confirm(key, kex.ROLE_INITIATOR, _unb64(conf["mac"])):
            raise HandshakeError("confirm_mismatch", "initiator key confirmation failed")
        return SessionResult(key, cert.identity)


def serve_responder(listen_addr, params: PublicParams, ttp_public_key: bytes, b_policy="ephemeral",
                    rng: random.Random | None = None) -> ResponderServer:
    """Bind a responder; call ``serve_forever()`` (or run it in a thread) to accept handshakes."""
    return ResponderServer(listen_addr, params, ttp_public_key, b_policy, rng)


# ---------------------------------------------------------------------------
# Initiator


def run_initiator(addr, params: PublicParams, sk: SecretKey, cert: Certificate,
                  rng: random.Random | None = None, timeout_s: float = 10.0) -> bytes:
    rng = rng or default_rng()
    state, msg1 = kex.initiate(params, sk, rng)
    with socket.create_connection(addr, timeout=timeout_s) as sock:
        send_frame(sock, {"type": "hello", "version": PROTOCOL_VERSION,
                          "params_hash": params.params_hash.hex(), "cert": cert.to_dict(),
                          "x": _b64(msg1.x), "phi_a_x": _b64(msg1.phi_a_x)})
        reply = _expect(read_frame(sock), "reply")
        msg2 = Message2(_unb64(reply["phi_b_x"]))
        try:
            secret = kex.finalize(state, msg2)
        except MembershipError as exc:
            send_frame(sock, error_frame("membership", str(exc)))
            raise HandshakeError("membership", str(exc)) from exc
        key = kex.session_key(params, secret, msg1, msg2)
        conf = _expect(read_frame(sock), "confirm")
        if conf["role"] != "responder" or not kex.check_confirm(key, kex.ROLE_RESPONDER, _unb64(conf["mac"])):
            send_frame(sock, error_frame("confirm_mismatch", "responder key confirmation failed"))
            raise HandshakeError("confirm_mismatch", "responder key confirmation failed")
        send_frame(sock, {"type": "confirm", "role": "initiator",
                          "mac": _b64(kex.confirm_tag(key, kex.ROLE_INITIATOR))})
    log.info("session with %s:%s key %s", addr[0], addr[1], kex.fingerprint(key))
    return key
