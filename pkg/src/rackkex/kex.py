"""Certificate-based key agreement over a rack.

Alice publishes φ_a(x_1), ..., φ_a(x_t) in a TTP-signed certificate.  A session:

    Alice -> Bob : x, φ_a(x)
    Bob -> Alice : φ_b(x)

and both sides arrive at φ_a φ_b(x) = φ_{φ_a(b)} φ_a(x).  Bob's ``b`` is a
:class:`SLP` or :class:`GroupWord` over the public generators, so he can
re-evaluate it on the certificate images to get φ_a(b).
"""
from __future__ import annotations

import base64
import hashlib
import hmac
import json
import random
import re
import struct
import warnings
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from .rackcore import (ConjRack, MembershipError, Rack, SamplingUnavailable, canonical_descriptor_bytes,
                       descriptor_hash, rack_from_descriptor)
from .words import Word, format_word, parse_word

KDF_LABEL = b"RACK-KEX-v1"
CERT_VERSION = 1
ROLE_INITIATOR = 0x01
ROLE_RESPONDER = 0x02
DEGENERATE_SIZE_LIMIT = 10**4


class KexError(Exception):
    pass


class CertificateError(KexError):
    pass


class DegenerateParamsWarning(UserWarning):
    pass


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


# ---------------------------------------------------------------------------
# Parameters and keys


class PublicParams:
    def __init__(self, rack: Rack, generators: list):
        if not generators:
            raise KexError("public parameters need at least one generator")
        for g in generators:
            rack.check(g)
        self.rack = rack
        self.generators = list(generators)

    @property
    def t(self) -> int:
        return len(self.generators)

    @property
    def descriptor(self) -> dict:
        return self.rack.descriptor()

    @property
    def rack_hash(self) -> bytes:
        return descriptor_hash(self.descriptor)

    def to_dict(self) -> dict:
        return {"rack": json.loads(canonical_descriptor_bytes(self.descriptor)),
                "generators": [_b64(self.rack.encode(g)) for g in self.generators]}

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=True).encode()

    @property
    def params_hash(self) -> bytes:
        return hashlib.sha256(self.canonical_bytes()).digest()

    @classmethod
    def from_dict(cls, d: dict) -> "PublicParams":
        rack = rack_from_descriptor(d["rack"])
        return cls(rack, [rack.decode_member(_unb64(g)) for g in d["generators"]])

    @classmethod
    def from_text(cls, text: str) -> "PublicParams":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        return self.canonical_bytes().decode() + "\n"


@dataclass(frozen=True)
class SecretKey:
    a: object


def keygen(params: PublicParams, rng: random.Random):
    """Sample a secret a and return (SecretKey, canonical bytes of φ_a(x_i))."""
    X = params.rack
    a = X.sample(rng)
    images = [X.encode(X._op(a, x)) for x in params.generators]
    return SecretKey(a), images


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class Certificate:
    identity: str
    params_hash: bytes
    images: list
    signature: bytes = b""
    version: int = CERT_VERSION

    def body(self) -> bytes:
        out = [struct.pack(">I", self.version), _lp(self.identity.encode()), self.params_hash,
               struct.pack(">I", len(self.images))]
        out += [_lp(img) for img in self.images]
        return b"".join(out)

    def to_dict(self) -> dict:
        return {"version": self.version, "identity": self.identity,
                "params_hash": self.params_hash.hex(),
                "images": [_b64(i) for i in self.images],
                "signature": _b64(self.signature)}

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        try:
            return cls(identity=d["identity"], params_hash=bytes.fromhex(d["params_hash"]),
                       images=[_unb64(i) for i in d["images"]], signature=_unb64(d["signature"]),
                       version=d["version"])
        except (KeyError, ValueError, TypeError) as exc:
            raise CertificateError(f"malformed certificate: {exc}") from exc

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise CertificateError(f"malformed certificate: {exc}") from exc


def signing_key_from_seed(seed: bytes) -> Ed25519PrivateKey:
    if len(seed) != 32:
        raise KexError("Ed25519 seed must be 32 bytes")
    return Ed25519PrivateKey.from_private_bytes(seed)


def public_key_bytes(key: Ed25519PrivateKey) -> bytes:
    from cryptography.hazmat.primitives import serialization
    return key.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def issue_cert(ttp_key: Ed25519PrivateKey, identity: str, params: PublicParams, images: list) -> Certificate:
    if len(images) != params.t:
        raise CertificateError(f"expected {params.t} images, got {len(images)}")
    for img in images:
        params.rack.decode_member(img)
    cert = Certificate(identity, params.params_hash, list(images))
    cert.signature = ttp_key.sign(cert.body())
    return cert


def verify_cert(ttp_public_key: Ed25519PublicKey | bytes, cert: Certificate, params: PublicParams) -> bool:
    if isinstance(ttp_public_key, (bytes, bytearray)):
        ttp_public_key = Ed25519PublicKey.from_public_bytes(bytes(ttp_public_key))
    if cert.version != CERT_VERSION or cert.params_hash != params.params_hash:
        return False
    if len(cert.images) != params.t or len(cert.signature) != 64:
        return False
    try:
        ttp_public_key.verify(cert.signature, cert.body())
    except InvalidSignature:
        return False
    try:
        for img in cert.images:
            params.rack.decode_member(img)
    except MembershipError:
        return False
    return True


# ---------------------------------------------------------------------------
# Bob's element b as an expression in the public generators


@dataclass(frozen=True)
class SLP:
    """Straight-line program.  Value slots 1..t are the generators; step s
    (1-based) fills slot t+s with ``left ▷ right`` ("op") or ``left \\ right``
    ("ldiv").  ``output`` names the result slot (default: the last one).
    """

    steps: tuple = ()
    output: int | None = None

    def evaluate(self, X: Rack, values: list):
        slots = [None] + list(values)
        t = len(values)
        for kind, i, j in self.steps:
            if not (1 <= i < len(slots) and 1 <= j < len(slots)):
                raise KexError(f"SLP step refers to undefined slot ({i}, {j})")
            if kind == "op":
                slots.append(X._op(slots[i], slots[j]))
            elif kind == "ldiv":
                slots.append(X._ldiv(slots[i], slots[j]))
            else:
                raise KexError(f"unknown SLP instruction {kind!r}")
        out = self.output if self.output is not None else len(slots) - 1
        if not 1 <= out < len(slots):
            raise KexError(f"SLP output slot {out} undefined (t={t})")
        return slots[out]

    def action(self, X: Rack, values: list):
        b = self.evaluate(X, values)
        return lambda x: X._op(b, x)

    def to_dict(self) -> dict:
        d = {"slp": [list(s) for s in self.steps]}
        if self.output is not None:
            d["output"] = self.output
        return d


@dataclass(frozen=True)
class GroupWord:
    """A group word in x_1..x_t (symbol index i is x_{i+1}); acts by conjugation.

    Only meaningful on conjugation racks, where φ_w(x) = w x w^-1.
    """

    word: Word = field(default_factory=Word)

    def element(self, X: Rack, values: list):
        if not isinstance(X, ConjRack):
            raise KexError("group-word form needs a conjugation rack")
        ops = X.ops
        g = ops.identity()
        for c in self.word.codes:
            k = abs(c) - 1
            if k >= len(values):
                raise KexError(f"group word refers to x{k + 1} but t={len(values)}")
            v = values[k]
            g = ops.mul(g, v if c > 0 else ops.inv(v))
        return g

    def action(self, X: Rack, values: list):
        g = self.element(X, values)
        return lambda x: X.ops.conj(g, x)

    def to_dict(self) -> dict:
        names = [f"x{i + 1}" for i in range(max(self.word.symbols(), default=-1) + 1)]
        return {"group_word": format_word(self.word, names)}


def rack_word_from_dict(d: dict):
    if "slp" in d:
        return SLP(tuple((s[0], int(s[1]), int(s[2])) for s in d["slp"]), d.get("output"))
    if "group_word" in d:
        text = d["group_word"]
        top = max((int(m) for m in re.findall(r"x(\d+)", text)), default=0)
        return GroupWord(parse_word(text, [f"x{i + 1}" for i in range(top)]))
    raise KexError("rack word must have an 'slp' or 'group_word' field")


def random_slp(t: int, depth: int, rng: random.Random) -> SLP:
    steps = []

    def build(d: int) -> int:
        if d == 0 or rng.random() < 0.3:
            return rng.randint(1, t)
        left = build(d - 1)
        right = build(d - 1)
        steps.append((rng.choice(("op", "ldiv")), left, right))
        return t + len(steps)

    out = build(depth)
    return SLP(tuple(steps), out)


def random_group_word(t: int, max_len: int, rng: random.Random) -> GroupWord:
    n = rng.randint(1, max_len)
    return GroupWord(Word(rng.choice((1, -1)) * rng.randint(1, t) for _ in range(n)))


def random_rack_word(params: PublicParams, rng: random.Random, depth: int = 4, max_len: int = 8):
    if isinstance(params.rack, ConjRack) and not params.rack.finite:
        return random_group_word(params.t, max_len, rng)
    return random_slp(params.t, depth, rng)


# ---------------------------------------------------------------------------
# Handshake


@dataclass(frozen=True)
class Message1:
    x: bytes
    phi_a_x: bytes

    def to_bytes(self) -> bytes:
        return _lp(self.x) + _lp(self.phi_a_x)


@dataclass(frozen=True)
class Message2:
    phi_b_x: bytes

    def to_bytes(self) -> bytes:
        return _lp(self.phi_b_x)


@dataclass
class InitiatorState:
    params: PublicParams
    a: object
    x: object
    msg1: Message1


def initiate(params: PublicParams, sk: SecretKey, rng: random.Random, x=None):
    X = params.rack
    a = X.check(sk.a)
    if x is None:
        x = X.sample(rng)
    msg = Message1(X.encode(x), X.encode(X._op(a, X.check(x))))
    return InitiatorState(params, a, x, msg), msg


def respond(params: PublicParams, cert: Certificate, b, msg1: Message1, ttp_public_key=None):
    """Bob's side.  Returns (Message2, shared secret element).

    With ``ttp_public_key`` given the certificate is verified first; pass
    ``None`` only when the caller has already done so.
    """
    X = params.rack
    if ttp_public_key is not None and not verify_cert(ttp_public_key, cert, params):
        raise CertificateError(f"certificate for {cert.identity!r} failed verification")
    if cert.params_hash != params.params_hash:
        raise CertificateError("certificate was issued for different parameters")
    x = X.decode_member(msg1.x)
    phi_a_x = X.decode_member(msg1.phi_a_x)
    images = [X.decode_member(i) for i in cert.images]
    phi_b = b.action(X, params.generators)
    phi_b_x = phi_b(x)
    phi_a_b = b.action(X, images)
    secret = phi_a_b(phi_a_x)
    return Message2(X.encode(phi_b_x)), secret


def finalize(state: InitiatorState, msg2: Message2):
    X = state.params.rack
    phi_b_x = X.decode_member(msg2.phi_b_x)
    return X._op(state.a, phi_b_x)


def transcript_hash(msg1: Message1, msg2: Message2) -> bytes:
    return hashlib.sha256(msg1.to_bytes() + msg2.to_bytes()).digest()


def kdf(secret: bytes, params_hash: bytes, transcript: bytes) -> bytes:
    """32-byte session key from the canonical secret bytes, params hash and transcript hash."""
    return hashlib.sha256(KDF_LABEL + params_hash + transcript + secret).digest()


def session_key(params: PublicParams, secret, msg1: Message1, msg2: Message2) -> bytes:
    return kdf(params.rack.encode(secret), params.params_hash, transcript_hash(msg1, msg2))


def confirm_tag(key: bytes, role: int) -> bytes:
    return hmac.new(key, b"confirm" + bytes([role]), hashlib.sha256).digest()


def check_confirm(key: bytes, role: int, tag: bytes) -> bool:
    return hmac.compare_digest(confirm_tag(key, role), tag)


def fingerprint(key: bytes) -> str:
    return key.hex()[:8]


# ---------------------------------------------------------------------------
# Attack oracle


def brute_force_secret(params: PublicParams, images: list) -> list:
    """Every a' in X with a' ▷ x_i = image_i for all i (exhaustive scan)."""
    X = params.rack
    if len(images) != params.t:
        raise KexError(f"expected {params.t} images, got {len(images)}")
    targets = [X.decode_member(i) if isinstance(i, (bytes, bytearray)) else X.check(i) for i in images]
    try:
        candidates = X.elements()
    except SamplingUnavailable as exc:
        raise KexError(f"rack is not enumerable: {exc}") from exc
    return [a for a in candidates
            if all(X._op(a, x) == y for x, y in zip(params.generators, targets))]


def check_params(params: PublicParams, rng: random.Random) -> int | None:
    """Run the attack oracle on one random key pair; warn when the secret is not pinned down.

    Returns the consistency-set size, or None when the rack is too large or
    not enumerable.
    """
    X = params.rack
    if not X.finite or len(X.elements()) >= DEGENERATE_SIZE_LIMIT:
        return None
    _, images = keygen(params, rng)
    size = len(brute_force_secret(params, images))
    if size > 1:
        warnings.warn(f"degenerate parameters: {size} secrets are consistent with a random "
                      f"certificate", DegenerateParamsWarning, stacklevel=2)
    return size
