"""Two-flow oblivious transfer over any grey-zone hashing scheme.

Flow 1 always carries the word indexed 0, whatever the receiver chose: a
receiver with choice bit b samples its honest word as x_b and fills the other
index with the complement, so the wire never reflects b. The sender
recomputes x_1 = complement(rho, x_0), hashes both words under fresh keys and
returns (hash xor message, projection key) per index; only the slot the
receiver holds a witness for unmasks.

The module also ships the trusted-party reference (`ideal_ot_step`), the
trapdoor extractors used by the security harness, and an honest-transcript
simulator. Extractors are ordinary operations here so the statistical suites
can drive them.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, replace

from .core import (
    Crs,
    DecodeError,
    ProtocolAbort,
    RhoMode,
    SigmaMode,
    xor_mask,
)
from .util import Rng, tagged_sha256

__all__ = [
    "MAGIC",
    "VERSION",
    "MSG_FLOW1",
    "MSG_FLOW2",
    "Flow1",
    "Flow2",
    "encode_flow1",
    "encode_flow2",
    "decode_frame",
    "decode_flow1_payload",
    "decode_flow2_payload",
    "Phase",
    "ReceiverSession",
    "SenderSession",
    "receiver_init",
    "sender_respond",
    "receiver_finish",
    "run_protocol",
    "IdealOtState",
    "ideal_ot_step",
    "derive_crs",
    "extract_choice",
    "extract_messages",
    "simulate_honest_transcript",
]

MAGIC = b"GZOT"
VERSION = 1
MSG_FLOW1 = 1
MSG_FLOW2 = 2
_HEADER = struct.Struct(">4sBB8sBI")  # magic, version, type, sid, inst tag, payload len


@dataclass(frozen=True)
class Flow1:
    """First flow: the serialized word at index 0."""

    word_bytes: bytes


@dataclass(frozen=True)
class Flow2:
    """Second flow: per index, (hash-masked message, serialized projection key)."""

    c0: tuple[bytes, bytes]
    c1: tuple[bytes, bytes]

    def slot(self, i: int) -> tuple[bytes, bytes]:
        return self.c0 if i == 0 else self.c1


def _check_sid(sid: bytes) -> bytes:
    if not isinstance(sid, (bytes, bytearray)) or len(sid) != 8:
        raise ValueError("session id must be 8 bytes")
    return bytes(sid)


def _frame(msg_type: int, sid: bytes, inst_tag: int, payload: bytes) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, msg_type, _check_sid(sid), inst_tag, len(payload)) + payload


def encode_flow1(sid: bytes, inst_tag: int, flow1: Flow1) -> bytes:
    return _frame(MSG_FLOW1, sid, inst_tag, flow1.word_bytes)


def encode_flow2(sid: bytes, inst_tag: int, flow2: Flow2) -> bytes:
    payload = b""
    for mask, hp in (flow2.c0, flow2.c1):
        payload += len(mask).to_bytes(4, "big") + mask
        payload += len(hp).to_bytes(4, "big") + hp
    return _frame(MSG_FLOW2, sid, inst_tag, payload)


def decode_frame(data: bytes):
    """Parse one framed message; returns (msg_type, sid, inst_tag, payload)."""
    if len(data) < _HEADER.size:
        raise DecodeError("truncated frame header")
    magic, version, msg_type, sid, tag, plen = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DecodeError("bad magic")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version}")
    if msg_type not in (MSG_FLOW1, MSG_FLOW2):
        raise DecodeError(f"unknown message type {msg_type}")
    payload = data[_HEADER.size :]
    if len(payload) != plen:
        raise DecodeError("payload length mismatch")
    return msg_type, sid, tag, payload


def decode_flow1_payload(payload: bytes) -> Flow1:
    return Flow1(payload)


def decode_flow2_payload(payload: bytes) -> Flow2:
    slots = []
    off = 0
    for _ in range(4):
        if off + 4 > len(payload):
            raise DecodeError("truncated flow2 payload")
        ln = int.from_bytes(payload[off : off + 4], "big")
        off += 4
        if off + ln > len(payload):
            raise DecodeError("truncated flow2 payload")
        slots.append(payload[off : off + ln])
        off += ln
    if off != len(payload):
        raise DecodeError("trailing bytes in flow2 payload")
    return Flow2((slots[0], slots[1]), (slots[2], slots[3]))


class Phase(enum.Enum):
    INIT = "init"
    SENT = "sent"
    DONE = "done"


@dataclass
class ReceiverSession:
    """Receiver side; phases advance strictly init -> sent -> done."""

    sid: bytes
    crs: Crs
    b: int
    word: object        # the honest word x_b
    witness: object
    rng: Rng
    phase: Phase = Phase.SENT

    def finish(self, flow2: Flow2) -> bytes:
        if self.phase is not Phase.SENT:
            raise ProtocolAbort(f"finish not allowed in phase {self.phase.value}")
        scheme = self.crs.scheme
        mask_in, hp_bytes = flow2.slot(self.b)
        if scheme.kappa_bits is not None and 8 * len(mask_in) != scheme.kappa_bits:
            raise ProtocolAbort("mask width does not match the scheme")
        hp = scheme.projkey_from_bytes(hp_bytes)
        hval = scheme.proj_hash(hp, self.word, self.witness, self.rng)
        out = xor_mask(scheme.to_mask(hval, 8 * len(mask_in)), mask_in)
        self.phase = Phase.DONE
        return out


@dataclass
class SenderSession:
    """Sender side; responds exactly once."""

    sid: bytes
    crs: Crs
    m0: bytes
    m1: bytes
    phase: Phase = Phase.INIT

    def respond(self, flow1: Flow1, rng: Rng) -> Flow2:
        if self.phase is not Phase.INIT:
            raise ProtocolAbort(f"respond not allowed in phase {self.phase.value}")
        flow2 = sender_respond(self.crs, self.m0, self.m1, flow1, rng)
        self.phase = Phase.DONE
        return flow2


def receiver_init(crs: Crs, sid: bytes, b: int, rng: Rng):
    """Sample the chosen word, derive the other by complement, emit index 0."""
    if b not in (0, 1):
        raise ValueError("choice bit must be 0 or 1")
    scheme = crs.scheme
    word_b, wit = scheme.wordgen_l(crs.sigma, rng)
    x0 = word_b if b == 0 else scheme.complement(crs.rho, word_b)
    session = ReceiverSession(_check_sid(sid), crs, b, word_b, wit, rng)
    return session, Flow1(scheme.word_bytes(x0))


def sender_respond(crs: Crs, m0: bytes, m1: bytes, flow1: Flow1, rng: Rng) -> Flow2:
    """Hash both words under fresh keys and mask the two messages."""
    scheme = crs.scheme
    if len(m0) != len(m1):
        raise ProtocolAbort("messages must have equal length")
    nbits = 8 * len(m0)
    if scheme.kappa_bits is not None and nbits != scheme.kappa_bits:
        raise ProtocolAbort(f"this scheme masks exactly {scheme.kappa_bits} bits")
    x0 = scheme.word_from_bytes(flow1.word_bytes)
    x1 = scheme.complement(crs.rho, x0)
    slots = []
    for word, msg in ((x0, m0), (x1, m1)):
        hk = scheme.hash_kg(rng)
        hp = scheme.proj_kg(crs.sigma, hk, word, rng)
        mask = scheme.to_mask(scheme.hash_value(hk, word), nbits)
        slots.append((xor_mask(mask, msg), scheme.projkey_bytes(hp)))
    return Flow2(slots[0], slots[1])


def receiver_finish(session: ReceiverSession, flow2: Flow2) -> bytes:
    return session.finish(flow2)


def run_protocol(crs: Crs, sid: bytes, b: int, m0: bytes, m1: bytes, rng: Rng):
    """One honest in-process run; returns (output, flow1 frame, flow2 frame)."""
    tag = crs.scheme.tag
    recv, flow1 = receiver_init(crs, sid, b, rng.derive("receiver"))
    f1_bytes = encode_flow1(sid, tag, flow1)
    sender = SenderSession(_check_sid(sid), crs, m0, m1)
    flow2 = sender.respond(flow1, rng.derive("sender"))
    f2_bytes = encode_flow2(sid, tag, flow2)
    out = recv.finish(flow2)
    return out, f1_bytes, f2_bytes


# -- trusted-party reference ------------------------------------------------


@dataclass(frozen=True)
class IdealOtState:
    """Single-session trusted party: two input records and an answer gate."""

    sid: bytes
    sender_rec: tuple | None = None
    receiver_rec: int | None = None
    halted: bool = False


def ideal_ot_step(state: IdealOtState, msg: tuple):
    """Feed one message; returns (new_state, output-or-None).

    Messages: ("sender", sid, m0, m1), ("receiver", sid, b), ("answer", sid).
    Records are first-write-wins; the answer releases m_b only once both
    records exist, then the machine halts. Messages for other sids are
    ignored.
    """
    if state.halted:
        raise ProtocolAbort("functionality has halted")
    kind, sid = msg[0], msg[1]
    if sid != state.sid:
        return state, None
    if kind == "sender":
        if state.sender_rec is None:
            state = replace(state, sender_rec=(msg[2], msg[3]))
        return state, None
    if kind == "receiver":
        b = msg[2]
        if b not in (0, 1):
            raise ValueError("choice bit must be 0 or 1")
        if state.receiver_rec is None:
            state = replace(state, receiver_rec=b)
        return state, None
    if kind == "answer":
        if state.sender_rec is not None and state.receiver_rec is not None:
            out = state.sender_rec[state.receiver_rec]
            return replace(state, halted=True), out
        return state, None
    raise ValueError(f"unknown message kind {kind!r}")


# -- CRS derivation and extractors -------------------------------------------


def derive_crs(sid: bytes, scheme, sigma_mode=SigmaMode.S0, rho_mode=RhoMode.R0) -> Crs:
    """Deterministic CRS from the session id (hash-seeded sampler).

    Honest runs use (S0, R0); trapdoored modes exist for the test harness and
    produce the same public distribution.
    """
    seed = tagged_sha256(b"gzot-crs-v1", bytes([scheme.tag]), _check_sid(sid))
    return scheme.make_crs(Rng(seed), sigma_mode, rho_mode)


def extract_choice(crs: Crs, flow1: Flow1, with_tests: bool = False):
    """Recover the receiver's bit from flow 1 using the membership trapdoor.

    Returns 0 or 1, or None when neither word is recognizable (the
    decomposition event the security argument rules out); both-recognizable
    resolves to 0. Never raises on adversarial-but-well-formed words. With
    `with_tests` the raw membership pair (t0, t1) comes back too, so harnesses
    can count the rare branches instead of asserting them away.
    """
    if crs.sigma_mode is not SigmaMode.S1 or crs.td_sigma is None:
        raise ProtocolAbort("choice extraction needs an S1 sigma trapdoor")
    scheme = crs.scheme
    x0 = scheme.word_from_bytes(flow1.word_bytes)
    x1 = scheme.complement(crs.rho, x0)
    t0 = scheme.wordtest(crs.td_sigma, x0)
    t1 = scheme.wordtest(crs.td_sigma, x1)
    if not t0 and not t1:
        bit = None
    elif t0 and t1:
        bit = 0
    else:
        bit = 0 if not t0 else 1
    return (bit, (t0, t1)) if with_tests else bit


def extract_messages(crs: Crs, flow1: Flow1, flow2: Flow2, rng: Rng):
    """Recover both messages from flow 2 using the witnessed rho trapdoor.

    Only valid when flow 1 was produced from the trapdoor pair itself (the
    simulator plays the receiver), so both slots have known witnesses.
    """
    if crs.rho_mode is not RhoMode.R1 or crs.td_rho is None:
        raise ProtocolAbort("message extraction needs a witnessed rho trapdoor")
    scheme = crs.scheme
    td = crs.td_rho
    x0 = scheme.word_from_bytes(flow1.word_bytes)
    if not scheme.words_equal(x0, td.word):
        raise ProtocolAbort("flow 1 does not match the rho trapdoor")
    out = []
    pairs = ((td.word, td.witness), (td.word_prime, td.witness_prime))
    for i, (word, wit) in enumerate(pairs):
        mask_in, hp_bytes = flow2.slot(i)
        hp = scheme.projkey_from_bytes(hp_bytes)
        hval = scheme.proj_hash(hp, word, wit, rng)
        out.append(xor_mask(scheme.to_mask(hval, 8 * len(mask_in)), mask_in))
    return out[0], out[1]


def simulate_honest_transcript(crs: Crs, sid: bytes, rng: Rng, msg_len: int | None = None):
    """Transcript for an honest-honest run built from the L' trapdoor pair.

    Uses fresh random messages and a random choice bit; flows are
    syntactically identical to real ones (same framing, same lengths).
    Returns (flow1 frame, flow2 frame).
    """
    if crs.rho_mode is not RhoMode.R1PRIME or crs.td_rho is None:
        raise ProtocolAbort("transcript simulation needs an R1' rho trapdoor")
    scheme = crs.scheme
    if msg_len is None:
        if scheme.kappa_bits is None:
            raise ValueError("msg_len required for schemes without a fixed mask width")
        msg_len = scheme.kappa_bits // 8
    b = rng.randbit()
    m0, m1 = rng.randbytes(msg_len), rng.randbytes(msg_len)
    x0 = crs.td_rho.word if b == 0 else crs.td_rho.word_prime
    flow1 = Flow1(scheme.word_bytes(x0))
    flow2 = sender_respond(crs, m0, m1, flow1, rng)
    return encode_flow1(sid, scheme.tag, flow1), encode_flow2(sid, scheme.tag, flow2)
