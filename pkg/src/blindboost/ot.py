"""1-out-of-2 oblivious transfer for wire-label delivery.

Two modes:

* ``base``: per-wire Diffie-Hellman base OT (Chou-Orlandi shape) in the
  prime-order quadratic-residue subgroup of a named safe-prime MODP group.
  The sender publishes A = g^a once per batch; the receiver answers
  B_i = g^{b_i} * A^{c_i} per wire; the sender encrypts each pair under
  H(B_i^a) and H((B_i/A)^a).
* ``dealer``: a trusted dealer hands the receiver the chosen labels directly.
  Flagged insecure; refused when the secure profile is active.
"""

import hashlib
import random
from dataclasses import dataclass

from .errors import GroupElementInvalid, ModeNotPermittedInSecureProfile, OTFailure

LABEL_BYTES = 16

# Safe-prime MODP groups (Oakley groups 1 and 2, and the 2048-bit group 14).
# g = 4 generates the prime-order subgroup of quadratic residues.
_MODP_768 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A63A3620FFFFFFFFFFFFFFFF", 16)
_MODP_1024 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF", 16)
_MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF", 16)


@dataclass(frozen=True)
class Group:
    name: str
    p: int
    g: int

    @property
    def order(self) -> int:
        return (self.p - 1) // 2


GROUPS = {
    "modp-768": Group("modp-768", _MODP_768, 4),
    "modp-1024": Group("modp-1024", _MODP_1024, 4),
    "modp-2048": Group("modp-2048", _MODP_2048, 4),
}

from .paillier import powmod  # noqa: E402


def _validate_element(group: Group, x: int, full_check: bool = False) -> None:
    if not 1 < x < group.p - 1:
        raise GroupElementInvalid(f"element outside (1, p-1) in {group.name}")
    if full_check and powmod(x, group.order, group.p) != 1:
        raise GroupElementInvalid(f"element outside prime-order subgroup of {group.name}")


def _kdf(elem: int, index: int) -> bytes:
    raw = elem.to_bytes((elem.bit_length() + 7) // 8 or 1, "big")
    return hashlib.blake2s(raw + index.to_bytes(8, "little"),
                           key=b"blindboost-ot-v1", digest_size=LABEL_BYTES).digest()


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


class OTSender:
    """Holds the label pairs; one instance per batch."""

    def __init__(self, group: Group, rng: random.Random, full_check: bool = False):
        self.group = group
        self.full_check = full_check
        self._a = rng.randrange(1, group.order)
        self.A = powmod(group.g, self._a, group.p)
        self._A_inv = powmod(self.A, group.p - 2, group.p)

    def setup_message(self) -> int:
        return self.A

    def respond(self, bs: list, pairs: list) -> list:
        """Per wire i: (m0 ^ H(B^a), m1 ^ H((B/A)^a))."""
        if len(bs) != len(pairs):
            raise OTFailure("choice-message count does not match pair count")
        out = []
        for i, (b, (m0, m1)) in enumerate(zip(bs, pairs)):
            _validate_element(self.group, b, self.full_check)
            k0 = _kdf(powmod(b, self._a, self.group.p), i)
            k1 = _kdf(powmod(b * self._A_inv % self.group.p, self._a, self.group.p), i)
            out.append((_xor(m0, k0), _xor(m1, k1)))
        return out


class OTReceiver:
    def __init__(self, group: Group, rng: random.Random, A: int, full_check: bool = False):
        _validate_element(group, A, full_check)
        self.group = group
        self.A = A
        self._rng = rng
        self._secrets = None
        self._choices = None

    def choose(self, bits: list) -> list:
        """B_i = g^{b_i} * A^{c_i}."""
        self._secrets = [self._rng.randrange(1, self.group.order) for _ in bits]
        self._choices = [int(c) & 1 for c in bits]
        msgs = []
        for b, c in zip(self._secrets, self._choices):
            m = powmod(self.group.g, b, self.group.p)
            if c:
                m = m * self.A % self.group.p
            msgs.append(m)
        return msgs

    def finish(self, responses: list) -> list:
        if self._secrets is None:
            raise OTFailure("choose() was not called")
        if len(responses) != len(self._secrets):
            raise OTFailure("response count does not match choice count")
        labels = []
        for i, ((e0, e1), b, c) in enumerate(zip(responses, self._secrets, self._choices)):
            k = _kdf(powmod(self.A, b, self.group.p), i)
            labels.append(_xor(e1 if c else e0, k))
        return labels


def dealer_choose(pairs: list, bits: list, secure_profile: bool = False) -> list:
    """Trusted-dealer shortcut; test mode only."""
    if secure_profile:
        raise ModeNotPermittedInSecureProfile("dealer OT is a test mode")
    if len(pairs) != len(bits):
        raise OTFailure("pair/choice count mismatch")
    return [p[int(c) & 1] for p, c in zip(pairs, bits)]


def ot_choose(pairs: list, bits: list, mode: str = "base",
              group_name: str = "modp-768", sender_rng: random.Random | None = None,
              receiver_rng: random.Random | None = None,
              secure_profile: bool = False) -> list:
    """Run both ends in-process; the protocol layer splits them over transport."""
    if mode == "dealer":
        return dealer_choose(pairs, bits, secure_profile)
    if mode != "base":
        raise ValueError(f"unknown OT mode {mode!r}")
    group = GROUPS[group_name]
    sender = OTSender(group, sender_rng or random.Random(), full_check=secure_profile)
    receiver = OTReceiver(group, receiver_rng or random.Random(),
                          sender.setup_message(), full_check=secure_profile)
    bs = receiver.choose(bits)
    return receiver.finish(sender.respond(bs, pairs))
