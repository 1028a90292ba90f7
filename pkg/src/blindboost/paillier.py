"""Paillier additive homomorphic encryption.

Plaintexts are integers in [0, N). Ring values (mod q = 2^L) are lifted into
Z_N unchanged; every homomorphic result is reduced mod q right after
decryption by the caller. The generator is fixed to g = N + 1 and scalar
multiplication is ciphertext exponentiation c^s mod N^2.
"""

import hashlib
import math
import random
from dataclasses import dataclass

from .errors import (
    DimensionMismatch,
    KeyMismatch,
    PlaintextOutOfRange,
    PrimeGenFailure,
)

try:
    from gmpy2 import invert as _g_invert, powmod as _g_powmod

    def powmod(base, exp, mod):
        return int(_g_powmod(base, exp, mod))

    def invmod(a, mod):
        return int(_g_invert(a, mod))

except ImportError:  # pragma: no cover - depends on environment
    def powmod(base, exp, mod):
        return pow(base, exp, mod)

    def invmod(a, mod):
        return pow(a, -1, mod)


_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67]


def _is_probable_prime(n: int, rng: random.Random, rounds: int = 40) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = powmod(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _random_prime(bits: int, rng: random.Random, max_tries: int = 100_000) -> int:
    # Top two bits forced so the product of two such primes has exactly 2*bits bits.
    top = (1 << (bits - 1)) | (1 << (bits - 2))
    for _ in range(max_tries):
        cand = rng.getrandbits(bits) | top | 1
        if _is_probable_prime(cand, rng):
            return cand
    raise PrimeGenFailure(f"no {bits}-bit prime found in {max_tries} tries")


@dataclass(frozen=True)
class PublicKey:
    n: int
    g: int
    key_bits: int

    @property
    def n_sq(self) -> int:
        return self.n * self.n

    @property
    def fingerprint(self) -> bytes:
        return hashlib.blake2s(self.n.to_bytes((self.n.bit_length() + 7) // 8, "big"),
                               digest_size=8).digest()


@dataclass(frozen=True)
class PrivateKey:
    lam: int
    mu: int
    p: int
    q: int


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    secret: PrivateKey


@dataclass(frozen=True)
class Ciphertext:
    value: int
    key_id: bytes


def keygen(key_bits: int, rng: random.Random) -> KeyPair:
    """Deterministic key pair for a seeded rng; 512 bits is the test profile."""
    if key_bits not in (512, 1024, 2048):
        raise ValueError("key_bits must be one of 512, 1024, 2048")
    half = key_bits // 2
    for _ in range(64):
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p == q:
            continue
        n = p * q
        if n.bit_length() != key_bits:
            continue
        if math.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        g = n + 1
        lam = (p - 1) * (q - 1) // math.gcd(p - 1, q - 1)  # lcm
        # mu = (L(g^lam mod n^2))^-1 mod n; with g = n+1 this is lam^-1 mod n.
        x = powmod(g, lam, n * n)
        mu = invmod((x - 1) // n, n)
        public = PublicKey(n=n, g=g, key_bits=key_bits)
        return KeyPair(public=public, secret=PrivateKey(lam=lam, mu=mu, p=p, q=q))
    raise PrimeGenFailure("could not assemble a valid modulus")


def encrypt(pk: PublicKey, m: int, rng: random.Random) -> Ciphertext:
    """Probabilistic encryption of m in [0, N)."""
    m = int(m)
    if not 0 <= m < pk.n:
        raise PlaintextOutOfRange(f"plaintext must be in [0, N), got {m}")
    while True:
        r = rng.randrange(1, pk.n)
        if math.gcd(r, pk.n) == 1:
            break
    c = ((1 + m * pk.n) % pk.n_sq) * powmod(r, pk.n, pk.n_sq) % pk.n_sq
    return Ciphertext(value=c, key_id=pk.fingerprint)


def decrypt(kp: KeyPair, c: Ciphertext, use_crt: bool = True) -> int:
    if c.key_id != kp.public.fingerprint:
        raise KeyMismatch("ciphertext was produced under a different key")
    if use_crt:
        return _decrypt_crt(kp, c.value)
    return _decrypt_plain(kp, c.value)


def _decrypt_plain(kp: KeyPair, c: int) -> int:
    n = kp.public.n
    x = powmod(c, kp.secret.lam, n * n)
    return ((x - 1) // n) * kp.secret.mu % n


def _decrypt_crt(kp: KeyPair, c: int) -> int:
    # Exponentiations mod p^2 and q^2 recombined; bit-identical to the
    # non-CRT result (asserted by the test suite).
    p, q = kp.secret.p, kp.secret.q
    n = kp.public.n
    p2, q2 = p * p, q * q
    xp = powmod(c % p2, kp.secret.lam, p2)
    xq = powmod(c % q2, kp.secret.lam, q2)
    # CRT over moduli p^2, q^2 to recover c^lam mod n^2
    q2_inv = invmod(q2 % p2, p2)
    x = (xq + q2 * (((xp - xq) * q2_inv) % p2)) % (n * n)
    return ((x - 1) // n) * kp.secret.mu % n


def he_add(pk: PublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    if c1.key_id != c2.key_id or c1.key_id != pk.fingerprint:
        raise KeyMismatch("operands are under different keys")
    return Ciphertext((c1.value * c2.value) % pk.n_sq, c1.key_id)


def he_scalar_mul(pk: PublicKey, c: Ciphertext, s: int) -> Ciphertext:
    if c.key_id != pk.fingerprint:
        raise KeyMismatch("ciphertext is under a different key")
    s = int(s)
    if not 0 <= s < pk.n:
        raise PlaintextOutOfRange(f"scalar must be in [0, N), got {s}")
    return Ciphertext(powmod(c.value, s, pk.n_sq), c.key_id)


def encrypt_raw(pk: PublicKey, m: int) -> Ciphertext:
    """Deterministic encryption (r = 1); only safe as an addend to a
    probabilistic ciphertext."""
    m = int(m)
    if not 0 <= m < pk.n:
        raise PlaintextOutOfRange(f"plaintext must be in [0, N), got {m}")
    return Ciphertext((1 + m * pk.n) % pk.n_sq, pk.fingerprint)


@dataclass
class EncryptedMatrix:
    """Row-major ciphertexts of ring values lifted into Z_N."""

    rows: list
    key_id: bytes

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)


def encrypt_matrix(pk: PublicKey, zm, rng: random.Random) -> EncryptedMatrix:
    rows = [[encrypt(pk, int(v), rng) for v in row] for row in zm]
    return EncryptedMatrix(rows=rows, key_id=pk.fingerprint)


def he_matvec(pk: PublicKey, ez: EncryptedMatrix, w) -> list:
    """Component i encrypts sum_j z_ij * w_j over Z_N (ring values, level 2).

    w entries are plaintext ring representatives in [0, q).
    """
    if ez.key_id != pk.fingerprint:
        raise KeyMismatch("matrix is under a different key")
    n_rows, n_cols = ez.shape
    w = [int(x) for x in w]
    if len(w) != n_cols:
        raise DimensionMismatch(f"matrix has {n_cols} columns, vector has {len(w)}")
    out = []
    for row in ez.rows:
        acc = encrypt_raw(pk, 0)
        for c, s in zip(row, w):
            if s == 0:
                continue
            acc = he_add(pk, acc, he_scalar_mul(pk, c, s))
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# serialization: big-endian byte arrays with 4-byte length prefixes


def _pack_int(x: int) -> bytes:
    raw = x.to_bytes((x.bit_length() + 7) // 8 or 1, "big")
    return len(raw).to_bytes(4, "big") + raw


def _unpack_int(buf: bytes, off: int = 0):
    ln = int.from_bytes(buf[off:off + 4], "big")
    val = int.from_bytes(buf[off + 4:off + 4 + ln], "big")
    return val, off + 4 + ln


def public_key_to_bytes(pk: PublicKey) -> bytes:
    return _pack_int(pk.key_bits) + _pack_int(pk.n) + _pack_int(pk.g)


def public_key_from_bytes(buf: bytes) -> PublicKey:
    key_bits, off = _unpack_int(buf, 0)
    n, off = _unpack_int(buf, off)
    g, off = _unpack_int(buf, off)
    return PublicKey(n=n, g=g, key_bits=key_bits)


def ciphertext_to_bytes(c: Ciphertext) -> bytes:
    return _pack_int(c.value)


def ciphertext_from_bytes(buf: bytes, key_id: bytes, off: int = 0):
    val, off = _unpack_int(buf, off)
    return Ciphertext(value=val, key_id=key_id), off


def ciphertexts_to_bytes(cs) -> bytes:
    return len(cs).to_bytes(4, "big") + b"".join(ciphertext_to_bytes(c) for c in cs)


def ciphertexts_from_bytes(buf: bytes, key_id: bytes) -> list:
    count = int.from_bytes(buf[:4], "big")
    out = []
    off = 4
    for _ in range(count):
        c, off = ciphertext_from_bytes(buf, key_id, off)
        out.append(c)
    return out
