import random

import numpy as np
import pytest

from blindboost import paillier
from blindboost.encoding import FixedPointParams, decode, encode, encode_array
from blindboost.errors import (
    DimensionMismatch,
    KeyMismatch,
    PlaintextOutOfRange,
)


def test_keygen_exact_bits(keypair_512):
    assert keypair_512.public.n.bit_length() == 512


def test_keygen_deterministic():
    a = paillier.keygen(512, random.Random(1))
    b = paillier.keygen(512, random.Random(1))
    assert a.public.n == b.public.n


def test_distinct_seeds_distinct_moduli():
    a = paillier.keygen(512, random.Random(1))
    b = paillier.keygen(512, random.Random(2))
    assert a.public.n != b.public.n


def test_round_trip_random_messages(keypair_512):
    rng = random.Random(5)
    pk = keypair_512.public
    for _ in range(100):
        m = rng.randrange(pk.n)
        assert paillier.decrypt(keypair_512, paillier.encrypt(pk, m, rng)) == m


def test_round_trip_boundaries(keypair_512):
    rng = random.Random(6)
    pk = keypair_512.public
    for m in (0, 1, pk.n - 1):
        assert paillier.decrypt(keypair_512, paillier.encrypt(pk, m, rng)) == m


def test_encrypt_is_probabilistic(keypair_512):
    rng = random.Random(7)
    pk = keypair_512.public
    c1 = paillier.encrypt(pk, 5, rng)
    c2 = paillier.encrypt(pk, 5, rng)
    assert c1.value != c2.value
    assert paillier.decrypt(keypair_512, c1) == paillier.decrypt(keypair_512, c2) == 5


def test_plaintext_out_of_range(keypair_512):
    rng = random.Random(8)
    with pytest.raises(PlaintextOutOfRange):
        paillier.encrypt(keypair_512.public, keypair_512.public.n, rng)
    with pytest.raises(PlaintextOutOfRange):
        paillier.encrypt(keypair_512.public, -1, rng)


def test_crt_matches_plain_decrypt(keypair_512):
    rng = random.Random(9)
    pk = keypair_512.public
    for _ in range(25):
        c = paillier.encrypt(pk, rng.randrange(pk.n), rng)
        assert (paillier.decrypt(keypair_512, c, use_crt=True)
                == paillier.decrypt(keypair_512, c, use_crt=False))


def test_he_add(keypair_512):
    rng = random.Random(10)
    pk = keypair_512.public
    c = paillier.he_add(pk, paillier.encrypt(pk, 2, rng), paillier.encrypt(pk, 3, rng))
    assert paillier.decrypt(keypair_512, c) == 5


def test_he_scalar_mul(keypair_512):
    rng = random.Random(11)
    pk = keypair_512.public
    c = paillier.he_scalar_mul(pk, paillier.encrypt(pk, 4, rng), 3)
    assert paillier.decrypt(keypair_512, c) == 12


def test_key_mismatch(keypair_512, keypair_512_alt):
    rng = random.Random(12)
    c1 = paillier.encrypt(keypair_512.public, 1, rng)
    c2 = paillier.encrypt(keypair_512_alt.public, 1, rng)
    with pytest.raises(KeyMismatch):
        paillier.he_add(keypair_512.public, c1, c2)
    with pytest.raises(KeyMismatch):
        paillier.decrypt(keypair_512_alt, c1)


def test_homomorphism_property_suite(keypair_512):
    rng = random.Random(13)
    pk = keypair_512.public
    for _ in range(1000):
        m1 = rng.randrange(pk.n // 2)
        m2 = rng.randrange(pk.n // 2)
        c = paillier.he_add(pk, paillier.encrypt(pk, m1, rng),
                            paillier.encrypt(pk, m2, rng))
        assert paillier.decrypt(keypair_512, c) == m1 + m2


def test_scalar_law_property_suite(keypair_512):
    rng = random.Random(14)
    pk = keypair_512.public
    for _ in range(1000):
        m = rng.randrange(pk.n)
        s = rng.randrange(1, 1 << 64)
        c = paillier.he_scalar_mul(pk, paillier.encrypt(pk, m, rng), s)
        assert paillier.decrypt(keypair_512, c) == (m * s) % pk.n


def test_negative_scalar_semantics(keypair_512):
    # (q-1) * E(encode(1.0)) reduced mod q is encode(-1.0)
    rng = random.Random(15)
    pk = keypair_512.public
    p = FixedPointParams(precision_bits=7, ring_bits=24)
    c = paillier.encrypt(pk, encode(1.0, p), rng)
    c = paillier.he_scalar_mul(pk, c, p.q - 1)
    got = paillier.decrypt(keypair_512, c) % p.q
    assert got == encode(-1.0, p)
    assert decode(got, p) == -1.0


def test_mod_q_embedding_products(keypair_512):
    rng = random.Random(16)
    nprng = np.random.default_rng(16)
    pk = keypair_512.public
    p = FixedPointParams(precision_bits=7, ring_bits=20)
    for _ in range(200):
        a, b = nprng.uniform(-2, 2, size=2)
        ca = paillier.encrypt(pk, encode(float(a), p), rng)
        prod = paillier.he_scalar_mul(pk, ca, encode(float(b), p))
        got = decode(paillier.decrypt(keypair_512, prod) % p.q, p, scale_level=2)
        bound = 2.0**-7 * (abs(a) + abs(b) + 2.0**-7)
        assert abs(got - a * b) <= bound + 1e-12


def test_he_matvec_identity_row(keypair_512):
    rng = random.Random(17)
    pk = keypair_512.public
    p = FixedPointParams.for_dimension(2, precision_bits=7)
    zq = [[encode(1.0, p), encode(0.0, p)]]
    ez = paillier.encrypt_matrix(pk, zq, rng)
    out = paillier.he_matvec(pk, ez, [encode(1.0, p), 12345])
    got = paillier.decrypt(keypair_512, out[0]) % p.q
    assert decode(got, p, scale_level=2) == 1.0


def test_he_matvec_matches_plaintext_oracle(keypair_512):
    rng = random.Random(18)
    nprng = np.random.default_rng(18)
    pk = keypair_512.public
    p = FixedPointParams.for_dimension(3, precision_bits=7)
    Z = nprng.uniform(-1, 1, size=(5, 3))  # |dot| <= 3 < level-2 range 4
    w = nprng.uniform(-1, 1, size=3)
    ez = paillier.encrypt_matrix(pk, encode_array(Z, p), rng)
    out = paillier.he_matvec(pk, ez, [int(v) for v in encode_array(w, p)])
    plain = Z @ w
    for i in range(5):
        got = decode(paillier.decrypt(keypair_512, out[i]) % p.q, p, scale_level=2)
        assert abs(got - plain[i]) <= 3 * 2.0**-7


def test_he_matvec_zero_vector(keypair_512):
    rng = random.Random(19)
    pk = keypair_512.public
    p = FixedPointParams.for_dimension(2, precision_bits=7)
    ez = paillier.encrypt_matrix(pk, [[5, 9], [1, 2]], rng)
    out = paillier.he_matvec(pk, ez, [0, 0])
    assert all(paillier.decrypt(keypair_512, c) == 0 for c in out)


def test_he_matvec_dimension_mismatch(keypair_512):
    rng = random.Random(20)
    ez = paillier.encrypt_matrix(keypair_512.public, [[1, 2]], rng)
    with pytest.raises(DimensionMismatch):
        paillier.he_matvec(keypair_512.public, ez, [1])


def test_ciphertext_byte_distribution(keypair_512):
    # smoke test: over 1000 encryptions of 0 and 1, no byte position is fixed
    rng = random.Random(21)
    pk = keypair_512.public
    width = (pk.n_sq.bit_length() + 7) // 8
    for m in (0, 1):
        seen = [set() for _ in range(width)]
        for _ in range(1000):
            raw = paillier.encrypt(pk, m, rng).value.to_bytes(width, "big")
            for i, byte in enumerate(raw):
                seen[i].add(byte)
        fixed = sum(1 for s in seen if len(s) == 1)
        assert fixed == 0


def test_serialization_round_trip(keypair_512):
    rng = random.Random(22)
    pk = keypair_512.public
    assert paillier.public_key_from_bytes(paillier.public_key_to_bytes(pk)) == pk
    cs = [paillier.encrypt(pk, i, rng) for i in range(5)]
    blob = paillier.ciphertexts_to_bytes(cs)
    back = paillier.ciphertexts_from_bytes(blob, pk.fingerprint)
    assert [c.value for c in back] == [c.value for c in cs]
