import random

import pytest

from blindboost import ot
from blindboost.errors import (
    GroupElementInvalid,
    ModeNotPermittedInSecureProfile,
    OTFailure,
)


def _pairs(rng, count):
    return [(rng.getrandbits(128).to_bytes(16, "big"),
             rng.getrandbits(128).to_bytes(16, "big")) for _ in range(count)]


def test_groups_are_safe_primes():
    # p prime and (p-1)/2 prime; g = 4 lies in the order-q subgroup
    from blindboost.paillier import _is_probable_prime
    rng = random.Random(0)
    for g in ot.GROUPS.values():
        assert _is_probable_prime(g.p, rng, rounds=12)
        assert _is_probable_prime(g.order, rng, rounds=8)
        assert pow(g.g, g.order, g.p) == 1


def test_dealer_choice():
    rng = random.Random(1)
    pairs = _pairs(rng, 8)
    bits = [0, 1, 1, 0, 1, 0, 0, 1]
    got = ot.dealer_choose(pairs, bits)
    assert got == [p[b] for p, b in zip(pairs, bits)]


def test_dealer_refused_in_secure_profile():
    with pytest.raises(ModeNotPermittedInSecureProfile):
        ot.dealer_choose([(b"0" * 16, b"1" * 16)], [0], secure_profile=True)


def test_base_ot_delivers_chosen_labels():
    rng = random.Random(2)
    pairs = _pairs(rng, 64)
    bits = [rng.getrandbits(1) for _ in range(64)]
    got = ot.ot_choose(pairs, bits, mode="base", group_name="modp-768",
                       sender_rng=random.Random(3), receiver_rng=random.Random(4))
    assert got == [p[b] for p, b in zip(pairs, bits)]


def test_base_ot_choice_zero():
    pairs = [(b"A" * 16, b"B" * 16)]
    got = ot.ot_choose(pairs, [0], sender_rng=random.Random(5),
                       receiver_rng=random.Random(6))
    assert got == [b"A" * 16]


def test_replayed_transcript_wrong_choice_gives_garbage():
    # with a fixed transcript the receiver can decrypt only its chosen row;
    # the other row yields neither label
    rng = random.Random(7)
    group = ot.GROUPS["modp-768"]
    pairs = _pairs(rng, 4)
    bits = [0, 1, 0, 1]
    sender = ot.OTSender(group, random.Random(8))
    receiver = ot.OTReceiver(group, random.Random(9), sender.setup_message())
    bs = receiver.choose(bits)
    responses = sender.respond(bs, pairs)
    labels = receiver.finish(responses)
    assert labels == [p[b] for p, b in zip(pairs, bits)]
    # decrypt the other row with the same key material
    for i, ((e0, e1), c) in enumerate(zip(responses, bits)):
        k = ot._kdf(ot.powmod(receiver.A, receiver._secrets[i], group.p), i)
        wrong = ot._xor(e0 if c else e1, k)
        assert wrong != pairs[i][0] and wrong != pairs[i][1]


def test_group_element_validation():
    group = ot.GROUPS["modp-768"]
    sender = ot.OTSender(group, random.Random(10))
    with pytest.raises(GroupElementInvalid):
        sender.respond([1], [(b"0" * 16, b"1" * 16)])
    with pytest.raises(GroupElementInvalid):
        sender.respond([group.p - 1], [(b"0" * 16, b"1" * 16)])
    with pytest.raises(GroupElementInvalid):
        ot.OTReceiver(group, random.Random(11), 0)


def test_subgroup_check_in_secure_profile():
    group = ot.GROUPS["modp-768"]
    sender = ot.OTSender(group, random.Random(12), full_check=True)
    # -4 is a non-residue (p = 3 mod 4), hence outside the order-q subgroup
    with pytest.raises(GroupElementInvalid):
        sender.respond([group.p - 4], [(b"0" * 16, b"1" * 16)])
    # a genuine subgroup element passes the full check
    sender.respond([ot.powmod(group.g, 12345, group.p)], [(b"0" * 16, b"1" * 16)])


def test_count_mismatch():
    group = ot.GROUPS["modp-768"]
    sender = ot.OTSender(group, random.Random(13))
    with pytest.raises(OTFailure):
        sender.respond([4, 4], [(b"0" * 16, b"1" * 16)])
