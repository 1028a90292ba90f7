import itertools
import random

import pytest

from blindboost import garbling
from blindboost.circuits import AND, Circuit, Gate, build_sub_msb, int_to_bits
from blindboost.errors import GarbledRowAuthFailure, UnknownLabel
from blindboost.garbling import (
    CLASSIC,
    HALF_GATES,
    decode_output,
    evaluate,
    evaluator_view,
    garble,
    tables_from_bytes,
)


def _labels_for(gc, wires, bits):
    return {w: gc.input_labels(w, bit) for w, bit in zip(wires, bits)}


def _run(gc, a_bits, b_bits, extra_a=(), extra_b=()):
    ga = _labels_for(gc, gc.circuit.inputs_a, a_bits)
    ga.update(_labels_for(gc, gc.circuit.extra_inputs_a, extra_a))
    ev = _labels_for(gc, gc.circuit.inputs_b, b_bits)
    ev.update(_labels_for(gc, gc.circuit.extra_inputs_b, extra_b))
    out = evaluate(evaluator_view(gc), ev, ga)
    return decode_output(out, gc.output_decode)


def single_and_circuit():
    return Circuit(n_wires=3, inputs_a=(0,), inputs_b=(1,),
                   gates=(Gate(AND, 0, 1, 2),), outputs=(2,))


def single_xor_circuit():
    return Circuit(n_wires=3, inputs_a=(0,), inputs_b=(1,),
                   gates=(Gate("XOR", 0, 1, 2),), outputs=(2,))


@pytest.mark.parametrize("scheme", [HALF_GATES, CLASSIC])
def test_and_gate_truth_table(scheme):
    gc = garble(single_and_circuit(), random.Random(0), scheme)
    for a, b in itertools.product((0, 1), repeat=2):
        assert _run(gc, [a], [b]) == [a & b]


def test_xor_circuit_emits_no_tables():
    gc = garble(single_xor_circuit(), random.Random(1))
    assert gc.and_tables == []
    for a, b in itertools.product((0, 1), repeat=2):
        assert _run(gc, [a], [b]) == [a ^ b]


def test_identity_passthrough():
    c = Circuit(n_wires=1, inputs_a=(0,), inputs_b=(), gates=(), outputs=(0,))
    gc = garble(c, random.Random(2))
    lab = gc.input_labels(0, 1)
    out = evaluate(evaluator_view(gc), {}, {0: lab})
    assert out == [lab]
    assert decode_output(out, gc.output_decode) == [1]


def test_free_xor_invariant_structural():
    gc = garble(build_sub_msb(6), random.Random(3))
    for w, l0 in gc.wire_label0.items():
        l1 = bytes(x ^ y for x, y in zip(l0, gc.delta))
        # permute bits of the two labels always differ
        assert (l0[0] ^ l1[0]) & 1 == 1


@pytest.mark.parametrize("scheme", [HALF_GATES, CLASSIC])
def test_sub_msb_garbled_exhaustive_small(scheme):
    for width in (2, 3, 4):
        c = build_sub_msb(width)
        gc = garble(c, random.Random(width), scheme)
        for a in range(1 << width):
            for b in range(1 << width):
                got = _run(gc, int_to_bits(a, width), int_to_bits(b, width))
                expect = 1 if ((a - b) % (1 << width)) >= (1 << (width - 1)) else 0
                assert got == [expect]


def test_schemes_decode_identically():
    width = 8
    c = build_sub_msb(width)
    rng = random.Random(17)
    cases = [(rng.getrandbits(width), rng.getrandbits(width)) for _ in range(64)]
    gc_h = garble(c, random.Random(5), HALF_GATES)
    gc_c = garble(c, random.Random(6), CLASSIC)
    for a, b in cases:
        ra = _run(gc_h, int_to_bits(a, width), int_to_bits(b, width))
        rb = _run(gc_c, int_to_bits(a, width), int_to_bits(b, width))
        assert ra == rb


def test_regarble_new_seed_same_outputs_different_tables():
    c = build_sub_msb(5)
    gc1 = garble(c, random.Random(7))
    gc2 = garble(c, random.Random(8))
    assert gc1.tables_bytes() != gc2.tables_bytes()
    for a, b in ((0, 0), (3, 9), (31, 30), (16, 16)):
        assert _run(gc1, int_to_bits(a, 5), int_to_bits(b, 5)) == \
            _run(gc2, int_to_bits(a, 5), int_to_bits(b, 5))


def test_corrupted_table_raises_auth_failure():
    gc = garble(single_and_circuit(), random.Random(9))
    rows = [bytearray(r) for r in gc.and_tables[0]]
    rows[0][3] ^= 0xFF
    rows[1][3] ^= 0xFF
    gc.and_tables[0] = tuple(bytes(r) for r in rows)
    failures = 0
    for a, b in itertools.product((0, 1), repeat=2):
        try:
            _run(gc, [a], [b])
        except GarbledRowAuthFailure:
            failures += 1
    assert failures >= 1


def test_decode_unknown_label():
    gc = garble(single_and_circuit(), random.Random(10))
    with pytest.raises(UnknownLabel):
        decode_output([b"\x00" * 16], gc.output_decode)
    with pytest.raises(UnknownLabel):
        decode_output([b"\x00" * 16], None)  # decode map withheld


def test_tables_round_trip_bytes():
    c = build_sub_msb(6)
    for scheme in (HALF_GATES, CLASSIC):
        gc = garble(c, random.Random(11), scheme)
        blob = gc.tables_bytes()
        back = tables_from_bytes(c, scheme, blob)
        assert back == [tuple(r) for r in gc.and_tables]


@pytest.mark.parametrize("scheme", [HALF_GATES, CLASSIC])
def test_mixed_gate_circuit_exhaustive(scheme):
    # NOT, XOR and AND mixed; all 8 assignments, both schemes
    from blindboost.circuits import Gate
    c = Circuit(n_wires=7, inputs_a=(0, 1), inputs_b=(2,),
                gates=(Gate("NOT", 0, -1, 3), Gate("XOR", 3, 1, 4),
                       Gate(AND, 4, 2, 5), Gate("NOT", 5, -1, 6)),
                outputs=(5, 6))
    gc = garble(c, random.Random(20), scheme)
    for a0, a1, b0 in itertools.product((0, 1), repeat=3):
        got = _run(gc, [a0, a1], [b0])
        v5 = ((a0 ^ 1) ^ a1) & b0
        assert got == [v5, v5 ^ 1]


def test_sub_msb_garbled_wide_random():
    rng = random.Random(12)
    for width in (16, 25, 32):
        c = build_sub_msb(width)
        gc = garble(c, random.Random(width * 3))
        for _ in range(60):
            a = rng.getrandbits(width)
            b = rng.getrandbits(width)
            got = _run(gc, int_to_bits(a, width), int_to_bits(b, width))
            expect = 1 if ((a - b) % (1 << width)) >= (1 << (width - 1)) else 0
            assert got == [expect]
