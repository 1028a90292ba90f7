"""Garbling engine: free-XOR, point-and-permute, half-gates AND tables.

Labels are 16 bytes; the permute bit is the least significant bit of the
first byte. For every wire label1 = label0 XOR delta, with delta's permute
bit forced to 1. The gate cipher is keyed BLAKE2s with the gate index as
tweak. A classic 4-row point-and-permute mode exists for cross-checking; the
two schemes must decode identically.

Corruption detection: the garbler ships, per output wire, the hashes of both
output labels ordered by permute bit. The evaluator checks its computed
label against the entry selected by that label's own permute bit, which
reveals nothing it does not already know.
"""

import hashlib
import random
from dataclasses import dataclass

from .circuits import AND, NOT, XOR, Circuit
from .errors import GarbledRowAuthFailure, GCEvaluationFailure, UnknownLabel

LABEL_BYTES = 16
HALF_GATES = "half"
CLASSIC = "classic"

_GATE_KEY = b"blindboost-gc-v1"
_OUT_DOMAIN = (1 << 48)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _lsb(label: bytes) -> int:
    return label[0] & 1


def _hash1(label: bytes, tweak: int) -> bytes:
    return hashlib.blake2s(label + tweak.to_bytes(8, "little"),
                           key=_GATE_KEY, digest_size=LABEL_BYTES).digest()


def _hash2(la: bytes, lb: bytes, tweak: int) -> bytes:
    return hashlib.blake2s(la + lb + tweak.to_bytes(8, "little"),
                           key=_GATE_KEY, digest_size=LABEL_BYTES).digest()


def _rand_label(rng: random.Random) -> bytes:
    return rng.getrandbits(8 * LABEL_BYTES).to_bytes(LABEL_BYTES, "little")


ZERO = bytes(LABEL_BYTES)


@dataclass
class GarbledCircuit:
    circuit: Circuit
    scheme: str
    and_tables: list          # per AND gate, tuple of 16-byte rows
    output_check: list        # per output wire, (hash for lsb 0, hash for lsb 1)
    # garbler-side secrets; stripped from the evaluator's view
    delta: bytes | None = None
    wire_label0: dict | None = None
    output_decode: list | None = None  # per output wire, (label0, label1)

    def input_labels(self, wire: int, bit: int) -> bytes:
        if self.wire_label0 is None:
            raise GCEvaluationFailure("input labels are garbler-side only")
        l0 = self.wire_label0[wire]
        return l0 if bit == 0 else _xor(l0, self.delta)

    def tables_bytes(self) -> bytes:
        return b"".join(row for rows in self.and_tables for row in rows)


def garble(circuit: Circuit, rng: random.Random, scheme: str = HALF_GATES) -> GarbledCircuit:
    if scheme not in (HALF_GATES, CLASSIC):
        raise ValueError(f"unknown scheme {scheme!r}")
    delta = bytearray(_rand_label(rng))
    delta[0] |= 1
    delta = bytes(delta)

    label0 = {}
    for w in circuit.all_inputs():
        label0[w] = _rand_label(rng)

    tables = []
    and_index = 0
    for g in circuit.gates:
        if g.kind == XOR:
            label0[g.out] = _xor(label0[g.a], label0[g.b])
        elif g.kind == NOT:
            label0[g.out] = _xor(label0[g.a], delta)
        else:
            a0, b0 = label0[g.a], label0[g.b]
            a1, b1 = _xor(a0, delta), _xor(b0, delta)
            if scheme == HALF_GATES:
                pa, pb = _lsb(a0), _lsb(b0)
                j0, j1 = 2 * and_index, 2 * and_index + 1
                ha0, ha1 = _hash1(a0, j0), _hash1(a1, j0)
                tg = _xor(ha0, ha1)
                if pb:
                    tg = _xor(tg, delta)
                wg = _xor(ha0, tg) if pa else ha0
                hb0, hb1 = _hash1(b0, j1), _hash1(b1, j1)
                te = _xor(_xor(hb0, hb1), a0)
                we = _xor(hb0, _xor(te, a0)) if pb else hb0
                label0[g.out] = _xor(wg, we)
                tables.append((tg, te))
            else:
                c0 = _rand_label(rng)
                label0[g.out] = c0
                rows = [b""] * 4
                for va in (0, 1):
                    for vb in (0, 1):
                        la = a0 if va == 0 else a1
                        lb = b0 if vb == 0 else b1
                        lc = c0 if (va & vb) == 0 else _xor(c0, delta)
                        rows[(_lsb(la) << 1) | _lsb(lb)] = _xor(
                            _hash2(la, lb, and_index), lc)
                tables.append(tuple(rows))
            and_index += 1

    check = []
    decode = []
    for idx, o in enumerate(circuit.outputs):
        l0 = label0[o]
        l1 = _xor(l0, delta)
        pair = [b"", b""]
        pair[_lsb(l0)] = _hash1(l0, _OUT_DOMAIN + idx)
        pair[_lsb(l1)] = _hash1(l1, _OUT_DOMAIN + idx)
        check.append(tuple(pair))
        decode.append((l0, l1))

    return GarbledCircuit(circuit=circuit, scheme=scheme, and_tables=tables,
                          output_check=check, delta=delta, wire_label0=label0,
                          output_decode=decode)


def evaluator_view(gc: GarbledCircuit) -> GarbledCircuit:
    """The shippable half: tables and output checks, no secrets."""
    return GarbledCircuit(circuit=gc.circuit, scheme=gc.scheme,
                          and_tables=gc.and_tables, output_check=gc.output_check)


def tables_from_bytes(circuit: Circuit, scheme: str, buf: bytes) -> list:
    rows_per_gate = 2 if scheme == HALF_GATES else 4
    n_and = circuit.and_count
    expect = n_and * rows_per_gate * LABEL_BYTES
    if len(buf) != expect:
        raise GCEvaluationFailure(f"table blob has {len(buf)} bytes, expected {expect}")
    tables = []
    off = 0
    for _ in range(n_and):
        rows = []
        for _ in range(rows_per_gate):
            rows.append(buf[off:off + LABEL_BYTES])
            off += LABEL_BYTES
        tables.append(tuple(rows))
    return tables


def evaluate(gc: GarbledCircuit, evaluator_labels, garbler_labels) -> list:
    """Run the garbled circuit on one label per input wire.

    Returns one output label per output wire; the evaluator cannot decode
    them without the garbler's decode map.
    """
    labels = {}
    labels.update(garbler_labels)
    labels.update(evaluator_labels)
    missing = [w for w in gc.circuit.all_inputs() if w not in labels]
    if missing:
        raise GCEvaluationFailure(f"missing labels for input wires {missing[:8]}")

    and_index = 0
    for g in gc.circuit.gates:
        if g.kind == XOR:
            labels[g.out] = _xor(labels[g.a], labels[g.b])
        elif g.kind == NOT:
            labels[g.out] = labels[g.a]
        else:
            la, lb = labels[g.a], labels[g.b]
            if gc.scheme == HALF_GATES:
                tg, te = gc.and_tables[and_index]
                j0, j1 = 2 * and_index, 2 * and_index + 1
                wg = _hash1(la, j0)
                if _lsb(la):
                    wg = _xor(wg, tg)
                we = _hash1(lb, j1)
                if _lsb(lb):
                    we = _xor(we, _xor(te, la))
                labels[g.out] = _xor(wg, we)
            else:
                row = gc.and_tables[and_index][(_lsb(la) << 1) | _lsb(lb)]
                labels[g.out] = _xor(row, _hash2(la, lb, and_index))
            and_index += 1

    out = []
    for idx, o in enumerate(gc.circuit.outputs):
        lab = labels[o]
        if _hash1(lab, _OUT_DOMAIN + idx) != gc.output_check[idx][_lsb(lab)]:
            raise GarbledRowAuthFailure(f"output wire {o}: no clean decryption")
        out.append(lab)
    return out


def decode_output(labels, decode_map) -> list:
    """Garbler-side mapping from output labels to bits."""
    if decode_map is None:
        raise UnknownLabel("decode map withheld")
    bits = []
    for lab, (l0, l1) in zip(labels, decode_map):
        if lab == l0:
            bits.append(0)
        elif lab == l1:
            bits.append(1)
        else:
            raise UnknownLabel("label matches neither decode entry")
    return bits
