"""Confidential decision-stump selection over a fixed binning grid.

Every normalized dimension is split by s equispaced thresholds strictly
inside (-4, 4); each threshold yields two conjugate stumps ("x < v -> class
1" and its complement), 2sk candidates in total. For each of the sk base
comparisons the parties run one batched GC round that outputs the
prediction-ERROR bit per record (1 = wrong); the conjugate stump's vector is
the bitwise complement, computed locally. CSP
then iteratively picks argmin_r dot(I_r, delta) for tau rounds, learning only
indices; Cloud resolves indices to stump parameters at the end.

Labels travel as y in {0, 1}, encrypted separately from the features; Cloud
re-masks them once with per-record bits m_i, so the circuit recovers
y = (y + m mod 2) XOR m with two free XOR gates.
"""

import math
import random
import threading
from dataclasses import dataclass

import numpy as np

from .. import paillier, shares
from ..boosting import EPSILON_FLOOR, BoostedModel, Stump, update_weights
from ..circuits import build_stump_error_batch, int_to_bits
from ..encoding import Dataset, FixedPointParams, encode, encode_array
from ..errors import BinCountInvalid
from ..garbling import (
    GarbledCircuit,
    decode_output,
    evaluate,
    garble,
    tables_from_bytes,
)
from ..ot import GROUPS, OTReceiver, OTSender, dealer_choose
from . import transport, wire
from .config import ProtocolConfig
from .transcript import (
    BASE_APPLY,
    DONE,
    GC_TABLES,
    OT,
    OUTPUT_LABELS,
    RESULT_EVAL_MASK,
    SETUP,
    Transcript,
)


def threshold_grid(s: int) -> np.ndarray:
    """s split values strictly inside the normalized domain (-4, 4)."""
    if s < 2:
        raise BinCountInvalid(f"need at least 2 bins, got {s}")
    return -4.0 + 8.0 * (np.arange(s) + 1.0) / (s + 1.0)


def stump_catalog(k: int, s: int):
    """Candidate list in selection-index order: (feature, threshold index,
    polarity); polarity +1 is "x < v -> class 1"."""
    grid = threshold_grid(s)
    catalog = []
    for j in range(k):
        for r in range(s):
            catalog.append((j, float(grid[r]), 1))
            catalog.append((j, float(grid[r]), -1))
    return catalog


@dataclass
class StumpSelectionResult:
    selected_indices: list
    alphas: list
    model: BoostedModel
    error_vectors: np.ndarray  # (2sk, n) uint8 error bits, CSP's view
    transcript: Transcript


def _fp_for(dim: int, precision_bits: int) -> FixedPointParams:
    # features and thresholds live in (-4, 4): one comparison, no products
    ring_bits = 2 * precision_bits + math.ceil(math.log2(max(dim, 2))) + 1
    return FixedPointParams(precision_bits=precision_bits, ring_bits=ring_bits)


def _csp_select(error_vectors: np.ndarray, delta: np.ndarray, tau: int):
    """Iterative argmin over the candidate error vectors; lowest index wins
    ties. Returns (indices, alphas, final delta)."""
    indices, alphas = [], []
    for _ in range(tau):
        errs = error_vectors @ delta
        best = int(np.argmin(errs))
        e = float(errs[best])
        if e >= 0.5:
            break  # conjugate pairs guarantee min <= 0.5; equality is degenerate
        e_eff = max(e, EPSILON_FLOOR)
        a = 0.5 * math.log((1.0 - e_eff) / e_eff)
        correct = (1 - error_vectors[best]).astype(np.uint8)
        delta = update_weights(delta, correct, a)
        indices.append(best)
        alphas.append(a)
    return indices, alphas, delta


def exhaustive_select_oracle(dataset: Dataset, s: int, tau: int,
                             precision_bits: int = 7):
    """Plaintext argmin over the same grid with the same ring comparisons."""
    X = np.asarray(dataset.X, dtype=np.float64)
    y01 = (np.asarray(dataset.y) == 1).astype(np.uint8)
    n, k = X.shape
    fp = _fp_for(k, precision_bits)
    catalog = stump_catalog(k, s)
    xq = encode_array(X, fp)
    half = np.uint64(fp.q // 2)
    mask = np.uint64(fp.q - 1)
    errors = np.zeros((len(catalog), n), dtype=np.uint8)
    for idx, (j, v, pol) in enumerate(catalog):
        vq = np.uint64(encode(v, fp))
        less = (((xq[:, j] - vq) & mask) >= half).astype(np.uint8)  # msb set
        pred = less if pol == 1 else (1 - less)
        errors[idx] = pred ^ y01
    delta = np.full(n, 1.0 / n)
    return _csp_select(errors, delta, tau), errors, fp, catalog


def _cloud_loop(ch, cfg, fp, xq, ey, catalog_base, pk, rng_mask, rng_enc, rng_ot):
    n = xq.shape[0]
    L = fp.ring_bits
    # one-time label masking: E(y + m), m_i kept for the circuit input
    m_bits = [rng_mask.getrandbits(1) for _ in range(n)]
    masked_labels = []
    for c, m in zip(ey, m_bits):
        masked_labels.append(paillier.he_add(pk, c, paillier.encrypt(pk, m, rng_enc)))
    ch.send(SETUP, wire.pack_u32(n) + wire.pack_u32(L)
            + paillier.ciphertexts_to_bytes(masked_labels))
    circuit = build_stump_error_batch(L, n)
    for index, (j, vq) in enumerate(catalog_base):
        ch.send(BASE_APPLY, wire.pack_u32(index))
        lam = shares.sample_masks(n, L, rng_mask, cfg.sigma)
        neg_v = paillier.encrypt_raw(pk, (fp.q - vq) % fp.q)
        out = []
        for i in range(n):
            c = paillier.he_add(pk, xq.rows[i][j], neg_v)
            out.append(paillier.he_add(pk, c, paillier.encrypt(pk, lam[i], rng_enc)))
        ch.send(RESULT_EVAL_MASK, paillier.ciphertexts_to_bytes(out))
        # GC: evaluator holds the masks (lambda bits) and the label masks m
        phase, payload = ch.recv()
        assert phase == GC_TABLES
        tables_blob, off = wire.unpack_blob(payload)
        garbler_labels, off = wire.unpack_labels(payload, off)
        checks, off = wire.unpack_label_pairs(payload, off)
        gc = GarbledCircuit(circuit=circuit, scheme=cfg.gc_scheme,
                            and_tables=tables_from_bytes(circuit, cfg.gc_scheme,
                                                         tables_blob),
                            output_check=checks)
        bits = []
        for v in lam:
            bits.extend(int_to_bits(v, L))
        bits.extend(m_bits)
        ev_wires = list(circuit.inputs_b) + list(circuit.extra_inputs_b)
        gb_wires = list(circuit.inputs_a) + list(circuit.extra_inputs_a)
        labels = _ot_receive(ch, cfg, bits, rng_ot)
        out_labels = evaluate(gc, dict(zip(ev_wires, labels)),
                              dict(zip(gb_wires, garbler_labels)))
        ch.send(OUTPUT_LABELS, wire.pack_labels(out_labels))
    ch.send(DONE, b"")


def _ot_receive(ch, cfg, bits, rng):
    phase, payload = ch.recv()
    assert phase == OT
    if cfg.ot_mode == "dealer":
        pairs, _ = wire.unpack_label_pairs(payload)
        return dealer_choose(pairs, bits, cfg.secure_profile)
    (a_elem,), _ = wire.unpack_bigints(payload)
    receiver = OTReceiver(GROUPS[cfg.ot_group], rng, a_elem,
                          full_check=cfg.secure_profile)
    ch.send(OT, wire.pack_bigints(receiver.choose(bits)))
    phase, payload = ch.recv()
    assert phase == OT
    pairs, _ = wire.unpack_label_pairs(payload)
    return receiver.finish(pairs)


def _csp_loop(ch, cfg, kp, n_catalog, out):
    phase, payload = ch.recv()
    assert phase == SETUP
    n, off = wire.unpack_u32(payload)
    L, off = wire.unpack_u32(payload, off)
    masked = paillier.ciphertexts_from_bytes(payload[off:], kp.public.fingerprint)
    label_share = [paillier.decrypt(kp, c) & 1 for c in masked]  # y xor m
    circuit = build_stump_error_batch(L, n)
    garble_rng = random.Random(cfg.seeds.csp ^ 0x67617262)
    ot_rng = random.Random(cfg.seeds.csp ^ 0x6F745F73)
    errors = np.zeros((n_catalog, n), dtype=np.uint8)
    counters = ch._transcript.party("csp")
    while True:
        msg = ch.recv()
        if msg[0] == DONE:
            break
        index, _ = wire.unpack_u32(msg[1])
        phase, payload = ch.recv()
        assert phase == RESULT_EVAL_MASK
        enc_diffs = paillier.ciphertexts_from_bytes(payload, kp.public.fingerprint)
        dec = [paillier.decrypt(kp, c) for c in enc_diffs]
        counters.decryptions += n
        gc = garble(circuit, garble_rng, cfg.gc_scheme)
        counters.and_gates += circuit.and_count
        bits = []
        for v in dec:
            bits.extend(int_to_bits(v, L))
        bits.extend(label_share)
        gb_wires = list(circuit.inputs_a) + list(circuit.extra_inputs_a)
        ev_wires = list(circuit.inputs_b) + list(circuit.extra_inputs_b)
        gb_labels = [gc.input_labels(w, b) for w, b in zip(gb_wires, bits)]
        ch.send(GC_TABLES, wire.pack_blob(gc.tables_bytes())
                + wire.pack_labels(gb_labels)
                + wire.pack_label_pairs(gc.output_check))
        pairs = [(gc.input_labels(w, 0), gc.input_labels(w, 1)) for w in ev_wires]
        _ot_send(ch, cfg, pairs, ot_rng, counters)
        phase, payload = ch.recv()
        assert phase == OUTPUT_LABELS
        out_labels, _ = wire.unpack_labels(payload)
        err = np.asarray(decode_output(out_labels, gc.output_decode), dtype=np.uint8)
        errors[2 * index] = err            # "x < v -> class 1"
        errors[2 * index + 1] = 1 - err    # conjugate: flipped vector
    out["errors"] = errors


def _ot_send(ch, cfg, pairs, rng, counters):
    counters.ot_transfers += len(pairs)
    if cfg.ot_mode == "dealer":
        ch.send(OT, wire.pack_label_pairs(pairs))
        return
    sender = OTSender(GROUPS[cfg.ot_group], rng, full_check=cfg.secure_profile)
    ch.send(OT, wire.pack_bigints([sender.setup_message()]))
    phase, payload = ch.recv()
    assert phase == OT
    bs, _ = wire.unpack_bigints(payload)
    ch.send(OT, wire.pack_label_pairs(sender.respond(bs, pairs)))


def confidential_ds_select(cfg: ProtocolConfig, dataset: Dataset, s: int,
                           tau: int | None = None) -> StumpSelectionResult:
    """Run the two-party stump-selection protocol end to end."""
    if s < 2:
        raise BinCountInvalid(f"need at least 2 bins, got {s}")
    tau = tau if tau is not None else cfg.tau
    X = np.asarray(dataset.X, dtype=np.float64)
    y01 = (np.asarray(dataset.y) == 1).astype(np.uint8)
    n, k = X.shape
    fp = _fp_for(k, cfg.precision_bits)
    catalog = stump_catalog(k, s)
    grid = threshold_grid(s)
    catalog_base = [(j, encode(float(v), fp)) for j in range(k) for v in grid]

    kp = paillier.keygen(cfg.key_bits, random.Random(cfg.seeds.csp ^ 0x6B657967))
    user_rng = random.Random(cfg.seeds.data ^ 0x75736572)
    xq = paillier.encrypt_matrix(kp.public, encode_array(X, fp), user_rng)
    ey = [paillier.encrypt(kp.public, int(b), user_rng) for b in y01]

    ch_cloud, ch_csp, transcript = transport.memory_pair()
    out = {}
    errors_holder = []

    def csp_main():
        try:
            _csp_loop(ch_csp, cfg, kp, len(catalog), out)
        except BaseException as exc:
            errors_holder.append(exc)
            ch_csp.close()

    worker = threading.Thread(target=csp_main, daemon=True)
    worker.start()
    try:
        _cloud_loop(ch_cloud, cfg, fp, xq, ey, catalog_base, kp.public,
                    random.Random(cfg.seeds.cloud ^ 0x6D61736B),
                    random.Random(cfg.seeds.cloud ^ 0x656E6372),
                    random.Random(cfg.seeds.cloud ^ 0x6F745F72))
    except BaseException:
        worker.join(timeout=600)
        if errors_holder:
            raise errors_holder[0]
        raise
    worker.join(timeout=600)
    if errors_holder:
        raise errors_holder[0]
    transcript.validate_phase_order()

    error_vectors = out["errors"]
    delta = np.full(n, 1.0 / n)
    indices, alphas, _ = _csp_select(error_vectors, delta, tau)
    stumps = [Stump(feature=catalog[i][0], threshold=catalog[i][1],
                    polarity=catalog[i][2]) for i in indices]
    model = BoostedModel(kind="ds", classifiers=stumps, alphas=alphas)
    return StumpSelectionResult(selected_indices=indices, alphas=alphas,
                                model=model, error_vectors=error_vectors,
                                transcript=transcript)
