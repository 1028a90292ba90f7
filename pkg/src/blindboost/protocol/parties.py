"""Cloud and CSP state machines.

Knowledge separation is structural: CloudParty has no field for sample
weights, model weights or any decrypted matrix-vector result; CSPParty has no
field for a plaintext classifier or (in HE+GC) for the training data. The
only cross-party channel is the transport handed to run()/step methods.

GC roles are fixed for both constructions: CSP garbles, Cloud evaluates and
returns output labels, CSP decodes. The sign-check circuit computes
(masked - mask) mod 2^L; in HE+GC the garbler holds the masked value, in
SecSh+GC the evaluator does.
"""

import random

import numpy as np

from .. import paillier, shares
from ..boosting import evaluate_candidate, gen_rlc
from ..circuits import build_sub_msb_batch, int_to_bits
from ..encoding import FixedPointParams, encode_array
from ..errors import IterationOutOfRange, OTFailure
from ..garbling import (
    GarbledCircuit,
    decode_output,
    evaluate,
    garble,
    tables_from_bytes,
)
from ..ot import GROUPS, OTReceiver, OTSender, dealer_choose
from . import wire
from .config import HE_GC, SECSH_GC, ProtocolConfig
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

_DECISION_REJECT = 0
_DECISION_ACCEPT = 1

_circuit_cache = {}


def _batch_circuit(width: int, count: int):
    key = (width, count)
    if key not in _circuit_cache:
        _circuit_cache[key] = build_sub_msb_batch(width, count)
    return _circuit_cache[key]


def _record_bits(values, width):
    """LSB-first bit list per value, concatenated instance-major."""
    bits = []
    for v in values:
        bits.extend(int_to_bits(v, width))
    return bits


class CloudParty:
    """Holds the protected data and the classifier pool; learns only the
    acceptance bitmap."""

    def __init__(self, cfg: ProtocolConfig, fp: FixedPointParams, n: int, dim: int,
                 enc_data=None, csp_public=None, own_keypair=None, z0=None):
        self.cfg = cfg
        self.fp = fp
        self.n = n
        self.dim = dim
        # HE+GC holdings
        self.enc_data = enc_data          # EncryptedMatrix under CSP's key
        self.csp_public = csp_public
        # SecSh+GC holdings
        self.keypair = own_keypair        # Cloud's own AHE keys
        self.z0 = z0                      # uint64 share matrix
        seeds = cfg.seeds
        self.pool_rng = np.random.default_rng(seeds.cloud)
        self.mask_rng = random.Random(seeds.cloud ^ 0x6D61736B)
        self.ot_rng = random.Random(seeds.cloud ^ 0x6F745F72)
        self.enc_rng = random.Random(seeds.cloud ^ 0x656E6372)
        self.tried_w = []                 # plaintext RLCs, in trial order
        self.acceptance = []              # per-trial accept bit (CSP's verdict)
        self.p_used = 0
        self._precomputed = None          # offline BaseApply products
        self._eu = None                   # current E(u_t) (HE+GC)
        self._u0 = None                   # current masked share (SecSh+GC)
        self._transcript = None

    # -- helpers ------------------------------------------------------------

    @property
    def counters(self):
        return self._transcript.party("cloud")

    def _next_rlc(self):
        w = gen_rlc(self.dim - 1, self.pool_rng)
        self.tried_w.append(w)
        return w

    def _he_matvec_counted(self, wq, party: str):
        out = paillier.he_matvec(self.csp_public, self.enc_data, wq)
        c = self._transcript.party(party)
        c.he_scalar_muls += self.n * self.dim
        c.he_adds += self.n * self.dim
        return out

    def precompute_pool(self, transcript: Transcript):
        """Offline BaseApply: all E(Z w_t) computed before the first message."""
        self._transcript = transcript
        self._precomputed = []
        for _ in range(self.cfg.p_max):
            w = self._next_rlc()
            wq = [int(v) for v in encode_array(w, self.fp)]
            self._precomputed.append(self._he_matvec_counted(wq, "cloud_offline"))

    # -- protocol steps ------------------------------------------------------

    def send_setup(self, ch):
        header = wire.pack_u32(self.n) + wire.pack_u32(self.dim) \
            + wire.pack_u32(self.fp.ring_bits)
        ch.send(SETUP, header)

    def base_apply_step(self, ch, t: int):
        if t > self.cfg.p_max:
            raise IterationOutOfRange(f"iteration {t} exceeds p_max {self.cfg.p_max}")
        self.p_used = t
        if self.cfg.construction == HE_GC:
            if self._precomputed is not None:
                self._eu = self._precomputed[t - 1]
            else:
                w = self._next_rlc()
                wq = [int(v) for v in encode_array(w, self.fp)]
                self._eu = self._he_matvec_counted(wq, "cloud")
            ch.send(BASE_APPLY, wire.pack_u32(t))
        else:
            w = self._next_rlc()
            wq = [int(v) for v in encode_array(w, self.fp)]
            pk = self.keypair.public
            ew = [paillier.encrypt(pk, v, self.enc_rng) for v in wq]
            self.counters.encryptions += self.dim
            ch.send(BASE_APPLY, wire.pack_u32(t)
                    + paillier.ciphertexts_to_bytes(ew))
            phase, payload = ch.recv()
            assert phase == BASE_APPLY
            masked = paillier.ciphertexts_from_bytes(payload, pk.fingerprint)
            dec = [paillier.decrypt(self.keypair, c) for c in masked]
            self.counters.decryptions += self.n
            qp = 1 << (self.fp.ring_bits + self.cfg.sigma + 1)
            self._u0 = shares.masked_matvec_cloud_step(
                self.z0, wq, [d % qp for d in dec], self.fp.ring_bits,
                sigma=self.cfg.sigma)

    def result_eval_step(self, ch, t: int):
        L = self.fp.ring_bits
        if self.cfg.construction == HE_GC:
            lam = shares.sample_masks(self.n, L, self.mask_rng, self.cfg.sigma)
            pk = self.csp_public
            masked = []
            for c, m in zip(self._eu, lam):
                e_lam = paillier.encrypt(pk, m, self.enc_rng)
                masked.append(paillier.he_add(pk, c, e_lam))
            self.counters.encryptions += self.n
            self.counters.he_adds += self.n
            ch.send(RESULT_EVAL_MASK, paillier.ciphertexts_to_bytes(masked))
            evaluator_vals = lam
            evaluator_partition = "b"
        else:
            ch.send(RESULT_EVAL_MASK, wire.pack_u32(t))
            evaluator_vals = self._u0
            evaluator_partition = "a"
        self._gc_evaluate(ch, evaluator_vals, evaluator_partition)

    def _gc_evaluate(self, ch, evaluator_vals, evaluator_partition: str):
        L = self.fp.ring_bits
        circuit = _batch_circuit(L, self.n)
        phase, payload = ch.recv()
        assert phase == GC_TABLES
        tables_blob, off = wire.unpack_blob(payload)
        garbler_labels, off = wire.unpack_labels(payload, off)
        checks, off = wire.unpack_label_pairs(payload, off)
        gc = GarbledCircuit(circuit=circuit, scheme=self.cfg.gc_scheme,
                            and_tables=tables_from_bytes(circuit, self.cfg.gc_scheme,
                                                         tables_blob),
                            output_check=checks)
        ev_wires = circuit.inputs_a if evaluator_partition == "a" else circuit.inputs_b
        gb_wires = circuit.inputs_b if evaluator_partition == "a" else circuit.inputs_a
        bits = _record_bits(evaluator_vals, L)
        ev_labels = dict(zip(ev_wires, self._ot_receive(ch, bits)))
        gb_labels = dict(zip(gb_wires, garbler_labels))
        out_labels = evaluate(gc, ev_labels, gb_labels)
        self.counters.and_gates += circuit.and_count
        ch.send(OUTPUT_LABELS, wire.pack_labels(out_labels))

    def _ot_receive(self, ch, bits):
        self.counters.ot_transfers += len(bits)
        phase, payload = ch.recv()
        assert phase == OT
        if self.cfg.ot_mode == "dealer":
            pairs, _ = wire.unpack_label_pairs(payload)
            return dealer_choose(pairs, bits, self.cfg.secure_profile)
        (a_elem,), _ = wire.unpack_bigints(payload)
        group = GROUPS[self.cfg.ot_group]
        receiver = OTReceiver(group, self.ot_rng, a_elem,
                              full_check=self.cfg.secure_profile)
        ch.send(OT, wire.pack_bigints(receiver.choose(bits)))
        phase, payload = ch.recv()
        assert phase == OT
        pairs, _ = wire.unpack_label_pairs(payload)
        return receiver.finish(pairs)

    def recv_decision(self, ch):
        phase, payload = ch.recv()
        assert phase == OUTPUT_LABELS
        accept, stop = payload[0], payload[1]
        self.acceptance.append(bool(accept))
        return bool(accept), bool(stop)

    def run(self, ch):
        self._transcript = ch._transcript
        if self.cfg.offline_base_apply and self.cfg.construction == HE_GC:
            self.precompute_pool(ch._transcript)
        self.send_setup(ch)
        accepted = 0
        t = 0
        while accepted < self.cfg.tau and t < self.cfg.p_max:
            t += 1
            self.base_apply_step(ch, t)
            self.result_eval_step(ch, t)
            accept, stop = self.recv_decision(ch)
            if accept:
                accepted += 1
            if stop:
                break
        ch.send(DONE, wire.pack_u32(t))

    def attach(self, transcript: Transcript):
        self._transcript = transcript


class CSPParty:
    """Key holder (HE+GC) or share holder (SecSh+GC); learns the indicator
    vectors and the model weights, never a plaintext classifier."""

    def __init__(self, cfg: ProtocolConfig, fp: FixedPointParams, n: int, dim: int,
                 keypair=None, cloud_public=None, z1=None):
        self.cfg = cfg
        self.fp = fp
        self.n = n
        self.dim = dim
        self.keypair = keypair            # HE+GC: CSP owns the AHE keys
        self.cloud_public = cloud_public  # SecSh+GC: Cloud's public key
        self.z1 = z1                      # SecSh+GC share
        seeds = cfg.seeds
        self.garble_rng = random.Random(seeds.csp ^ 0x67617262)
        self.mask_rng = random.Random(seeds.csp ^ 0x6D61736B)
        self.ot_rng = random.Random(seeds.csp ^ 0x6F745F73)
        self.enc_rng = random.Random(seeds.csp ^ 0x656E6372)
        self.delta = np.full(n, 1.0 / n)
        self.accepted = []                # (trial index, alpha, flipped)
        self.indicator_history = []       # I_t per tried classifier
        self.decisions = []
        self._u1 = None
        self._transcript = None

    @property
    def counters(self):
        return self._transcript.party("csp")

    # -- protocol steps ------------------------------------------------------

    def base_apply_step(self, ch, first_msg):
        phase, payload = first_msg
        assert phase == BASE_APPLY
        t, off = wire.unpack_u32(payload)
        if self.cfg.construction == SECSH_GC:
            pk = self.cloud_public
            ew = paillier.ciphertexts_from_bytes(payload[off:], pk.fingerprint)
            lam = shares.sample_masks(self.n, self.fp.ring_bits, self.mask_rng,
                                      self.cfg.sigma)
            out = shares.masked_matvec_csp_step(self.z1, ew, lam, pk, self.enc_rng)
            self.counters.encryptions += self.n
            self.counters.he_scalar_muls += self.n * self.dim
            self.counters.he_adds += self.n * self.dim
            ch.send(BASE_APPLY, paillier.ciphertexts_to_bytes(out))
            qp = 1 << (self.fp.ring_bits + self.cfg.sigma + 1)
            self._u1 = [m % qp for m in lam]
        return t

    def result_eval_step(self, ch):
        phase, payload = ch.recv()
        assert phase == RESULT_EVAL_MASK
        if self.cfg.construction == HE_GC:
            masked = paillier.ciphertexts_from_bytes(
                payload, self.keypair.public.fingerprint)
            dec = [paillier.decrypt(self.keypair, c) for c in masked]
            self.counters.decryptions += self.n
            garbler_vals = dec
            garbler_partition = "a"
        else:
            garbler_vals = self._u1
            garbler_partition = "b"
        msb = self._gc_garble(ch, garbler_vals, garbler_partition)
        indicators = (1 - np.asarray(msb, dtype=np.uint8)).astype(np.uint8)
        self.indicator_history.append(indicators)
        return indicators

    def _gc_garble(self, ch, garbler_vals, garbler_partition: str):
        L = self.fp.ring_bits
        circuit = _batch_circuit(L, self.n)
        gc = garble(circuit, self.garble_rng, self.cfg.gc_scheme)
        self.counters.and_gates += circuit.and_count
        gb_wires = circuit.inputs_a if garbler_partition == "a" else circuit.inputs_b
        ev_wires = circuit.inputs_b if garbler_partition == "a" else circuit.inputs_a
        bits = _record_bits(garbler_vals, L)
        gb_labels = [gc.input_labels(w, bit) for w, bit in zip(gb_wires, bits)]
        ch.send(GC_TABLES, wire.pack_blob(gc.tables_bytes())
                + wire.pack_labels(gb_labels)
                + wire.pack_label_pairs(gc.output_check))
        self._ot_send(ch, [(gc.input_labels(w, 0), gc.input_labels(w, 1))
                           for w in ev_wires])
        phase, payload = ch.recv()
        assert phase == OUTPUT_LABELS
        out_labels, _ = wire.unpack_labels(payload)
        return decode_output(out_labels, gc.output_decode)

    def _ot_send(self, ch, pairs):
        self.counters.ot_transfers += len(pairs)
        if self.cfg.ot_mode == "dealer":
            ch.send(OT, wire.pack_label_pairs(pairs))
            return
        group = GROUPS[self.cfg.ot_group]
        sender = OTSender(group, self.ot_rng, full_check=self.cfg.secure_profile)
        ch.send(OT, wire.pack_bigints([sender.setup_message()]))
        phase, payload = ch.recv()
        if phase != OT:
            raise OTFailure(f"expected OT choice message, got {phase}")
        bs, _ = wire.unpack_bigints(payload)
        responses = sender.respond(bs, pairs)
        flat = [(e0, e1) for e0, e1 in responses]
        ch.send(OT, wire.pack_label_pairs(flat))

    def update(self, indicators):
        """The Update step: runs the shared plaintext logic on CSP's weights."""
        step = evaluate_candidate(self.delta, indicators)
        self.decisions.append(step.decision)
        trial = len(self.decisions)
        if step.decision != "reject":
            self.delta = step.delta
            self.accepted.append((trial, step.alpha,
                                  step.decision == "accept_flipped"))
        return step

    def run(self, ch):
        self._transcript = ch._transcript
        phase, _ = ch.recv()
        assert phase == SETUP
        while True:
            msg = ch.recv()
            if msg[0] == DONE:
                break
            self.base_apply_step(ch, msg)
            indicators = self.result_eval_step(ch)
            step = self.update(indicators)
            accept = step.decision != "reject"
            stop = len(self.accepted) >= self.cfg.tau
            ch.send(OUTPUT_LABELS, bytes([_DECISION_ACCEPT if accept
                                          else _DECISION_REJECT, int(stop)]))

    def attach(self, transcript: Transcript):
        self._transcript = transcript
