"""Protocol orchestration: setup, the learning run, and model reassembly."""

import json
import random
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .. import paillier, shares
from ..boosting import BoostedModel, LinearClassifier
from ..encoding import FixedPointParams, FoldedMatrix, encode_array
from ..errors import PartMismatch, PoolExhaustedWarning
from .config import HE_GC, ProtocolConfig
from .parties import CloudParty, CSPParty
from .transcript import Transcript
from . import transport


def setup(cfg: ProtocolConfig, folded: FoldedMatrix):
    """Distribute the training data and keys; returns (CloudParty, CSPParty).

    The user role (encrypting or splitting the submissions) is simulated
    here, seeded by cfg.seeds.data.
    """
    Z = np.asarray(folded.Z, dtype=np.float64)
    n, dim = Z.shape
    fp = FixedPointParams.for_dimension(dim, cfg.precision_bits)
    zq = encode_array(Z, fp)
    key_rng = random.Random(cfg.seeds.csp ^ 0x6B657967)
    user_rng = random.Random(cfg.seeds.data ^ 0x75736572)

    if cfg.construction == HE_GC:
        kp = paillier.keygen(cfg.key_bits, key_rng)
        enc_data = paillier.encrypt_matrix(kp.public, zq, user_rng)
        cloud = CloudParty(cfg, fp, n, dim, enc_data=enc_data,
                           csp_public=kp.public)
        csp = CSPParty(cfg, fp, n, dim, keypair=kp)
        cloud.user_encryptions = n * dim
    else:
        kp = paillier.keygen(cfg.key_bits, random.Random(cfg.seeds.cloud ^ 0x6B657967))
        pair = shares.split(zq, fp.ring_bits, np.random.default_rng(cfg.seeds.data))
        cloud = CloudParty(cfg, fp, n, dim, own_keypair=kp, z0=pair.part0)
        csp = CSPParty(cfg, fp, n, dim, cloud_public=kp.public, z1=pair.part1)
        cloud.user_encryptions = 0
    return cloud, csp


@dataclass
class DistributedModel:
    """The two model halves plus the acceptance bitmap over the tried pool."""

    construction: str
    cloud_part: list   # (trial index, classifier vector) for accepted trials
    csp_part: list     # (trial index, alpha, flipped)
    acceptance: list   # per-trial accept bit
    fp: FixedPointParams

    def to_json(self) -> str:
        return json.dumps({
            "construction": self.construction,
            "cloud_part": [[t, w.tolist()] for t, w in self.cloud_part],
            "csp_part": [[t, a, int(f)] for t, a, f in self.csp_part],
            "acceptance": [int(a) for a in self.acceptance],
            "fixed_point": {"precision_bits": self.fp.precision_bits,
                            "ring_bits": self.fp.ring_bits},
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistributedModel":
        d = json.loads(text)
        return cls(construction=d["construction"],
                   cloud_part=[(t, np.asarray(w)) for t, w in d["cloud_part"]],
                   csp_part=[(t, a, bool(f)) for t, a, f in d["csp_part"]],
                   acceptance=[bool(a) for a in d["acceptance"]],
                   fp=FixedPointParams(**d["fixed_point"]))


def collect_model(cfg: ProtocolConfig, cloud: CloudParty, csp: CSPParty) -> DistributedModel:
    cloud_part = [(t + 1, cloud.tried_w[t]) for t, acc in enumerate(cloud.acceptance)
                  if acc]
    return DistributedModel(construction=cfg.construction,
                            cloud_part=cloud_part,
                            csp_part=list(csp.accepted),
                            acceptance=list(cloud.acceptance),
                            fp=cloud.fp)


def reconstruct_model(dm: DistributedModel) -> BoostedModel:
    """Recombine the parts the data owner downloads from the two parties."""
    cloud_idx = [t for t, _ in dm.cloud_part]
    csp_idx = [t for t, _, _ in dm.csp_part]
    if cloud_idx != csp_idx:
        raise PartMismatch(f"cloud holds trials {cloud_idx}, csp holds {csp_idx}")
    classifiers = []
    alphas = []
    for (_, w), (_, a, flipped) in zip(dm.cloud_part, dm.csp_part):
        classifiers.append(LinearClassifier(w=-w if flipped else np.asarray(w)))
        alphas.append(a)
    return BoostedModel(kind="rlc", classifiers=classifiers, alphas=alphas,
                        fixed_point=dm.fp)


def run_learning(cfg: ProtocolConfig, folded: FoldedMatrix,
                 transport_kind: str = "memory", with_parties: bool = False):
    """Full two-party run; returns (DistributedModel, Transcript).

    The parties run concurrently in two threads and communicate only via the
    chosen transport. `with_parties` additionally returns the two party
    objects (test hook for inspecting per-iteration state).
    """
    cloud, csp = setup(cfg, folded)
    if transport_kind == "memory":
        ch_cloud, ch_csp, transcript = transport.memory_pair()
    elif transport_kind == "socket":
        ch_cloud, ch_csp, transcript = transport.socket_pair()
    else:
        raise ValueError(f"unknown transport {transport_kind!r}")
    if cfg.construction == HE_GC:
        transcript.party("user").encryptions += cloud.user_encryptions

    errors = []

    def csp_main():
        try:
            csp.run(ch_csp)
        except BaseException as exc:  # propagated after join
            errors.append(exc)
            ch_csp.close()  # unblock a peer waiting on recv

    worker = threading.Thread(target=csp_main, name="csp", daemon=True)
    worker.start()
    try:
        cloud.run(ch_cloud)
    except BaseException:
        worker.join(timeout=600)
        if errors:
            raise errors[0]  # the CSP-side failure is the root cause
        raise
    finally:
        worker.join(timeout=600)
    if errors:
        raise errors[0]
    ch_cloud.close()
    ch_csp.close()
    transcript.validate_phase_order()
    if len(csp.accepted) < cfg.tau:
        warnings.warn(f"only {len(csp.accepted)}/{cfg.tau} classifiers accepted "
                      f"in {cloud.p_used} tries", PoolExhaustedWarning, stacklevel=2)
    model = collect_model(cfg, cloud, csp)
    if with_parties:
        return model, transcript, cloud, csp
    return model, transcript


# ---------------------------------------------------------------------------
# granular steps on a state pair (spec-shaped surface, used by tests)


def base_apply(state_pair, t: int):
    """One BaseApply round over an in-process channel."""
    cloud, csp = state_pair
    ch_cloud, ch_csp, transcript = transport.memory_pair()
    cloud.attach(transcript)
    csp.attach(transcript)
    errors = []

    def csp_wrapped():
        try:
            csp.base_apply_step(ch_csp, ch_csp.recv())
        except BaseException as exc:
            errors.append(exc)
            ch_csp.close()

    worker = threading.Thread(target=csp_wrapped, daemon=True)
    worker.start()
    try:
        cloud.base_apply_step(ch_cloud, t)
    except BaseException:
        worker.join(timeout=600)
        if errors:
            raise errors[0]
        raise
    worker.join(timeout=600)
    if errors:
        raise errors[0]
    return transcript


def result_eval(state_pair, t: int):
    """One ResultEval round; returns the indicator vector held by CSP."""
    cloud, csp = state_pair
    ch_cloud, ch_csp, transcript = transport.memory_pair()
    cloud.attach(transcript)
    csp.attach(transcript)
    result = {}
    errors = []

    def csp_wrapped():
        try:
            result["I"] = csp.result_eval_step(ch_csp)
        except BaseException as exc:
            errors.append(exc)
            ch_csp.close()

    worker = threading.Thread(target=csp_wrapped, daemon=True)
    worker.start()
    try:
        cloud.result_eval_step(ch_cloud, t)
    except BaseException:
        worker.join(timeout=600)
        if errors:
            raise errors[0]
        raise
    worker.join(timeout=600)
    if errors:
        raise errors[0]
    return result["I"]
