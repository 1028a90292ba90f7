"""Additive secret sharing over the power-of-two ring and the random-share
matrix-vector multiplication steps.

The shared construction: Cloud holds Z0 and the plaintext classifier w, CSP
holds Z1 = Z - Z0. CSP computes E(Z1 w + lambda) under Cloud's key; after
decryption Cloud holds u0 = Zw + lambda (mod q') and CSP keeps u1 = lambda.
(u0 - u1) mod 2^L is the ring value of Zw at scale level 2.
"""

import random
from dataclasses import dataclass

import numpy as np

from . import paillier
from .errors import DimensionMismatch, ShapeMismatch

MASK_SECURITY_BITS = 40  # sigma: lambda is uniform over [0, 2^(L+sigma))


@dataclass
class SharePair:
    """part0 for Cloud, part1 for CSP; part0 + part1 mod q recovers the secret."""

    part0: np.ndarray
    part1: np.ndarray
    ring_bits: int


def split(zm: np.ndarray, ring_bits: int, rng: np.random.Generator) -> SharePair:
    """Uniform part0 over [0, q); part1 = (zm - part0) mod q."""
    zm = np.asarray(zm, dtype=np.uint64)
    q = 1 << ring_bits
    mask = np.uint64(q - 1)
    part0 = rng.integers(0, q, size=zm.shape, dtype=np.uint64)
    part1 = (zm - part0) & mask
    return SharePair(part0=part0, part1=part1, ring_bits=ring_bits)


def reconstruct(s: SharePair) -> np.ndarray:
    if s.part0.shape != s.part1.shape:
        raise ShapeMismatch(f"{s.part0.shape} vs {s.part1.shape}")
    return (s.part0 + s.part1) & np.uint64((1 << s.ring_bits) - 1)


def sample_masks(count: int, ring_bits: int, rng: random.Random,
                 sigma: int = MASK_SECURITY_BITS) -> list:
    """Fresh uniform masks over [0, 2^(L+sigma)); never reused across calls."""
    bits = ring_bits + sigma
    return [rng.getrandbits(bits) for _ in range(count)]


def masked_matvec_csp_step(z1: np.ndarray, ew: list, lam: list,
                           pk: paillier.PublicKey, rng: random.Random) -> list:
    """CSP side: E(Z1 w + lambda) via pseudo-homomorphic products.

    z1 entries are ring representatives; ew encrypts w under Cloud's key.
    """
    z1 = np.asarray(z1, dtype=np.uint64)
    if z1.ndim != 2 or z1.shape[1] != len(ew):
        raise DimensionMismatch(f"share has {z1.shape} columns, vector has {len(ew)}")
    out = []
    for i in range(z1.shape[0]):
        acc = paillier.encrypt(pk, int(lam[i]) % pk.n, rng)
        for j, c in enumerate(ew):
            s = int(z1[i, j])
            if s == 0:
                continue
            acc = paillier.he_add(pk, acc, paillier.he_scalar_mul(pk, c, s))
        out.append(acc)
    return out


def masked_matvec_cloud_step(z0: np.ndarray, w_ring, decrypted: list,
                             ring_bits: int, sigma: int = MASK_SECURITY_BITS) -> list:
    """Cloud side: u0 = Z0 w + (Z1 w + lambda) = Zw + lambda, mod q' = 2^(L+sigma+1)."""
    z0 = np.asarray(z0, dtype=np.uint64)
    w = [int(x) for x in w_ring]
    if z0.shape[1] != len(w):
        raise DimensionMismatch(f"share has {z0.shape[1]} columns, vector has {len(w)}")
    if len(decrypted) != z0.shape[0]:
        raise DimensionMismatch("decrypted vector length mismatch")
    qp = 1 << (ring_bits + sigma + 1)
    out = []
    for i in range(z0.shape[0]):
        dot = sum(int(z0[i, j]) * w[j] for j in range(len(w)))
        out.append((dot + int(decrypted[i])) % qp)
    return out
