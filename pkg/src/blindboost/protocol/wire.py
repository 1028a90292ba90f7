"""Byte packing for protocol payloads.

Every message travels as [phase: 1 byte][length: 4 bytes big-endian][payload]
on the stream transport; the in-process transport carries (phase, payload)
tuples and counts the same framed length.
"""

import numpy as np

LABEL_BYTES = 16


def pack_u32(x: int) -> bytes:
    return int(x).to_bytes(4, "big")


def unpack_u32(buf: bytes, off: int = 0):
    return int.from_bytes(buf[off:off + 4], "big"), off + 4


def pack_bigints(xs) -> bytes:
    out = [pack_u32(len(xs))]
    for x in xs:
        raw = int(x).to_bytes((int(x).bit_length() + 7) // 8 or 1, "big")
        out.append(pack_u32(len(raw)))
        out.append(raw)
    return b"".join(out)


def unpack_bigints(buf: bytes, off: int = 0):
    count, off = unpack_u32(buf, off)
    xs = []
    for _ in range(count):
        ln, off = unpack_u32(buf, off)
        xs.append(int.from_bytes(buf[off:off + ln], "big"))
        off += ln
    return xs, off


def pack_labels(labels) -> bytes:
    return pack_u32(len(labels)) + b"".join(labels)


def unpack_labels(buf: bytes, off: int = 0):
    count, off = unpack_u32(buf, off)
    labels = []
    for _ in range(count):
        labels.append(buf[off:off + LABEL_BYTES])
        off += LABEL_BYTES
    return labels, off


def pack_label_pairs(pairs) -> bytes:
    return pack_u32(len(pairs)) + b"".join(a + b for a, b in pairs)


def unpack_label_pairs(buf: bytes, off: int = 0):
    count, off = unpack_u32(buf, off)
    pairs = []
    for _ in range(count):
        pairs.append((buf[off:off + LABEL_BYTES],
                      buf[off + LABEL_BYTES:off + 2 * LABEL_BYTES]))
        off += 2 * LABEL_BYTES
    return pairs, off


def pack_bits(bits) -> bytes:
    arr = np.asarray(bits, dtype=np.uint8)
    return pack_u32(arr.size) + np.packbits(arr).tobytes()


def unpack_bits(buf: bytes, off: int = 0):
    count, off = unpack_u32(buf, off)
    nbytes = (count + 7) // 8
    arr = np.unpackbits(np.frombuffer(buf[off:off + nbytes], dtype=np.uint8))[:count]
    return arr, off + nbytes


def pack_blob(blob: bytes) -> bytes:
    return pack_u32(len(blob)) + blob


def unpack_blob(buf: bytes, off: int = 0):
    ln, off = unpack_u32(buf, off)
    return buf[off:off + ln], off + ln
