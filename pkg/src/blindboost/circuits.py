"""Boolean circuit builder for the subtract-then-msb sign check.

Circuits carry two named input partitions: `inputs_a` (minuend bits) and
`inputs_b` (subtrahend bits), LSB first. Which protocol party feeds which
partition is decided by the protocol layer, not here. Gates are XOR, AND and
NOT; XOR and NOT are free under the garbling scheme, so the subtractor only
materializes its borrow chain - one AND per bit position below the msb.
"""

from dataclasses import dataclass

from .errors import WidthOutOfRange

XOR = "XOR"
AND = "AND"
NOT = "NOT"


@dataclass(frozen=True)
class Gate:
    kind: str
    a: int
    b: int  # -1 for NOT
    out: int


@dataclass
class Circuit:
    n_wires: int
    inputs_a: tuple
    inputs_b: tuple
    gates: tuple
    outputs: tuple
    extra_inputs_a: tuple = ()  # additional garbler/evaluator single bits
    extra_inputs_b: tuple = ()

    def __post_init__(self):
        assigned = set(self.all_inputs())
        for g in self.gates:
            if g.a not in assigned or (g.kind != NOT and g.b not in assigned):
                raise ValueError(f"gate {g} reads an unassigned wire")
            if g.out in assigned:
                raise ValueError(f"wire {g.out} assigned twice")
            assigned.add(g.out)
        for o in self.outputs:
            if o not in assigned:
                raise ValueError(f"output wire {o} never assigned")

    def all_inputs(self):
        return tuple(self.inputs_a) + tuple(self.inputs_b) \
            + tuple(self.extra_inputs_a) + tuple(self.extra_inputs_b)

    @property
    def and_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == AND)

    def evaluate_plain(self, a_bits, b_bits, extra_a=(), extra_b=()):
        """Reference evaluation on plaintext bits."""
        values = {}
        for w, bit in zip(self.inputs_a, a_bits):
            values[w] = bit & 1
        for w, bit in zip(self.inputs_b, b_bits):
            values[w] = bit & 1
        for w, bit in zip(self.extra_inputs_a, extra_a):
            values[w] = bit & 1
        for w, bit in zip(self.extra_inputs_b, extra_b):
            values[w] = bit & 1
        for g in self.gates:
            if g.kind == XOR:
                values[g.out] = values[g.a] ^ values[g.b]
            elif g.kind == AND:
                values[g.out] = values[g.a] & values[g.b]
            else:
                values[g.out] = values[g.a] ^ 1
        return [values[o] for o in self.outputs]


class _Builder:
    def __init__(self):
        self.next_wire = 0
        self.gates = []

    def wire(self):
        w = self.next_wire
        self.next_wire += 1
        return w

    def wires(self, count):
        return tuple(self.wire() for _ in range(count))

    def emit(self, kind, a, b=-1):
        out = self.wire()
        self.gates.append(Gate(kind, a, b, out))
        return out


def _sub_msb_gates(bld: _Builder, a, b):
    """msb((a - b) mod 2^L) with borrow = maj(~a_i, b_i, c_i) folded into one
    AND per position: borrow' = ((a ^ c ^ 1) & (b ^ c)) ^ c."""
    L = len(a)
    borrow = None
    for i in range(L - 1):
        if borrow is None:
            na = bld.emit(NOT, a[i])
            borrow = bld.emit(AND, na, b[i])
        else:
            t1 = bld.emit(XOR, a[i], borrow)
            t1n = bld.emit(NOT, t1)
            t2 = bld.emit(XOR, b[i], borrow)
            t3 = bld.emit(AND, t1n, t2)
            borrow = bld.emit(XOR, t3, borrow)
    msb = bld.emit(XOR, a[L - 1], b[L - 1])
    if borrow is not None:
        msb = bld.emit(XOR, msb, borrow)
    return msb


def build_sub_msb(width: int) -> Circuit:
    """Circuit computing msb((a - b) mod 2^width); width-1 AND gates."""
    if not 2 <= width <= 128:
        raise WidthOutOfRange(f"width must be in [2, 128], got {width}")
    bld = _Builder()
    a = bld.wires(width)
    b = bld.wires(width)
    out = _sub_msb_gates(bld, a, b)
    return Circuit(n_wires=bld.next_wire, inputs_a=a, inputs_b=b,
                   gates=tuple(bld.gates), outputs=(out,))


def build_sub_msb_batch(width: int, count: int) -> Circuit:
    """`count` independent sub-msb instances in one circuit; output i belongs
    to record i. Input partitions are instance-major, LSB first."""
    if not 2 <= width <= 128:
        raise WidthOutOfRange(f"width must be in [2, 128], got {width}")
    if count < 1:
        raise ValueError("count must be >= 1")
    bld = _Builder()
    a = bld.wires(width * count)
    b = bld.wires(width * count)
    outs = []
    for i in range(count):
        ai = a[i * width:(i + 1) * width]
        bi = b[i * width:(i + 1) * width]
        outs.append(_sub_msb_gates(bld, ai, bi))
    return Circuit(n_wires=bld.next_wire, inputs_a=a, inputs_b=b,
                   gates=tuple(bld.gates), outputs=tuple(outs))


def build_stump_error_batch(width: int, count: int) -> Circuit:
    """Per record: msb((a - b) mod 2^width) XOR ya XOR yb.

    `a` carries the masked feature-minus-threshold value, `b` the mask; `ya`
    (garbler) and `yb` (evaluator) are the two shares of the label bit, so
    the output is the prediction-error bit of the stump "x < v -> class 1".
    """
    if not 2 <= width <= 128:
        raise WidthOutOfRange(f"width must be in [2, 128], got {width}")
    bld = _Builder()
    a = bld.wires(width * count)
    b = bld.wires(width * count)
    ya = bld.wires(count)
    yb = bld.wires(count)
    outs = []
    for i in range(count):
        ai = a[i * width:(i + 1) * width]
        bi = b[i * width:(i + 1) * width]
        msb = _sub_msb_gates(bld, ai, bi)
        t = bld.emit(XOR, msb, ya[i])
        outs.append(bld.emit(XOR, t, yb[i]))
    return Circuit(n_wires=bld.next_wire, inputs_a=a, inputs_b=b,
                   gates=tuple(bld.gates), outputs=tuple(outs),
                   extra_inputs_a=ya, extra_inputs_b=yb)


def int_to_bits(value: int, width: int):
    """LSB-first bit list of value mod 2^width."""
    value = int(value) & ((1 << width) - 1)
    return [(value >> i) & 1 for i in range(width)]
