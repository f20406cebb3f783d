"""Cyclic redundancy checks over GF(2), bit-array based.

Polynomials are plain ints with the leading coefficient included, e.g.
0b1011 is x^3 + x + 1 and produces 3 check bits. Register init and xor-out
are fixed to zero.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_POLYS = {3: 0b1011, 4: 0b10011}


def default_crc_poly(c):
    try:
        return DEFAULT_POLYS[c]
    except KeyError:
        raise ValueError(
            f"no default polynomial for {c} check bits; pass one explicitly"
        ) from None


@dataclass(frozen=True)
class CrcSpec:
    """Generator polynomial plus its width; rejects degenerate generators."""

    poly: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"polynomial must have degree >= 1, got {self.poly:#b}")
        if bin(self.poly).count("1") < 2:
            raise ValueError("generator needs >= 2 nonzero terms to detect single-bit errors")

    @property
    def width(self):
        return int(self.poly).bit_length() - 1


def _poly_of(spec):
    return spec.poly if isinstance(spec, CrcSpec) else int(spec)


def crc_width(spec):
    c = _poly_of(spec).bit_length() - 1
    if c < 1:
        raise ValueError("polynomial must have degree >= 1")
    return c


def crc_compute(message, spec):
    """Remainder of message * x^c divided by the generator; c bits, MSB first."""
    poly = _poly_of(spec)
    c = crc_width(poly)
    message = np.asarray(message, dtype=np.uint8)
    if message.size == 0:
        raise ValueError("empty message")
    rem = 0
    for b in message:
        rem = (rem << 1) | int(b)
        if rem >> c:
            rem ^= poly
    for _ in range(c):
        rem <<= 1
        if rem >> c:
            rem ^= poly
    return np.array([(rem >> (c - 1 - i)) & 1 for i in range(c)], dtype=np.uint8)


def crc_append(message, spec):
    message = np.asarray(message, dtype=np.uint8)
    return np.concatenate([message, crc_compute(message, spec)])


def crc_check(codeword, spec):
    """True iff the whole sequence divides the generator, i.e. the trailing
    c bits are the checksum of the rest."""
    c = crc_width(spec)
    codeword = np.asarray(codeword, dtype=np.uint8)
    if codeword.shape[-1] <= c:
        raise ValueError("word no longer than the checksum")
    return bool(np.all(crc_compute(codeword[:-c], spec) == codeword[-c:]))


@lru_cache(maxsize=None)
def _gen_matrix_cached(poly, k):
    G = np.zeros((k, poly.bit_length() - 1), dtype=np.uint8)
    unit = np.zeros(k, dtype=np.uint8)
    for i in range(k):
        unit[:] = 0
        unit[i] = 1
        G[i] = crc_compute(unit, poly)
    G.setflags(write=False)
    return G


def crc_generator_matrix(k, spec):
    """(k, c) GF(2) matrix G with crc_compute(m) == m @ G mod 2.

    The checksum is linear in the message, so batches reduce to one matrix
    product; row i is the checksum of the i-th unit message. Cached per
    (polynomial, length).
    """
    if k < 1:
        raise ValueError("need k >= 1 message bits")
    return _gen_matrix_cached(_poly_of(spec), k)


def crc_check_rows(words, gen_matrix):
    """Row-wise checksum test for an array of words laid out [message | crc].

    uint8 matmul wraps mod 256, which preserves parity, so the & 1 after the
    product is exact.
    """
    words = np.asarray(words, dtype=np.uint8)
    k, c = gen_matrix.shape
    if words.shape[-1] != k + c:
        raise ValueError(f"words must have {k + c} bits, got {words.shape[-1]}")
    calc = (words[..., :k] @ gen_matrix) & 1
    return np.all(calc == words[..., k:], axis=-1)
