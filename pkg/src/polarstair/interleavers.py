"""Half-block interleavers coupling consecutive staircase frames.

All four kinds are bijections on an M x M block, represented as a flat
destination-index array: forward scatters, inverse gathers, so both
directions cost one fancy-indexing pass regardless of dtype.

Position conventions: rows are component codewords; the interleaved block's
row c becomes the coupled right half of next-step codeword c, its position
j landing on component input position M + j.
"""

from dataclasses import dataclass, field

import numpy as np

from .polar import PolarCodeSpec, post_decoding_pe

KINDS = ("std", "pol_trs", "pol_frz", "pol_rnd")
RTOC = "RtoC"
CTOR = "CtoR"


def _frz_position_perm(pe, frozen, M):
    # worst destinations get the frozen indices, the rest fill in gentle order
    order_desc = np.argsort(-pe, kind="stable")
    nf = len(frozen)
    worst = np.zeros(M, dtype=bool)
    worst[order_desc[:nf]] = True
    pi = np.empty(M, dtype=np.int64)
    pi[order_desc[:nf]] = np.asarray(sorted(frozen), dtype=np.int64)
    rest_slots = np.asarray(sorted(set(range(M)) - set(frozen)), dtype=np.int64)
    asc = np.argsort(pe, kind="stable")
    pi[asc[~worst[asc]]] = rest_slots
    return pi


@dataclass(frozen=True)
class InterleaverSpec:
    """One configured interleaver; `dest` maps flat source index t to the
    flat destination index of that bit."""

    kind: str
    M: int
    pe: np.ndarray | None = field(default=None, repr=False)
    frozen: frozenset | None = None
    seed: int = 0
    dest: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        M = self.M
        if M < 2:
            raise ValueError("need M >= 2")
        r = np.arange(M)[:, None]
        j = np.arange(M)[None, :]
        if self.kind == "std":
            dest = j * M + (M - 1 - r)
        else:
            rows = (r + j) % M
            if self.kind == "pol_trs":
                cols = np.broadcast_to(j, (M, M))
            elif self.kind == "pol_frz":
                if self.pe is None or self.frozen is None:
                    raise ValueError("pol_frz needs pe values and a frozen set")
                if len(self.pe) != M:
                    raise ValueError(f"need {M} pe values")
                if any(not 0 <= f < M for f in self.frozen):
                    raise ValueError("frozen indices out of range")
                pi = _frz_position_perm(np.asarray(self.pe, dtype=np.float64),
                                        self.frozen, M)
                cols = np.broadcast_to(pi[None, :], (M, M))
            else:
                rng = np.random.Generator(np.random.PCG64(self.seed))
                pi = rng.permutation(M).astype(np.int64)
                cols = np.broadcast_to(pi[None, :], (M, M))
            dest = rows * M + cols
        d = dest.reshape(-1).astype(np.int64)
        d.setflags(write=False)
        object.__setattr__(self, "dest", d)


def make_interleaver(kind, code: PolarCodeSpec, seed=0) -> InterleaverSpec:
    """Build an interleaver for a component code; pol_frz derives its
    destination error profile from the code's serial error accumulation on
    the coupled input positions M..N-1."""
    M = code.M
    pe = None
    frozen = None
    if kind == "pol_frz":
        pe = post_decoding_pe(code.first_error_prob)[M:]
        frozen = code.frozen
    return InterleaverSpec(kind=kind, M=M, pe=pe, frozen=frozen, seed=seed)


def interleave(X, spec: InterleaverSpec, direction=RTOC):
    """Apply the bijection (RtoC) or its exact inverse (CtoR)."""
    X = np.asarray(X)
    M = spec.M
    if X.shape != (M, M):
        raise ValueError(f"need an ({M}, {M}) block")
    flat = X.reshape(-1)
    out = np.empty_like(flat)
    if direction == RTOC:
        out[spec.dest] = flat
    elif direction == CTOR:
        out[:] = flat[spec.dest]
    else:
        raise ValueError(f"direction must be {RTOC} or {CTOR}")
    return out.reshape(M, M)
