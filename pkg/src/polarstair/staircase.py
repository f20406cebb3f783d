"""Staircase coupling of polar component codes.

Each step encodes M = N/2 input vectors u = [u_new | s], where u_new puts
fresh message (and checksum) bits on the non-frozen left-half positions and
s is one row of the interleaved previous left half-block. The transmitted
frame is the right half-block of the transform output; the left half-block
is interleaved and carried into the next step, so a codeword's own message
physically rides in the following frame.

The decoder keeps the W+1 newest frames. Each iteration sweeps newest to
oldest: soft-encoding the newer frame's posterior recovers information
about the older step's left halves, the pair forms full-length component
inputs, and the component decoder's extrinsic output updates the stored
per-frame extrinsic blocks in place.
"""

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .crc import CrcSpec, crc_generator_matrix
from .decoders import ComponentDecoder, DecoderConfig
from .interleavers import CTOR, RTOC, interleave, make_interleaver
from .polar import LLR_MAX, PolarCodeSpec, polar_transform, saturate, soft_transform


@dataclass(frozen=True)
class StaircaseConfig:
    code: PolarCodeSpec
    decoder: DecoderConfig
    W: int = 5
    interleaver: str = "std"
    rnd_seed: int = 0
    crc: CrcSpec | None = None
    passes_per_frame: int = 1
    back_propagate: bool = False
    decoding_reduction: bool = False

    def __post_init__(self):
        if self.W < 1:
            raise ValueError("window depth W must be >= 1")
        if self.passes_per_frame < 1:
            raise ValueError("passes_per_frame must be >= 1")
        if self.decoding_reduction and self.crc is None:
            raise ValueError("decoding reduction needs a checksum to act on")
        if self.new_bits_per_codeword < 1:
            raise ValueError(
                "component code leaves no room for new bits: need K - N/2 - c >= 1"
            )

    @property
    def M(self):
        return self.code.M

    @property
    def crc_width(self):
        return 0 if self.crc is None else self.crc.width

    @property
    def new_bits_per_codeword(self):
        return self.code.K - self.code.M - self.crc_width

    @property
    def payload_bits_per_frame(self):
        return self.M * self.new_bits_per_codeword

    @property
    def effective_rate(self):
        """Message bits per transmitted bit, checksum overhead charged."""
        return self.new_bits_per_codeword / self.M

    @property
    def uncharged_rate(self):
        """Rate with the checksum counted as message: (K - M) / M."""
        return (self.code.K - self.M) / self.M


class StaircaseEncoder:
    """Streaming encoder; frames alternate row/column orientation, so odd
    frames are emitted transposed."""

    def __init__(self, cfg: StaircaseConfig):
        self.cfg = cfg
        self.il = make_interleaver(cfg.interleaver, cfg.code, cfg.rnd_seed)
        M = cfg.M
        left = cfg.code.left_info_positions
        k_new = cfg.new_bits_per_codeword
        self._msg_pos = left[:k_new]
        self._crc_pos = left[k_new:]
        self._crc_G = None if cfg.crc is None else crc_generator_matrix(k_new, cfg.crc)
        self._state = np.zeros((M, M), dtype=np.uint8)
        self._count = 0

    @property
    def frame_count(self):
        return self._count

    def encode_next_frame(self, new_bits):
        cfg = self.cfg
        M = cfg.M
        new_bits = np.asarray(new_bits, dtype=np.uint8)
        if new_bits.shape != (M, cfg.new_bits_per_codeword):
            raise ValueError(
                f"need a ({M}, {cfg.new_bits_per_codeword}) new-bit block"
            )
        if np.any(new_bits > 1):
            raise ValueError("new bits must be 0/1")
        u = np.zeros((M, cfg.code.N), dtype=np.uint8)
        u[:, self._msg_pos] = new_bits
        if self._crc_G is not None:
            u[:, self._crc_pos] = (new_bits @ self._crc_G) & 1
        u[:, M:] = self._state
        x = polar_transform(u)
        self._state = interleave(x[:, :M], self.il, RTOC)
        frame = x[:, M:]
        phys = frame if self._count % 2 == 0 else frame.T
        self._count += 1
        return np.ascontiguousarray(phys)


def apply_decoding_reduction(crc_passed, skipped_last):
    """Per-codeword decode mask: failed checksum decodes, a passed one is
    skipped exactly once, then decoded unconditionally."""
    crc_passed = np.asarray(crc_passed, dtype=bool)
    skipped_last = np.asarray(skipped_last, dtype=bool)
    return ~crc_passed | skipped_last


@dataclass
class _Frame:
    C: np.ndarray
    gamma: np.ndarray
    crc_passed: np.ndarray
    skipped_last: np.ndarray
    u_cache: np.ndarray


class StaircaseDecoder:
    """Sliding-window decoder over the W+1 newest frames.

    push() evicts and returns the oldest frame's message bits once the
    window is full, installs the new frame, and runs the configured number
    of decoding iterations; drain() pops whatever remains at stream end.
    The very first frame of a stream is structurally all-zero, so its
    stored channel block is overridden with saturated known-zero LLRs.
    """

    def __init__(self, cfg: StaircaseConfig):
        self.cfg = cfg
        self.il = make_interleaver(cfg.interleaver, cfg.code, cfg.rnd_seed)
        self._dec = ComponentDecoder(cfg.code, replace(cfg.decoder, crc=cfg.crc))
        left = cfg.code.left_info_positions
        self._msg_pos = left[: cfg.new_bits_per_codeword]
        self._frames = deque()
        self._pushes = 0
        self.decodes_done = 0
        self.decodes_possible = 0

    @property
    def frames_held(self):
        return len(self._frames)

    @property
    def decoded_fraction(self):
        """Component decodes performed over decodes possible so far."""
        if self.decodes_possible == 0:
            return 1.0
        return self.decodes_done / self.decodes_possible

    def push(self, llr_block):
        cfg = self.cfg
        M = cfg.M
        llr = np.asarray(llr_block, dtype=np.float64)
        if llr.shape != (M, M):
            raise ValueError(f"need an ({M}, {M}) LLR block")
        popped = None
        if len(self._frames) == cfg.W + 1:
            popped = self.pop()
        C = llr if self._pushes % 2 == 0 else llr.T
        if self._pushes == 0:
            C = np.full((M, M), LLR_MAX)
        self._frames.append(_Frame(
            C=np.ascontiguousarray(C),
            gamma=np.zeros((M, M)),
            crc_passed=np.zeros(M, dtype=bool),
            skipped_last=np.zeros(M, dtype=bool),
            u_cache=np.zeros((M, cfg.code.N), dtype=np.uint8),
        ))
        self._pushes += 1
        for _ in range(cfg.passes_per_frame):
            self.run_decoding_iteration()
        return popped

    def run_decoding_iteration(self):
        """One newest-to-oldest sweep; each pair of adjacent frames forms
        the component inputs of the older step and refreshes its extrinsic
        block (and the newer one's, when back-propagation is on)."""
        cfg = self.cfg
        frames = self._frames
        if len(frames) < 2:
            return
        M = cfg.M
        for k in range(len(frames) - 1, 0, -1):
            newer = frames[k]
            older = frames[k - 1]
            lam_new = saturate(newer.C + newer.gamma)
            lam_old = saturate(older.C + older.gamma)
            lam_prev = interleave(soft_transform(lam_new), self.il, CTOR)
            inputs = np.concatenate([lam_prev, lam_old], axis=1)
            if cfg.decoding_reduction:
                do = apply_decoding_reduction(older.crc_passed, older.skipped_last)
            else:
                do = np.ones(M, dtype=bool)
            rows = np.nonzero(do)[0]
            older.skipped_last = ~do
            self.decodes_possible += M
            if rows.size:
                gamma, u_hat, _, crc_pass, _ = self._dec.decode_rows(inputs[rows])
                older.gamma[rows] = gamma[:, M:]
                older.u_cache[rows] = u_hat
                if cfg.crc is not None:
                    older.crc_passed[rows] = crc_pass
                self.decodes_done += int(rows.size)
                if cfg.back_propagate:
                    gl = np.zeros((M, M))
                    gl[rows] = gamma[:, :M]
                    newer.gamma = soft_transform(interleave(gl, self.il, RTOC))

    def pop(self):
        """Hard message bits of the evicted oldest frame, from its last
        component decode."""
        if not self._frames:
            raise ValueError("pop from an empty window")
        fr = self._frames.popleft()
        return fr.u_cache[:, self._msg_pos].copy()

    def drain(self):
        """Pop every frame still in the window, oldest first."""
        out = []
        while self._frames:
            out.append(self.pop())
        return out
