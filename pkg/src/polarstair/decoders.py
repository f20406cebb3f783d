"""Soft-in soft-out component decoders.

Three algorithms share one result shape: list decoding with metric-derived
extrinsics (soft_scl), iterative factor-graph message passing (scan), and
message passing over a list of permuted graphs (scanl). All decode a single
length-N LLR vector or a batch of rows; the extrinsic output gamma refers
to codeword (channel-side) bits.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .crc import CrcSpec, crc_generator_matrix
from .polar import PolarCodeSpec

ALGORITHMS = ("soft_scl", "scan", "scanl")

_EMPTY_INFO = np.empty(0, dtype=np.int64)
_EMPTY_G = np.empty((0, 0), dtype=np.uint8)


def default_k_max(N, k_min=0):
    """Upper index of the no-competitor magnitude sum: the smallest
    min(N/8, 15) input magnitudes, never fewer than one."""
    return max(k_min, min(N // 8, 15) - 1)


@dataclass(frozen=True)
class DecoderConfig:
    algorithm: str = "soft_scl"
    L: int = 8
    T: int = 1
    alpha_e: float = 1.0
    alpha_b: float = 1.0
    k_min: int = 0
    k_max: int | None = None  # resolved against N when the decoder binds
    crc: CrcSpec | None = None
    permutation_seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.L < 1:
            raise ValueError("list size L must be >= 1")
        if self.T < 1:
            raise ValueError("iteration count T must be >= 1")
        if not 0.0 < self.alpha_e <= 1.0:
            raise ValueError("alpha_e must be in (0, 1]")
        if not 0.0 < self.alpha_b <= 1.0:
            raise ValueError("alpha_b must be in (0, 1]")
        if self.k_min < 0:
            raise ValueError("k_min must be >= 0")
        if self.k_max is not None and self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")


@dataclass
class SoftDecodeResult:
    extrinsic: np.ndarray
    u_hat: np.ndarray
    x_hat: np.ndarray
    crc_pass: bool
    selected_metric: float


def stage_permutation_sigmas(n, L, seed):
    """Bit-index permutations induced by shuffling the n graph stages.

    Relabeling stage t as pi[t] moves the bit at index j to
    sum_t bit_t(j) * 2^pi[t]; running the standard schedule on the permuted
    vector equals running a stage-shuffled schedule on the original.
    Identity first, then L-1 seeded random stage orders.
    """
    N = 1 << n
    bits = (np.arange(N)[:, None] >> np.arange(n)) & 1
    sigmas = np.empty((L, N), dtype=np.int64)
    sigmas[0] = np.arange(N)
    rng = np.random.Generator(np.random.PCG64(seed))
    for l in range(1, L):
        pi = rng.permutation(n)
        sigmas[l] = bits @ (np.int64(1) << pi)
    return sigmas


class ComponentDecoder:
    """One component code bound to one decoder configuration.

    Holds the precomputed schedule, graph permutations, and checksum
    matrix; decode_rows works on any number of codewords at once. A single
    instance must not be shared by concurrent callers, but independent
    instances are safe in parallel.
    """

    def __init__(self, spec: PolarCodeSpec, cfg: DecoderConfig):
        self.spec = spec
        self.cfg = cfg
        N = spec.N
        self.frozen_mask = spec.frozen_mask
        self.k_min = cfg.k_min
        self.k_max = default_k_max(N, cfg.k_min) if cfg.k_max is None else cfg.k_max
        if not self.k_min <= self.k_max < N:
            raise ValueError(f"need 0 <= k_min <= k_max < {N}")
        self.use_crc = cfg.crc is not None
        if self.use_crc:
            left = spec.left_info_positions
            n_msg = left.size - cfg.crc.width
            if n_msg < 1:
                raise ValueError("checksum leaves no message bits in the left half")
            self.left_info = left
            self.n_msg = int(n_msg)
            self.crc_G = np.ascontiguousarray(crc_generator_matrix(n_msg, cfg.crc))
        else:
            self.left_info = _EMPTY_INFO
            self.n_msg = 0
            self.crc_G = _EMPTY_G
        if cfg.algorithm in ("scan", "scanl"):
            self.schedule = _kernels.scan_schedule(spec.n)
        if cfg.algorithm == "scanl":
            self.sigmas = stage_permutation_sigmas(spec.n, cfg.L, cfg.permutation_seed)

    def decode_rows(self, llr_rows):
        """Decode a (rows, N) LLR batch; returns arrays
        (gamma, u_hat, x_hat, crc_pass, metric) with leading size rows."""
        llr_rows = np.ascontiguousarray(llr_rows, dtype=np.float64)
        if llr_rows.ndim != 2 or llr_rows.shape[1] != self.spec.N:
            raise ValueError(f"need a (rows, {self.spec.N}) batch")
        R, N = llr_rows.shape
        gamma = np.empty((R, N), dtype=np.float64)
        u_hat = np.empty((R, N), dtype=np.uint8)
        x_hat = np.empty((R, N), dtype=np.uint8)
        crc_pass = np.zeros(R, dtype=np.uint8)
        metric = np.empty(R, dtype=np.float64)
        cfg = self.cfg
        if cfg.algorithm == "soft_scl":
            _kernels.soft_scl_rows(
                llr_rows, self.frozen_mask, cfg.L, cfg.alpha_e, cfg.alpha_b,
                self.k_min, self.k_max, self.use_crc, self.left_info,
                self.n_msg, self.crc_G, gamma, u_hat, x_hat, crc_pass, metric)
        elif cfg.algorithm == "scan":
            ops, ss, bb = self.schedule
            _kernels.scan_rows(
                llr_rows, self.frozen_mask, cfg.T, cfg.alpha_e, ops, ss, bb,
                self.use_crc, self.left_info, self.n_msg, self.crc_G,
                gamma, u_hat, x_hat, crc_pass, metric)
        else:
            ops, ss, bb = self.schedule
            _kernels.scanl_rows(
                llr_rows, self.frozen_mask, cfg.T, cfg.alpha_e, self.sigmas,
                ops, ss, bb, self.use_crc, self.left_info, self.n_msg,
                self.crc_G, gamma, u_hat, x_hat, crc_pass, metric)
        return gamma, u_hat, x_hat, crc_pass.astype(bool), metric

    def decode(self, llr_in) -> SoftDecodeResult:
        gamma, u_hat, x_hat, crc_pass, metric = self.decode_rows(
            np.asarray(llr_in, dtype=np.float64)[None, :])
        return SoftDecodeResult(gamma[0], u_hat[0], x_hat[0],
                                bool(crc_pass[0]), float(metric[0]))


# ---- single-vector operations

def sc_decode(llr_in, spec: PolarCodeSpec):
    """Successive cancellation; returns (u_hat, x_hat)."""
    u, x, _, _ = _scl(llr_in, spec, 1)
    return u[0], x[0]


def scl_decode(llr_in, spec: PolarCodeSpec, L: int):
    """List decoding; returns [(u_hat, x_hat, metric), ...] sorted by
    ascending metric."""
    u, x, pm, cnt = _scl(llr_in, spec, L)
    return [(u[r], x[r], float(pm[r])) for r in range(cnt)]


def _scl(llr_in, spec, L):
    if L < 1:
        raise ValueError("list size L must be >= 1")
    llr = np.ascontiguousarray(llr_in, dtype=np.float64)
    if llr.shape != (spec.N,):
        raise ValueError(f"need {spec.N} input LLRs")
    return _kernels.scl_list(llr, spec.frozen_mask, L)


def soft_scl_decode(llr_in, spec: PolarCodeSpec, cfg: DecoderConfig) -> SoftDecodeResult:
    if cfg.algorithm != "soft_scl":
        raise ValueError("config algorithm must be soft_scl")
    return ComponentDecoder(spec, cfg).decode(llr_in)


def scan_decode(llr_in, spec: PolarCodeSpec, T: int, alpha_e: float,
                crc: CrcSpec | None = None) -> SoftDecodeResult:
    cfg = DecoderConfig(algorithm="scan", T=T, alpha_e=alpha_e, crc=crc)
    return ComponentDecoder(spec, cfg).decode(llr_in)


def scanl_decode(llr_in, spec: PolarCodeSpec, cfg: DecoderConfig) -> SoftDecodeResult:
    if cfg.algorithm != "scanl":
        raise ValueError("config algorithm must be scanl")
    return ComponentDecoder(spec, cfg).decode(llr_in)
