"""Polar-code primitives: transforms, LLR kernels, and code construction.

Conventions used across the package:

* bit vectors are numpy ``uint8`` arrays, LLR vectors are ``float64``;
* an LLR is ``log(P(bit=0)/P(bit=1))``, so positive values favour bit 0;
* ``sign(0) = +1`` everywhere, i.e. the hard decision of LLR 0 is bit 0;
* the transform is natural-order ``x = u @ G^{kron n}`` with kernel
  ``G = [[1, 0], [1, 1]]`` and no bit-reversal permutation;
* all LLR arithmetic saturates at ``+-LLR_MAX`` so it stays total.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

LLR_MAX = 1.0e9


def saturate(x, llr_max=LLR_MAX):
    """Clamp LLR values to [-llr_max, +llr_max]."""
    return np.clip(x, -llr_max, llr_max)


def hard_decision(llr):
    """Elementwise hard decision: bit 0 for llr >= 0, bit 1 otherwise."""
    return np.where(np.asarray(llr) >= 0, 0, 1).astype(np.uint8)


def _require_power_of_two(N):
    if N < 2 or (N & (N - 1)) != 0:
        raise ValueError(f"length must be a power of two >= 2, got {N}")
    return N.bit_length() - 1


# ---- LLR kernels

def f_tilde(a, b):
    """Min-sum approximation of the boxplus LLR combination.

    f~(a, b) = min(|a|, |b|) * sign(a) * sign(b) with sign(0) = +1.
    Elementwise on arrays; exact for saturated inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sgn = np.where(a >= 0, 1.0, -1.0) * np.where(b >= 0, 1.0, -1.0)
    return sgn * np.minimum(np.abs(a), np.abs(b))


def boxplus_exact(a, b):
    """Exact boxplus a [+] b = log((1 + e^(a+b)) / (e^a + e^b)).

    Reference kernel for bounding the min-sum approximation; computed in a
    numerically stable form via logaddexp.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def g_func(lambda_i, lambda_j, beta):
    """Partial-sum-conditioned LLR combination lambda_j + (1-2*beta)*lambda_i."""
    lambda_i = np.asarray(lambda_i, dtype=np.float64)
    lambda_j = np.asarray(lambda_j, dtype=np.float64)
    beta = np.asarray(beta)
    return saturate(lambda_j + (1.0 - 2.0 * beta) * lambda_i)


def partial_sum_combine(beta_left, beta_right):
    """Combine child partial sums into [left XOR right, right]."""
    beta_left = np.asarray(beta_left, dtype=np.uint8)
    beta_right = np.asarray(beta_right, dtype=np.uint8)
    if beta_left.shape != beta_right.shape:
        raise ValueError("partial-sum halves must have equal length")
    return np.concatenate([beta_left ^ beta_right, beta_right])


# ---- transforms

def polar_transform(u):
    """Apply the butterfly transform x = u @ G^{kron n} along the last axis.

    The transform is an involution: applying it twice returns the input.
    Accepts a single vector or any batch with the code dimension last.
    """
    x = np.ascontiguousarray(u, dtype=np.uint8).copy()
    N = x.shape[-1]
    m = _require_power_of_two(N)
    v = x.reshape(-1, N)
    for s in range(m):
        h = 1 << s
        view = v.reshape(v.shape[0], -1, 2, h)
        view[:, :, 0, :] ^= view[:, :, 1, :]
    return x


def soft_transform(llr):
    """Propagate LLRs through the butterfly network with f~ in place of XOR.

    Produces soft information about the transformed bit vector; for inputs
    saturated at +-LLR_MAX the output sign pattern equals the hard transform
    of the input sign pattern. Operates along the last axis.
    """
    x = np.ascontiguousarray(llr, dtype=np.float64).copy()
    N = x.shape[-1]
    m = _require_power_of_two(N)
    v = x.reshape(-1, N)
    for s in range(m):
        h = 1 << s
        view = v.reshape(v.shape[0], -1, 2, h)
        a = view[:, :, 0, :]
        b = view[:, :, 1, :]
        view[:, :, 0, :] = f_tilde(a, b)
    return x


# ---- code construction

def bhattacharyya_parameters(n, erasure_prob=0.5):
    """Bhattacharyya parameters of the 2^n bit-channels (higher = worse).

    Evolves z through n polarization levels with z- = 2z - z^2 and z+ = z^2,
    indexed so the lowest bit of a channel index selects the final level.
    """
    if not 0.0 <= erasure_prob <= 1.0:
        raise ValueError("erasure_prob must be in [0, 1]")
    z = np.array([float(erasure_prob)])
    for _ in range(n):
        minus = 2.0 * z - z * z
        plus = z * z
        z = np.empty(2 * z.shape[0])
        z[0::2] = minus
        z[1::2] = plus
    return z


def _phi(x):
    # Chung-style approximation of the mean-LLR attenuation function.
    if x < 10.0:
        return float(np.exp(0.0218 - 0.4527 * x ** 0.86))
    return float(np.sqrt(np.pi / x) * np.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x)))


def _phi_inv(y):
    # phi is decreasing; bisect on a bracket wide enough for any code size here.
    lo, hi = 1.0e-12, 5000.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _phi(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gaussian_approx_means(n, design_ebn0_db, rate=0.5):
    """Approximate mean LLRs of the 2^n bit-channels on BPSK/AWGN (higher = better).

    The all-zero-codeword channel LLR mean is 2/sigma^2 with
    sigma^2 = 1 / (2 * rate * 10^(EbN0/10)); polarization updates are
    m- = phi_inv(1 - (1 - phi(m))^2) and m+ = 2m.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    sigma_sq = 1.0 / (2.0 * rate * 10.0 ** (design_ebn0_db / 10.0))
    m = np.array([2.0 / sigma_sq])
    for _ in range(n):
        minus = np.array([_phi_inv(1.0 - (1.0 - _phi(v)) ** 2) for v in m])
        plus = 2.0 * m
        nxt = np.empty(2 * m.shape[0])
        nxt[0::2] = minus
        nxt[1::2] = plus
        m = nxt
    return m


def build_reliabilities(n, method, design_param=None, rate=0.5):
    """Score the 2^n bit-channels; returns (scores, first_error_prob).

    ``method`` is ``"bhattacharyya"`` (scores are the raw Bhattacharyya
    parameters, higher = worse; ``design_param`` is the erasure probability,
    default 0.5) or ``"gaussian_approx"`` (scores are mean LLRs, higher =
    better; ``design_param`` is the design Eb/N0 in dB and ``rate`` feeds the
    noise variance). first_error_prob is the per-position probability that
    the position is the first decoding error under genie-aided conditions:
    z/2 for the erasure model, Q(sqrt(m/2)) for the Gaussian approximation.
    """
    if method == "bhattacharyya":
        z = bhattacharyya_parameters(n, 0.5 if design_param is None else design_param)
        return z, 0.5 * z
    if method == "gaussian_approx":
        if design_param is None:
            raise ValueError("gaussian_approx needs design_param = design Eb/N0 in dB")
        m = gaussian_approx_means(n, design_param, rate)
        # Q(sqrt(m/2)) = 0.5 * erfc(sqrt(m)/2)
        return m, 0.5 * erfc(np.sqrt(m) / 2.0)
    raise ValueError(f"unknown construction method: {method!r}")


def build_staircase_frozen_set(N, K, error_scores):
    """Select the N-K frozen positions, confined to the left half {0..N/2-1}.

    ``error_scores`` orders positions by badness (higher = less reliable;
    either raw Bhattacharyya parameters or first-error probabilities work).
    The N-K worst left-half positions are frozen, ties broken by freezing
    the lower index first.
    """
    _require_power_of_two(N)
    scores = np.asarray(error_scores, dtype=np.float64)
    if scores.shape != (N,):
        raise ValueError(f"need {N} scores, got shape {scores.shape}")
    if not 0 < K <= N:
        raise ValueError(f"K must be in (0, {N}], got {K}")
    n_frozen = N - K
    if n_frozen > N // 2:
        raise ValueError(
            f"N-K = {n_frozen} frozen positions cannot be confined to the left half of {N}"
        )
    left = scores[: N // 2]
    order = np.argsort(-left, kind="stable")  # worst first, ties by lower index
    return frozenset(int(i) for i in order[:n_frozen])


def post_decoding_pe(first_error_prob):
    """Serial-decoding error-probability profile from first-error probabilities.

    P_e[i] = min(1, P_1e[i] + 0.5 * sum_{j < i} P_1e[j]): a position inherits
    half the accumulated first-error mass of everything decoded before it.
    """
    p1e = np.asarray(first_error_prob, dtype=np.float64)
    if np.any(p1e < 0) or np.any(p1e > 1):
        raise ValueError("first_error_prob values must be in [0, 1]")
    before = np.concatenate([[0.0], np.cumsum(p1e)[:-1]])
    return np.minimum(1.0, p1e + 0.5 * before)


@dataclass(frozen=True)
class PolarCodeSpec:
    """A component polar code with its frozen set confined to the left half.

    ``reliability`` is canonical (higher = more reliable); ``first_error_prob``
    is zero on frozen positions, since a frozen bit can never be the first
    error. Instances are immutable and safe to share between threads.
    """

    n: int
    K: int
    frozen: frozenset
    reliability: np.ndarray = field(repr=False)
    first_error_prob: np.ndarray = field(repr=False)

    @property
    def N(self):
        return 1 << self.n

    @property
    def M(self):
        return self.N // 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        N = self.N
        if not 0 < self.K <= N:
            raise ValueError(f"K must be in (0, {N}]")
        if len(self.frozen) != N - self.K:
            raise ValueError("frozen set size must be N - K")
        if any(not 0 <= i < N // 2 for i in self.frozen):
            raise ValueError("frozen positions must lie in the left half")
        if self.reliability.shape != (N,) or self.first_error_prob.shape != (N,):
            raise ValueError("reliability and first_error_prob must have length N")
        if np.any(self.first_error_prob < 0) or np.any(self.first_error_prob > 1):
            raise ValueError("first_error_prob values must be in [0, 1]")
        nf = np.asarray(sorted(set(range(N)) - self.frozen))
        rel = self.reliability[nf]
        p1e = self.first_error_prob[nf]
        # orderings must agree on non-frozen positions: more reliable <=> smaller P_1e
        order = np.argsort(rel, kind="stable")
        if np.any(np.diff(p1e[order]) > 1e-12):
            raise ValueError("reliability and first_error_prob orderings disagree")

    @property
    def frozen_mask(self):
        mask = np.zeros(self.N, dtype=np.uint8)
        mask[sorted(self.frozen)] = 1
        return mask

    @property
    def info_positions(self):
        """Non-frozen positions in ascending order."""
        return np.asarray(sorted(set(range(self.N)) - self.frozen), dtype=np.int64)

    @property
    def left_info_positions(self):
        """Non-frozen positions of the left half, where new bits (and CRC) live."""
        return np.asarray(
            sorted(set(range(self.M)) - self.frozen), dtype=np.int64
        )


def build_component_code(n, K, method="gaussian_approx", design_param=None, rate=0.5):
    """Construct a PolarCodeSpec with a staircase (left-half) frozen set."""
    scores, p1e = build_reliabilities(n, method, design_param, rate)
    if method == "bhattacharyya":
        reliability = -scores
    else:
        reliability = scores.copy()
    frozen = build_staircase_frozen_set(1 << n, K, p1e)
    p1e = p1e.copy()
    p1e[sorted(frozen)] = 0.0
    return PolarCodeSpec(
        n=n, K=K, frozen=frozen, reliability=reliability, first_error_prob=p1e
    )
