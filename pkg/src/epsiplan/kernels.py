"""Counter-based random streams and the mean-study Monte Carlo kernel.

Every random number is a pure function of ``(seed, trial, index)``: a trial key
is derived by hashing the seed with the trial index, and draw ``j`` of a stream
is the SplitMix64 output at position ``j`` of that key. Trials are therefore
independent of evaluation order, chunking, or backend, and the numba and numpy
implementations below produce the same failure counts.

Uniforms are ``((bits >> 12) + 0.5) * 2**-52``, which lies strictly inside
(0, 1); with 53 bits the top value would round up to 1.0. Laplace noise uses the inverse CDF of one such uniform.
"""
from __future__ import annotations

import numpy as np

from epsiplan._backend import HAS_NUMBA, resolve_backend

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_NOISE_TAG = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_ONE = np.uint64(1)
_TWO_M52 = 2.0**-52

# Bernoulli draws per numpy block; bounds peak memory of the fallback path.
_BLOCK_ELEMS = 1 << 22


def _as_u64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def mix64_np(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def trial_keys_np(seed: int, first_trial: int, trials: int) -> np.ndarray:
    t = np.arange(first_trial, first_trial + trials, dtype=np.uint64)
    seed_key = mix64_np(np.array([_as_u64(seed)], dtype=np.uint64))[0]
    return mix64_np(seed_key ^ mix64_np(t + _ONE))


def stream_bits_np(keys: np.ndarray, count: int) -> np.ndarray:
    """Bits ``0..count-1`` of each key's stream, shape ``(len(keys), count)``."""
    j = np.arange(1, count + 1, dtype=np.uint64)
    return mix64_np(keys[:, None] + j[None, :] * GOLDEN)


def bits_to_uniform_np(bits: np.ndarray) -> np.ndarray:
    return ((bits >> _S12).astype(np.float64) + 0.5) * _TWO_M52


def laplace_from_uniform_np(u: np.ndarray, scale: float) -> np.ndarray:
    v = u - 0.5
    return -scale * np.sign(v) * np.log(1.0 - 2.0 * np.abs(v))


def trial_noise_np(keys: np.ndarray, scale: float) -> np.ndarray:
    bits = mix64_np((keys ^ _NOISE_TAG) + GOLDEN)
    return laplace_from_uniform_np(bits_to_uniform_np(bits), scale)


def _mean_study_np(seed, first_trial, trials, n, mu, scale, threshold):
    failures = 0
    block = max(1, _BLOCK_ELEMS // n)
    for start in range(first_trial, first_trial + trials, block):
        size = min(block, first_trial + trials - start)
        keys = trial_keys_np(seed, start, size)
        counts = np.zeros(size, dtype=np.int64)
        # split long streams so one row never exceeds the block budget
        step = min(n, _BLOCK_ELEMS)
        for j0 in range(0, n, step):
            width = min(step, n - j0)
            j = np.arange(j0 + 1, j0 + width + 1, dtype=np.uint64)
            u = bits_to_uniform_np(mix64_np(keys[:, None] + j[None, :] * GOLDEN))
            counts += np.count_nonzero(u < mu, axis=1)
        released = counts / n + trial_noise_np(keys, scale)
        failures += int(np.count_nonzero(np.abs(released - mu) >= threshold))
    return failures


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    from numba import njit

    @njit(cache=True, inline="always")
    def _mix64_nb(z):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @njit(cache=True)
    def _trial_key_nb(seed_key, t):
        return _mix64_nb(seed_key ^ _mix64_nb(np.uint64(t) + _ONE))

    @njit(cache=True)
    def _uniform_nb(bits):
        return (np.float64(bits >> _S12) + 0.5) * _TWO_M52

    @njit(cache=True)
    def _noise_nb(key, scale):
        u = _uniform_nb(_mix64_nb((key ^ _NOISE_TAG) + GOLDEN))
        v = u - 0.5
        mag = -scale * np.log(1.0 - 2.0 * abs(v))
        if v < 0.0:
            return -mag
        if v > 0.0:
            return mag
        return 0.0

    @njit(cache=True, nogil=True)
    def _mean_study_nb(seed, first_trial, trials, n, mu, scale, threshold):
        seed_key = _mix64_nb(seed)
        failures = 0
        for t in range(first_trial, first_trial + trials):
            key = _trial_key_nb(seed_key, t)
            count = 0
            state = key
            for _ in range(n):
                state += GOLDEN
                if _uniform_nb(_mix64_nb(state)) < mu:
                    count += 1
            released = count / n + _noise_nb(key, scale)
            if abs(released - mu) >= threshold:
                failures += 1
        return failures

    @njit(cache=True)
    def _trial_noise_nb(seed, first_trial, trials, scale):
        seed_key = _mix64_nb(seed)
        out = np.empty(trials, dtype=np.float64)
        for i in range(trials):
            out[i] = _noise_nb(_trial_key_nb(seed_key, first_trial + i), scale)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def mean_study_failures(
    seed: int,
    first_trial: int,
    trials: int,
    n: int,
    mu: float,
    scale: float,
    threshold: float,
    backend: str | None = None,
) -> int:
    """Count trials whose noisy sample mean misses ``mu`` by ``threshold`` or more.

    Trial ``t`` draws ``n`` Bernoulli(mu) values and one Laplace(scale) value
    from streams keyed on ``(seed, t)``; trials ``first_trial .. first_trial +
    trials - 1`` are evaluated.
    """
    if trials <= 0:
        return 0
    if resolve_backend(backend) == "numba":
        return int(
            _mean_study_nb(
                _as_u64(seed), int(first_trial), int(trials), int(n),
                float(mu), float(scale), float(threshold),
            )
        )
    return _mean_study_np(int(seed), int(first_trial), int(trials), int(n),
                          float(mu), float(scale), float(threshold))


def trial_noise(
    seed: int, first_trial: int, trials: int, scale: float, backend: str | None = None
) -> np.ndarray:
    """The per-trial Laplace noise values used by :func:`mean_study_failures`."""
    if resolve_backend(backend) == "numba":
        return _trial_noise_nb(_as_u64(seed), int(first_trial), int(trials), float(scale))
    return trial_noise_np(trial_keys_np(seed, first_trial, trials), float(scale))
