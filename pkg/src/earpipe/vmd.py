"""Variational mode decomposition and IMU-guided motion artifact removal.

The decomposition runs the standard frequency-domain alternating scheme:
each mode is refined by a Wiener-like update around its current center
frequency, center frequencies move to the spectral centroid of their mode,
and an optional dual ascent step (tau > 0) enforces exact reconstruction.
The input is mirror-extended by half its length on each side to soften
boundary effects.

Motion handling: every mode's amplitude envelope is compared against the
accelerometer magnitude; modes that track the IMU are dropped before the
signal is rebuilt.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert

DEFAULT_K = 8
DEFAULT_ALPHA = 2000.0
DEFAULT_TAU = 0.0
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 500
MOTION_R_THRESHOLD = 0.3
BLOCK_S = 30.0
BLOCK_OVERLAP_S = 1.0


@dataclass
class VmdResult:
    modes: np.ndarray  # k x n, ordered by ascending center frequency
    center_freqs_hz: np.ndarray
    residual: np.ndarray
    sample_rate: float
    iterations: int
    converged: bool


def _init_omegas(k: int, init: str, seed: int) -> np.ndarray:
    if init == "uniform":
        return (0.5 / k) * np.arange(k)
    if init == "zero":
        return np.zeros(k)
    if init == "random":
        return np.sort(0.5 * np.random.default_rng(seed).random(k))
    raise ValueError(f"unknown init {init!r}; use uniform, zero or random")


def vmd_decompose(
    x: np.ndarray,
    fs: float,
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    init: str = "uniform",
    seed: int = 0,
) -> VmdResult:
    """Decompose ``x`` into ``k`` narrowband modes.

    Parameters
    ----------
    x : array
        Input signal (any length; it is mirror-extended internally).
    fs : float
        Sampling rate in Hz; center frequencies are reported in Hz.
    k : int
        Number of modes.
    alpha : float
        Bandwidth penalty; larger values give narrower modes.
    tau : float
        Dual-ascent step.  0 disables the exact-reconstruction constraint,
        which tolerates noise; positive values tighten reconstruction.
    tol : float
        Relative change of the mode set that counts as converged.
    max_iter : int
        Iteration cap.
    init : str
        Center frequency initialization: "uniform", "zero" or "random".
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("vmd_decompose expects a single channel")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains NaN or Inf")
    if k < 1:
        raise ValueError("k must be at least 1")
    n_orig = len(x)
    if n_orig < 4:
        raise ValueError("signal too short to decompose")

    padded_odd = n_orig % 2 == 1
    if padded_odd:
        x = np.append(x, x[-1])
    n = len(x)

    half = n // 2
    f = np.concatenate([x[:half][::-1], x, x[-half:][::-1]])
    t_len = len(f)

    freqs = np.arange(1, t_len + 1) / t_len - 0.5 - 1.0 / t_len
    f_hat = np.fft.fftshift(np.fft.fft(f))

    # the negative half-spectrum stays identically zero through every update,
    # so the iteration runs on the positive half only
    half_slice = slice(t_len // 2, t_len)
    f_plus = f_hat[half_slice].copy()
    freqs_pos = freqs[half_slice]

    omega = _init_omegas(k, init, seed)
    u_hat = np.zeros((k, len(f_plus)), dtype=complex)
    lam = np.zeros(len(f_plus), dtype=complex)

    if not np.any(x):
        zeros = np.zeros((k, n_orig))
        return VmdResult(
            modes=zeros,
            center_freqs_hz=np.sort(omega) * fs,
            residual=np.zeros(n_orig),
            sample_rate=fs,
            iterations=0,
            converged=True,
        )

    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        u_prev = u_hat.copy()
        sum_all = u_hat.sum(axis=0)
        for i in range(k):
            sum_others = sum_all - u_hat[i]
            u_new = (f_plus - sum_others + lam / 2) / (
                1.0 + 2.0 * alpha * (freqs_pos - omega[i]) ** 2
            )
            sum_all += u_new - u_hat[i]
            u_hat[i] = u_new
            power = np.abs(u_new) ** 2
            total = power.sum()
            if total > 0:
                omega[i] = float(np.dot(freqs_pos, power) / total)
        lam = lam + tau * (f_plus - sum_all)

        diff = np.sum(np.abs(u_hat - u_prev) ** 2)
        norm = np.sum(np.abs(u_prev) ** 2)
        if norm > 0.0 and diff < tol * norm:
            converged = True
            break

    # rebuild time-domain modes from the positive half-spectrum
    full = np.zeros((k, t_len), dtype=complex)
    full[:, t_len // 2:] = u_hat
    full[:, 1: t_len // 2 + 1] = np.conj(full[:, -1: t_len // 2 - 1: -1])
    full[:, 0] = np.conj(full[:, -1])
    u = np.real(np.fft.ifft(np.fft.ifftshift(full, axes=1), axis=1))
    modes = u[:, half: half + n][:, :n_orig]

    order = np.argsort(omega)
    modes = modes[order]
    center_hz = omega[order] * fs

    x_orig = x[:n_orig]
    return VmdResult(
        modes=modes,
        center_freqs_hz=center_hz,
        residual=x_orig - modes.sum(axis=0),
        sample_rate=fs,
        iterations=iterations,
        converged=converged,
    )


@dataclass
class MotionCorrelation:
    """Per-mode Pearson correlation against the accelerometer magnitude."""

    r: np.ndarray
    threshold: float
    excluded: np.ndarray  # boolean mask over modes

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())


def _mode_envelope(mode: np.ndarray, fs: float, smooth_s: float = 0.5) -> np.ndarray:
    env = np.abs(hilbert(mode))
    # convolve(mode="same") returns the longer operand's length, so the
    # smoothing window must never exceed the signal itself.
    win = max(1, min(len(env), int(round(smooth_s * fs))))
    kernel = np.ones(win) / win
    return np.convolve(env, kernel, mode="same")


def motion_correlation(
    result: VmdResult,
    accel: np.ndarray,
    imu_rate: float,
    threshold: float = MOTION_R_THRESHOLD,
) -> MotionCorrelation:
    """Correlate each mode's smoothed envelope with the IMU magnitude.

    The envelope is resampled onto the IMU clock before the Pearson
    correlation; a zero-variance side yields r = 0 for that mode.
    """
    accel = np.asarray(accel, dtype=np.float64)
    if accel.ndim != 2 or accel.shape[0] != 3:
        raise ValueError(f"accel must be 3 x M, got {accel.shape}")
    mag = np.linalg.norm(accel, axis=0)
    mag = mag - mag.mean()
    t_imu = np.arange(accel.shape[1]) / imu_rate
    t_sig = np.arange(result.modes.shape[1]) / result.sample_rate

    rs = np.zeros(result.modes.shape[0])
    mag_sd = mag.std()
    for i, mode in enumerate(result.modes):
        env = _mode_envelope(mode, result.sample_rate)
        env_i = np.interp(t_imu, t_sig, env)
        env_i = env_i - env_i.mean()
        env_sd = env_i.std()
        if env_sd == 0.0 or mag_sd == 0.0:
            rs[i] = 0.0
        else:
            rs[i] = float(np.dot(env_i, mag) / (len(mag) * env_sd * mag_sd))
    return MotionCorrelation(r=rs, threshold=threshold, excluded=np.abs(rs) > threshold)


def reconstruct_excluding_motion(result: VmdResult, corr: MotionCorrelation) -> np.ndarray:
    """Sum the modes whose envelopes do not track the accelerometer."""
    keep = ~corr.excluded
    if not keep.any():
        warnings.warn("every mode correlates with motion; returning zeros", stacklevel=2)
        return np.zeros(result.modes.shape[1])
    return result.modes[keep].sum(axis=0)


def remove_motion_artifacts(
    x: np.ndarray,
    fs: float,
    accel: np.ndarray,
    imu_rate: float,
    threshold: float = MOTION_R_THRESHOLD,
    block_s: float = BLOCK_S,
    overlap_s: float = BLOCK_OVERLAP_S,
    **vmd_kwargs,
) -> tuple[np.ndarray, list[MotionCorrelation]]:
    """Motion-clean a channel of arbitrary length.

    Long signals are processed in ``block_s`` chunks with a raised-cosine
    cross-fade over ``overlap_s`` so VMD cost stays bounded; each block is
    decomposed, screened against its slice of the IMU track and rebuilt
    from the surviving modes.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    block = int(round(block_s * fs))
    overlap = int(round(overlap_s * fs))
    if block <= 2 * overlap:
        raise ValueError("block_s must comfortably exceed overlap_s")

    if n <= block:
        starts = [0]
    else:
        step = block - overlap
        starts = list(range(0, n - block, step))
        starts.append(n - block)  # final block flush with the signal end

    clean = np.zeros(n)
    weight = np.zeros(n)
    reports: list[MotionCorrelation] = []
    for start in starts:
        stop = min(n, start + block)
        seg = x[start:stop]
        res = vmd_decompose(seg, fs, **vmd_kwargs)
        i0 = int(round(start / fs * imu_rate))
        i1 = max(i0 + 2, int(round(stop / fs * imu_rate)))
        corr = motion_correlation(res, accel[:, i0:i1], imu_rate, threshold)
        reports.append(corr)
        rebuilt = reconstruct_excluding_motion(res, corr)

        w = np.ones(len(seg))
        if len(starts) > 1 and overlap > 0:
            ramp = np.sin(0.5 * np.pi * np.arange(overlap) / overlap) ** 2
            if start != starts[0]:
                w[:overlap] = ramp
            if start != starts[-1]:
                w[-overlap:] = ramp[::-1]
        clean[start:stop] += rebuilt * w
        weight[start:stop] += w
    covered = weight > 0
    clean[covered] /= weight[covered]
    return clean, reports
