"""Conditioning applied to every channel before decomposition.

The chain is mains notch, linear detrend, robust outlier interpolation and
an optional zero-phase band-pass.  Electrode impedance screening lives here
too since it gates whether a channel is usable at all.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sps

from .signals import ChannelRole, Recording


@dataclass(frozen=True)
class PreprocessConfig:
    mains_hz: float = 60.0
    notch_q: float = 35.0
    outlier_sigma: float = 6.0
    bandpass_hz: tuple[float, float] | None = None


def notch_filter(x: np.ndarray, fs: float, mains_hz: float = 60.0, q: float = 35.0) -> np.ndarray:
    """Zero-phase second-order IIR notch at the mains frequency."""
    if not 0 < mains_hz < fs / 2:
        raise ValueError(f"mains frequency {mains_hz} Hz outside (0, {fs / 2})")
    b, a = sps.iirnotch(mains_hz, q, fs=fs)
    return sps.filtfilt(b, a, np.asarray(x, dtype=np.float64))


def detrend_linear(x: np.ndarray) -> np.ndarray:
    """Remove the least-squares straight line; idempotent."""
    return sps.detrend(np.asarray(x, dtype=np.float64), type="linear")


def outlier_clip(x: np.ndarray, sigma: float = 6.0) -> np.ndarray:
    """Replace samples far from the median with linear interpolation.

    A sample is an outlier when |x - median| exceeds ``sigma`` robust
    standard deviations, the robust deviation being 1.4826 * MAD.  Flagged
    samples are rebuilt by interpolating between the nearest inliers;
    flagged runs at either edge take the nearest inlier's value.  A constant
    signal (MAD = 0) passes through untouched.
    """
    x = np.asarray(x, dtype=np.float64)
    med = np.median(x)
    mad = np.median(np.abs(x - med))
    robust_sd = 1.4826 * mad
    if robust_sd == 0.0:
        return x.copy()
    bad = np.abs(x - med) > sigma * robust_sd
    if not bad.any():
        return x.copy()
    good = ~bad
    if not good.any():
        raise ValueError("every sample flagged as outlier; signal is degenerate")
    idx = np.arange(len(x))
    out = x.copy()
    out[bad] = np.interp(idx[bad], idx[good], x[good])
    return out


def bandpass_filter(x: np.ndarray, fs: float, lo: float, hi: float) -> np.ndarray:
    """4th-order Butterworth band-pass applied forward-backward (zero phase)."""
    if not 0 < lo < hi < fs / 2:
        raise ValueError(f"band [{lo}, {hi}] Hz invalid for fs={fs}")
    sos = sps.butter(4, [lo, hi], btype="band", fs=fs, output="sos")
    return sps.sosfiltfilt(sos, np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class ImpedanceReading:
    """Electrode-skin impedance estimate from an injected test current."""

    z_ohm: float
    in_range: bool


def electrode_impedance(
    v_rms: float,
    i_amp: float = 6e-9,
    series_r_ohm: float = 5000.0,
    z_max_ohm: float = 5000.0,
) -> ImpedanceReading:
    """Impedance from the RMS voltage measured across the electrode pair.

    Z = v_rms * sqrt(2) / i_amp - series_r_ohm.  A negative estimate means
    the measured voltage is below the series resistor's own drop, which is
    a hardware fault rather than a valid reading.
    """
    if i_amp <= 0:
        raise ValueError("test current must be positive")
    if v_rms < 0:
        raise ValueError("v_rms must be nonnegative")
    z = v_rms * np.sqrt(2.0) / i_amp - series_r_ohm
    if z < -1e-6 * series_r_ohm:
        raise ValueError(f"impedance estimate {z:.1f} ohm is negative; check the front end")
    z = max(z, 0.0)
    return ImpedanceReading(z_ohm=float(z), in_range=bool(0.0 <= z <= z_max_ohm))


def preprocess_channel(x: np.ndarray, fs: float, cfg: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    y = notch_filter(x, fs, cfg.mains_hz, cfg.notch_q)
    y = detrend_linear(y)
    y = outlier_clip(y, cfg.outlier_sigma)
    if cfg.bandpass_hz is not None:
        y = bandpass_filter(y, fs, *cfg.bandpass_hz)
    return y


def preprocess_recording(rec: Recording, cfg: PreprocessConfig = PreprocessConfig()) -> Recording:
    """Apply the conditioning chain to every biopotential channel."""
    channels = {
        role: preprocess_channel(x, rec.sample_rate, cfg)
        for role, x in rec.channels.items()
    }
    return Recording(
        patient_id=rec.patient_id,
        sample_rate=rec.sample_rate,
        channels=channels,
        imu=None if rec.imu is None else rec.imu.copy(),
        imu_rate=rec.imu_rate,
        annotations=list(rec.annotations),
    )
