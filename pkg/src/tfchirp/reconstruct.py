"""Mode reconstruction from ridge estimates.

At each frame the K transform samples taken at the ridge coordinates are a
mixing of the K component values through the window's joint
frequency-chirp transform evaluated at ridge differences; solving that K x K
system frame by frame recovers the components.  A band-integration baseline
around a single frequency ridge of a squeezed STFT is also provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ReconstructionError, UnsupportedWindowError
from .ridge import RidgeSet
from .signal import Signal, WindowBank, WindowFamily
from .transform import TfMatrix, g_check

COND_LIMIT = 1e6


@dataclass(frozen=True)
class MixingSystem:
    """K x K ridge-coupling matrix and the transform samples at the ridges."""

    A: np.ndarray
    x_hat: np.ndarray
    condition: float


@dataclass(frozen=True)
class ReconstructedModes:
    """Per-component complex series aligned with the input signal."""

    modes: np.ndarray  # [K, n_time]
    valid: np.ndarray  # [K, n_time] bool; False where a frame was skipped
    degraded: np.ndarray  # [n_time] bool; True where the solve was ill-conditioned


class CtRidgeEvaluator:
    """Chirplet transform of one signal at exact (freq, chirp) coordinates.

    Evaluates the windowed sum directly at the requested off-grid points
    (center-referenced phases, integral scaling), so reconstruction carries
    no grid-quantization bias.
    """

    def __init__(self, signal: Signal, bank: WindowBank):
        if abs(bank.dt_s * signal.sample_rate_hz - 1.0) > 1e-9:
            raise ParameterError("window bank dt_s does not match the signal sample rate")
        self._half_len = bank.half_len
        self._offsets = bank.offsets_s
        self._window = bank.h
        self._dt = signal.dt_s
        n = len(signal)
        self._padded = np.zeros(n + 2 * bank.half_len, dtype=np.complex128)
        self._padded[bank.half_len : bank.half_len + n] = signal.samples
        self.n_time = n

    def __call__(self, frame: int, freq_hz, chirp_hzps):
        """CT values at one frame; freq/chirp may be arrays of equal shape."""
        freq_hz = np.atleast_1d(np.asarray(freq_hz, dtype=float))
        chirp_hzps = np.atleast_1d(np.asarray(chirp_hzps, dtype=float))
        seg = self._padded[frame : frame + 2 * self._half_len + 1]
        u = self._offsets
        phase = np.exp(
            -2j * np.pi * freq_hz[:, None] * u[None, :]
            - 1j * np.pi * chirp_hzps[:, None] * u[None, :] ** 2
        )
        return (phase * (self._window * seg)[None, :]).sum(axis=1) * self._dt


def build_mixing_system(
    omega_hz: np.ndarray,
    mu_hzps: np.ndarray,
    ct_at: CtRidgeEvaluator,
    frame: int,
    family: WindowFamily,
) -> MixingSystem:
    """Mixing system of one frame from ridge coordinates.

    ``A[i, j] = g_check(omega_i - omega_j, mu_i - mu_j)``; the diagonal is
    g_check(0, 0).  ``x_hat`` holds the CT samples at the ridge points.
    """
    omega_hz = np.asarray(omega_hz, dtype=float)
    mu_hzps = np.asarray(mu_hzps, dtype=float)
    if omega_hz.shape != mu_hzps.shape or omega_hz.ndim != 1:
        raise ParameterError("ridge coordinate arrays must be 1-d and equal length")
    if not (np.all(np.isfinite(omega_hz)) and np.all(np.isfinite(mu_hzps))):
        raise ParameterError("ridge coordinates must be finite")
    dxi = omega_hz[:, None] - omega_hz[None, :]
    dlam = mu_hzps[:, None] - mu_hzps[None, :]
    A = g_check(family, dxi, dlam)
    x_hat = ct_at(frame, omega_hz, mu_hzps)
    return MixingSystem(A=A, x_hat=x_hat, condition=float(np.linalg.cond(A)))


def reconstruct_modes(
    signal: Signal,
    ridges: RidgeSet,
    family: WindowFamily,
    bank: WindowBank,
) -> ReconstructedModes:
    """Solve the per-frame mixing system along the ridge curves.

    Frames where any ridge value is invalid are skipped (zeros, valid False).
    Frames whose system condition exceeds 1e6 fall back to the least-squares
    pseudo-solution and are flagged degraded.
    """
    ct_at = CtRidgeEvaluator(signal, bank)
    K = ridges.n_components
    n = ridges.n_time
    if n != len(signal):
        raise ParameterError("ridge set does not span the signal")
    modes = np.zeros((K, n), dtype=np.complex128)
    valid = np.zeros((K, n), dtype=bool)
    degraded = np.zeros(n, dtype=bool)
    solved = 0
    for frame in range(n):
        if not ridges.valid[:, frame].all():
            continue
        system = build_mixing_system(
            ridges.omega_hz[:, frame], ridges.mu_hzps[:, frame], ct_at, frame, family
        )
        if system.condition > COND_LIMIT or not np.isfinite(system.condition):
            sol = np.linalg.lstsq(system.A, system.x_hat, rcond=None)[0]
            degraded[frame] = True
        else:
            sol = np.linalg.solve(system.A, system.x_hat)
        modes[:, frame] = sol
        valid[:, frame] = True
        if not degraded[frame]:
            solved += 1
    if valid.any() and solved == 0:
        raise ReconstructionError("every frame was degraded")
    if not valid.any():
        raise ReconstructionError("no frame had a full set of valid ridges")
    return ReconstructedModes(modes=modes, valid=valid, degraded=degraded)


def sst_band_reconstruct(
    squeezed: TfMatrix,
    ridge_hz: np.ndarray,
    delta_hz: float,
    family: WindowFamily,
) -> np.ndarray:
    """Band integral of a squeezed STFT around one frequency ridge.

    Sums the squeezed coefficients within ``delta_hz`` of the ridge per
    frame and divides by the window's center value (with the discrete
    normalization folded in), recovering the analytic component the band
    captures.  The frequency comb of the discrete sum sees the window
    periodized with period 2M samples, so the center value is the
    periodization sum g(0) + 2*g(2M*dt) + ... rather than g(0) alone; the
    terms beyond g(0) only matter for windows longer than 2M samples.
    """
    g0 = float(family.g(np.zeros(1))[0])
    if g0 == 0.0:
        raise UnsupportedWindowError("window vanishes at the origin; band reconstruction undefined")
    grid = squeezed.grid
    period_s = 2 * grid.M / grid.sample_rate_hz
    g_center = g0
    for k in range(1, 1000):
        tail = float(family.g(np.array([k * period_s]))[0])
        g_center += 2 * tail
        if abs(tail) < 1e-15 * abs(g0):
            break
    ridge_hz = np.asarray(ridge_hz, dtype=float)
    if ridge_hz.shape != (grid.n_time,):
        raise ParameterError("ridge curve must give one frequency per frame")
    in_band = np.abs(grid.freqs_hz[:, None] - ridge_hz[None, :]) <= delta_hz
    return (squeezed.values * in_band).sum(axis=0) / (2 * grid.M * g_center)
