"""Core data types: signals, analytic window banks, and the TFC grid.

All arrays are 0-based.  Frequency bin ``m`` of a grid covers
``m / (2M) * fs`` Hz for ``m = 0..M``, and chirp-rate slot ``l`` covers
``(l - (M - 1)) * fs**2 / (4 M**2)`` Hz/s for ``l = 0..2M-1``, so the slot
``l = M - 1`` is the zero-chirp slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, RangeError

# Half-window policy: ceil(4.3 / sqrt(alpha_w) / dt) samples puts the Gaussian
# factor at the window edge far below 1e-8 of its peak, so truncation is
# invisible at float32 scale.
HALF_LEN_FACTOR = 4.3


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled complex (or real) time series."""

    samples: np.ndarray
    sample_rate_hz: float
    t0_s: float = 0.0

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size < 2:
            raise ParameterError("signal must be a 1-d series of length >= 2")
        if not np.all(np.isfinite(samples.view(np.float64))):
            raise ParameterError("signal samples must be finite")
        if not (self.sample_rate_hz > 0):
            raise ParameterError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)
        samples.flags.writeable = False

    def __len__(self):
        return self.samples.size

    @property
    def dt_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def times_s(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.sample_rate_hz


@dataclass(frozen=True)
class WindowFamily:
    """Window ``g(x) = x**n * exp(-pi * alpha_w * x**2)``."""

    n: int = 0
    alpha_w: float = 1.0
    kind: str = "gaussian_power"

    def __post_init__(self):
        if self.kind != "gaussian_power":
            raise ParameterError(f"unknown window kind {self.kind!r}")
        if not (self.alpha_w > 0):
            raise ParameterError("alpha_w must be positive")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 0):
            raise ParameterError("n must be a nonnegative integer")

    def g(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self._poly_term(x, self.n) * np.exp(-np.pi * self.alpha_w * x * x)

    def g_prime(self, x: np.ndarray) -> np.ndarray:
        """d/dx of g, in closed form."""
        x = np.asarray(x, dtype=float)
        n, a = self.n, self.alpha_w
        poly = n * self._poly_term(x, n - 1) - 2 * np.pi * a * self._poly_term(x, n + 1)
        return poly * np.exp(-np.pi * a * x * x)

    def g_second(self, x: np.ndarray) -> np.ndarray:
        """d2/dx2 of g, in closed form."""
        x = np.asarray(x, dtype=float)
        n, a = self.n, self.alpha_w
        poly = (
            n * (n - 1) * self._poly_term(x, n - 2)
            - 2 * np.pi * a * (2 * n + 1) * self._poly_term(x, n)
            + 4 * np.pi**2 * a**2 * self._poly_term(x, n + 2)
        )
        return poly * np.exp(-np.pi * a * x * x)

    @staticmethod
    def _poly_term(x, power):
        # x**power with the convention 0**0 == 1; negative powers only occur
        # with a zero coefficient and must not be evaluated.
        if power < 0:
            return np.zeros_like(x)
        if power == 0:
            return np.ones_like(x)
        return x**power

    def default_half_len(self, dt_s: float) -> int:
        return int(math.ceil(HALF_LEN_FACTOR / math.sqrt(self.alpha_w) / dt_s))


@dataclass(frozen=True)
class WindowBank:
    """A window and its five companions sampled on a symmetric grid.

    ``h``, ``th``, ``t2h`` hold exact samples of ``g``, ``x*g``, ``x**2*g``
    and ``h_prime``, ``h_second``, ``th_prime`` exact samples of ``g'``,
    ``g''``, ``x*g'`` at ``x = j*dt_s`` for ``j = -half_len..half_len``.
    Derivatives come from the closed forms, never from differencing.
    """

    family: WindowFamily
    half_len: int
    dt_s: float
    h: np.ndarray = field(repr=False, default=None)
    h_prime: np.ndarray = field(repr=False, default=None)
    h_second: np.ndarray = field(repr=False, default=None)
    th: np.ndarray = field(repr=False, default=None)
    th_prime: np.ndarray = field(repr=False, default=None)
    t2h: np.ndarray = field(repr=False, default=None)

    @property
    def length(self) -> int:
        return 2 * self.half_len + 1

    @property
    def offsets_s(self) -> np.ndarray:
        return np.arange(-self.half_len, self.half_len + 1) * self.dt_s

    def sequences(self) -> dict:
        return {
            "h": self.h,
            "h_prime": self.h_prime,
            "h_second": self.h_second,
            "th": self.th,
            "th_prime": self.th_prime,
            "t2h": self.t2h,
        }


def make_window_bank(family: WindowFamily, half_len: int, dt_s: float) -> WindowBank:
    """Sample a window family and its companions analytically.

    ``half_len`` is the number of samples on each side of the center; pass
    ``family.default_half_len(dt_s)`` for the library's truncation policy.
    """
    if half_len < 1:
        raise ParameterError("half_len must be >= 1")
    if not (dt_s > 0):
        raise ParameterError("dt_s must be positive")
    x = np.arange(-half_len, half_len + 1) * dt_s
    g = family.g(x)
    gp = family.g_prime(x)
    bank = WindowBank(
        family=family,
        half_len=half_len,
        dt_s=dt_s,
        h=g,
        h_prime=gp,
        h_second=family.g_second(x),
        th=x * g,
        th_prime=x * gp,
        t2h=x * x * g,
    )
    for seq in bank.sequences().values():
        seq.flags.writeable = False
    return bank


@dataclass(frozen=True)
class TfcGrid:
    """Discrete time-frequency-chirp-rate grid.

    ``M = floor(0.5 / alpha_sq)`` sets ``M + 1`` frequency bins covering
    ``[0, fs/2]`` and ``2M`` chirp-rate bins covering chirp indices
    ``-(M-1)..M`` in steps of ``fs**2 / (4 M**2)`` Hz/s.
    """

    alpha_sq: float
    M: int
    n_time: int
    sample_rate_hz: float

    @property
    def n_freq(self) -> int:
        return self.M + 1

    @property
    def n_chirp(self) -> int:
        return 2 * self.M

    @property
    def freq_step_hz(self) -> float:
        return self.sample_rate_hz / (2 * self.M)

    @property
    def chirp_step_hzps(self) -> float:
        return self.sample_rate_hz**2 / (4 * self.M**2)

    @property
    def chirp_indices(self) -> np.ndarray:
        """Signed chirp index for each chirp slot (zero chirp at slot M-1)."""
        return np.arange(-(self.M - 1), self.M + 1)

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.arange(self.n_freq) * self.freq_step_hz

    @property
    def chirps_hzps(self) -> np.ndarray:
        return self.chirp_indices * self.chirp_step_hzps

    def freq_hz(self, m: int) -> float:
        return m * self.freq_step_hz

    def chirp_hzps(self, l: int) -> float:
        return (l - (self.M - 1)) * self.chirp_step_hzps


def grid_from_resolution(alpha_sq: float, n_time: int, sample_rate_hz: float) -> TfcGrid:
    """Build the TFC grid for a squeezing resolution ``alpha_sq``."""
    if not (0 < alpha_sq <= 0.5):
        raise ParameterError("alpha_sq must lie in (0, 0.5]")
    if n_time < 1:
        raise ParameterError("n_time must be >= 1")
    if not (sample_rate_hz > 0):
        raise ParameterError("sample_rate_hz must be positive")
    M = int(math.floor(0.5 / alpha_sq))
    return TfcGrid(alpha_sq=alpha_sq, M=M, n_time=n_time, sample_rate_hz=sample_rate_hz)


def round_half_away(x):
    """Deterministic round-half-away-from-zero (scalar or array)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def physical_to_bin(grid: TfcGrid, freq_hz: float, chirp_hzps: float) -> tuple:
    """Map physical (frequency, chirp rate) to the nearest (m, l) bin pair."""
    m = int(round_half_away(freq_hz / grid.freq_step_hz))
    l_signed = int(round_half_away(chirp_hzps / grid.chirp_step_hzps))
    if not (0 <= m < grid.n_freq):
        raise RangeError(f"frequency {freq_hz} Hz outside [0, fs/2]")
    if not (-(grid.M - 1) <= l_signed <= grid.M):
        raise RangeError(f"chirp rate {chirp_hzps} Hz/s outside grid")
    return m, l_signed + grid.M - 1


def bin_to_physical(grid: TfcGrid, m: int, l: int) -> tuple:
    """Map a (m, l) bin pair to its physical (frequency, chirp rate) center."""
    if not (0 <= m < grid.n_freq):
        raise RangeError(f"frequency bin {m} out of range")
    if not (0 <= l < grid.n_chirp):
        raise RangeError(f"chirp bin {l} out of range")
    return grid.freq_hz(m), grid.chirp_hzps(l)
