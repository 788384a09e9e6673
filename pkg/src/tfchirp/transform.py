"""Discrete chirplet transform, STFT baseline, and analytic oracles.

The discrete transform of a length-N signal against a window of 2K+1 samples
is, for chirp index l, frequency bin m and frame n,

    T[l, m, n] = sum_k f[n + k - K] * h[k] *
                 exp(-2j*pi * p(k) * m / (2M)) * exp(-1j*pi * l * p(k)**2 / (4M**2))

with f zero outside its support and k = 0..2K.  Two phase references are
supported: ``convention="centered"`` uses ``p(k) = k - K`` (the window
center), ``convention="left"`` uses ``p(k) = k``, i.e. phases accumulated
from the left window edge.  The centered form samples the continuous
transform on the (frequency x chirp-rate) product grid and is the default;
the left-edge form evaluates each chirp slice on a frequency axis sheared by
``chirp_rate * half_len * dt`` and is kept for compatibility with
discretizations written that way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.integrate import quad
from scipy.special import fresnel

from .errors import ParameterError, ShapeError, UnsupportedWindowError
from .signal import Signal, TfcGrid, WindowBank, WindowFamily

CONVENTIONS = ("centered", "left")


@dataclass(frozen=True)
class TfcTensor:
    """Complex TFC volume of shape [n_chirp, n_freq, n_time]."""

    values: np.ndarray
    grid: TfcGrid
    convention: str = "centered"

    def __post_init__(self):
        expected = (self.grid.n_chirp, self.grid.n_freq, self.grid.n_time)
        if self.values.shape != expected:
            raise ShapeError(f"tensor shape {self.values.shape} != grid shape {expected}")
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"unknown convention {self.convention!r}")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class TfMatrix:
    """Time-frequency matrix of shape [n_freq, n_time]."""

    values: np.ndarray
    grid: TfcGrid

    def __post_init__(self):
        expected = (self.grid.n_freq, self.grid.n_time)
        if self.values.shape != expected:
            raise ShapeError(f"matrix shape {self.values.shape} != grid shape {expected}")


@dataclass(frozen=True)
class BankTensors:
    """The six chirplet transforms of one signal against a window bank."""

    h: TfcTensor
    h_prime: TfcTensor
    h_second: TfcTensor
    th: TfcTensor
    th_prime: TfcTensor
    t2h: TfcTensor
    bank: WindowBank
    grid: TfcGrid
    convention: str


def _check_transform_args(signal: Signal, window: np.ndarray, grid: TfcGrid):
    if grid.n_time != len(signal):
        raise ShapeError(f"grid.n_time={grid.n_time} != signal length {len(signal)}")
    window = np.asarray(window, dtype=float)
    if window.ndim != 1 or window.size % 2 != 1:
        raise ParameterError("window must be a 1-d sequence of odd length")
    return window


def _phase_matrix(grid: TfcGrid, half_len: int, convention: str) -> np.ndarray:
    """exp factors of shape [n_chirp * n_freq, 2K+1], window not included."""
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown convention {convention!r}")
    M = grid.M
    k = np.arange(2 * half_len + 1)
    p = k - half_len if convention == "centered" else k
    m = np.arange(grid.n_freq)
    l = grid.chirp_indices
    freq_phase = np.exp(-2j * np.pi * np.outer(m, p) / (2 * M))  # [n_freq, 2K+1]
    chirp_phase = np.exp(-1j * np.pi * np.outer(l, p**2) / (4 * M**2))  # [n_chirp, 2K+1]
    E = chirp_phase[:, None, :] * freq_phase[None, :, :]
    return E.reshape(grid.n_chirp * grid.n_freq, k.size)


def _padded_segments(signal: Signal, half_len: int) -> np.ndarray:
    """Matrix S[k, n] = f[n + k - K] with zero padding, shape [2K+1, N]."""
    n = len(signal)
    fp = np.zeros(n + 2 * half_len, dtype=np.complex128)
    fp[half_len : half_len + n] = signal.samples
    return sliding_window_view(fp, n)  # row k is fp[k : k + n]


def chirplet_transform(
    signal: Signal, window: np.ndarray, grid: TfcGrid, convention: str = "centered"
) -> TfcTensor:
    """Chirplet transform of a signal against one window sequence.

    Direct summation over the window support (one complex matmul per call);
    no FFT factorization.  Output entries are plain sums, i.e. carry a 1/dt
    scale relative to the continuous-integral transform.
    """
    window = _check_transform_args(signal, window, grid)
    half_len = (window.size - 1) // 2
    E = _phase_matrix(grid, half_len, convention) * window[None, :]
    S = _padded_segments(signal, half_len)
    values = (E @ S).reshape(grid.n_chirp, grid.n_freq, grid.n_time)
    return TfcTensor(values=values, grid=grid, convention=convention)


def chirplet_bank_transform(
    signal: Signal,
    bank: WindowBank,
    grid: TfcGrid,
    convention: str = "centered",
    companion_dtype=None,
) -> BankTensors:
    """All six bank transforms, sharing one phase matrix.

    ``companion_dtype`` (e.g. ``np.complex64``) stores the five companion
    tensors at reduced precision; the reassignment ratios they feed only
    need a handful of digits, and halving them keeps large grids in memory.
    The main tensor stays complex128.
    """
    if abs(bank.dt_s * signal.sample_rate_hz - 1.0) > 1e-9:
        raise ShapeError("window bank dt_s does not match the signal sample rate")
    half_len = bank.half_len
    E = _phase_matrix(grid, half_len, convention)
    S = _padded_segments(signal, half_len)
    names = ("h", "h_prime", "h_second", "th", "th_prime", "t2h")
    windows = bank.sequences()
    shape = (grid.n_chirp, grid.n_freq, grid.n_time)
    tensors = {}
    for name in names:
        out = (E @ (windows[name][:, None] * S)).reshape(shape)
        if name != "h" and companion_dtype is not None:
            out = out.astype(companion_dtype)
        tensors[name] = TfcTensor(out, grid, convention)
    return BankTensors(bank=bank, grid=grid, convention=convention, **tensors)


def stft(
    signal: Signal, window: np.ndarray, grid: TfcGrid, convention: str = "centered"
) -> TfMatrix:
    """Short-time Fourier transform: the zero-chirp slice of the same sum."""
    window = _check_transform_args(signal, window, grid)
    half_len = (window.size - 1) // 2
    M = grid.M
    k = np.arange(2 * half_len + 1)
    p = k - half_len if convention == "centered" else k
    E = np.exp(-2j * np.pi * np.outer(np.arange(grid.n_freq), p) / (2 * M)) * window[None, :]
    values = E @ _padded_segments(signal, half_len)
    return TfMatrix(values=values, grid=grid)


def project_tfc_to_tf(tensor: TfcTensor) -> TfMatrix:
    """Project |T| onto the TF plane: Riemann sum over the chirp-rate axis."""
    values = np.abs(tensor.values).sum(axis=0) * tensor.grid.chirp_step_hzps
    return TfMatrix(values=values, grid=tensor.grid)


# ---------------------------------------------------------------------------
# Closed forms


def analytic_ct_linear_chirp(xi0, lambda0, alpha_w, t, xi, lam):
    """Continuous chirplet transform of exp(2i*pi*xi0*x + i*pi*lambda0*x^2)
    with window exp(-pi*alpha_w*x^2), principal square root."""
    if not np.all(np.asarray(alpha_w) > 0):
        raise ParameterError("alpha_w must be positive")
    z = alpha_w + 1j * (np.asarray(lam) - lambda0)
    head = np.exp(2j * np.pi * xi0 * np.asarray(t) + 1j * np.pi * lambda0 * np.asarray(t) ** 2)
    shift = np.asarray(xi) - xi0 - lambda0 * np.asarray(t)
    return head / np.sqrt(z) * np.exp(-np.pi * shift**2 / z)


def analytic_ct_linear_chirp_mag(xi0, lambda0, alpha_w, t, xi, lam):
    """Magnitude of the above: (a^2+(l-l0)^2)^(-1/4) * gaussian in frequency."""
    d2 = alpha_w**2 + (np.asarray(lam) - lambda0) ** 2
    shift = np.asarray(xi) - xi0 - lambda0 * np.asarray(t)
    return d2**-0.25 * np.exp(-np.pi * alpha_w * shift**2 / d2)


def g_check(family: WindowFamily, xi, lam):
    """Joint frequency-chirp transform of x**n * exp(-pi*alpha*x**2), n<=2.

    g_check(xi, lam) = integral g(x) exp(-2i*pi*xi*x) exp(-i*pi*lam*x^2) dx.
    """
    if family.n not in (0, 1, 2):
        raise UnsupportedWindowError("closed form implemented for n in {0, 1, 2}")
    xi = np.asarray(xi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    z = family.alpha_w + 1j * lam
    base = np.exp(-np.pi * xi**2 / z) / np.sqrt(z)
    if family.n == 0:
        return base
    if family.n == 1:
        return -1j * xi / z * base
    return (1.0 / (2 * np.pi * z) - xi**2 / z**2) * base


def chirp_transform_1d(f, lam: float, support: tuple, rtol: float = 1e-9) -> complex:
    """Quadrature of integral f(x) * exp(-1j*pi*lam*x**2) dx over a support.

    ``f`` is a callable.  For large ``lam`` the quadratic phase is absorbed
    by the substitution u = x**2 on each side of the origin, which turns the
    integrand into a linearly oscillating one that scipy's weighted
    Clenshaw-Curtis rule handles at any frequency.
    """
    a, b = support
    if not (a < b):
        raise ParameterError("support must satisfy a < b")
    lam = float(lam)
    if abs(lam) < 1e-12:
        re = quad(lambda x: np.real(f(x)), a, b, limit=400)[0]
        im = quad(lambda x: np.imag(f(x)), a, b, limit=400)[0]
        return complex(re, im)

    omega = np.pi * lam

    tol = dict(epsabs=1e-13, epsrel=1e-10)

    def one_side(fn, upper):
        # integral_0^upper fn(x) exp(-1j*omega*x^2) dx, upper > 0
        total = 0.0 + 0.0j
        # near the origin the phase turns by at most ~pi: plain quadrature
        x_split = min(upper, 1.0 / np.sqrt(abs(lam)))
        total += complex(
            quad(lambda x: np.real(fn(x) * np.exp(-1j * omega * x * x)), 0.0, x_split, limit=200, **tol)[0],
            quad(lambda x: np.imag(fn(x) * np.exp(-1j * omega * x * x)), 0.0, x_split, limit=200, **tol)[0],
        )
        if x_split < upper:
            # u = x^2: integral fn(sqrt(u)) / (2 sqrt(u)) exp(-1j*omega*u) du
            def gu(u):
                su = np.sqrt(u)
                return fn(su) / (2.0 * su)

            u_lo, u_hi = x_split**2, upper**2
            kw = dict(wvar=omega, limit=2000, maxp1=200, **tol)
            c = quad(lambda u: np.real(gu(u)), u_lo, u_hi, weight="cos", **kw)[0]
            s = quad(lambda u: np.real(gu(u)), u_lo, u_hi, weight="sin", **kw)[0]
            ci = quad(lambda u: np.imag(gu(u)), u_lo, u_hi, weight="cos", **kw)[0]
            si = quad(lambda u: np.imag(gu(u)), u_lo, u_hi, weight="sin", **kw)[0]
            # exp(-1j*omega*u) = cos(omega u) - 1j sin(omega u)
            total += complex(c + si, ci - s)
        return total

    total = 0.0 + 0.0j
    if b > 0:
        total += one_side(f, b)
    if a < 0:
        total += one_side(lambda x: f(-x), -a)
    if a > 0:  # support entirely right of the origin
        total -= one_side(f, a)
    if b < 0:  # entirely left
        total -= one_side(lambda x: f(-x), -b)
    return total


def fresnel_segment(a: float, b: float, lam: float) -> complex:
    """integral_a^b exp(-1j*pi*lam*x**2) dx via the Fresnel integrals."""
    if lam <= 0:
        raise ParameterError("lam must be positive")
    s = np.sqrt(2.0 * lam)

    def antider(x):
        sv, cv = fresnel(x * s)
        return (cv - 1j * sv) / s

    return complex(antider(b) - antider(a))


def ct_quadrature(signal_fn, window_fn, t, xi, lam, half_width: float, rtol=1e-10) -> complex:
    """Adaptive quadrature of the continuous chirplet transform.

    Independent oracle for the discrete path: integrates
    f(x) g(x-t) exp(-2i pi xi (x-t)) exp(-i pi lam (x-t)^2) over
    |x - t| <= half_width.
    """

    def integrand(u):
        return signal_fn(t + u) * window_fn(u) * np.exp(-2j * np.pi * xi * u - 1j * np.pi * lam * u * u)

    re = quad(lambda u: np.real(integrand(u)), -half_width, half_width, limit=800, epsabs=1e-13, epsrel=rtol)[0]
    im = quad(lambda u: np.imag(integrand(u)), -half_width, half_width, limit=800, epsabs=1e-13, epsrel=rtol)[0]
    return complex(re, im)
