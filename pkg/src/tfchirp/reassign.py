"""Reassignment operators, the squeezing step, and the SST baselines.

The frequency and chirp-rate estimates are computed from ratios of bank
transforms only (no numerical differentiation).  With T = T^h, T1 = T^{h'},
T2 = T^{h''}, U = T^{th}, U1 = T^{th'}, V = T^{t2h} and a = 2j*pi*lam at the
chirp rate ``lam`` of the evaluated slot:

    M1 = T*T2 - 2a*T*U1 - a*T^2 + a^2*T*V - T1^2 - a^2*U^2 + 2a*T1*U
    M2 = 2j*pi * (-T*U1 + a*T*V + U*T1 - a*U^2)

    mu    = Re(M1 / M2)                                  [Hz/s]
    omega = freq(m) + Im(-T1/(2*pi*T) + 1j*(lam - M1/M2) * U/T)   [Hz]

On an exact linear chirp both estimates are exact wherever defined.  Entries
are marked undefined (NaN, with ``defined`` False) in three cases: |T| at or
below the threshold; |M2| < 1e-12*|M1| (the degenerate denominator the
accuracy guarantee excludes); and slots whose chirped atom is undersampled,
i.e. the atom's instantaneous frequency m/(2M) + lam*j leaves the Nyquist
band over a non-negligible part of the window support, where the quadratic
phase aliases and the ratio estimates turn into noise.  Downstream consumers
only ever read entries with ``defined`` True.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .signal import Signal, TfcGrid, WindowBank, round_half_away
from .transform import BankTensors, TfcTensor, TfMatrix, _padded_segments

M2_GUARD = 1e-12
DEFAULT_NU_REL = 1e-4
ALIAS_TOL = 1e-3


@dataclass(frozen=True)
class ReassignmentField:
    """Per-entry frequency/chirp-rate estimates with a validity mask."""

    omega: np.ndarray  # Hz, NaN where undefined
    mu: np.ndarray  # Hz/s, NaN where undefined
    defined: np.ndarray  # bool
    nu: float
    grid: TfcGrid

    def __post_init__(self):
        shape = (self.grid.n_chirp, self.grid.n_freq, self.grid.n_time)
        for name in ("omega", "mu", "defined"):
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} shape does not match grid")


@dataclass(frozen=True)
class SqueezeParams:
    """Knobs of the squeezing step; reassignments leaving the grid are dropped."""

    nu: float = 0.0
    out_of_range: str = "drop"

    def __post_init__(self):
        if self.out_of_range != "drop":
            raise ParameterError("only the 'drop' out-of-range policy is supported")


def default_threshold(tensor_h: TfcTensor, rel: float = DEFAULT_NU_REL) -> float:
    """Scale-free default threshold: a small fraction of the peak magnitude.

    An all-zero volume has no workable scale; the threshold degenerates to
    +inf so that every entry is undefined and the squeeze of silence is
    silence.
    """
    peak = float(np.abs(tensor_h.values).max())
    return rel * peak if peak > 0 else np.inf


def _mu_omega(T, T1, T2, U, U1, V, lam, freqs, nu):
    """Reassignment estimates for one block; lam/freqs broadcast over it."""
    T = np.asarray(T, dtype=np.complex128)
    T1 = np.asarray(T1, dtype=np.complex128)
    T2 = np.asarray(T2, dtype=np.complex128)
    U = np.asarray(U, dtype=np.complex128)
    U1 = np.asarray(U1, dtype=np.complex128)
    V = np.asarray(V, dtype=np.complex128)
    a = 2j * np.pi * lam
    TT = T * T
    UU = U * U
    m1 = T * T2 - 2 * a * T * U1 - a * TT + a * a * T * V - T1 * T1 - a * a * UU + 2 * a * T1 * U
    m2 = 2j * np.pi * (-T * U1 + a * T * V + U * T1 - a * UU)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = m1 / m2
        mu = ratio.real
        corr = -T1 / (2 * np.pi * T) + 1j * (lam - ratio) * U / T
        omega = freqs + corr.imag
    defined = (np.abs(T) > nu) & (np.abs(m2) >= M2_GUARD * np.abs(m1))
    defined &= np.isfinite(mu) & np.isfinite(omega)
    mu = np.where(defined, mu, np.nan)
    omega = np.where(defined, omega, np.nan)
    return mu, omega, defined


def resolvable_slots(grid: TfcGrid, bank: WindowBank, tol: float = ALIAS_TOL) -> np.ndarray:
    """Boolean [n_chirp, n_freq] map of slots whose atom the window resolves.

    A slot is resolvable when the window mass carried by samples where the
    atom's instantaneous frequency lies outside [-1/2, 1/2] cycles/sample is
    at most ``tol`` of the total window mass.
    """
    j = np.arange(-bank.half_len, bank.half_len + 1)
    w = np.abs(bank.h)
    total = w.sum()
    nu_atom = (
        grid.chirp_indices[:, None, None] / (4 * grid.M**2) * j[None, None, :]
        + (np.arange(grid.n_freq) / (2 * grid.M))[None, :, None]
    )
    aliased = (np.abs(nu_atom) > 0.5) @ w
    return aliased <= tol * total


def reassignment_field(
    banks: BankTensors, nu: float | None = None, alias_tol: float = ALIAS_TOL
) -> ReassignmentField:
    """Frequency and chirp-rate reassignment estimates over a TFC volume.

    ``nu`` is the hard modulus threshold below which entries are undefined;
    ``None`` applies the relative default against the peak of ``banks.h``.
    """
    grid = banks.grid
    shapes = {t.values.shape for t in (banks.h, banks.h_prime, banks.h_second, banks.th, banks.th_prime, banks.t2h)}
    if len(shapes) != 1:
        raise ShapeError("bank tensors disagree in shape")
    if nu is None:
        nu = default_threshold(banks.h)
    if not (nu > 0):
        raise ParameterError("nu must be positive")
    slot_ok = resolvable_slots(grid, banks.bank, alias_tol)[:, :, None]

    lam = grid.chirps_hzps[:, None, None]
    freqs = grid.freqs_hz[None, :, None]
    n_entries = grid.n_chirp * grid.n_freq
    block = max(1, (1 << 22) // n_entries)  # bound temporaries to a few tens of MB

    omega = np.empty((grid.n_chirp, grid.n_freq, grid.n_time))
    mu = np.empty_like(omega)
    defined = np.empty(omega.shape, dtype=bool)
    for lo in range(0, grid.n_time, block):
        sl = slice(lo, min(lo + block, grid.n_time))
        mu_b, om_b, def_b = _mu_omega(
            banks.h.values[:, :, sl],
            banks.h_prime.values[:, :, sl],
            banks.h_second.values[:, :, sl],
            banks.th.values[:, :, sl],
            banks.th_prime.values[:, :, sl],
            banks.t2h.values[:, :, sl],
            lam,
            freqs,
            nu,
        )
        if banks.convention == "left":
            # left-edge phase reference shears each chirp slice in frequency;
            # undo it so omega estimates the center-referenced IF
            om_b = om_b + lam * (banks.bank.half_len * banks.bank.dt_s)
        def_b &= slot_ok
        mu[:, :, sl] = np.where(def_b, mu_b, np.nan)
        omega[:, :, sl] = np.where(def_b, om_b, np.nan)
        defined[:, :, sl] = def_b
    return ReassignmentField(omega=omega, mu=mu, defined=defined, nu=float(nu), grid=grid)


def synchrosqueeze(
    tensor_h: TfcTensor, field: ReassignmentField, params: SqueezeParams | None = None
) -> TfcTensor:
    """Scatter T^h onto the bins nearest its reassigned coordinates.

    Every defined entry whose rounded (omega, mu) lands inside the grid
    contributes its complex value to exactly one output bin of the same
    frame, so per-frame complex mass is conserved over the contributing set.
    """
    grid = tensor_h.grid
    if field.grid is not grid and (
        field.grid.n_chirp != grid.n_chirp
        or field.grid.n_freq != grid.n_freq
        or field.grid.n_time != grid.n_time
    ):
        raise ShapeError("field and tensor grids disagree")
    sel = field.defined
    m_dest = round_half_away(field.omega[sel] / grid.freq_step_hz)
    l_dest = round_half_away(field.mu[sel] / grid.chirp_step_hzps) + (grid.M - 1)
    frames = np.broadcast_to(np.arange(grid.n_time), sel.shape)[sel]
    vals = tensor_h.values[sel]

    ok = (l_dest >= 0) & (l_dest < grid.n_chirp) & (m_dest >= 0) & (m_dest < grid.n_freq)
    flat = (l_dest[ok].astype(np.intp) * grid.n_freq + m_dest[ok].astype(np.intp)) * grid.n_time + frames[ok]
    out = np.zeros(grid.n_chirp * grid.n_freq * grid.n_time, dtype=np.complex128)
    np.add.at(out, flat, vals[ok])
    return TfcTensor(out.reshape(grid.n_chirp, grid.n_freq, grid.n_time), grid, tensor_h.convention)


def squeeze_conservation(tensor_h: TfcTensor, field: ReassignmentField, squeezed: TfcTensor) -> np.ndarray:
    """Per-frame |sum S - sum of contributing T| / max(|sum of contributing T|, eps)."""
    grid = tensor_h.grid
    m_dest = round_half_away(np.where(field.defined, field.omega, np.nan) / grid.freq_step_hz)
    l_dest = round_half_away(np.where(field.defined, field.mu, np.nan) / grid.chirp_step_hzps) + (grid.M - 1)
    with np.errstate(invalid="ignore"):
        contrib = (
            field.defined
            & (l_dest >= 0)
            & (l_dest < grid.n_chirp)
            & (m_dest >= 0)
            & (m_dest < grid.n_freq)
        )
    lhs = squeezed.values.sum(axis=(0, 1))
    rhs = np.where(contrib, tensor_h.values, 0).sum(axis=(0, 1))
    scale = np.maximum(np.abs(rhs), 1e-300)
    return np.abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# STFT-based SST baselines


def _stft_bank(signal: Signal, bank: WindowBank, grid: TfcGrid, convention: str, names) -> dict:
    half_len = bank.half_len
    M = grid.M
    k = np.arange(2 * half_len + 1)
    p = k - half_len if convention == "centered" else k
    E = np.exp(-2j * np.pi * np.outer(np.arange(grid.n_freq), p) / (2 * M))
    S = _padded_segments(signal, half_len)
    windows = bank.sequences()
    stacked = np.hstack([windows[name][:, None] * S for name in names])
    out = (E @ stacked).reshape(grid.n_freq, len(names), grid.n_time)
    return {name: np.ascontiguousarray(out[:, i, :]) for i, name in enumerate(names)}


def _squeeze_matrix(W: np.ndarray, omega: np.ndarray, defined: np.ndarray, grid: TfcGrid) -> np.ndarray:
    m_dest = round_half_away(omega[defined] / grid.freq_step_hz)
    frames = np.broadcast_to(np.arange(grid.n_time), defined.shape)[defined]
    vals = W[defined]
    ok = (m_dest >= 0) & (m_dest < grid.n_freq)
    flat = m_dest[ok].astype(np.intp) * grid.n_time + frames[ok]
    out = np.zeros(grid.n_freq * grid.n_time, dtype=np.complex128)
    np.add.at(out, flat, vals[ok])
    return out.reshape(grid.n_freq, grid.n_time)


def sst1(
    signal: Signal,
    bank: WindowBank,
    grid: TfcGrid,
    convention: str = "centered",
    nu: float | None = None,
) -> TfMatrix:
    """First-order synchrosqueezed STFT (frequency-axis squeeze only)."""
    mats = _stft_bank(signal, bank, grid, convention, ("h", "h_prime"))
    W, W1 = mats["h"], mats["h_prime"]
    if nu is None:
        nu = DEFAULT_NU_REL * np.abs(W).max()
    freqs = grid.freqs_hz[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = freqs + (-W1 / (2 * np.pi * W)).imag
    defined = (np.abs(W) > nu) & np.isfinite(omega)
    return TfMatrix(_squeeze_matrix(W, omega, defined, grid), grid)


def sst2(
    signal: Signal,
    bank: WindowBank,
    grid: TfcGrid,
    convention: str = "centered",
    nu: float | None = None,
) -> TfMatrix:
    """Second-order SST: the chirp-rate estimate corrects the squeeze target.

    Identical to the zero-chirp slice of the TFC reassignment rule, so on an
    exact linear chirp the reassigned frequency is exact.
    """
    names = ("h", "h_prime", "h_second", "th", "th_prime", "t2h")
    mats = _stft_bank(signal, bank, grid, convention, names)
    W = mats["h"]
    if nu is None:
        nu = DEFAULT_NU_REL * np.abs(W).max()
    freqs = grid.freqs_hz[:, None]
    mu, omega, defined = _mu_omega(
        W, mats["h_prime"], mats["h_second"], mats["th"], mats["th_prime"], mats["t2h"],
        0.0, freqs, nu,
    )
    return TfMatrix(_squeeze_matrix(W, omega, defined, grid), grid)


# ---------------------------------------------------------------------------
# Inverse-SCT neighborhood map


def inverse_sct_neighborhood(
    field: ReassignmentField,
    tensor_h: TfcTensor,
    frame: int,
    freq_bin: int,
    chirp_bin: int,
    eps1_hz: float,
    eps2_hzps: float,
):
    """Entries of one frame whose reassigned coordinates fall near a bin.

    Returns ``(chirp_bins, freq_bins, weights)`` where weights are |T^h| at
    the selected entries; either epsilon may be ``inf``.
    """
    if not (eps1_hz > 0 and eps2_hzps > 0):
        raise ParameterError("eps1_hz and eps2_hzps must be positive")
    grid = field.grid
    xi = grid.freq_hz(freq_bin)
    lam = grid.chirp_hzps(chirp_bin)
    om = field.omega[:, :, frame]
    mu = field.mu[:, :, frame]
    with np.errstate(invalid="ignore"):
        sel = field.defined[:, :, frame] & (np.abs(om - xi) < eps1_hz) & (np.abs(mu - lam) < eps2_hzps)
    l_idx, m_idx = np.nonzero(sel)
    weights = np.abs(tensor_h.values[l_idx, m_idx, frame])
    return l_idx, m_idx, weights
