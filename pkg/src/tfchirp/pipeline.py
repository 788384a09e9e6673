"""High-level analysis pipelines shared by the CLI and the studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import ot_if_metric, rel_error
from .reassign import ReassignmentField, reassignment_field, sst2, synchrosqueeze
from .reconstruct import reconstruct_modes, sst_band_reconstruct
from .ridge import RidgeParams, RidgeSet, extract_ridges
from .signal import Signal, TfcGrid, WindowFamily, grid_from_resolution, make_window_bank
from .synth import SyntheticScene, add_student_t_noise
from .transform import BankTensors, TfcTensor, chirplet_bank_transform


@dataclass(frozen=True)
class SctResult:
    banks: BankTensors
    field: ReassignmentField
    squeezed: TfcTensor


def run_sct(
    signal: Signal,
    family: WindowFamily,
    grid: TfcGrid,
    half_len: int | None = None,
    convention: str = "centered",
    nu: float | None = None,
    nu_rel: float | None = None,
    companion_dtype=None,
) -> SctResult:
    """Bank transforms, reassignment field and squeezed volume in one go."""
    bank = make_window_bank(family, half_len or family.default_half_len(signal.dt_s), signal.dt_s)
    banks = chirplet_bank_transform(signal, bank, grid, convention, companion_dtype)
    if nu is None and nu_rel is not None:
        peak = float(np.abs(banks.h.values).max())
        nu = nu_rel * peak if peak > 0 else None
    field = reassignment_field(banks, nu=nu)
    squeezed = synchrosqueeze(banks.h, field)
    return SctResult(banks=banks, field=field, squeezed=squeezed)


def sct_ridges(result: SctResult, n_components: int, params: RidgeParams | None = None) -> RidgeSet:
    """Ridge curves from a squeezed volume, refined through its sources."""
    return extract_ridges(
        result.squeezed, n_components, params, field=result.field, source=result.banks.h
    )


def ct_ridges(result: SctResult, n_components: int, params: RidgeParams | None = None) -> RidgeSet:
    """Baseline: the same extraction applied to the raw transform volume."""
    return extract_ridges(result.banks.h, n_components, params)


@dataclass(frozen=True)
class StudyRow:
    method: str
    seed: int
    rel_errors: tuple  # per mode, on the scoring window
    ot_errors: tuple  # per mode IF tracking score


def _match_components(est_if: np.ndarray, true_if: np.ndarray, window: np.ndarray) -> list:
    """Assign estimated curves to true components by IF proximity."""
    from scipy.optimize import linear_sum_assignment

    k = true_if.shape[0]
    cost = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            cost[i, j] = np.abs(est_if[i] - true_if[j])[window].mean()
    rows, cols = linear_sum_assignment(cost)
    assign = [0] * k
    for i, j in zip(rows, cols):
        assign[i] = int(j)
    return assign


def crossing_study(
    scene: SyntheticScene,
    score_mask: np.ndarray,
    analysis_family: WindowFamily,
    recon_family: WindowFamily,
    alpha_sq: float = 0.01,
    noise_scale: float = 0.0,
    seed: int = 0,
    sst_delta_hz: float = 3.0,
    ridge_params: RidgeParams | None = None,
    half_len: int | None = None,
):
    """One realization of the SCT / CT / SST2 comparison on a scene.

    Returns per-method rows with relative reconstruction errors of each
    component's real part over ``score_mask`` and the mean per-frame W1
    between estimated and true IF curves.
    """
    mixed = scene.components.sum(axis=0)
    snr_db = np.inf
    if noise_scale > 0:
        mixed, snr_db = add_student_t_noise(mixed, dof=4.0, scale=noise_scale, seed=seed)
    signal = Signal(mixed, scene.sample_rate_hz, float(scene.times_s[0]))
    grid = grid_from_resolution(alpha_sq, len(signal), scene.sample_rate_hz)
    params = ridge_params or RidgeParams(seed=seed)
    k = scene.components.shape[0]

    companion_dtype = np.complex64 if grid.n_chirp * grid.n_freq * grid.n_time > 8_000_000 else None
    result = run_sct(signal, analysis_family, grid, half_len=half_len, companion_dtype=companion_dtype)
    ridges_sct = sct_ridges(result, k, params)
    ridges_ct = ct_ridges(result, k, params)

    recon_bank = make_window_bank(
        recon_family, recon_family.default_half_len(signal.dt_s), signal.dt_s
    )
    modes = reconstruct_modes(signal, ridges_sct, recon_family, recon_bank)
    s2 = sst2(signal, recon_bank, grid)

    rows = []
    assign = _match_components(ridges_sct.omega_hz, scene.ifs_hz, score_mask)
    est_for = {assign[i]: i for i in range(k)}
    rel_sct, ot_sct = [], []
    for comp in range(k):
        i = est_for[comp]
        rel_sct.append(rel_error(modes.modes[i].real, scene.components[comp].real, score_mask))
        ot_sct.append(ot_if_metric(ridges_sct.omega_hz[i], scene.ifs_hz[comp], score_mask))
    rows.append(StudyRow("sct", seed, tuple(rel_sct), tuple(ot_sct)))

    assign_ct = _match_components(ridges_ct.omega_hz, scene.ifs_hz, score_mask)
    est_for_ct = {assign_ct[i]: i for i in range(k)}
    ot_ct = [
        ot_if_metric(ridges_ct.omega_hz[est_for_ct[comp]], scene.ifs_hz[comp], score_mask)
        for comp in range(k)
    ]
    rows.append(StudyRow("ct", seed, (), tuple(ot_ct)))

    rel_sst = []
    for comp in range(k):
        est = sst_band_reconstruct(s2, scene.ifs_hz[comp], sst_delta_hz, recon_family)
        rel_sst.append(rel_error(est.real, scene.components[comp].real, score_mask))
    rows.append(StudyRow("sst2", seed, tuple(rel_sst), ()))
    return rows, snr_db


# Parameters of the randomized two-component study.  The chirp-rate axis
# needs bins finer than the components' chirp separation, hence the finer
# squeezing resolution; the window is truncated where its tail is far below
# the working precision of the study.
STUDY_ALPHA_SQ = 0.005
STUDY_HALF_LEN = 250
STUDY_CLOUD_SIZE = 3000
STUDY_SIGMA_PCT = 30.0
STUDY_MIN_PER_FRAME = 3
STUDY_NOISE_SCALE = 1.0


def random_study(
    seeds,
    analysis_family: WindowFamily | None = None,
    recon_family: WindowFamily | None = None,
    scene_factory=None,
):
    """The multi-seed noisy-scene comparison at the study configuration.

    Returns (rows, summary) where rows hold one StudyRow per method and
    seed, and summary maps method -> dict of mean/sd arrays per mode.
    """
    from .synth import random_ict_scene

    analysis_family = analysis_family or WindowFamily(2, 1.0)
    recon_family = recon_family or WindowFamily(0, 1.0)
    scene_factory = scene_factory or random_ict_scene
    all_rows = []
    for seed in seeds:
        scene = scene_factory(seed)
        x = scene.times_s
        score = (x >= 1.0) & (x <= x[-1] - 1.0)
        n = len(x)
        grid = grid_from_resolution(STUDY_ALPHA_SQ, n, scene.sample_rate_hz)
        q = 1.0 - STUDY_CLOUD_SIZE / (grid.n_chirp * grid.n_freq * n)
        params = RidgeParams(
            seed=seed, q=q, sigma_pct=STUDY_SIGMA_PCT, min_per_frame=STUDY_MIN_PER_FRAME
        )
        rows, _ = crossing_study(
            scene,
            score,
            analysis_family,
            recon_family,
            alpha_sq=STUDY_ALPHA_SQ,
            noise_scale=STUDY_NOISE_SCALE,
            seed=seed,
            ridge_params=params,
            half_len=STUDY_HALF_LEN,
        )
        all_rows.extend(rows)
    summary = {}
    for method in ("sct", "ct", "sst2"):
        rels = np.array([r.rel_errors for r in all_rows if r.method == method and r.rel_errors])
        ots = np.array([r.ot_errors for r in all_rows if r.method == method and r.ot_errors])
        summary[method] = {
            "rel_mean": rels.mean(axis=0) if rels.size else None,
            "rel_sd": rels.std(axis=0) if rels.size else None,
            "ot_mean": ots.mean(axis=0) if ots.size else None,
            "ot_sd": ots.std(axis=0) if ots.size else None,
        }
    return all_rows, summary
