import numpy as np
import pytest

from tfchirp.pipeline import run_sct
from tfchirp.signal import Signal, WindowFamily, grid_from_resolution
from tfchirp.synth import crossing_chirp_pair

FS = 100.0


@pytest.fixture(scope="session")
def crossing_scene():
    return crossing_chirp_pair()


@pytest.fixture(scope="session")
def crossing_grid(crossing_scene):
    return grid_from_resolution(0.01, len(crossing_scene.times_s), FS)


@pytest.fixture(scope="session")
def crossing_sct_g2(crossing_scene, crossing_grid):
    """Full SCT pipeline of the crossing scene with the x^2-Gaussian window."""
    return run_sct(crossing_scene.signal(), WindowFamily(2, 1.0), crossing_grid)


@pytest.fixture(scope="session")
def crossing_sct_g0(crossing_scene, crossing_grid):
    return run_sct(crossing_scene.signal(), WindowFamily(0, 1.0), crossing_grid)


@pytest.fixture(scope="session")
def chirp_f1_sct():
    """SCT pipeline of the single chirp (phase 4x^2) with the Gaussian window."""
    x = 1.0 + np.arange(401) / FS
    signal = Signal(np.exp(2j * np.pi * 4 * x**2), FS, 1.0)
    grid = grid_from_resolution(0.01, len(signal), FS)
    return signal, grid, run_sct(signal, WindowFamily(0, 1.0), grid)


def top_quantile_mask(values: np.ndarray, q: float) -> np.ndarray:
    return values > np.quantile(values, q)


def interior_mask(n_time: int, sample_rate_hz: float, margin_s: float) -> np.ndarray:
    mask = np.zeros(n_time, dtype=bool)
    k = int(round(margin_s * sample_rate_hz))
    mask[k : n_time - k] = True
    return mask
