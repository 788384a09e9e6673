"""Chirplet transform and synchrosqueezing in the time-frequency-chirp-rate volume."""

from .errors import (
    DegenerateCloudError,
    EmptyCloudError,
    ExtractionError,
    FormatError,
    MetricError,
    ParameterError,
    RangeError,
    ReconstructionError,
    ShapeError,
    TfchirpError,
    UnsupportedWindowError,
)
from .metrics import ot_if_metric, rel_error, snr_db, wasserstein1_1d
from .pipeline import crossing_study, ct_ridges, random_study, run_sct, sct_ridges
from .reassign import (
    ReassignmentField,
    SqueezeParams,
    inverse_sct_neighborhood,
    reassignment_field,
    sst1,
    sst2,
    squeeze_conservation,
    synchrosqueeze,
)
from .reconstruct import (
    CtRidgeEvaluator,
    MixingSystem,
    ReconstructedModes,
    build_mixing_system,
    reconstruct_modes,
    sst_band_reconstruct,
)
from .ridge import (
    RidgeParams,
    RidgeSet,
    TfcPointCloud,
    extract_ridges,
    kmeans_cluster,
    ridges_from_clusters,
    select_high_energy,
    spectral_embed,
)
from .signal import (
    Signal,
    TfcGrid,
    WindowBank,
    WindowFamily,
    bin_to_physical,
    grid_from_resolution,
    make_window_bank,
    physical_to_bin,
)
from .synth import (
    RandomProcessSpec,
    SyntheticScene,
    add_student_t_noise,
    crossing_chirp_pair,
    random_ict_scene,
    random_process,
    smoothed_brownian,
)
from .transform import (
    BankTensors,
    TfcTensor,
    TfMatrix,
    analytic_ct_linear_chirp,
    analytic_ct_linear_chirp_mag,
    chirp_transform_1d,
    chirplet_bank_transform,
    chirplet_transform,
    ct_quadrature,
    fresnel_segment,
    g_check,
    project_tfc_to_tf,
    stft,
)

__version__ = "0.1.0"
