"""Ridge extraction from a squeezed TFC volume.

Pipeline: quantile selection of high-energy entries, Gaussian-kernel
spectral embedding of the selected (time, frequency, chirp-rate) points,
k-means on the embedding, then per-frame aggregation of each cluster into a
single (frequency, chirp-rate) curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import pdist, squareform

from .errors import (
    DegenerateCloudError,
    EmptyCloudError,
    ExtractionError,
    ParameterError,
)
from .signal import TfcGrid, round_half_away
from .transform import TfcTensor


@dataclass(frozen=True)
class TfcPointCloud:
    """High-energy TFC entries in physical coordinates.

    ``points`` holds per-axis affinely rescaled coordinates in [0, 1]^3 (the
    scaling used for all distance computations); ``physical`` the raw
    (t_s, freq_hz, chirp_hzps) triples; ``axis_offset``/``axis_scale`` record
    the affine maps so the normalization is reproducible.
    """

    points: np.ndarray  # [n, 3] normalized
    physical: np.ndarray  # [n, 3]
    weights: np.ndarray  # [n] |S| at the entry
    frames: np.ndarray  # [n] time index
    axis_offset: np.ndarray
    axis_scale: np.ndarray

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class RidgeSet:
    """K per-frame (frequency, chirp-rate) curves with validity masks.

    ``observed`` marks frames where the cluster actually had points; gaps
    are filled by linear interpolation (held constant beyond the ends), so
    ``omega_hz``/``mu_hzps`` are total over frames wherever ``valid``.
    """

    omega_hz: np.ndarray  # [K, n_time]
    mu_hzps: np.ndarray  # [K, n_time]
    valid: np.ndarray  # [K, n_time] bool
    observed: np.ndarray  # [K, n_time] bool

    @property
    def n_components(self) -> int:
        return self.omega_hz.shape[0]

    @property
    def n_time(self) -> int:
        return self.omega_hz.shape[1]


@dataclass(frozen=True)
class RidgeParams:
    q: float = 0.9995
    sigma_pct: float = 15.0
    seed: int = 0
    restarts: int = 50
    min_per_frame: int = 0
    # robust local-linear smoothing of the curves built from source entries
    fit_half_width_s: float = 0.5
    fit_iters: int = 4
    fit_clip: float = 4.0


def select_high_energy(tensor: TfcTensor, q: float, min_per_frame: int = 0) -> TfcPointCloud:
    """Entries with |S| above the q-quantile, as a normalized point cloud.

    ``min_per_frame`` additionally admits each frame's strongest nonzero
    entries, so that frames whose ridge mass falls below the global
    threshold (the threshold chases the loudest spikes) still contribute.
    """
    if not (0 <= q < 1):
        raise ParameterError("q must lie in [0, 1)")
    grid = tensor.grid
    mags = np.abs(tensor.values)
    thr = np.quantile(mags, q)
    keep = mags > thr
    if min_per_frame > 0:
        _admit_frame_peaks(mags, keep, min_per_frame)
    l_idx, m_idx, n_idx = np.nonzero(keep)
    if l_idx.size == 0:
        raise EmptyCloudError("no entries above the energy quantile")
    t = n_idx / grid.sample_rate_hz  # seconds from the first frame
    physical = np.column_stack((t, grid.freqs_hz[m_idx], grid.chirps_hzps[l_idx]))
    weights = mags[l_idx, m_idx, n_idx]
    # scale each axis by the weighted central range rather than min-max:
    # a handful of heavy-tailed outliers must not compress the axis where
    # the components actually separate
    lo, hi = _weighted_quantiles(physical, weights, (0.05, 0.95))
    span = hi - lo
    fallback = physical.max(axis=0) - physical.min(axis=0)
    span = np.where(span > 0, span, np.where(fallback > 0, fallback, 1.0))
    points = (physical - lo) / span
    return TfcPointCloud(
        points=points,
        physical=physical,
        weights=weights,
        frames=n_idx,
        axis_offset=lo,
        axis_scale=span,
    )


def _admit_frame_peaks(mags: np.ndarray, keep: np.ndarray, count: int, suppress=(3, 2)):
    """Mark each frame's strongest separated peaks as kept (in place).

    Peaks are peeled greedily with a suppression neighborhood of
    ``suppress`` (chirp, frequency) bins, so a frame whose weaker component
    falls below the global threshold still contributes its ridge point.
    """
    n_chirp, n_freq, n_time = mags.shape
    dl, dm = suppress
    for n in range(n_time):
        frame = mags[:, :, n].copy()
        for _ in range(count):
            idx = np.argmax(frame)
            l, m = divmod(idx, n_freq)
            if frame[l, m] <= 0:
                break
            keep[l, m, n] = True
            frame[max(0, l - dl) : l + dl + 1, max(0, m - dm) : m + dm + 1] = 0.0


def _weighted_quantiles(values: np.ndarray, weights: np.ndarray, qs) -> tuple:
    """Per-column weighted quantiles of an [n, d] array."""
    out = [np.empty(values.shape[1]) for _ in qs]
    for col in range(values.shape[1]):
        order = np.argsort(values[:, col])
        cw = np.cumsum(weights[order])
        targets = np.asarray(qs) * cw[-1]
        idx = np.searchsorted(cw, targets)
        idx = np.clip(idx, 0, order.size - 1)
        for row, i in enumerate(idx):
            out[row][col] = values[order[i], col]
    return tuple(out)


def spectral_embed(cloud: TfcPointCloud, n_components: int, sigma_pct: float = 15.0) -> np.ndarray:
    """Embed cloud points via the top nontrivial eigenvectors of D^-1 W.

    W is the Gaussian affinity with sigma at the given percentile of the
    pairwise distances; the row-stochastic operator is diagonalized through
    its symmetric conjugate D^-1/2 W D^-1/2 and back-scaled.  Embedding rows
    are normalized to unit length before clustering: without that, a few
    weakly attached outlier points act as near-disconnected components whose
    indicator vectors displace the main cut from the leading eigenvectors.
    Returns an [n, 2*(n_components-1)] embedding.
    """
    if n_components < 2:
        raise ParameterError("spectral embedding needs at least two clusters")
    n_dim = 2 * (n_components - 1)
    if len(cloud) < n_dim + 1:
        raise ParameterError(f"cloud of {len(cloud)} points cannot support a {n_dim}-dim embedding")
    dists = pdist(cloud.points)
    sigma = np.percentile(dists, sigma_pct)
    if sigma <= 0:
        raise DegenerateCloudError("all selected points coincide")
    W = np.exp(-squareform(dists) ** 2 / (2 * sigma**2))
    d = W.sum(axis=1)
    d_isqrt = 1.0 / np.sqrt(d)
    sym = W * d_isqrt[:, None] * d_isqrt[None, :]
    n = len(cloud)
    vals, vecs = eigh(sym, subset_by_index=(n - n_dim - 1, n - 1))
    # eigh returns ascending order; drop the trivial top eigenvector
    vecs = vecs[:, ::-1][:, 1:]
    embedding = d_isqrt[:, None] * vecs
    norms = np.linalg.norm(embedding, axis=1, keepdims=True)
    return embedding / np.where(norms > 0, norms, 1.0)


def kmeans_cluster(embedding: np.ndarray, n_clusters: int, seed: int = 0, restarts: int = 50) -> np.ndarray:
    """Seeded k-means++ with restarts; returns the best-inertia labeling."""
    pts = np.asarray(embedding, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n_clusters < 1:
        raise ParameterError("n_clusters must be >= 1")
    if n < n_clusters:
        raise ParameterError("fewer points than clusters")
    if n_clusters == 1:
        return np.zeros(n, dtype=int)
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(pts, n_clusters, rng)
        labels, inertia = _lloyd(pts, centers)
        if best_labels is None or inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def _kmeans_pp_init(pts, k, rng):
    n = pts.shape[0]
    centers = np.empty((k, pts.shape[1]))
    centers[0] = pts[rng.integers(n)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i:] = pts[rng.integers(n, size=k - i)]
            break
        centers[i] = pts[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(axis=1))
    return centers

def _lloyd(pts, centers, max_iter=300):
    k = centers.shape[0]
    labels = np.zeros(pts.shape[0], dtype=int)
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for i in range(k):
            sel = new_labels == i
            if sel.any():
                centers[i] = pts[sel].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(pts.shape[0]), labels].sum()


def ridges_from_clusters(cloud: TfcPointCloud, labels: np.ndarray, grid: TfcGrid) -> RidgeSet:
    """Aggregate labeled points into per-frame curves.

    Per frame and cluster the curve takes the |S|-weighted centroid of the
    cluster's (frequency, chirp-rate) points; frames without points are
    filled by linear interpolation and flagged as unobserved.  Clusters are
    ordered by ascending mean chirp rate.
    """
    labels = np.asarray(labels)
    if labels.shape != (len(cloud),):
        raise ParameterError("labels must cover the cloud")
    ids = np.unique(labels)
    n_time = grid.n_time
    omega = np.full((ids.size, n_time), np.nan)
    mu = np.full_like(omega, np.nan)
    observed = np.zeros(omega.shape, dtype=bool)
    for row, cid in enumerate(ids):
        sel = labels == cid
        if not sel.any():
            raise ExtractionError(f"cluster {cid} is empty")
        frames = cloud.frames[sel]
        w = cloud.weights[sel]
        fw = np.bincount(frames, weights=w, minlength=n_time)
        om_sum = np.bincount(frames, weights=w * cloud.physical[sel, 1], minlength=n_time)
        mu_sum = np.bincount(frames, weights=w * cloud.physical[sel, 2], minlength=n_time)
        got = fw > 0
        if not got.any():
            raise ExtractionError(f"cluster {cid} has no frames")
        omega[row, got] = om_sum[got] / fw[got]
        mu[row, got] = mu_sum[got] / fw[got]
        observed[row] = got
        idx = np.nonzero(got)[0]
        all_t = np.arange(n_time)
        omega[row] = np.interp(all_t, idx, omega[row, idx])
        mu[row] = np.interp(all_t, idx, mu[row, idx])
    order = np.argsort(mu.mean(axis=1), kind="stable")
    omega, mu, observed = omega[order], mu[order], observed[order]
    valid = np.isfinite(omega) & np.isfinite(mu)
    return RidgeSet(omega_hz=omega, mu_hzps=mu, valid=valid, observed=observed)


def _local_linear_curve(t_pts, y_pts, w_pts, t_eval, half_width, iters, clip):
    """Robust weighted local-linear fit evaluated on a regular time axis.

    Bisquare reweighting suppresses the interference-biased estimates that
    accumulate where components cross; the local model is linear because the
    fitted curves are derivatives of smooth phases.
    """
    order = np.argsort(t_pts, kind="stable")
    t_pts, y_pts, w_pts = t_pts[order], y_pts[order], w_pts[order]
    out = np.full(t_eval.shape, np.nan)
    lo = np.searchsorted(t_pts, t_eval - half_width)
    hi = np.searchsorted(t_pts, t_eval + half_width)
    for i, tc in enumerate(t_eval):
        sl = slice(lo[i], hi[i])
        ts = t_pts[sl] - tc
        ys = y_pts[sl]
        base = w_pts[sl] * (1 - (ts / half_width) ** 2)
        if ts.size == 0 or base.sum() <= 0:
            continue
        ws = base
        a = None
        for _ in range(iters + 1):
            w0, w1, w2 = ws.sum(), (ws * ts).sum(), (ws * ts * ts).sum()
            y0, y1 = (ws * ys).sum(), (ws * ts * ys).sum()
            den = w0 * w2 - w1 * w1
            if den > 0:
                a = (w2 * y0 - w1 * y1) / den
                b = (w0 * y1 - w1 * y0) / den
            else:
                a, b = y0 / w0, 0.0
            resid = ys - (a + b * ts)
            scale = np.median(np.abs(resid)) + 1e-12
            ws = base * np.clip(1 - (resid / (clip * scale)) ** 2, 0, 1) ** 2
            if ws.sum() <= 0:
                ws = base
        out[i] = a
    return out


def ridges_from_sources(
    cloud: TfcPointCloud,
    labels: np.ndarray,
    field,
    tensor_h: TfcTensor,
    params: RidgeParams,
) -> RidgeSet:
    """Curves from the pre-squeeze entries feeding each cluster's bins.

    Each selected squeezed bin is traced back to the original volume entries
    that reassigned into it; their continuous (omega, mu) estimates, weighted
    by |T|, carry sub-bin precision that the bin coordinates lost.  A robust
    local-linear fit along time turns them into total curves.
    """
    grid = tensor_h.grid
    labels = np.asarray(labels)
    if labels.shape != (len(cloud),):
        raise ParameterError("labels must cover the cloud")
    defined = field.defined
    m_dest = round_half_away(field.omega[defined] / grid.freq_step_hz)
    l_dest = round_half_away(field.mu[defined] / grid.chirp_step_hzps) + (grid.M - 1)
    frames_src = np.broadcast_to(np.arange(grid.n_time), defined.shape)[defined]
    in_range = (l_dest >= 0) & (l_dest < grid.n_chirp) & (m_dest >= 0) & (m_dest < grid.n_freq)
    w_src = np.abs(tensor_h.values[defined])
    om_src = field.omega[defined]
    mu_src = field.mu[defined]
    l_pt = np.rint(cloud.physical[:, 2] / grid.chirp_step_hzps).astype(int) + grid.M - 1
    m_pt = np.rint(cloud.physical[:, 1] / grid.freq_step_hz).astype(int)

    ids = np.unique(labels)
    n_time = grid.n_time
    t_axis = np.arange(n_time) / grid.sample_rate_hz
    omega = np.full((ids.size, n_time), np.nan)
    mu = np.full_like(omega, np.nan)
    observed = np.zeros(omega.shape, dtype=bool)
    for row, cid in enumerate(ids):
        sel = labels == cid
        member = np.zeros((grid.n_chirp, grid.n_freq, n_time), dtype=bool)
        member[l_pt[sel], m_pt[sel], cloud.frames[sel]] = True
        hit = np.zeros(w_src.shape, dtype=bool)
        hit[in_range] = member[
            l_dest[in_range].astype(np.intp),
            m_dest[in_range].astype(np.intp),
            frames_src[in_range],
        ]
        if not hit.any():
            raise ExtractionError(f"cluster {cid} received no source entries")
        t_hit = frames_src[hit] / grid.sample_rate_hz
        omega[row] = _local_linear_curve(
            t_hit, om_src[hit], w_src[hit], t_axis,
            params.fit_half_width_s, params.fit_iters, params.fit_clip,
        )
        mu[row] = _local_linear_curve(
            t_hit, mu_src[hit], w_src[hit], t_axis,
            params.fit_half_width_s, params.fit_iters, params.fit_clip,
        )
        observed[row] = np.bincount(cloud.frames[sel], minlength=n_time) > 0
        for curve in (omega, mu):
            good = np.isfinite(curve[row])
            if not good.any():
                raise ExtractionError(f"cluster {cid} produced an empty curve")
            idx = np.nonzero(good)[0]
            curve[row] = np.interp(np.arange(n_time), idx, curve[row, idx])
    omega = np.clip(omega, 0.0, grid.sample_rate_hz / 2)
    mu = np.clip(mu, grid.chirps_hzps[0], grid.chirps_hzps[-1])
    order = np.argsort(mu.mean(axis=1), kind="stable")
    omega, mu, observed = omega[order], mu[order], observed[order]
    valid = np.isfinite(omega) & np.isfinite(mu)
    return RidgeSet(omega_hz=omega, mu_hzps=mu, valid=valid, observed=observed)


def extract_ridges(
    tensor: TfcTensor,
    n_components: int,
    params: RidgeParams | None = None,
    field=None,
    source: TfcTensor | None = None,
) -> RidgeSet:
    """Full extraction: select, embed, cluster, aggregate.

    ``n_components == 1`` bypasses the clustering and treats every selected
    point as one ridge.  When the reassignment ``field`` and the pre-squeeze
    ``source`` tensor are supplied, the curves are aggregated from the
    original entries behind each squeezed bin (sub-bin precision); otherwise
    they are the per-frame centroids of the selected bins themselves.
    """
    params = params or RidgeParams()
    cloud = select_high_energy(tensor, params.q)
    if n_components == 1:
        labels = np.zeros(len(cloud), dtype=int)
    else:
        embedding = spectral_embed(cloud, n_components, params.sigma_pct)
        labels = kmeans_cluster(embedding, n_components, seed=params.seed, restarts=params.restarts)
    if params.min_per_frame > 0:
        # per-frame peaks keep starved stretches represented in the curve
        # fit, but only the clean quantile cloud votes on cluster identity:
        # the extra points inherit labels from their nearest clustered point
        cloud_aug = select_high_energy(tensor, params.q, params.min_per_frame)
        labels = _propagate_labels(cloud, labels, cloud_aug)
        cloud = cloud_aug
    if field is not None and source is not None:
        return ridges_from_sources(cloud, labels, field, source, params)
    return ridges_from_clusters(cloud, labels, tensor.grid)


def _propagate_labels(core: TfcPointCloud, core_labels: np.ndarray, aug: TfcPointCloud) -> np.ndarray:
    from scipy.spatial import cKDTree

    tree = cKDTree(core.points)
    scale = np.where(core.axis_scale > 0, core.axis_scale, 1.0)
    aug_norm = (aug.physical - core.axis_offset) / scale
    _, nearest = tree.query(aug_norm)
    return core_labels[nearest]
