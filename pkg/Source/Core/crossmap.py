"""Weighted nearest-neighbour cross-mapping between a delay manifold and a target series."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from Utils.errors import InternalConsistencyError, InvalidArgumentError
from .embedding import DelayEmbedding, EmbeddingConfig, embed
from .timeseries import TimeSeries, pearson_r2


@dataclass(frozen=True, eq=False)
class CrossMapModel:
    """Neighbourhoods of every query row within a library manifold

    neighbor_indices are library row indices; neighbor_times are the sample
    indices those rows are anchored at, which is what the target is read at.
    """
    k: int
    neighbor_indices: np.ndarray
    neighbor_distances: np.ndarray
    weights: np.ndarray
    neighbor_times: np.ndarray
    query_times: np.ndarray

    def __len__(self) -> int:
        return self.neighbor_indices.shape[0]


@dataclass(frozen=True, eq=False)
class Prediction:
    values: np.ndarray
    target_time_index: np.ndarray
    observed: np.ndarray

    def __len__(self) -> int:
        return self.values.size

    def score(self) -> float:
        return pearson_r2(self.values, self.observed)


def _admissible_counts(library_times: np.ndarray, query_times: np.ndarray, radius: int) -> np.ndarray:
    # library time_index is strictly increasing, so the excluded band is a contiguous slice
    lo = np.searchsorted(library_times, query_times - radius, side="left")
    hi = np.searchsorted(library_times, query_times + radius, side="right")
    return library_times.size - (hi - lo)


def _select(distances: np.ndarray, indices: np.ndarray, library_times: np.ndarray,
            query_times: np.ndarray, k: int, radius: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pick k admissible candidates per row ordered by (distance, time_index)

    Returns the chosen indices and distances plus a mask of rows whose
    candidate list was wide enough to contain the whole tie group at the
    k-th distance.
    """
    times = library_times[indices]
    admissible = np.abs(times - query_times[:, None]) > radius
    masked = np.where(admissible, distances, np.inf)
    order = np.lexsort((times, masked), axis=-1)
    chosen = np.take_along_axis(indices, order[:, :k], axis=1)
    chosen_distances = np.take_along_axis(masked, order[:, :k], axis=1)

    kth = chosen_distances[:, -1]
    widest = distances[:, -1]
    resolved = np.isfinite(kth) & (widest > kth)
    return chosen, chosen_distances, resolved


def find_neighbors(library: DelayEmbedding, queries: DelayEmbedding, k: Optional[int] = None,
                   exclusion_radius: int = 0, workers: int = 1) -> CrossMapModel:
    """Exact k nearest library rows for every query row

    Library rows whose time_index lies within exclusion_radius samples of the
    query's time_index are skipped, so radius 0 removes exact self-matches.
    Distance ties are broken toward the lower time_index.
    """
    if library.dimension != queries.dimension:
        raise InvalidArgumentError(
            f"Dimension mismatch: library E={library.dimension}, queries E={queries.dimension}")
    k = library.config.default_neighbors if k is None else int(k)
    if k < 1:
        raise InvalidArgumentError(f"k must be positive, got {k}")
    if exclusion_radius < 0:
        raise InvalidArgumentError(f"exclusion_radius must be non-negative, got {exclusion_radius}")

    library_times = np.asarray(library.time_index)
    query_times = np.asarray(queries.time_index)
    counts = _admissible_counts(library_times, query_times, exclusion_radius)
    if counts.min() < k:
        raise InvalidArgumentError(
            f"Only {int(counts.min())} admissible library rows for k={k} "
            f"(library size {len(library)}, exclusion radius {exclusion_radius})")

    n_library = len(library)
    m = len(queries)
    tree = cKDTree(library.points)
    out_indices = np.empty((m, k), dtype=np.intp)
    out_distances = np.empty((m, k), dtype=float)

    pending = np.arange(m)
    request = min(n_library, k + 2 * exclusion_radius + 1)
    while pending.size:
        distances, indices = tree.query(queries.points[pending], k=request, workers=workers)
        distances = np.asarray(distances, dtype=float).reshape(pending.size, request)
        indices = np.asarray(indices, dtype=np.intp).reshape(pending.size, request)

        chosen, chosen_distances, resolved = _select(
            distances, indices, library_times, query_times[pending], k, exclusion_radius)
        if request >= n_library:
            resolved[:] = True

        done = pending[resolved]
        out_indices[done] = chosen[resolved]
        out_distances[done] = chosen_distances[resolved]

        pending = pending[~resolved]
        if pending.size:
            logging.debug(f"Widening neighbour search for {pending.size} rows beyond {request} candidates")
        request = min(n_library, request * 2)

    weights = _weight_rows(out_distances)
    return CrossMapModel(
        k=k,
        neighbor_indices=out_indices,
        neighbor_distances=out_distances,
        weights=weights,
        neighbor_times=library_times[out_indices],
        query_times=query_times,
    )


def _weight_rows(distances: np.ndarray) -> np.ndarray:
    d1 = distances[:, :1]
    exact = d1[:, 0] == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.exp(-distances / d1)
    # Zero nearest distance: the tie group at distance 0 shares the weight
    gamma[exact] = (distances[exact] == 0.0).astype(float)
    return gamma / gamma.sum(axis=1, keepdims=True)


def compute_weights(distances: Sequence[float]) -> np.ndarray:
    """Exponential neighbour weights w_j = exp(-d_j/d_1) / sum(exp(-d_i/d_1))"""
    distances = np.asarray(distances, dtype=float).ravel()
    if distances.size < 1:
        raise InvalidArgumentError("At least one distance is required")
    if not np.all(np.isfinite(distances)) or np.any(distances < 0):
        raise InvalidArgumentError("Distances must be finite and non-negative")
    if np.any(np.diff(distances) < 0):
        raise InvalidArgumentError("Distances must be sorted ascending")
    return _weight_rows(distances[None, :])[0]


def cross_map(model: CrossMapModel, target: TimeSeries,
              target_embedding_cfg: Optional[EmbeddingConfig] = None,
              coordinate: int = 0) -> Prediction:
    """Weighted average of the target at the neighbours' time indices

    coordinate selects which element of the target's delay vector is
    predicted: y(t - coordinate * delay). Coordinate 0 is the raw target.
    """
    lag = 0
    if coordinate:
        if target_embedding_cfg is None:
            raise InvalidArgumentError("A target embedding config is needed to predict a lagged coordinate")
        if not 0 <= coordinate < target_embedding_cfg.dimension:
            raise InvalidArgumentError(
                f"Coordinate {coordinate} outside [0, {target_embedding_cfg.dimension})")
        lag = coordinate * target_embedding_cfg.delay

    neighbor_samples = model.neighbor_times - lag
    query_samples = model.query_times - lag
    n = len(target)
    for label, idx in (("neighbour", neighbor_samples), ("query", query_samples)):
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise InternalConsistencyError(
                f"{label} sample index range [{idx.min()}, {idx.max()}] outside target of length {n}")

    values = np.sum(model.weights * target.samples[neighbor_samples], axis=1)
    return Prediction(values=values, target_time_index=query_samples,
                      observed=target.samples[query_samples])


def _validate_library_length(manifold: DelayEmbedding, cfg: EmbeddingConfig,
                             library_length: int, k: int) -> None:
    if library_length > len(manifold):
        raise InvalidArgumentError(
            f"Library length {library_length} exceeds the {len(manifold)} available manifold rows")
    if library_length <= cfg.window + k:
        raise InvalidArgumentError(
            f"Library length {library_length} must exceed window + k = {cfg.window + k}")


def ccm_score(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig, library_length: int,
              k: Optional[int] = None, exclusion_radius: int = 0) -> float:
    """Cross-map skill R^2 of predicting y from the manifold of x

    The library is the first library_length rows of x's manifold and every
    manifold row is predicted. A converging score supports y -> x.
    """
    if len(x) != len(y):
        raise InvalidArgumentError(f"Length mismatch: {len(x)} vs {len(y)}")
    manifold = embed(x, cfg)
    k = cfg.default_neighbors if k is None else k
    _validate_library_length(manifold, cfg, library_length, k)

    model = find_neighbors(manifold.prefix(library_length), manifold, k, exclusion_radius)
    return cross_map(model, y, cfg).score()


def convergence_curve(x: TimeSeries, y: TimeSeries, cfg: EmbeddingConfig,
                      library_lengths: Sequence[int], k: Optional[int] = None,
                      exclusion_radius: int = 0) -> List[Tuple[int, float]]:
    lengths = [int(length) for length in library_lengths]
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise InvalidArgumentError(f"Library lengths must be strictly increasing: {lengths}")
    if len(x) != len(y):
        raise InvalidArgumentError(f"Length mismatch: {len(x)} vs {len(y)}")

    manifold = embed(x, cfg)
    k = cfg.default_neighbors if k is None else k
    curve = []
    for length in lengths:
        _validate_library_length(manifold, cfg, length, k)
        model = find_neighbors(manifold.prefix(length), manifold, k, exclusion_radius)
        score = cross_map(model, y, cfg).score()
        logging.debug(f"Library length {length}: R^2 = {score:.4f}")
        curve.append((length, score))
    return curve
