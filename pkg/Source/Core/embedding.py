from dataclasses import dataclass

import numpy as np

from Utils.errors import InvalidArgumentError
from .timeseries import TimeSeries


@dataclass(frozen=True)
class EmbeddingConfig:
    dimension: int = 2
    delay: int = 1

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidArgumentError(f"Embedding dimension must be a positive integer, got {self.dimension}")
        if int(self.delay) != self.delay or self.delay < 1:
            raise InvalidArgumentError(f"Embedding delay must be a positive integer, got {self.delay}")

    @property
    def window(self) -> int:
        """Span of one delay vector in samples"""
        return (self.dimension - 1) * self.delay

    @property
    def default_neighbors(self) -> int:
        return self.dimension + 1


@dataclass(frozen=True, eq=False)
class DelayEmbedding:
    """Delay vectors of one series

    Row i is [x(t), x(t - delay), ..., x(t - (E-1) delay)] with t = time_index[i].
    """
    points: np.ndarray
    time_index: np.ndarray
    config: EmbeddingConfig

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def prefix(self, length: int) -> "DelayEmbedding":
        """First length rows, used as a CCM library"""
        if not 1 <= length <= len(self):
            raise InvalidArgumentError(
                f"Library length {length} outside [1, {len(self)}] manifold rows")
        return DelayEmbedding(self.points[:length], self.time_index[:length], self.config)


def embed(series: TimeSeries, cfg: EmbeddingConfig) -> DelayEmbedding:
    n = len(series)
    if n <= cfg.window:
        raise InvalidArgumentError(
            f"Series of length {n} too short for embedding window {cfg.window}; "
            f"need at least {cfg.window + 1} samples")

    time_index = np.arange(cfg.window, n)
    offsets = cfg.delay * np.arange(cfg.dimension)
    points = series.samples[np.subtract.outer(time_index, offsets)]
    points.setflags(write=False)
    time_index.setflags(write=False)
    return DelayEmbedding(points, time_index, cfg)
