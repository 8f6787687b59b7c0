"""Feature-partitioned datasets for vertical learning.

Every agent holds all M samples but only a contiguous slice of the feature
columns. Datasets are either synthesized from a seeded Gaussian mixture or
read from CSV with a separate partition file.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VerticalDataset:
    """Samples as rows, labels, and per-agent column ranges.

    Attributes:
        features: ``M x D`` feature matrix.
        labels: Length-M vector in {-1, +1}, or ``M x C`` one-hot matrix.
        partition: ``(start, end)`` column range per agent, contiguous and
            covering ``[0, D)``.
    """

    features: np.ndarray
    labels: np.ndarray
    partition: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        labels = np.asarray(self.labels, dtype=float)
        if labels.shape[0] != features.shape[0]:
            raise ValueError(
                f"{labels.shape[0]} labels for {features.shape[0]} samples"
            )
        partition = tuple((int(a), int(b)) for a, b in self.partition)
        cursor = 0
        for agent, (start, end) in enumerate(partition):
            if start != cursor or end <= start:
                raise ValueError(
                    f"Partition range {agent} = ({start}, {end}) is not contiguous from {cursor}"
                )
            cursor = end
        if cursor != features.shape[1]:
            raise ValueError(f"Partition covers {cursor} of {features.shape[1]} feature columns")

        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "partition", partition)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_agents(self) -> int:
        return len(self.partition)

    @property
    def is_one_hot(self) -> bool:
        return self.labels.ndim == 2

    @property
    def n_classes(self) -> int:
        return int(self.labels.shape[1]) if self.is_one_hot else 2

    def block(self, agent: int) -> np.ndarray:
        start, end = self.partition[agent]
        return self.features[:, start:end]

    def class_indices(self) -> np.ndarray:
        if self.is_one_hot:
            return np.argmax(self.labels, axis=1)
        return (self.labels > 0).astype(int)

    def subset(self, rows: np.ndarray) -> VerticalDataset:
        return VerticalDataset(self.features[rows], self.labels[rows], self.partition)

    def train_test_split(
        self, test_fraction: float, seed: int
    ) -> tuple[VerticalDataset, VerticalDataset]:
        """Seeded row split into a training and a held-out set."""
        if not 0.0 < test_fraction < 1.0:
            raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
        order = np.random.default_rng(seed).permutation(self.n_samples)
        n_test = max(1, int(round(test_fraction * self.n_samples)))
        return self.subset(np.sort(order[n_test:])), self.subset(np.sort(order[:n_test]))


def even_partition(n_features: int, n_agents: int) -> tuple[tuple[int, int], ...]:
    """Split ``n_features`` columns into ``n_agents`` near-equal contiguous ranges."""
    if n_agents < 1 or n_features < n_agents:
        raise ValueError(f"Cannot give {n_agents} agents at least one of {n_features} columns")
    chunks = np.array_split(np.arange(n_features), n_agents)
    return tuple((int(c[0]), int(c[-1]) + 1) for c in chunks)


def synthesize_vertical_dataset(
    n_samples: int,
    n_features: int,
    n_agents: int,
    seed: int,
    n_classes: int = 2,
    one_hot: bool = False,
    separation: float = 1.0,
) -> VerticalDataset:
    """Draw a seeded Gaussian mixture with one mean per class.

    Class means are ``separation`` times standard normal vectors; samples add
    unit noise and are scaled by ``1/sqrt(n_features)`` so inner products stay
    of order one.

    Args:
        n_samples: Number of samples M.
        n_features: Total feature count D.
        n_agents: Number of agents sharing the columns.
        seed: Random seed.
        n_classes: Number of classes (2 for logistic regression).
        one_hot: Emit one-hot labels instead of {-1, +1}.
        separation: Scale of the class means.
    """
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    if not one_hot and n_classes != 2:
        raise ValueError("Signed labels need exactly two classes")

    rng = np.random.default_rng(seed)
    means = separation * rng.standard_normal((n_classes, n_features))
    classes = rng.integers(0, n_classes, size=n_samples)
    features = (means[classes] + rng.standard_normal((n_samples, n_features))) / np.sqrt(
        n_features
    )
    if one_hot:
        labels = np.eye(n_classes)[classes]
    else:
        labels = np.where(classes == 1, 1.0, -1.0)
    return VerticalDataset(features, labels, even_partition(n_features, n_agents))


# ---------------------------------------------------------------------------
# CSV files
# ---------------------------------------------------------------------------


def write_dataset_csv(data: VerticalDataset, path: Path) -> None:
    """Write ``label, f0, f1, ...`` rows; one-hot labels are stored as class indices."""
    path = Path(path)
    labels = data.class_indices() if data.is_one_hot else data.labels.astype(int)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label"] + [f"f{k}" for k in range(data.n_features)])
        for label, row in zip(labels, data.features):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def write_partition(partition: Sequence[tuple[int, int]], path: Path) -> None:
    """Write ``agent, col_start, col_end`` lines."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for agent, (start, end) in enumerate(partition):
            writer.writerow([agent, start, end])


def read_partition(path: Path) -> tuple[tuple[int, int], ...]:
    """Read a partition file; lines may come in any agent order."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Partition file not found: {path}")
    ranges: dict[int, tuple[int, int]] = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if not row or row[0].strip().startswith("#"):
                continue
            agent, start, end = (int(v) for v in row)
            ranges[agent] = (start, end)
    if sorted(ranges) != list(range(len(ranges))):
        raise ValueError(f"{path}: agent indices must be 0..N-1")
    return tuple(ranges[a] for a in range(len(ranges)))


def read_dataset_csv(
    path: Path,
    partition: Sequence[tuple[int, int]] | None = None,
    n_agents: int | None = None,
    one_hot: bool = False,
) -> VerticalDataset:
    """Read a dataset CSV.

    Args:
        path: CSV file with header ``label, f0, f1, ...``.
        partition: Explicit column ranges; overrides ``n_agents``.
        n_agents: Build an even partition over this many agents.
        one_hot: Interpret labels as class indices and one-hot encode them;
            otherwise labels must be -1 or +1.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0].strip() != "label":
            raise ValueError(f"{path}: header must start with 'label'")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no samples")

    table = np.asarray(rows)
    raw_labels, features = table[:, 0], table[:, 1:]
    if one_hot:
        classes = raw_labels.astype(int)
        labels = np.eye(int(classes.max()) + 1)[classes]
    else:
        labels = raw_labels

    if partition is None:
        partition = even_partition(features.shape[1], n_agents or 1)
    logger.info("Loaded %d samples x %d features from %s", *features.shape, path)
    return VerticalDataset(features, labels, tuple(partition))
