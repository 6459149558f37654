"""CSV feature files and synthetic domain-shift generation.

CSV schema: a header row is required, the column named ``label`` holds
integer class labels, every other column is a feature in file order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .covariance import DomainDataset
from .errors import ContractError, DataError

LABEL_COLUMN = "label"


def load_features_csv(path, label_column=LABEL_COLUMN, domain_name=None):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"feature file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_idx = header.index(label_column) if label_column in header else None
        rows, labels = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{line}: expected {len(header)} columns, got {len(row)}"
                )
            values = []
            for j, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{line}: column {header[j]!r}: cannot parse {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}:{line}: column {header[j]!r}: non-finite value {cell!r}"
                    )
                values.append(v)
            if label_idx is not None:
                lab = values.pop(label_idx)
                if lab != int(lab):
                    raise DataError(f"{path}:{line}: label {lab!r} is not an integer")
                labels.append(int(lab))
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    name = path.stem if domain_name is None else domain_name
    return DomainDataset(
        np.array(rows, dtype=float),
        np.array(labels, dtype=np.int64) if label_idx is not None else None,
        name,
    )


def save_features_csv(data, path):
    """Write ``data`` using shortest round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dim = data.dim
    header = [f"f{j}" for j in range(dim)]
    if data.labels is not None:
        header.append(LABEL_COLUMN)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(data.num_samples):
            row = [repr(float(v)) for v in data.features[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            w.writerow(row)


def resolve_domain(name, data_root=None):
    """Locate ``<data_root>/<name>.csv`` (or ``name`` itself if it is a file)."""
    candidates = []
    p = Path(name)
    if p.suffix == ".csv":
        candidates.append(p)
    if data_root is not None:
        candidates.append(Path(data_root) / f"{name}.csv")
        candidates.append(Path(data_root) / name)
    for c in candidates:
        if c.is_file():
            return load_features_csv(c, domain_name=p.stem)
    searched = ", ".join(str(c) for c in candidates) or "(no data root given)"
    raise DataError(f"cannot resolve domain {name!r}; searched: {searched}")


@dataclass(frozen=True)
class SyntheticShiftSpec:
    """Gaussian class blobs with a rotated and shifted target domain.

    The target is the source generative model pushed through a rotation by
    ``covariance_rotation_angle`` in each coordinate plane ``(0,1), (2,3), ...``
    and then translated by ``mean_shift``.
    """

    dim: int = 10
    num_classes: int = 3
    n_source: int = 200
    n_target: int = 200
    mean_shift: tuple = ()
    covariance_rotation_angle: float = 0.0
    noise_scale: float = 1.0
    seed: int = 0
    class_separation: float = 3.0
    anisotropy: float = 10.0

    def __post_init__(self):
        if self.dim < 2:
            raise ContractError(f"dim must be >= 2, got {self.dim}")
        if self.num_classes < 2:
            raise ContractError(f"need >= 2 classes, got {self.num_classes}")
        if min(self.n_source, self.n_target) < self.num_classes:
            raise ContractError("each domain needs at least one sample per class")
        if self.noise_scale <= 0:
            raise ContractError("noise_scale must be positive")
        if len(self.mean_shift) not in (0, self.dim):
            raise ContractError(
                f"mean_shift must have length {self.dim}, got {len(self.mean_shift)}"
            )

    def shift_vector(self):
        if len(self.mean_shift) == 0:
            return np.zeros(self.dim)
        return np.asarray(self.mean_shift, dtype=float)


def plane_rotation(dim, angle):
    """Block rotation by ``angle`` in planes (0,1), (2,3), ..."""
    R = np.eye(dim)
    c, s = math.cos(angle), math.sin(angle)
    for i in range(0, dim - 1, 2):
        R[i:i + 2, i:i + 2] = [[c, -s], [s, c]]
    return R


def _balanced_labels(rng, n, k):
    y = np.arange(n) % k
    return rng.permutation(y)


def generate_synthetic_shift(spec):
    """Return ``(source, target)`` datasets, both labelled, for ``spec``."""
    rng = np.random.default_rng(spec.seed)
    d, k = spec.dim, spec.num_classes

    means = rng.standard_normal((k, d))
    means *= spec.class_separation / np.linalg.norm(means, axis=1, keepdims=True)
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    scales = spec.noise_scale * np.geomspace(1.0, 1.0 / math.sqrt(spec.anisotropy), d)
    root = Q * scales

    def draw(n):
        y = _balanced_labels(rng, n, k)
        return means[y] + rng.standard_normal((n, d)) @ root.T, y

    Xs, ys = draw(spec.n_source)
    Xt, yt = draw(spec.n_target)
    R = plane_rotation(d, spec.covariance_rotation_angle)
    Xt = Xt @ R.T + spec.shift_vector()
    return (
        DomainDataset(Xs, ys, "synthetic_source", k),
        DomainDataset(Xt, yt, "synthetic_target", k),
    )
