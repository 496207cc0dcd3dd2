"""Data models: Bernoulli hypercube distributions and orthogonally
separable datasets, with generators and certifying checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenerationExhausted
from .numerics import SeededRng

# Half-angle of the cones used by generate_orthosep.  Anything below 45
# degrees guarantees both separability conditions: two points within the
# same cone are at most 2*40 = 80 degrees apart (positive inner product),
# and points from antipodal cones are at least 100 degrees apart.
_CONE_HALF_ANGLE = math.radians(40.0)
_GENERATION_RETRIES = 1000


@dataclass(frozen=True)
class BernoulliModel:
    """Two-class distribution over scaled hypercube vertices.

    ``direction`` is a unit hypercube vertex (entries exactly ±1/sqrt(d)),
    ``radius`` scales the vertices, and ``bias`` in (0, 1/2] controls task
    difficulty: each coordinate of a sample keeps its class sign with
    probability 1/2 + bias.
    """

    direction: np.ndarray
    radius: float
    bias: float

    def __post_init__(self):
        phi = np.asarray(self.direction, dtype=np.float64)
        if phi.ndim != 1 or phi.size < 1:
            raise ValueError("direction must be a nonempty vector")
        step = 1.0 / math.sqrt(phi.size)
        if not np.all(np.abs(phi) == step):
            raise ValueError("direction entries must be exactly ±1/sqrt(d)")
        if abs(np.linalg.norm(phi) - 1.0) > 1e-12:
            raise ValueError("direction must have unit norm")
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if not 0.0 < self.bias <= 0.5:
            raise ValueError("bias must lie in (0, 1/2]")
        object.__setattr__(self, "direction", phi)

    @property
    def d(self) -> int:
        return self.direction.size


@dataclass(frozen=True)
class LabeledDataset:
    """Finite binary-classification sample: points (n, d) and labels ±1."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, d) array")
        if y.shape != (x.shape[0],):
            raise ValueError("labels length must equal the point count")
        if not np.all(np.isfinite(x)):
            raise ValueError("points must be finite")
        if np.any(np.linalg.norm(x, axis=1) == 0.0):
            raise ValueError("points must be nonzero")
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("labels must be ±1")
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def random_hypercube_direction(d: int, rng: SeededRng) -> np.ndarray:
    """Uniformly random hypercube vertex: each entry ±1/sqrt(d), unit norm."""
    if d < 1:
        raise ValueError("d must be positive")
    phi = rng.signs(d)
    phi *= 1.0 / math.sqrt(d)
    return phi


def sample_bernoulli(
    model: BernoulliModel, count: int, rng: SeededRng
) -> tuple[np.ndarray, np.ndarray]:
    """Draw labelled samples; returns (points (count, d), labels (count,)).

    Per sample: the label y is uniform on ±1, the point starts at
    y * radius * direction, and each coordinate's sign flips independently
    with probability 1/2 - bias.  Labels are drawn first, then the flips
    row-major.  Every coordinate is exactly ±radius/sqrt(d).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    y = rng.signs(count)
    flip = rng.random(count * model.d).reshape(count, model.d) < (0.5 - model.bias)
    signs = np.where(flip, -1.0, 1.0)
    base = model.radius * model.direction
    xs = y[:, None] * base[None, :] * signs
    return xs, y


def check_orthosep(dataset: LabeledDataset) -> tuple[bool, tuple[int, int] | None]:
    """Certify orthogonal separability, exactly as defined.

    Same-class pairs (including i = i') must have strictly positive inner
    products; cross-class pairs must have nonpositive ones.  Comparisons
    are exact: a cross pair at exactly zero is allowed.  Returns
    (True, None) or (False, first violating index pair).
    """
    gram = dataset.points @ dataset.points.T
    same = dataset.labels[:, None] == dataset.labels[None, :]
    ok = np.where(same, gram > 0.0, gram <= 0.0)
    if bool(np.all(ok)):
        return True, None
    flat = np.argmin(ok)  # first False in row-major order
    i, j = divmod(int(flat), dataset.n)
    return False, (i, j)


def _cone_point(axis: np.ndarray, rng: SeededRng) -> np.ndarray:
    """Random point of norm near 1 within the cone around ``axis``."""
    d = axis.size
    g = rng.gaussian(d)
    g -= (g @ axis) * axis
    norm = np.linalg.norm(g)
    angle = float(rng.random(1)[0]) * _CONE_HALF_ANGLE
    radius = 0.75 + 0.5 * float(rng.random(1)[0])
    if norm < 1e-12:
        return radius * axis
    return radius * (math.cos(angle) * axis + math.sin(angle) * (g / norm))


def generate_orthosep(
    d: int, n_pos: int, n_neg: int, rng: SeededRng
) -> LabeledDataset:
    """Random orthogonally separable dataset with the requested class sizes.

    Positives are drawn in a 40-degree cone around a random unit axis and
    negatives around its antipode, which guarantees both sign conditions;
    the result is certified with :func:`check_orthosep` anyway and the
    construction retried on the (theoretically impossible) failure path.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if n_pos < 1 or n_neg < 1:
        raise ValueError("both classes need at least one point")
    for _ in range(_GENERATION_RETRIES):
        axis = rng.gaussian(d)
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            continue
        axis /= norm
        points = np.empty((n_pos + n_neg, d))
        for i in range(n_pos):
            points[i] = _cone_point(axis, rng)
        for i in range(n_neg):
            points[n_pos + i] = _cone_point(-axis, rng)
        labels = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
        dataset = LabeledDataset(points=points, labels=labels)
        ok, _ = check_orthosep(dataset)
        if ok:
            return dataset
    raise GenerationExhausted(
        f"no orthogonally separable dataset found in {_GENERATION_RETRIES} attempts"
    )


def dataset_to_text(dataset: LabeledDataset) -> str:
    """Serialise: header ``n d``, then n lines of ``y x_1 ... x_d``."""
    lines = [f"{dataset.n} {dataset.d}"]
    for y, row in zip(dataset.labels, dataset.points):
        lines.append(f"{int(y)} " + " ".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def dataset_from_text(text: str) -> LabeledDataset:
    """Parse the format written by :func:`dataset_to_text`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty dataset record")
    n, d = (int(v) for v in lines[0].split())
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} data lines, found {len(lines) - 1}")
    labels = np.empty(n)
    points = np.empty((n, d))
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != d + 1:
            raise ValueError(f"line {i + 2} has {len(parts)} fields, expected {d + 1}")
        labels[i] = float(parts[0])
        points[i] = [float(v) for v in parts[1:]]
    return LabeledDataset(points=points, labels=labels)
