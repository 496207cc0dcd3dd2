"""Two-layer ReLU networks: construction, evaluation, serialisation.

A network maps an input x in R^d to sum_j outputs[j] * max(weights[j] . x, 0).
There are no biases in either layer.  Instances are immutable and safe to
share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .numerics import SeededRng


@dataclass(frozen=True)
class TwoLayerNet:
    """Width-k ReLU network over input dimension d.

    ``weights`` has shape (k, d); row j is the j-th hidden neuron.
    ``outputs`` has shape (k,) and holds the second-layer weights.
    """

    weights: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        a = np.asarray(self.outputs, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("weights must be a nonempty 2-D array")
        if a.shape != (w.shape[0],):
            raise ValueError("outputs length must equal the network width")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(a))):
            raise ValueError("network weights must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "outputs", a)

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def random_init(d: int, k: int, rng: SeededRng) -> TwoLayerNet:
    """Network with i.i.d. N(0, 1/d) hidden rows and uniform ±1/sqrt(k) outputs.

    Hidden weights are drawn first (row-major), then the output signs, so a
    given (seed, stream) always yields the same network bit for bit.
    """
    if d < 1 or k < 1:
        raise ValueError("dimensions must be positive")
    w = rng.gaussian(k * d).reshape(k, d)
    w *= 1.0 / math.sqrt(d)
    a = rng.signs(k)
    a *= 1.0 / math.sqrt(k)
    return TwoLayerNet(weights=w, outputs=a)


def forward(net: TwoLayerNet, x: np.ndarray) -> float:
    """Network output for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.d,):
        raise DimensionMismatch(f"input has shape {x.shape}, expected ({net.d},)")
    pre = net.weights @ x
    return float(np.maximum(pre, 0.0) @ net.outputs)


def forward_batch(net: TwoLayerNet, xs: np.ndarray) -> np.ndarray:
    """Network outputs for a batch of inputs, shape (n, d) -> (n,)."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != net.d:
        raise DimensionMismatch(f"batch has shape {xs.shape}, expected (n, {net.d})")
    return np.maximum(xs @ net.weights.T, 0.0) @ net.outputs


def relu_subgradient(u: float) -> tuple[float, float]:
    """Clarke subdifferential of the ReLU at u, as the interval [lo, hi].

    Returns [0, 0] for u < 0, the full interval [0, 1] at the kink u = 0,
    and [1, 1] for u > 0.
    """
    if not math.isfinite(u):
        raise ValueError("u must be finite")
    if u < 0.0:
        return (0.0, 0.0)
    if u > 0.0:
        return (1.0, 1.0)
    return (0.0, 1.0)


def network_to_text(net: TwoLayerNet) -> str:
    """Serialise a network to the plain-text record format.

    Line 1 is ``d k``; then k lines of d hidden weights; then one line of
    k output weights.  Values use 17 significant digits, so parsing the
    text reproduces every float exactly.
    """
    lines = [f"{net.d} {net.k}"]
    for row in net.weights:
        lines.append(" ".join(format(v, ".17g") for v in row))
    lines.append(" ".join(format(v, ".17g") for v in net.outputs))
    return "\n".join(lines) + "\n"


def network_from_text(text: str) -> TwoLayerNet:
    """Parse the format written by :func:`network_to_text`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty network record")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("header must be 'd k'")
    d, k = int(head[0]), int(head[1])
    if len(lines) != 1 + k + 1:
        raise ValueError(f"expected {k + 1} weight lines, found {len(lines) - 1}")
    w = np.array([[float(v) for v in lines[1 + j].split()] for j in range(k)])
    if w.shape != (k, d):
        raise ValueError("hidden-weight block has the wrong shape")
    a = np.array([float(v) for v in lines[1 + k].split()])
    if a.shape != (k,):
        raise ValueError("output-weight line has the wrong length")
    return TwoLayerNet(weights=w, outputs=a)
