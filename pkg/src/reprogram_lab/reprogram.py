"""Adversarial programs: the analytic construction from network weights,
reprogrammed-accuracy measurement, the two image-combination schemes, and
a gradient-based program optimizer.

An adversarial program is a single offset vector p added to every input
of the adversarial task.  The analytic construction solves W p = b where
b holds one target bias per hidden neuron: zero for neurons whose sign
already helps the task, and a large negative value for the rest, which
silences them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_models import BernoulliModel, sample_bernoulli
from .errors import ChannelMismatch, TieEncountered, WidthExceedsDimension
from .gradient_flow import loss_value_and_derivative
from .network import TwoLayerNet, forward_batch
from .numerics import SeededRng, min_norm_solve

TIE_TOL = 1e-14

# Bound on the magnitude of optimised program entries: the squashed
# parameterisation maps onto (-c, c) with c = SOFTSIGN_SCALE * sqrt(d).
SOFTSIGN_SCALE = 1.2


@dataclass(frozen=True)
class AdversarialProgram:
    """Analytic program offset plus its provenance.

    ``offset`` is the program p; ``target_bias`` the per-neuron bias vector
    it induces (W p); ``helpful``/``unhelpful`` the index sets of neurons
    aligned/anti-aligned with the task direction; the norms are recorded
    as diagnostics.
    """

    offset: np.ndarray
    target_bias: np.ndarray
    helpful: np.ndarray
    unhelpful: np.ndarray
    offset_norm: float
    target_bias_norm: float


@dataclass(frozen=True)
class ProgramImage:
    """Colour or grayscale image with float pixel values in [-1, 1].

    ``pixels`` has shape (height, width, channels), row-major.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or min(px.shape) < 1:
            raise ValueError("pixels must be a nonempty (H, W, C) array")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel values must be finite")
        if px.min() < -1.0 or px.max() > 1.0:
            raise ValueError("pixel values must lie in [-1, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


def partition_neurons(
    net: TwoLayerNet, direction: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Split neuron indices by the sign of outputs[j] * (weights[j] . direction).

    Positive products are helpful for the task along ``direction``; negative
    ones are unhelpful.  A (near) zero product is a probability-zero event
    for the random networks this is meant for, so it raises
    :class:`TieEncountered` rather than silently picking a side.
    """
    phi = np.asarray(direction, dtype=np.float64)
    if phi.shape != (net.d,):
        raise ValueError(f"direction has shape {phi.shape}, expected ({net.d},)")
    if abs(np.linalg.norm(phi) - 1.0) > 1e-9:
        raise ValueError("direction must have unit norm")
    scores = net.outputs * (net.weights @ phi)
    ties = np.flatnonzero(np.abs(scores) < TIE_TOL)
    if ties.size:
        raise TieEncountered(
            f"neuron {int(ties[0])} has alignment score {scores[ties[0]]:.3e}"
        )
    return np.flatnonzero(scores > 0.0), np.flatnonzero(scores < 0.0)


def build_target_bias(d: int, k: int, unhelpful: np.ndarray) -> np.ndarray:
    """Per-neuron target bias: 0 on helpful neurons, -sqrt(d/|unhelpful|)
    on unhelpful ones.  Its norm is exactly sqrt(d) when any neuron is
    unhelpful."""
    bias = np.zeros(k)
    if unhelpful.size:
        bias[unhelpful] = -math.sqrt(d / unhelpful.size)
    return bias


def construct_program(net: TwoLayerNet, direction: np.ndarray) -> AdversarialProgram:
    """Analytic adversarial program for a network and a task direction.

    Requires width <= dimension with linearly independent hidden rows.
    Solves W p = b for the minimum-norm p, so that adding p to any input
    acts as the per-neuron first-layer bias b.  The norm of p is bracketed
    by norm(b)/s_max(W) and norm(b)/s_min(W).

    Raises
    ------
    WidthExceedsDimension
        If net.k > net.d.
    GramNotPositiveDefinite
        Propagated from the solver when hidden rows are dependent.
    """
    if net.k > net.d:
        raise WidthExceedsDimension(f"width {net.k} exceeds dimension {net.d}")
    helpful, unhelpful = partition_neurons(net, direction)
    bias = build_target_bias(net.d, net.k, unhelpful)
    if unhelpful.size:
        offset = min_norm_solve(net.weights, bias)
    else:
        offset = np.zeros(net.d)
    return AdversarialProgram(
        offset=offset,
        target_bias=bias,
        helpful=helpful,
        unhelpful=unhelpful,
        offset_norm=float(np.linalg.norm(offset)),
        target_bias_norm=float(np.linalg.norm(bias)),
    )


def reprogrammed_accuracy(
    net: TwoLayerNet,
    offset: np.ndarray,
    model: BernoulliModel,
    m: int,
    trials: int,
    rng: SeededRng,
) -> tuple[float, float]:
    """Monte-Carlo accuracy of the reprogrammed network on the data model.

    A trial succeeds when m * y * N(offset + x) is strictly positive; an
    output of exactly zero counts as a failure.  Returns the success
    fraction and its binomial standard error.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if m not in (-1, 1):
        raise ValueError("label mapping m must be +1 or -1")
    xs, ys = sample_bernoulli(model, trials, rng)
    xs += np.asarray(offset, dtype=np.float64)[None, :]
    outputs = forward_batch(net, xs)
    successes = int(np.count_nonzero(m * ys * outputs > 0.0))
    accuracy = successes / trials
    stderr = math.sqrt(accuracy * (1.0 - accuracy) / trials)
    return accuracy, stderr


def bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize (H, W, C) pixel data with bilinear interpolation.

    Sample positions use half-integer pixel centres and are edge-clamped,
    so output values are convex combinations of input values.
    """
    px = np.asarray(pixels, dtype=np.float64)
    in_h, in_w = px.shape[0], px.shape[1]
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be positive")

    def axis_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        lo = np.floor(src).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = src - lo
        return lo, hi, frac

    y0, y1, fy = axis_coords(out_h, in_h)
    x0, x1, fx = axis_coords(out_w, in_w)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    top = px[y0][:, x0] * (1.0 - fx) + px[y0][:, x1] * fx
    bottom = px[y1][:, x0] * (1.0 - fx) + px[y1][:, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def _round_half_away(value: float) -> int:
    return int(math.floor(value + 0.5)) if value >= 0 else -int(math.floor(-value + 0.5))


def scheme1_combine(program: ProgramImage, image: ProgramImage, r: float) -> ProgramImage:
    """Centre-paste combination: overwrite the middle of the program.

    The input image is resized (bilinear) to a square of side
    round(r * program.width) and pasted centred, with top-left offset
    floor((width - side) / 2) on both axes.  r = 0 leaves the program
    untouched; r = 1 overwrites it entirely.
    """
    if program.height != program.width:
        raise ValueError("scheme 1 requires a square program image")
    if program.channels != image.channels:
        raise ChannelMismatch(
            f"program has {program.channels} channels, image has {image.channels}"
        )
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    side = _round_half_away(r * program.width)
    if side == 0:
        return ProgramImage(pixels=program.pixels.copy())
    pasted = bilinear_resize(image.pixels, side, side)
    offset = (program.width - side) // 2
    out = program.pixels.copy()
    out[offset : offset + side, offset : offset + side, :] = pasted
    return ProgramImage(pixels=out)


def scheme2_combine(program: ProgramImage, image: ProgramImage, v: float) -> ProgramImage:
    """Convex blend: v * image + (1 - v) * program, after resizing the
    image to the program's shape."""
    if program.channels != image.channels:
        raise ChannelMismatch(
            f"program has {program.channels} channels, image has {image.channels}"
        )
    if not 0.0 <= v <= 1.0:
        raise ValueError("v must lie in [0, 1]")
    resized = bilinear_resize(image.pixels, program.height, program.width)
    return ProgramImage(pixels=v * resized + (1.0 - v) * program.pixels)


def optimize_program(
    net: TwoLayerNet,
    model: BernoulliModel,
    m: int,
    steps: int,
    lr: float,
    batch: int,
    rng: SeededRng,
) -> tuple[np.ndarray, list[float]]:
    """Gradient search for a program offset against a fixed network.

    The offset is parameterised as c * softsign(q) with
    c = SOFTSIGN_SCALE * sqrt(d), which keeps every entry bounded, and q
    is updated by descent on the mean logistic loss of
    m * y * N(p + x) over fresh minibatches from the data model.  The
    subgradient of the ReLU at its kink is taken as zero.  Returns the
    final offset and the per-step mean batch loss.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if steps > 0 and (lr <= 0.0 or batch < 1):
        raise ValueError("lr must be positive and batch at least 1")
    if m not in (-1, 1):
        raise ValueError("label mapping m must be +1 or -1")
    d = net.d
    cap = SOFTSIGN_SCALE * math.sqrt(d)
    start = 2.0 * rng.random_open(d) - 1.0  # uniform in (-1, 1)
    q = start / (1.0 - np.abs(start))
    losses: list[float] = []
    for _ in range(steps):
        xs, ys = sample_bernoulli(model, batch, rng)
        p = cap * q / (1.0 + np.abs(q))
        pre = (xs + p[None, :]) @ net.weights.T
        active = pre > 0.0
        outputs = np.maximum(pre, 0.0) @ net.outputs
        margins = m * ys * outputs
        value, slope = loss_value_and_derivative("logistic", margins)
        losses.append(float(np.mean(value)))
        d_out = slope * (m * ys) / batch
        d_p = net.weights.T @ ((active * net.outputs[None, :]).T @ d_out)
        d_q = d_p * cap / (1.0 + np.abs(q)) ** 2
        q -= lr * d_q
    return cap * q / (1.0 + np.abs(q)), losses


def image_to_text(image: ProgramImage) -> str:
    """Serialise: header ``H W C``, then row-major pixel values."""
    head = f"{image.height} {image.width} {image.channels}"
    flat = image.pixels.reshape(-1)
    body = "\n".join(
        " ".join(format(v, ".17g") for v in flat[i : i + image.width * image.channels])
        for i in range(0, flat.size, image.width * image.channels)
    )
    return head + "\n" + body + "\n"


def image_from_text(text: str) -> ProgramImage:
    """Parse the format written by :func:`image_to_text`."""
    tokens = text.split()
    if len(tokens) < 3:
        raise ValueError("image record too short")
    h, w, c = int(tokens[0]), int(tokens[1]), int(tokens[2])
    values = np.array([float(v) for v in tokens[3:]])
    if values.size != h * w * c:
        raise ValueError(f"expected {h * w * c} pixel values, found {values.size}")
    return ProgramImage(pixels=values.reshape(h, w, c))


def image_to_ppm(image: ProgramImage) -> bytes:
    """8-bit binary PPM; [-1, 1] maps linearly onto [0, 255], rounding
    half up."""
    if image.channels != 3:
        raise ChannelMismatch("PPM export requires exactly 3 channels")
    scaled = (image.pixels + 1.0) * (255.0 / 2.0)
    bytes8 = np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + bytes8.tobytes()


def image_from_ppm(data: bytes) -> ProgramImage:
    """Parse binary PPM back to float pixels in [-1, 1]."""
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P6":
        raise ValueError("only binary PPM (P6) is supported")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=h * w * 3, offset=pos)
    pixels = raw.astype(np.float64).reshape(h, w, 3) * (2.0 / 255.0) - 1.0
    return ProgramImage(pixels=pixels)
