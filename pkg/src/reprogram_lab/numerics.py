"""Small dense linear algebra, special functions, and seeded randomness.

Every routine is deterministic given its inputs.  Random draws come from
counter-based streams addressed by (master_seed, stream_id), so identical
seeds replay bitwise-identical sequences and distinct stream ids can be
handed to independent workers.

Numerical slack lives in three module constants so it can be audited in
one place:

* ``LINSOLVE_TOL``  residual bound guaranteed by :func:`min_norm_solve`,
* ``PD_PIVOT_TOL``  Cholesky pivot floor below which a Gram matrix counts
  as rank deficient,
* ``SV_REL_TOL``    relative accuracy target of :func:`singular_extremes`.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceFailure, GramNotPositiveDefinite

LINSOLVE_TOL = 1e-10
PD_PIVOT_TOL = 1e-12
SV_REL_TOL = 1e-8

# Gram matrices up to this size get a full eigendecomposition; larger ones
# go through power / shifted-inverse iteration.
_DENSE_GRAM_LIMIT = 64

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_SECOND = 0xD1B54A32D192ED03
_TO_UNIT = 2.0 ** -53


def _mix64_int(value: int) -> int:
    """SplitMix64 finalizer on plain Python integers (mod 2^64)."""
    value &= _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return value ^ (value >> 31)


_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_UM1 = np.uint64(0xBF58476D1CE4E5B9)
_UM2 = np.uint64(0x94D049BB133111EB)
_UGOLDEN = np.uint64(_GOLDEN)


def _mix64_inplace(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied in place to a uint64 array."""
    z ^= z >> _U30
    z *= _UM1
    z ^= z >> _U27
    z *= _UM2
    z ^= z >> _U31
    return z


class SeededRng:
    """Deterministic random stream built on a SplitMix64 counter.

    The draw at position ``c`` of stream ``(master_seed, stream_id)`` is a
    pure function of those three integers, so sequences replay exactly and
    streams with distinct ids are statistically independent.  A stream has
    a single owner: methods advance an internal counter.

    Gaussians use the Box-Muller transform on the uniform stream (both the
    cosine and sine variates are consumed, interleaved).
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed & _MASK64
        self.stream_id = stream_id & _MASK64
        self._key = np.uint64(
            _mix64_int(
                _mix64_int(self.master_seed + _GOLDEN) ^ _mix64_int(self.stream_id + _SECOND)
            )
        )
        self._counter = 0

    def uniform64(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words as a uint64 array."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        z = np.arange(1 + self._counter, 1 + self._counter + count, dtype=np.uint64)
        self._counter += count
        z *= _UGOLDEN
        z += self._key
        return _mix64_inplace(z)

    def random(self, count: int) -> np.ndarray:
        """Uniform float64 samples in [0, 1)."""
        bits = self.uniform64(count)
        bits >>= np.uint64(11)
        out = bits.astype(np.float64)
        out *= _TO_UNIT
        return out

    def random_open(self, count: int) -> np.ndarray:
        """Uniform float64 samples in the open interval (0, 1)."""
        bits = self.uniform64(count)
        bits >>= np.uint64(11)
        out = bits.astype(np.float64)
        out += 0.5
        out *= _TO_UNIT
        return out

    def signs(self, count: int) -> np.ndarray:
        """Independent uniform ±1.0 samples."""
        bit = self.uniform64(count) >> np.uint64(63)
        return 1.0 - 2.0 * bit.astype(np.float64)

    def gaussian(self, count: int) -> np.ndarray:
        """Independent standard normal samples via Box-Muller.

        Each uniform pair yields two variates (cosine block first, then
        the sine block); an odd ``count`` discards the final sine variate.
        """
        if count == 0:
            return np.empty(0)
        pairs = (count + 1) // 2
        bits = self.uniform64(2 * pairs)
        bits >>= np.uint64(11)
        flt = bits.astype(np.float64)
        u1 = flt[:pairs]
        u1 += 1.0
        u1 *= _TO_UNIT  # (0, 1]: log never sees zero
        angle = flt[pairs:]
        angle *= _TO_UNIT * (2.0 * math.pi)
        np.log(u1, out=u1)
        u1 *= -2.0
        radius = np.sqrt(u1, out=u1)
        out = np.empty(2 * pairs)
        np.cos(angle, out=out[:pairs])
        np.sin(angle, out=out[pairs:])
        out[:pairs] *= radius
        out[pairs:] *= radius
        return out[:count]


def std_gaussian_density(u: float) -> float:
    """Density of a standard Gaussian: exp(-u^2/2) / sqrt(2 pi)."""
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def cholesky_spd(gram: np.ndarray, pivot_tol: float = PD_PIVOT_TOL) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix.

    Raises :class:`GramNotPositiveDefinite` as soon as a pivot falls below
    ``pivot_tol``, which is how rank deficiency surfaces to callers.
    """
    a = np.asarray(gram, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("cholesky_spd expects a square matrix")
    n = a.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        pivot = a[j, j] - low[j, :j] @ low[j, :j]
        if pivot < pivot_tol:
            raise GramNotPositiveDefinite(
                f"Cholesky pivot {pivot:.3e} below {pivot_tol:g} at column {j}"
            )
        diag = math.sqrt(pivot)
        low[j, j] = diag
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / diag
    return low


def solve_cholesky(low: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (L L^T) x = rhs given the lower Cholesky factor L."""
    n = low.shape[0]
    y = np.asarray(rhs, dtype=np.float64).copy()
    for i in range(n):
        y[i] = (y[i] - low[i, :i] @ y[:i]) / low[i, i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - low[i + 1 :, i] @ y[i + 1 :]) / low[i, i]
    return y


def min_norm_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Minimum-Euclidean-norm solution p of an underdetermined system mat p = rhs.

    ``mat`` is k-by-d with k <= d and linearly independent rows.  Computes
    p = matᵀ (mat matᵀ)⁻¹ rhs via Cholesky on the k-by-k Gram matrix; the
    result satisfies ``norm(mat @ p - rhs) <= LINSOLVE_TOL * max(1, norm(rhs))``.

    Raises
    ------
    GramNotPositiveDefinite
        If the Gram matrix has a Cholesky pivot below ``PD_PIVOT_TOL``
        (linearly dependent rows, including the case k > d).
    """
    w = np.asarray(mat, dtype=np.float64)
    b = np.asarray(rhs, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("min_norm_solve expects a 2-D matrix")
    if b.shape != (w.shape[0],):
        raise ValueError("right-hand side length must equal the row count")
    gram = w @ w.T
    low = cholesky_spd(gram)
    p = w.T @ solve_cholesky(low, b)
    # Iterative refinement keeps the residual at the contract level even
    # for ill-conditioned Gram matrices; corrections live in the row
    # space, so minimality is preserved.
    goal = 0.25 * LINSOLVE_TOL * max(1.0, float(np.linalg.norm(b)))
    for _ in range(4):
        residual = b - w @ p
        if float(np.linalg.norm(residual)) <= goal:
            break
        p += w.T @ solve_cholesky(low, residual)
    return p


def _power_iteration(gram: np.ndarray, budget: int = 200_000) -> float:
    # Stop on the symmetric-eigenvalue residual bound
    # |lambda_est - lambda| <= ||G v - lambda_est v|| for unit v.
    n = gram.shape[0]
    vec = SeededRng(0x5EED_1A7C, n).gaussian(n)
    vec /= np.linalg.norm(vec)
    for _ in range(budget):
        image = gram @ vec
        lam = float(vec @ image)
        residual = float(np.linalg.norm(image - lam * vec))
        if residual <= 0.25 * SV_REL_TOL * abs(lam):
            return lam
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            return 0.0
        vec = image / norm
    raise ConvergenceFailure("power iteration did not converge within budget")


def _inverse_iteration(gram: np.ndarray, budget: int = 200_000) -> float:
    n = gram.shape[0]
    try:
        low = cholesky_spd(gram)
    except GramNotPositiveDefinite as exc:
        raise ConvergenceFailure(
            "Gram matrix numerically singular; fall back to a dense decomposition"
        ) from exc
    vec = SeededRng(0x5EED_1A7D, n).gaussian(n)
    vec /= np.linalg.norm(vec)
    for _ in range(budget):
        image = gram @ vec
        lam = float(vec @ image)
        residual = float(np.linalg.norm(image - lam * vec))
        if residual <= 0.25 * SV_REL_TOL * abs(lam):
            return lam
        pulled = solve_cholesky(low, vec)
        vec = pulled / np.linalg.norm(pulled)
    raise ConvergenceFailure("inverse iteration did not converge within budget")


def singular_extremes(mat: np.ndarray) -> tuple[float, float]:
    """Extreme singular values (s_min, s_max) of a matrix.

    Works on the Gram matrix of the smaller side.  Up to size
    ``_DENSE_GRAM_LIMIT`` the Gram matrix is decomposed exactly; beyond
    that, the largest eigenvalue comes from power iteration and the
    smallest from shifted-inverse iteration, both to ``SV_REL_TOL``.

    Raises
    ------
    ConvergenceFailure
        If an iteration budget runs out (ill-conditioned input); callers
        may then fall back to a dense decomposition of their own.
    """
    w = np.asarray(mat, dtype=np.float64)
    if w.ndim != 2 or w.size == 0:
        raise ValueError("singular_extremes expects a nonempty 2-D matrix")
    gram = w @ w.T if w.shape[0] <= w.shape[1] else w.T @ w
    if gram.shape[0] <= _DENSE_GRAM_LIMIT:
        eig = np.linalg.eigvalsh(gram)
        return math.sqrt(max(float(eig[0]), 0.0)), math.sqrt(max(float(eig[-1]), 0.0))
    lam_max = _power_iteration(gram)
    lam_min = _inverse_iteration(gram)
    return math.sqrt(max(lam_min, 0.0)), math.sqrt(max(lam_max, 0.0))
