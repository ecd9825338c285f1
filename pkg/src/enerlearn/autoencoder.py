"""Linear autoencoders with an internalized (parroting) learning loop.

A signal frame ``F`` is compressed to a code ``f`` by a linear encoder,
expanded back to a reconstruction ``F'`` by a linear decoder, and then
re-encoded to ``f'``.  The classical training signal is the external
reconstruction error ``d(F, F')``; the parroting variant instead compares
the two internal codes, ``d(f, f')``, so the decoder can be trained from
quantities the system itself perceives.  Encoders are trained separately,
against a compression objective that depends only on the statistics of the
external signal population.

All coders are plain real matrices, which keeps every training claim
checkable against closed-form least-squares / eigendecomposition oracles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .csvio import read_rows, write_rows

ENCODER = "encoder"
DECODER = "decoder"

# Declared-convergence threshold for iterative decoder training: stop when
# the objective improves by less than this per iteration.
GRADIENT_TOL = 1e-10


def _as_finite_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Frame:
    """A fixed-length vector of real signal samples."""

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_finite_array(self.samples, "samples", 1))

    @property
    def dim(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class LinearCoder:
    """A real matrix coder; ``role`` tags it as encoder or decoder.

    Encoders must not expand dimension (rows <= cols): the bottleneck is
    what forces the code to be a genuine compression.
    """

    weights: np.ndarray
    role: str

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_finite_array(self.weights, "weights", 2))
        if self.role not in (ENCODER, DECODER):
            raise ValueError(f"role must be '{ENCODER}' or '{DECODER}', got {self.role!r}")
        if self.role == ENCODER and self.rows > self.cols:
            raise ValueError(
                f"encoder must have rows <= cols (bottleneck), got {self.rows}x{self.cols}"
            )

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


def encoder(weights) -> LinearCoder:
    return LinearCoder(np.asarray(weights, dtype=float), ENCODER)


def decoder(weights) -> LinearCoder:
    return LinearCoder(np.asarray(weights, dtype=float), DECODER)


class Dataset:
    """A nonempty population of frames of uniform dimension."""

    def __init__(self, frames):
        frames = list(frames)
        if not frames:
            raise ValueError("dataset must contain at least one frame")
        dims = {f.dim for f in frames}
        if len(dims) != 1:
            raise ValueError(f"dataset frames must share one dimension, got {sorted(dims)}")
        self._matrix = np.stack([f.samples for f in frames])

    @classmethod
    def from_matrix(cls, matrix) -> "Dataset":
        matrix = _as_finite_array(matrix, "matrix", 2)
        return cls([Frame(row) for row in matrix])

    @property
    def matrix(self) -> np.ndarray:
        """Frames stacked row-wise, shape (n_frames, dim)."""
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    def __len__(self) -> int:
        return self._matrix.shape[0]

    def __iter__(self):
        return (Frame(row) for row in self._matrix)

    def covariance(self) -> np.ndarray:
        """Mean-centered second-moment matrix (normalized by n_frames)."""
        centered = self._matrix - self._matrix.mean(axis=0)
        return centered.T @ centered / len(self)


@dataclass(frozen=True)
class ParrotReport:
    """One pass around the loop: code, reconstruction, re-heard code, errors."""

    f: Frame
    f_prime: Frame
    F_prime: Frame
    external_error: float
    internal_error: float


def mse(x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared difference, the discrepancy metric used throughout."""
    return float(np.mean((x - y) ** 2))


def encode(coder: LinearCoder, F: Frame) -> Frame:
    """Compress an external frame to its internal code."""
    if coder.role != ENCODER:
        raise ValueError(f"encode requires an encoder, got role {coder.role!r}")
    if coder.cols != F.dim:
        raise ValueError(f"encoder expects dim {coder.cols}, frame has dim {F.dim}")
    return Frame(coder.weights @ F.samples)


def decode(coder: LinearCoder, f: Frame) -> Frame:
    """Expand an internal code back into signal space."""
    if coder.role != DECODER:
        raise ValueError(f"decode requires a decoder, got role {coder.role!r}")
    if coder.cols != f.dim:
        raise ValueError(f"decoder expects dim {coder.cols}, frame has dim {f.dim}")
    return Frame(coder.weights @ f.samples)


def parrot_cycle(a: LinearCoder, b: LinearCoder, F: Frame) -> ParrotReport:
    """Hear F, reproduce it, and hear the reproduction.

    Returns both the external reconstruction error d(F, F') and the internal
    error d(f, f') between the first-heard and self-heard codes.  The
    internal error sees F only through its code, so it is blind to anything
    the encoder discards.
    """
    if a.cols != F.dim or b.cols != a.rows or b.rows != F.dim:
        raise ValueError(
            f"shapes do not compose: encoder {a.rows}x{a.cols}, "
            f"decoder {b.rows}x{b.cols}, frame dim {F.dim}"
        )
    f = encode(a, F)
    F_prime = decode(b, f)
    f_prime = encode(a, F_prime)
    return ParrotReport(
        f=f,
        f_prime=f_prime,
        F_prime=F_prime,
        external_error=mse(F.samples, F_prime.samples),
        internal_error=mse(f.samples, f_prime.samples),
    )


def _codes(a: LinearCoder, data: Dataset) -> np.ndarray:
    """Dataset codes stacked column-wise, shape (bottleneck, n_frames)."""
    return a.weights @ data.matrix.T


def decoder_objective(a: LinearCoder, b: LinearCoder, data: Dataset) -> float:
    """Mean internal error of the parrot loop over a dataset."""
    codes = _codes(a, data)
    reheard = a.weights @ (b.weights @ codes)
    return float(np.mean((reheard - codes) ** 2))


def train_decoder(
    a: LinearCoder,
    data: Dataset,
    mode: str = "closed_form",
    step: float | None = None,
    iters: int = 10_000,
) -> LinearCoder:
    """Fit the decoder that minimizes the mean internal error over ``data``.

    ``closed_form`` returns the minimal-norm least-squares minimizer of
    ||E(a) b f - f||^2 over the dataset's codes f.  ``gradient`` runs
    gradient descent from b = 0: with an explicit ``step`` it takes fixed
    steps (monotone for sufficiently small step); with ``step=None`` it
    uses the exact line-search step for this quadratic objective, which is
    monotone by construction.  Iteration stops once the per-step
    improvement drops below GRADIENT_TOL.
    """
    if a.cols != data.dim:
        raise ValueError(f"encoder expects dim {a.cols}, dataset has dim {data.dim}")
    A = a.weights
    codes = _codes(a, data)
    if not np.any(codes):
        warnings.warn(
            "degenerate data: all codes are zero; returning the minimal-norm "
            "(all-zero) decoder",
            stacklevel=2,
        )
        return decoder(np.zeros((a.cols, a.rows)))

    if mode == "closed_form":
        # Minimal-norm solution of min_b ||A b Fc - Fc||_F:
        # b* = pinv(A) @ P with P the projector onto span of the codes.
        projector = codes @ np.linalg.pinv(codes)
        return decoder(np.linalg.pinv(A) @ projector)

    if mode != "gradient":
        raise ValueError(f"mode must be 'closed_form' or 'gradient', got {mode!r}")

    if step is not None and step <= 0:
        raise ValueError("step must be positive")

    m = len(data)
    r = a.rows
    S = codes @ codes.T
    scale = 2.0 / (m * r)
    b = np.zeros((a.cols, a.rows))
    AtA = A.T @ A
    AtS = A.T @ S
    prev = decoder_objective(a, decoder(b), data)
    for _ in range(iters):
        grad = scale * (AtA @ b @ S - AtS)
        if step is None:
            # exact line search: the objective is quadratic in b, so the
            # optimal step along -grad is |g|^2 / <g, H g>
            hg = scale * (AtA @ grad @ S)
            denom = float(np.sum(grad * hg))
            if denom <= 0.0:
                break
            eta = float(np.sum(grad * grad)) / denom
        else:
            eta = step
        b = b - eta * grad
        current = decoder_objective(a, decoder(b), data)
        if prev - current < GRADIENT_TOL:
            break
        prev = current
    return decoder(b)


def train_encoder(data: Dataset, bottleneck: int) -> LinearCoder:
    """Fit the orthonormal-row encoder retaining the most dataset variance.

    The solution is the principal subspace of the dataset covariance: rows
    are the top ``bottleneck`` eigenvectors.  The sign of each row is fixed
    by making its largest-magnitude entry positive.
    """
    if not 1 <= bottleneck <= data.dim:
        raise ValueError(f"bottleneck must be in [1, {data.dim}], got {bottleneck}")
    cov = data.covariance()
    eigvals, eigvecs = np.linalg.eigh(cov)
    rows = eigvecs[:, ::-1][:, :bottleneck].T.copy()
    for row in rows:
        lead = np.argmax(np.abs(row))
        if row[lead] < 0:
            row *= -1.0
    return encoder(rows)


def compression_rate(a: LinearCoder, data: Dataset) -> float:
    """Fraction of total dataset variance captured by the encoder row space.

    Depends only on the row space (not the particular rows), and on the
    external signal statistics  -- never on any decoder.  A dataset with no
    variance loses nothing, so its rate is defined as 1.0.
    """
    if a.cols != data.dim:
        raise ValueError(f"encoder expects dim {a.cols}, dataset has dim {data.dim}")
    cov = data.covariance()
    total = float(np.trace(cov))
    if total == 0.0:
        return 1.0
    u, s, vt = np.linalg.svd(a.weights, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size and s[0] > 0 else 0
    if rank == 0:
        return 0.0
    basis = vt[:rank]
    retained = float(np.trace(basis @ cov @ basis.T))
    return retained / total


def save_dataset(data: Dataset, path) -> None:
    """Write a dataset as CSV: header s0,s1,..., one frame per row."""
    header = [f"s{i}" for i in range(data.dim)]
    write_rows(path, header, data.matrix)


def load_dataset(path) -> Dataset:
    header, rows = read_rows(path)
    expected = [f"s{i}" for i in range(len(header))]
    if header != expected:
        raise ValueError(f"dataset header must be s0,s1,..., got {header}")
    return Dataset.from_matrix([[float(v) for v in row] for row in rows])


def save_coder(coder: LinearCoder, path) -> None:
    """Write a coder as a headerless CSV matrix, one row per matrix row."""
    import csv as _csv
    from pathlib import Path

    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        for row in coder.weights:
            writer.writerow([format(v, ".17g") for v in row])


def load_coder(path, role: str) -> LinearCoder:
    import csv as _csv

    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in _csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"coder file {path} is empty")
    return LinearCoder(np.asarray(rows), role)
