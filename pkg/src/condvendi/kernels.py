"""Normalized kernel matrices and their Hadamard products.

Every kernel built here has unit diagonal (k(x, x) = 1), is exactly
symmetric (upper triangle computed once and mirrored), and is positive
semidefinite up to numerical tolerance. The Hadamard product of two such
kernels is again a valid kernel by the Schur product theorem and equals
the kernel matrix of the concatenated pairs under the product kernel.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, NumericalError, ParamError
from .ingest import as_embedding_set
from .validation import check_positive

__all__ = [
    "KernelMatrix",
    "gaussian_kernel",
    "cosine_kernel",
    "hadamard",
    "trace_normalize",
    "pairwise_sq_dists",
]

# numerical contracts shared with the spectrum module
SYMMETRY_TOL = 1e-12
PSD_TOL_PER_N = 1e-8  # min eigenvalue >= -PSD_TOL_PER_N * n


@dataclass(frozen=True)
class KernelMatrix:
    """Dense n x n symmetric kernel matrix.

    ``kernel_kind`` is ``("gaussian", sigma)``, ``("cosine", None)`` or
    ``("hadamard", None)``; ``trace_normalized`` is True once the matrix has
    been divided by n (after which its eigenvalues sum to 1).
    """

    values: np.ndarray
    kernel_kind: tuple
    trace_normalized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ParamError(f"kernel matrix must be square, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def check_valid(self, check_psd=False):
        """Assert the structural invariants; raises NumericalError on violation.

        Symmetry must hold to 1e-12 and, before trace normalization, the
        diagonal must be exactly 1. The (expensive) PSD check is opt-in.
        """
        v = self.values
        asym = np.abs(v - v.T).max()
        if asym > SYMMETRY_TOL:
            raise NumericalError(f"kernel asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
        diag = np.diag(v)
        expected = 1.0 / self.n if self.trace_normalized else 1.0
        if not np.all(diag == expected):
            raise NumericalError("kernel diagonal is not exactly "
                                 f"{'1/n' if self.trace_normalized else '1'}")
        if check_psd:
            # invariant: min eigenvalue >= -1e-8 * n on the unit-diagonal scale
            floor = -PSD_TOL_PER_N * (1.0 if self.trace_normalized else self.n)
            lam_min = float(np.linalg.eigvalsh((v + v.T) / 2.0)[0])
            if lam_min < floor:
                raise NumericalError(f"kernel min eigenvalue {lam_min:.3e} below PSD floor {floor:.3e}")
        return self


def pairwise_sq_dists(x, block_rows=None):
    """Squared Euclidean distances between the rows of ``x``.

    Uses the expansion ||a - b||^2 = ||a||^2 + ||b||^2 - 2<a, b> with a clamp
    at 0 for negative rounding, so exp never sees a positive argument.
    ``block_rows`` bounds the rows processed per matmul; the result agrees
    with the unblocked path to 1e-12 elementwise regardless of partitioning.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    # overflow from extreme norms surfaces as non-finite entries, which the
    # kernel constructors translate into DataError
    with np.errstate(over="ignore", invalid="ignore"):
        sq = np.einsum("ij,ij->i", x, x)
        if block_rows is None or block_rows >= n:
            d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        else:
            d2 = np.empty((n, n), dtype=np.float64)
            for start in range(0, n, block_rows):
                stop = min(start + block_rows, n)
                d2[start:stop] = (sq[start:stop, None] + sq[None, :]
                                  - 2.0 * (x[start:stop] @ x.T))
    np.clip(d2, 0.0, None, out=d2)
    return d2


def _mirror_upper(values):
    """Make a matrix exactly symmetric by mirroring its upper triangle."""
    upper = np.triu(values, k=1)
    return upper + upper.T + np.diag(np.diag(values))


def gaussian_kernel(emb, sigma, block_rows=None):
    """Gaussian (RBF) kernel matrix: k(x, x') = exp(-||x - x'||^2 / (2 sigma^2)).

    The diagonal is forcibly set to 1 and the matrix is mirrored from its
    upper triangle, so symmetry and the normalized-kernel assumption hold
    bit-exactly.
    """
    emb = as_embedding_set(emb)
    sigma = check_positive(sigma, "sigma")
    d2 = pairwise_sq_dists(emb.data, block_rows=block_rows)
    if not np.isfinite(d2).all():
        raise DataError("non-finite pairwise distance (embedding norms overflow)")
    values = np.exp(d2 / (-2.0 * sigma * sigma))
    values = _mirror_upper(values)
    np.fill_diagonal(values, 1.0)
    return KernelMatrix(values, kernel_kind=("gaussian", sigma))


def cosine_kernel(emb):
    """Cosine-similarity kernel: k(x, x') = <x, x'> / (||x|| ||x'||).

    This is the normalized kernel with the explicit finite feature map
    x -> x / ||x||, which makes it the natural choice for brute-force
    covariance checks.
    """
    emb = as_embedding_set(emb)
    norms = np.linalg.norm(emb.data, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DataError(f"zero-norm row at index {zero[0]}; cosine kernel undefined")
    unit = emb.data / norms[:, None]
    values = _mirror_upper(unit @ unit.T)
    np.fill_diagonal(values, 1.0)
    return KernelMatrix(values, kernel_kind=("cosine", None))


def hadamard(a, b):
    """Entrywise (Schur) product of two unit-diagonal kernels.

    PSD is preserved by the Schur product theorem, and the result equals
    the kernel matrix of concatenated pairs under the product kernel
    k_a * k_b.
    """
    if not isinstance(a, KernelMatrix) or not isinstance(b, KernelMatrix):
        raise ParamError("hadamard expects two KernelMatrix inputs")
    if a.n != b.n:
        raise ParamError(f"kernel size mismatch: {a.n} vs {b.n}")
    if a.trace_normalized or b.trace_normalized:
        raise ParamError("hadamard expects unit-diagonal kernels (not trace-normalized)")
    values = a.values * b.values
    np.fill_diagonal(values, 1.0)
    return KernelMatrix(values, kernel_kind=("hadamard", None))


def trace_normalize(k):
    """Divide a unit-diagonal kernel by n so its eigenvalues sum to 1."""
    if not isinstance(k, KernelMatrix):
        raise ParamError("trace_normalize expects a KernelMatrix")
    if k.trace_normalized:
        return k
    return replace(k, values=k.values / k.n, trace_normalized=True)
