"""Symmetric eigendecomposition and order-alpha matrix entropy.

The eigenvalues of a trace-normalized kernel form a probability vector;
their Renyi entropy of order alpha is

    H_alpha = log(sum_i lam_i ** alpha) / (1 - alpha)          (alpha != 1)
    H_1     = sum_i lam_i * log(1 / lam_i)                     (Shannon case)

with 0 * log(1/0) := 0. Entropies are in nats; the scores exponentiate, so
the log base cancels there.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParamError
from .kernels import PSD_TOL_PER_N, KernelMatrix

__all__ = [
    "EigenSpectrum",
    "EntropyValue",
    "eigen_spectrum",
    "spectrum_from_values",
    "renyi_entropy",
    "entropy_alpha2_fast",
]

SUM_TOL = 1e-8
ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class EigenSpectrum:
    """Nonincreasing nonnegative eigenvalues summing to 1, with optional eigenvectors.

    When eigenvectors are present, column i of ``eigenvectors`` pairs with
    ``eigenvalues[i]`` and the columns are orthonormal to 1e-8.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        if lam.ndim != 1 or lam.size == 0:
            raise ParamError("eigenvalues must be a non-empty vector")
        if np.any(np.diff(lam) > 0):
            raise ParamError("eigenvalues must be sorted nonincreasing")
        if lam.min() < 0:
            raise ParamError(f"negative eigenvalue {lam.min():.3e} after clipping")
        total = lam.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ParamError(f"eigenvalues sum to {total}, expected 1 +/- {SUM_TOL}")
        object.__setattr__(self, "eigenvalues", lam)
        if self.eigenvectors is not None:
            vec = np.asarray(self.eigenvectors, dtype=np.float64)
            gram = vec.T @ vec
            err = np.abs(gram - np.eye(gram.shape[0])).max()
            if err > ORTHO_TOL:
                raise NumericalError(f"eigenvectors not orthonormal: max |V'V - I| = {err:.3e}")
            object.__setattr__(self, "eigenvectors", vec)

    @property
    def n(self):
        return self.eigenvalues.size


def _clip_and_renormalize(lam, n):
    """Zero out roundoff negatives and rescale the spectrum to sum 1.

    Negatives below the PSD floor -1e-8 * n indicate a non-PSD input and
    raise instead of being silently clipped. After renormalization,
    eigenvalues below size * eps * lam_max are indistinguishable from
    exact zeros at solver precision and are zeroed too; at orders
    alpha < 1 they would otherwise contribute sqrt-of-roundoff noise.
    """
    lam_min = float(lam.min())
    if lam_min < -PSD_TOL_PER_N * n:
        raise NumericalError(
            f"eigenvalue {lam_min:.3e} below PSD tolerance {-PSD_TOL_PER_N * n:.3e}; "
            "non-PSD input indicates an upstream bug")
    lam = np.clip(lam, 0.0, None)
    total = lam.sum()
    if total <= 0:
        raise NumericalError("spectrum sums to zero")
    lam = lam / total
    zero_floor = lam.size * np.finfo(np.float64).eps * lam.max()
    lam[lam < zero_floor] = 0.0
    return lam


def eigen_spectrum(k, with_vectors=False):
    """Eigendecompose a trace-normalized kernel into an EigenSpectrum.

    The matrix is symmetrized as (K + K') / 2 before decomposition.
    Eigenvalues are returned nonincreasing; tiny negatives from roundoff are
    clipped to 0 and the spectrum renormalized to sum exactly 1.
    """
    if not isinstance(k, KernelMatrix):
        raise ParamError("eigen_spectrum expects a KernelMatrix")
    if not k.trace_normalized:
        raise ParamError("eigen_spectrum expects a trace-normalized kernel")
    sym = (k.values + k.values.T) / 2.0
    if with_vectors:
        lam, vec = np.linalg.eigh(sym)
        order = np.argsort(lam)[::-1]
        lam, vec = lam[order], vec[:, order]
    else:
        lam = np.linalg.eigvalsh(sym)[::-1]
        vec = None
    lam = _clip_and_renormalize(lam, k.n)
    return EigenSpectrum(lam, eigenvectors=vec)


def spectrum_from_values(values, n=None):
    """Build an EigenSpectrum from raw eigenvalues (clipping + renormalizing).

    ``n`` defaults to the vector length and is only used for the PSD floor.
    """
    lam = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    lam = _clip_and_renormalize(lam, n if n is not None else lam.size)
    return EigenSpectrum(lam)


@dataclass(frozen=True)
class EntropyValue:
    """An order-alpha entropy in nats; always within [0, log n]."""

    value: float
    order: float


def renyi_entropy(spectrum, alpha):
    """Order-alpha Renyi entropy of an eigenvalue spectrum, in nats.

    alpha = 1 is the Shannon case, computed directly (not as a limit) to
    avoid cancellation. The result is clamped to [0, log n].
    """
    if not isinstance(spectrum, EigenSpectrum):
        raise ParamError("renyi_entropy expects an EigenSpectrum")
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0:
        raise ParamError(f"alpha must be positive, got {alpha}")
    lam = spectrum.eigenvalues
    value = entropy_of_probabilities(lam, alpha)
    value = min(max(value, 0.0), math.log(lam.size))
    return EntropyValue(value=value, order=alpha)


def entropy_of_probabilities(lam, alpha):
    """Raw order-alpha entropy of a probability vector (no clamping)."""
    lam = np.asarray(lam, dtype=np.float64)
    if alpha == 1.0:
        pos = lam[lam > 0]
        return float(-(pos * np.log(pos)).sum())
    return float(np.log(np.power(lam, alpha).sum()) / (1.0 - alpha))


def entropy_alpha2_fast(k):
    """Order-2 entropy without an eigensolve: H_2 = -log ||K/n||_F^2.

    At alpha = 2 the entropy depends only on sum_i lam_i^2, which equals the
    squared Frobenius norm of the trace-normalized kernel; this is O(n^2)
    and agrees with the eigen path to 1e-10.
    """
    if not isinstance(k, KernelMatrix):
        raise ParamError("entropy_alpha2_fast expects a KernelMatrix")
    if not k.trace_normalized:
        raise ParamError("entropy_alpha2_fast expects a trace-normalized kernel")
    frob_sq = float(np.einsum("ij,ij->", k.values, k.values))
    value = -math.log(frob_sq)
    value = min(max(value, 0.0), math.log(k.n))
    return EntropyValue(value=value, order=2.0)
