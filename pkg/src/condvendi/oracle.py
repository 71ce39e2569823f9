"""Brute-force validators and synthetic data generators.

The validators re-derive score quantities along an independent route and
compare against the production pipeline:

* the kernel covariance route: with an explicit feature map (cosine kernel,
  phi(x) = x / ||x||), the trace-normalized kernel matrix and the empirical
  feature covariance share their non-zero eigenvalues, and the joint
  covariance of Kronecker features reproduces the Hadamard-product kernel's
  spectrum. Conditional entropy and mutual information computed from the
  covariances must match the kernel-matrix values.
* the mixture-aggregation route: for prompts drawn from a well-separated
  mixture, the conditional entropy must stay within a closed-form bound of
  the f-mean of per-group entropies.

Oracle-side computations never call the code they validate: covariances are
accumulated with per-sample loops, eigenvalues come from cyclic Jacobi
rotations for matrices up to 64 x 64 (LAPACK above that), and the entropy
formula is re-implemented locally.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleFailure, ParamError
from .ingest import EmbeddingSet, PairedDataset, as_embedding_set, pair
from .kernels import cosine_kernel, hadamard, trace_normalize
from .scores import group_conditional_report, mixture_aggregation_bound
from .spectrum import eigen_spectrum, renyi_entropy

__all__ = [
    "FeatureCovariance",
    "MixtureSpec",
    "CovarianceSpectrumReport",
    "MixtureAggregationReport",
    "jacobi_eigenvalues",
    "explicit_feature_covariance",
    "check_covariance_spectrum",
    "sample_mixture",
    "gaussian_conditional_sampler",
    "check_mixture_aggregation",
    "make_mode_sweep_dataset",
    "make_correlated_pairs",
]

logger = logging.getLogger(__name__)

MAX_JOINT_FEATURE_DIM = 4096
JACOBI_MAX_DIM = 64
EIGENVALUE_FAIL_TOL = 1e-6
ENTROPY_FAIL_TOL = 1e-6
DEFAULT_ALPHAS = (0.5, 1.0, 2.0)


# ---------------------------------------------------------------------------
# Independent numerics
# ---------------------------------------------------------------------------

def jacobi_eigenvalues(matrix, off_tol=1e-13, max_sweeps=60):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Independent of LAPACK; intended for matrices up to ~64 x 64. Returns
    eigenvalues sorted nonincreasing.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ParamError(f"matrix must be square, got {a.shape}")
    if n == 1:
        return np.array([a[0, 0]])
    scale = max(1.0, float(np.linalg.norm(a)))
    mask = np.empty(n, dtype=bool)
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, k=1) ** 2)))
        if off <= off_tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 1.0 / (2.0 * tau)
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                mask[:] = True
                mask[p] = mask[q] = False
                akp = a[mask, p].copy()
                akq = a[mask, q].copy()
                a[mask, p] = c * akp - s * akq
                a[mask, q] = s * akp + c * akq
                a[p, mask] = a[mask, p]
                a[q, mask] = a[mask, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    else:
        raise OracleFailure(f"Jacobi solver did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))[::-1].copy()


def _oracle_eigenvalues(matrix):
    sym = (matrix + matrix.T) / 2.0
    if sym.shape[0] <= JACOBI_MAX_DIM:
        return jacobi_eigenvalues(sym)
    return np.sort(np.linalg.eigvalsh(sym))[::-1]


def _oracle_entropy(eigenvalues, alpha):
    """Order-alpha entropy of a raw eigenvalue vector, oracle-side convention:
    clip roundoff negatives to 0, normalize by the sum, zero solver-precision
    dust (size * eps * max), direct formula."""
    lam = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
    lam = lam / lam.sum()
    lam[lam < lam.size * np.finfo(np.float64).eps * lam.max()] = 0.0
    if alpha == 1.0:
        pos = lam[lam > 0]
        return float(-(pos * np.log(pos)).sum())
    return float(math.log(float(np.power(lam, alpha).sum())) / (1.0 - alpha))


def _unit_rows(data, name):
    norms = np.linalg.norm(data, axis=1)
    if np.any(norms == 0):
        raise ParamError(f"{name} has a zero-norm row; cosine features undefined")
    return data / norms[:, None]


# ---------------------------------------------------------------------------
# Proposition 1 / Corollary 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureCovariance:
    """Empirical covariance (1/n) sum_i phi_i phi_i' of explicit features."""

    matrix: np.ndarray
    feature_dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (self.feature_dim, self.feature_dim):
            raise ParamError(f"covariance shape {m.shape} != ({self.feature_dim},) squared")
        asym = np.abs(m - m.T).max()
        if asym > 1e-12:
            raise ParamError(f"covariance asymmetry {asym:.3e}")
        object.__setattr__(self, "matrix", m)


def explicit_feature_covariance(x, t=None):
    """Feature covariance of normalized rows; Kronecker features when paired.

    With one set: C = (1/n) sum_i phi(x_i) phi(x_i)'. With two sets the
    per-sample feature is phi(x_i) (x) phi(t_i), dimension d_x * d_t
    (capped at 4096). Accumulated sample by sample, no kernel code involved.
    """
    x = as_embedding_set(x)
    phi_x = _unit_rows(x.data, "x")
    n = x.n
    if t is None:
        dim = x.d
        features = phi_x
    else:
        t = as_embedding_set(t)
        if t.n != n:
            raise ParamError(f"x and t row counts differ: {n} vs {t.n}")
        dim = x.d * t.d
        if dim > MAX_JOINT_FEATURE_DIM:
            raise ParamError(f"joint feature dimension {dim} exceeds {MAX_JOINT_FEATURE_DIM}")
        phi_t = _unit_rows(t.data, "t")
        features = np.empty((n, dim))
        for i in range(n):
            features[i] = np.kron(phi_x[i], phi_t[i])
    cov = np.zeros((dim, dim))
    for i in range(n):
        cov += np.outer(features[i], features[i])
    cov /= n
    return FeatureCovariance(matrix=cov, feature_dim=dim)


@dataclass(frozen=True)
class CovarianceSpectrumReport:
    max_eigenvalue_discrepancy: float
    max_entropy_discrepancy: float
    alphas: tuple


def check_covariance_spectrum(d, alphas=DEFAULT_ALPHAS):
    """Verify that the Hadamard-product kernel and the Kronecker-feature
    covariance share non-zero eigenvalues, and that conditional entropy and
    mutual information agree when computed either way.

    Uses cosine kernels (explicit finite feature maps). Raises OracleFailure
    when any discrepancy exceeds 1e-6.
    """
    if not isinstance(d, PairedDataset):
        raise ParamError("expected a PairedDataset")

    # production route: kernel matrices through the library
    k_x = cosine_kernel(d.x)
    k_t = cosine_kernel(d.t)
    k_joint = trace_normalize(hadamard(k_x, k_t))
    lam_kernel = eigen_spectrum(k_joint).eigenvalues
    spec_x = eigen_spectrum(trace_normalize(k_x))
    spec_t = eigen_spectrum(trace_normalize(k_t))

    # oracle route: explicit feature covariances
    cov_joint = explicit_feature_covariance(d.x, d.t)
    cov_x = explicit_feature_covariance(d.x)
    cov_t = explicit_feature_covariance(d.t)
    lam_cov = _oracle_eigenvalues(cov_joint.matrix)
    lam_cov_x = _oracle_eigenvalues(cov_x.matrix)
    lam_cov_t = _oracle_eigenvalues(cov_t.matrix)

    width = max(lam_kernel.size, lam_cov.size)
    padded_kernel = np.zeros(width)
    padded_kernel[:lam_kernel.size] = lam_kernel
    padded_cov = np.zeros(width)
    padded_cov[:lam_cov.size] = np.clip(lam_cov, 0.0, None)
    eig_disc = float(np.abs(padded_kernel - padded_cov).max())

    ent_disc = 0.0
    for alpha in alphas:
        h_joint_k = renyi_entropy(eigen_spectrum(k_joint), alpha).value
        h_t_k = renyi_entropy(spec_t, alpha).value
        h_x_k = renyi_entropy(spec_x, alpha).value
        h_joint_c = _oracle_entropy(lam_cov, alpha)
        h_t_c = _oracle_entropy(lam_cov_t, alpha)
        h_x_c = _oracle_entropy(lam_cov_x, alpha)
        cond_k = h_joint_k - h_t_k
        cond_c = h_joint_c - h_t_c
        mi_k = h_x_k + h_t_k - h_joint_k
        mi_c = h_x_c + h_t_c - h_joint_c
        ent_disc = max(ent_disc, abs(cond_k - cond_c), abs(mi_k - mi_c))

    if eig_disc > EIGENVALUE_FAIL_TOL:
        raise OracleFailure(f"kernel/covariance eigenvalue discrepancy {eig_disc:.3e}")
    if ent_disc > ENTROPY_FAIL_TOL:
        raise OracleFailure(f"kernel/covariance entropy discrepancy {ent_disc:.3e}")
    return CovarianceSpectrumReport(max_eigenvalue_discrepancy=eig_disc,
                              max_entropy_discrepancy=ent_disc,
                              alphas=tuple(alphas))


# ---------------------------------------------------------------------------
# Theorem 1: mixture aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MixtureSpec:
    """A Gaussian mixture for prompt embeddings.

    ``total_variances[i]`` is E||T - mu_i||^2 (the trace of the component
    covariance), not a per-coordinate variance.
    """

    weights: np.ndarray
    means: np.ndarray
    total_variances: np.ndarray
    seed: int = 0
    component_sampler: str = "gaussian"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ParamError("weights must be a non-empty vector")
        if np.any(w <= 0):
            raise ParamError("mixture weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ParamError(f"mixture weights sum to {w.sum()}, expected 1")
        mu = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        var = np.asarray(self.total_variances, dtype=np.float64)
        if mu.shape[0] != w.size or var.shape != (w.size,):
            raise ParamError("weights, means and total_variances lengths disagree")
        if np.any(var < 0):
            raise ParamError("total variances must be nonnegative")
        if self.component_sampler != "gaussian":
            raise ParamError(f"unknown component sampler {self.component_sampler!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "total_variances", var)

    @property
    def num_components(self):
        return self.weights.size

    @property
    def dim(self):
        return self.means.shape[1]


def sample_mixture(spec, n, rng=None):
    """Draw n samples and their component labels from a MixtureSpec.

    Each Gaussian component spreads its total variance evenly over the
    coordinates. Deterministic for a fixed spec.seed when no rng is given.
    """
    if not isinstance(spec, MixtureSpec):
        raise ParamError("expected a MixtureSpec")
    n = int(n)
    if n < spec.num_components:
        raise ParamError(f"n must be >= {spec.num_components}, got {n}")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed))
    m, d = spec.num_components, spec.dim
    labels = rng.choice(m, size=n, p=spec.weights) + 1
    coord_std = np.sqrt(spec.total_variances / d)
    samples = spec.means[labels - 1] + rng.standard_normal((n, d)) * coord_std[labels - 1, None]
    for g in range(1, m + 1):
        idx = labels == g
        if idx.sum() >= 2:
            centered = samples[idx] - spec.means[g - 1]
            emp_tv = float(np.mean(np.einsum("ij,ij->i", centered, centered)))
            logger.debug("component %d: empirical total variance %.4g (spec %.4g)",
                         g, emp_tv, spec.total_variances[g - 1])
    return EmbeddingSet(samples, modality="text"), labels


def gaussian_conditional_sampler(means, total_variances):
    """A conditional generator X|G: Gaussian around a per-group mean with a
    per-group total variance (trace-of-covariance convention)."""
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    var = np.asarray(total_variances, dtype=np.float64)
    if means.shape[0] != var.size:
        raise ParamError("means and total_variances lengths disagree")
    coord_std = np.sqrt(var / means.shape[1])

    def sampler(labels, rng):
        labels = np.asarray(labels)
        noise = rng.standard_normal((labels.size, means.shape[1]))
        return means[labels - 1] + noise * coord_std[labels - 1, None]

    return sampler


@dataclass(frozen=True)
class MixtureAggregationReport:
    gap: float
    bound: float
    passed: bool
    vacuous: bool
    aggregate: float
    conditional_entropy: float
    group_entropies: tuple


def check_mixture_aggregation(spec, x_given_group, n, sigma_t, sigma_x, alpha=2.0, rng=None):
    """Measure |H_alpha(X|T) - f-aggregate| on one synthetic draw and compare
    it to the closed-form bound.

    The aggregate uses empirical group weights and per-group entropies; the
    bound is evaluated with the spec's population quantities. A vacuous
    (+inf) bound passes with ``vacuous`` set.
    """
    alpha = float(alpha)
    if alpha < 2.0:
        raise ParamError(f"the aggregation bound requires alpha >= 2, got {alpha}")
    t_set, labels = sample_mixture(spec, n, rng=rng)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=(1,)))
    x_data = np.asarray(x_given_group(labels, rng), dtype=np.float64)
    d = pair(x_data, t_set, labels=labels)

    report = group_conditional_report(d, sigma_x=sigma_x, alpha=alpha, sigma_t=sigma_t)
    gap = abs(report.conditional_entropy_joint - report.aggregate)
    bound = mixture_aggregation_bound(spec.weights, spec.means, spec.total_variances, sigma_t, alpha)
    vacuous = math.isinf(bound)
    passed = vacuous or gap <= bound + 1e-6
    return MixtureAggregationReport(
        gap=gap,
        bound=bound,
        passed=passed,
        vacuous=vacuous,
        aggregate=report.aggregate,
        conditional_entropy=report.conditional_entropy_joint,
        group_entropies=tuple(e.conditional_entropy for e in report.per_group),
    )


def separated_mixture_setup(num_groups, seed=0, sigma_t=1.0, separation=20.0,
                            sigma_ratio=0.01, sigma_x=1.0):
    """Canonical well-separated prompt mixture plus an X|G generator.

    Prompt components sit ``separation * sigma_t`` apart with total standard
    deviation ``sigma_ratio * sigma_t`` each; the X generator is Gaussian
    per group with per-group spreads chosen so the group entropies differ.
    Returns (spec, x_sampler, sigma_t, sigma_x).
    """
    num_groups = int(num_groups)
    if num_groups < 1:
        raise ParamError("num_groups must be >= 1")
    d_t = max(2, num_groups)
    means_t = np.zeros((num_groups, d_t))
    for g in range(num_groups):
        means_t[g, g] = separation * sigma_t / math.sqrt(2.0)
    spec = MixtureSpec(
        weights=np.full(num_groups, 1.0 / num_groups),
        means=means_t,
        total_variances=np.full(num_groups, (sigma_ratio * sigma_t) ** 2),
        seed=int(seed),
    )
    d_x = 4
    means_x = np.zeros((num_groups, d_x))
    means_x[:, 0] = 5.0 * sigma_x * np.arange(num_groups)
    spreads = np.array([(0.3 + 0.3 * (g % 4)) * sigma_x for g in range(num_groups)])
    sampler = gaussian_conditional_sampler(means_x, d_x * spreads ** 2)
    return spec, sampler, sigma_t, sigma_x


# ---------------------------------------------------------------------------
# Synthetic trend generators
# ---------------------------------------------------------------------------

MODE_SEPARATION = 1000.0
VARIANT_SEPARATION = 50.0


def make_mode_sweep_dataset(num_modes, samples_per_mode=40, variants_per_mode=4,
                            specified=True, seed=0, prompt_jitter=0.05):
    """Paired dataset with a known number of well-separated content modes.

    Each mode holds ``variants_per_mode`` far-apart variants cycled evenly,
    so within-mode diversity is the same for every mode. With
    ``specified=True`` the prompt identifies the mode (well-separated prompt
    clusters); otherwise prompts are uninformative jitter around a single
    point. Scores should be evaluated at sigma = 1 on both sides.
    """
    num_modes = int(num_modes)
    if num_modes < 1:
        raise ParamError("num_modes must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(2,)))
    n = num_modes * samples_per_mode
    modes = 1 + np.arange(n) // samples_per_mode
    variants = np.arange(n) % variants_per_mode
    x = np.column_stack([MODE_SEPARATION * modes, VARIANT_SEPARATION * variants]).astype(float)
    if specified:
        t = (MODE_SEPARATION * modes)[:, None].astype(float)
        t = t + prompt_jitter * rng.standard_normal(t.shape)
    else:
        t = prompt_jitter * rng.standard_normal((n, 1))
    return pair(x, t, labels=modes)


def make_correlated_pairs(n, num_modes=8, substitution_rate=0.0, seed=0,
                          noise=0.05):
    """Correlated (x, t) pairs with a fraction of x rows substituted.

    Rows share a mode grid; x_i matches t_i's mode except for the first
    round(rate * n) rows, whose x is redrawn from a uniformly random mode.
    All randomness is drawn independent of the rate, so sweeping the rate on
    a fixed seed substitutes nested prefixes of the same dataset. Scores
    should be evaluated at sigma = 1 on both sides.
    """
    n = int(n)
    num_modes = int(num_modes)
    if not (0.0 <= substitution_rate <= 1.0):
        raise ParamError(f"substitution_rate must be in [0, 1], got {substitution_rate}")
    if n < num_modes:
        raise ParamError(f"n must be >= num_modes, got {n} < {num_modes}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(3,)))
    labels = 1 + np.arange(n) % num_modes
    t_noise = noise * rng.standard_normal((n, 1))
    x_noise = noise * rng.standard_normal((n, 1))
    substitute_modes = rng.integers(1, num_modes + 1, size=n)

    k = round(substitution_rate * n)
    x_modes = labels.copy()
    x_modes[:k] = substitute_modes[:k]

    t = MODE_SEPARATION * labels[:, None] + t_noise
    x = MODE_SEPARATION * x_modes[:, None] + x_noise
    return pair(x, t, labels=labels)
