"""Vendi, Conditional-Vendi and Information-Vendi scores.

For paired samples (x_i, t_i) with unit-diagonal kernels K_X and K_T, the
joint kernel is the Hadamard product K_X * K_T and

    Vendi_alpha(X)            = exp(H_alpha(K_X / n))
    Conditional-Vendi_alpha   = exp(H_alpha(K_X*K_T / n) - H_alpha(K_T / n))
    Information-Vendi_alpha   = exp(H_alpha(K_X/n) + H_alpha(K_T/n)
                                    - H_alpha(K_X*K_T / n))

so that Vendi = Conditional-Vendi x Information-Vendi, splitting the
diversity of X into a component not explained by the prompts and the
statistical relevance between prompts and outputs. The conditional entropy
is non-negative for unit-diagonal kernels at every order; the mutual
information is non-negative at order 1 but can dip slightly below zero at
other orders (Renyi subadditivity fails there), which is reported as a
warning rather than an error.

Per-group aggregation: for grouped prompts the conditional entropy is an
f-mean of within-group entropies with f(z) = exp((1 - alpha) z), and
``mixture_aggregation_bound`` gives the closed-form bound on the
aggregation gap for well-separated prompt mixtures.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, NumericalWarning, ParamError
from .ingest import PairedDataset, as_embedding_set
from .kernels import KernelMatrix, gaussian_kernel, hadamard, trace_normalize
from .spectrum import eigen_spectrum, renyi_entropy
from .validation import check_alpha, check_positive

__all__ = [
    "ScoreReport",
    "GroupScoreReport",
    "GroupEntry",
    "vendi",
    "conditional_vendi",
    "information_vendi",
    "score_report",
    "group_conditional_report",
    "mixture_aggregation_bound",
    "f_aggregate",
]

NONNEG_TOL = 1e-8
PRODUCT_REL_TOL = 1e-6


@dataclass(frozen=True)
class ScoreReport:
    """All score quantities derived from one paired dataset at order alpha.

    Entropies are in nats. By construction ``conditional_vendi *
    information_vendi == vendi_x`` and ``h_x_given_t + i_xt == h_x``.
    """

    order: float
    n: int
    sigma_x: float
    sigma_t: float
    vendi_x: float
    vendi_t: float
    conditional_vendi: float
    information_vendi: float
    h_x: float
    h_t: float
    h_xt: float
    h_x_given_t: float
    i_xt: float

    def __post_init__(self):
        # H(X|T) >= 0 is guaranteed for unit-diagonal kernels (the joint
        # spectrum is majorized by each marginal spectrum), so a violation
        # beyond roundoff means a numerics bug upstream. The mutual
        # information has no such guarantee away from order 1: Renyi
        # entropies are not subadditive for alpha != 1, and slightly
        # negative values are legitimate on real data, so those are only
        # warned about.
        if self.h_x_given_t < -NONNEG_TOL:
            raise NumericalError(f"conditional entropy {self.h_x_given_t:.3e} is negative "
                                 "beyond tolerance")
        if self.i_xt < -NONNEG_TOL:
            warnings.warn(
                f"mutual information {self.i_xt:.3e} is negative at order "
                f"{self.order}; subadditivity can genuinely fail for orders != 1",
                NumericalWarning, stacklevel=2)
        product = self.conditional_vendi * self.information_vendi
        if abs(product - self.vendi_x) > PRODUCT_REL_TOL * self.vendi_x:
            raise NumericalError(f"decomposition violated: {product} != {self.vendi_x}")

    def as_dict(self):
        """Serializable view with a fixed key order."""
        return {
            "order": self.order,
            "n": self.n,
            "sigma_x": self.sigma_x,
            "sigma_t": self.sigma_t,
            "vendi_x": self.vendi_x,
            "vendi_t": self.vendi_t,
            "conditional_vendi": self.conditional_vendi,
            "information_vendi": self.information_vendi,
            "h_x": self.h_x,
            "h_t": self.h_t,
            "h_xt": self.h_xt,
            "h_x_given_t": self.h_x_given_t,
            "i_xt": self.i_xt,
        }


def _entropy_of_kernel(k, alpha):
    return renyi_entropy(eigen_spectrum(trace_normalize(k)), alpha).value


def vendi(x, sigma, alpha=1.0):
    """Vendi score of a sample set: exp of the kernel entropy, in [1, n]."""
    x = as_embedding_set(x)
    alpha = check_alpha(alpha)
    h = _entropy_of_kernel(gaussian_kernel(x, sigma), alpha)
    return math.exp(h)


def conditional_vendi(d, sigma_x, sigma_t, alpha=1.0):
    """Model-induced diversity: exp(H_alpha(X|T)), at least 1 up to roundoff."""
    k_t, k_joint = _marginal_and_joint(d, sigma_x, sigma_t)
    alpha = check_alpha(alpha)
    h_t = _entropy_of_kernel(k_t, alpha)
    h_xt = _entropy_of_kernel(k_joint, alpha)
    return math.exp(h_xt - h_t)


def information_vendi(d, sigma_x, sigma_t, alpha=1.0):
    """Prompt/output relevance: exp(I_alpha(X;T)), at least 1 up to roundoff."""
    return score_report(d, sigma_x, sigma_t, alpha).information_vendi


def _marginal_and_joint(d, sigma_x, sigma_t):
    if not isinstance(d, PairedDataset):
        raise ParamError("expected a PairedDataset (use condvendi.pair)")
    k_x = gaussian_kernel(d.x, sigma_x)
    k_t = gaussian_kernel(d.t, sigma_t)
    return k_t, hadamard(k_x, k_t)


def score_report(d, sigma_x, sigma_t, alpha=1.0):
    """Compute all five entropies and four scores from exactly three eigensolves."""
    if not isinstance(d, PairedDataset):
        raise ParamError("expected a PairedDataset (use condvendi.pair)")
    sigma_x = check_positive(sigma_x, "sigma_x")
    sigma_t = check_positive(sigma_t, "sigma_t")
    alpha = check_alpha(alpha)

    k_x = gaussian_kernel(d.x, sigma_x)
    k_t = gaussian_kernel(d.t, sigma_t)
    k_joint = hadamard(k_x, k_t)

    h_x = _entropy_of_kernel(k_x, alpha)
    h_t = _entropy_of_kernel(k_t, alpha)
    h_xt = _entropy_of_kernel(k_joint, alpha)

    h_x_given_t = h_xt - h_t
    i_xt = h_x - h_x_given_t

    return ScoreReport(
        order=alpha,
        n=d.n,
        sigma_x=sigma_x,
        sigma_t=sigma_t,
        vendi_x=math.exp(h_x),
        vendi_t=math.exp(h_t),
        conditional_vendi=math.exp(h_x_given_t),
        information_vendi=math.exp(i_xt),
        h_x=h_x,
        h_t=h_t,
        h_xt=h_xt,
        h_x_given_t=h_x_given_t,
        i_xt=i_xt,
    )


# ---------------------------------------------------------------------------
# Per-group aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupEntry:
    group: int
    weight: float
    conditional_entropy: float
    vendi: float


@dataclass(frozen=True)
class GroupScoreReport:
    """Per-group diversity and its f-mean aggregate.

    ``conditional_entropy_joint`` is H_alpha(X|T) computed against the actual
    prompt kernel when ``sigma_t`` was supplied, otherwise against the exact
    group-indicator kernel (conditioning directly on the group variable).
    ``bound`` is the aggregation-gap bound when mixture statistics were
    supplied; +inf means the bound is vacuous.
    """

    order: float
    per_group: tuple
    aggregate: float
    conditional_entropy_joint: float
    bound: float | None = None

    @property
    def bound_vacuous(self):
        return self.bound is not None and math.isinf(self.bound)


def f_aggregate(entropies, weights, alpha):
    """The f-mean of per-group entropies with f(z) = exp((1 - alpha) z).

    Groups are weighted by omega_i^alpha / sum_j omega_j^alpha. At alpha = 1
    the map degenerates and the limit is the plain omega-weighted mean.
    """
    entropies = np.asarray(entropies, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    alpha = check_alpha(alpha)
    w = np.power(weights, alpha)
    w = w / w.sum()
    if alpha == 1.0:
        return float(w @ entropies)
    f_vals = np.exp((1.0 - alpha) * entropies)
    return float(math.log(float(w @ f_vals)) / (1.0 - alpha))


def _group_indicator_kernel(labels):
    values = (labels[:, None] == labels[None, :]).astype(np.float64)
    return KernelMatrix(values, kernel_kind=("indicator", None))


def group_conditional_report(d, sigma_x, alpha=1.0, sigma_t=None,
                             bound_means=None, bound_total_variances=None,
                             bound_sigma=None):
    """Aggregate within-group diversity over labeled prompt groups.

    Each group's conditional entropy is the kernel entropy of the
    within-group X samples under the same global ``sigma_x``; group weights
    are the empirical frequencies. When ``bound_means`` /
    ``bound_total_variances`` / ``bound_sigma`` describe the prompt mixture,
    the report carries the aggregation-gap bound (alpha >= 2 required).
    """
    if not isinstance(d, PairedDataset) or d.group_labels is None:
        raise ParamError("group_conditional_report needs a PairedDataset with group_labels")
    sigma_x = check_positive(sigma_x, "sigma_x")
    alpha = check_alpha(alpha)

    labels = d.group_labels
    m = d.num_groups
    n = d.n

    entries = []
    for g in range(1, m + 1):
        idx = np.flatnonzero(labels == g)
        weight = idx.size / n
        k_g = gaussian_kernel(d.x.data[idx], sigma_x)
        h_g = _entropy_of_kernel(k_g, alpha)
        entries.append(GroupEntry(group=g, weight=weight,
                                  conditional_entropy=h_g, vendi=math.exp(h_g)))

    weights = np.array([e.weight for e in entries])
    entropies = np.array([e.conditional_entropy for e in entries])
    aggregate = f_aggregate(entropies, weights, alpha)

    k_x = gaussian_kernel(d.x, sigma_x)
    if sigma_t is not None:
        k_t = gaussian_kernel(d.t, check_positive(sigma_t, "sigma_t"))
    else:
        k_t = _group_indicator_kernel(labels)
    h_t = _entropy_of_kernel(k_t, alpha)
    h_xt = _entropy_of_kernel(hadamard(k_x, k_t), alpha)

    bound = None
    if bound_means is not None or bound_total_variances is not None or bound_sigma is not None:
        if bound_means is None or bound_total_variances is None or bound_sigma is None:
            raise ParamError("bound_means, bound_total_variances and bound_sigma "
                             "must be supplied together")
        bound = mixture_aggregation_bound(weights, bound_means,
                                          bound_total_variances, bound_sigma, alpha)

    return GroupScoreReport(
        order=alpha,
        per_group=tuple(entries),
        aggregate=aggregate,
        conditional_entropy_joint=h_xt - h_t,
        bound=bound,
    )


def mixture_aggregation_bound(weights, means, total_variances, sigma, alpha):
    """Closed-form bound on |H_alpha(X|T) - f-aggregate| for a prompt mixture.

    For mixture weights omega, component means mu_i, total variances
    sigma_i^2 = E||T - mu_i||^2 and Gaussian-kernel bandwidth sigma:

        2 * g( 8 * sum_i omega_i sigma_i^2 / sigma^2
               + 32 * sum_{i>j} omega_i exp(-||mu_i - mu_j||^2 / sigma^2) )

    with g(z) = (alpha / (alpha - 1)) * log(1 / (1 - z / ||omega||_alpha)),
    an increasing function with g(0) = 0. Returns +inf (a vacuous bound)
    when the argument reaches ||omega||_alpha. Proven only for alpha >= 2.
    """
    alpha = float(alpha)
    if alpha < 2.0:
        raise ParamError(f"the aggregation bound requires alpha >= 2, got {alpha}")
    sigma = check_positive(sigma, "sigma")
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0 or np.any(w <= 0):
        raise ParamError("weights must be strictly positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ParamError(f"weights must sum to 1, got {w.sum()}")
    mu = np.atleast_2d(np.asarray(means, dtype=np.float64))
    var = np.asarray(total_variances, dtype=np.float64)
    if mu.shape[0] != w.size or var.shape != (w.size,):
        raise ParamError("weights, means and total_variances must have matching lengths")
    if np.any(var < 0):
        raise ParamError("total variances must be nonnegative")

    arg = 8.0 * float(np.sum(w * var)) / (sigma * sigma)
    for i in range(1, w.size):
        diff = mu[i] - mu[:i]
        arg += 32.0 * w[i] * float(np.sum(np.exp(-np.einsum("ij,ij->i", diff, diff)
                                                 / (sigma * sigma))))

    norm_alpha = float(np.power(np.power(w, alpha).sum(), 1.0 / alpha))
    if arg >= norm_alpha:
        return math.inf
    if arg == 0.0:
        return 0.0
    g = (alpha / (alpha - 1.0)) * math.log(1.0 / (1.0 - arg / norm_alpha))
    return 2.0 * g
