"""Scikit-learn compatible estimator wrappers around the functional core.

These follow the fit/attributes convention (``get_params`` / ``set_params``
via BaseEstimator) so diversity analysis composes with sklearn pipelines
and model-selection tooling. The underlying computations live in
``scores``, ``bandwidth`` and ``decompose``.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .bandwidth import select_bandwidth
from .decompose import mode_decomposition
from .errors import ParamError
from .ingest import pair
from .scores import score_report, vendi
from .validation import check_matrix

__all__ = ["DiversityScorer", "BandwidthSelector", "TextModeDecomposition"]


def _resolve_sigma(sigma, X, alpha, random_state, what):
    if sigma == "auto":
        seed = 0 if random_state is None else int(random_state)
        return select_bandwidth(X, alpha=alpha, seed=seed).sigma
    try:
        value = float(sigma)
    except (TypeError, ValueError):
        raise ParamError(f"{what} must be a positive number or 'auto', got {sigma!r}")
    return value


class DiversityScorer(BaseEstimator):
    """Compute kernel-entropy diversity scores for paired samples.

    Parameters
    ----------
    sigma_x, sigma_t : float or "auto"
        Gaussian bandwidths for the data and prompt kernels. "auto" runs
        the variance-criterion bandwidth selection per side.
    alpha : float
        Entropy order (1 = Shannon/Vendi, 2 = the Frobenius fast family).
    random_state : int or None
        Seed for the "auto" bandwidth search.

    Attributes (after ``fit(X, T)``)
    --------------------------------
    report_ : ScoreReport with all entropies and scores.
    vendi_x_, vendi_t_, conditional_vendi_, information_vendi_ : floats.
    sigma_x_, sigma_t_ : the bandwidths actually used.

    ``fit(X)`` without prompts computes only ``vendi_x_``.
    """

    def __init__(self, sigma_x="auto", sigma_t="auto", alpha=1.0, random_state=None):
        self.sigma_x = sigma_x
        self.sigma_t = sigma_t
        self.alpha = alpha
        self.random_state = random_state

    def fit(self, X, T=None):
        X = check_matrix(X, "X")
        self.sigma_x_ = _resolve_sigma(self.sigma_x, X, self.alpha,
                                       self.random_state, "sigma_x")
        self.n_samples_ = X.shape[0]
        if T is None:
            self.vendi_x_ = vendi(X, self.sigma_x_, self.alpha)
            self.report_ = None
            return self
        T = check_matrix(T, "T")
        self.sigma_t_ = _resolve_sigma(self.sigma_t, T, self.alpha,
                                       self.random_state, "sigma_t")
        report = score_report(pair(X, T), self.sigma_x_, self.sigma_t_, self.alpha)
        self.report_ = report
        self.vendi_x_ = report.vendi_x
        self.vendi_t_ = report.vendi_t
        self.conditional_vendi_ = report.conditional_vendi
        self.information_vendi_ = report.information_vendi
        return self


class BandwidthSelector(BaseEstimator):
    """Select a Gaussian bandwidth by the score-variance criterion.

    After ``fit(X)``: ``sigma_`` holds the selected bandwidth,
    ``candidates_`` / ``variances_`` the sweep, and ``selection_`` the full
    BandwidthSelection record.
    """

    def __init__(self, alpha=1.0, candidates=None, trials=10,
                 subsample_size=None, threshold=0.01, random_state=0):
        self.alpha = alpha
        self.candidates = candidates
        self.trials = trials
        self.subsample_size = subsample_size
        self.threshold = threshold
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        self.selection_ = select_bandwidth(
            X, alpha=self.alpha, candidates=self.candidates, trials=self.trials,
            subsample_size=self.subsample_size, threshold=self.threshold,
            seed=self.random_state or 0)
        self.sigma_ = self.selection_.sigma
        self.candidates_ = self.selection_.candidates
        self.variances_ = self.selection_.variances
        return self


class TextModeDecomposition(BaseEstimator):
    """Split the joint kernel along prompt modes and rate each mode's diversity.

    After ``fit(X, T)``: ``modes_`` holds one ModeReport per retained prompt
    mode, ``eigenvalues_`` the corresponding prompt-kernel eigenvalues, and
    ``member_weights_`` the (n_samples, n_modes) mode-affinity matrix.
    """

    def __init__(self, n_modes=3, sigma_x=1.0, sigma_t=1.0, alpha=1.0, top_k=5):
        self.n_modes = n_modes
        self.sigma_x = sigma_x
        self.sigma_t = sigma_t
        self.alpha = alpha
        self.top_k = top_k

    def fit(self, X, T):
        X = check_matrix(X, "X")
        T = check_matrix(T, "T")
        self.modes_ = mode_decomposition(
            pair(X, T), self.sigma_x, self.sigma_t,
            num_modes=self.n_modes, alpha=self.alpha, top_k=self.top_k)
        self.eigenvalues_ = np.array([m.text_eigenvalue for m in self.modes_])
        self.member_weights_ = np.column_stack([m.member_weights for m in self.modes_])
        return self
