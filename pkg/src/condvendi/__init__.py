"""condvendi: kernel-entropy diversity scores for conditional generative models.

Decomposes the Vendi diversity of generated samples into a model-induced
component (Conditional-Vendi) and a prompt-relevance component
(Information-Vendi), from paired embedding matrices of outputs and prompts.
"""

from ._threads import apply_thread_cap as _apply_thread_cap

_apply_thread_cap()

from .bandwidth import BandwidthSelection, select_bandwidth
from .decompose import ModeReport, mode_decomposition, text_modes
from .errors import (CondVendiError, DataError, FormatError, IoError,
                     NumericalError, OracleFailure, PairError, ParamError)
from .estimators import BandwidthSelector, DiversityScorer, TextModeDecomposition
from .ingest import (EmbeddingSet, PairedDataset, load_embeddings, pair,
                     save_embeddings)
from .kernels import (KernelMatrix, cosine_kernel, gaussian_kernel, hadamard,
                      trace_normalize)
from .scores import (GroupScoreReport, ScoreReport, conditional_vendi,
                     group_conditional_report, information_vendi, score_report,
                     mixture_aggregation_bound, vendi)
from .spectrum import (EigenSpectrum, EntropyValue, eigen_spectrum,
                       entropy_alpha2_fast, renyi_entropy)

__version__ = "0.1.0"

__all__ = [
    "EmbeddingSet", "PairedDataset", "load_embeddings", "save_embeddings", "pair",
    "KernelMatrix", "gaussian_kernel", "cosine_kernel", "hadamard", "trace_normalize",
    "EigenSpectrum", "EntropyValue", "eigen_spectrum", "renyi_entropy",
    "entropy_alpha2_fast",
    "ScoreReport", "GroupScoreReport", "vendi", "conditional_vendi",
    "information_vendi", "score_report", "group_conditional_report", "mixture_aggregation_bound",
    "BandwidthSelection", "select_bandwidth",
    "ModeReport", "text_modes", "mode_decomposition",
    "DiversityScorer", "BandwidthSelector", "TextModeDecomposition",
    "CondVendiError", "FormatError", "DataError", "PairError", "ParamError",
    "IoError", "NumericalError", "OracleFailure",
]
