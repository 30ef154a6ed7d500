"""doppel: find related (duplicate or near-duplicate) posts in project
discussion forums and measure detection precision with a human review loop.

The pipeline scores semantic similarity between every pair of posts,
pools each post's top-K neighbor values into a distribution, and selects
statistical outliers above the boxplot upper inner fence (Q3 + 1.5*IQR)
as related-discussion candidates. Humans label the candidates D/R/N and
the toolkit reports precision and inter-rater agreement.
"""

from ._version import __version__
from .corpus import (
    CorpusFilter,
    Discussion,
    apply_filter,
    canonicalize_category,
    load_corpus,
    save_corpus,
)
from .embedding import ProviderConfig, embed_batch, hash_embed
from .errors import DoppelError, InputError, ProviderError, ValidationError
from .evaluation import (
    Judgment,
    PrecisionReport,
    cohen_kappa,
    load_judgments,
    mean_precision,
    metrics_document,
    precision,
    save_judgments,
)
from .fetch import fetch_discussions
from .preprocess import (
    PipelineStats,
    PreparedDoc,
    normalize,
    prepare,
    prepare_corpus,
    strip_code_and_urls,
    strip_noise,
)
from .report import CandidateReport, RunConfig, load_report, run, run_matrix
from .similarity import SimilarityRecord, cosine, pairwise, read_similarity_csv, write_similarity_csv
from .threshold import (
    CandidatePair,
    ThresholdStats,
    build_s,
    local_threshold,
    percentile,
    select_candidates,
    top_k,
)

__all__ = [
    "__version__",
    "CandidatePair",
    "CandidateReport",
    "CorpusFilter",
    "Discussion",
    "DoppelError",
    "InputError",
    "Judgment",
    "PipelineStats",
    "PrecisionReport",
    "PreparedDoc",
    "ProviderConfig",
    "ProviderError",
    "RunConfig",
    "SimilarityRecord",
    "ThresholdStats",
    "ValidationError",
    "apply_filter",
    "build_s",
    "canonicalize_category",
    "cohen_kappa",
    "cosine",
    "embed_batch",
    "fetch_discussions",
    "hash_embed",
    "load_corpus",
    "load_judgments",
    "load_report",
    "local_threshold",
    "mean_precision",
    "metrics_document",
    "normalize",
    "pairwise",
    "percentile",
    "precision",
    "prepare",
    "prepare_corpus",
    "read_similarity_csv",
    "run",
    "run_matrix",
    "save_corpus",
    "save_judgments",
    "select_candidates",
    "strip_code_and_urls",
    "strip_noise",
    "top_k",
    "write_similarity_csv",
]
