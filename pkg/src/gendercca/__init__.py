"""Correlating the grammatical gender of inanimate nouns with their lexical
semantics through canonical correlation analysis."""

from .analysis import AnalysisConfig, PairError, PairResult, analyze_pair, run_batch
from .cca import CcaModel, PearsonResult, fit_cca, pearson, project_and_correlate
from .dataset import (
    EmbeddingTable,
    GenderInventory,
    LexiconEntry,
    PairedDataset,
    SplitDataset,
    build_paired_dataset,
    parse_embeddings,
    parse_lexicon,
    split,
)
from .similarity import SimilarityMatrix, hierarchical_cluster, projection_similarity
from .stats import PermutationOutcome, bonferroni, permutation_test

__version__ = "0.1.0"
