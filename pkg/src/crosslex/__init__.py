"""Cross-lingual word embedding toolkit.

Pipeline: clean a monolingual corpus, train CBOW vectors warm-started
from a pretrained embedding, align the two spaces with supervised
Procrustes, unsupervised adversarial training + iterative refinement,
or the relaxed CSLS retrieval criterion, then evaluate word-translation
retrieval (P@1/P@k) against a bilingual lexicon.
"""

__version__ = "0.1.0"

from .adversarial import AdversarialConfig, adversarial_align
from .alignment import LinearMap, apply_map, build_synthetic_lexicon, procrustes, refine
from .corpus import (
    BilingualLexicon,
    CleaningRules,
    CorpusStats,
    Vocabulary,
    build_vocabulary,
    clean_corpus,
    corpus_stats,
    filter_lexicon,
    load_lexicon,
    split_lexicon,
)
from .cbow import CbowConfig, CbowTrainer, train_cbow
from .embedding import (
    EmbeddingMatrix,
    init_from_pretrained,
    normalize,
    read_embedding,
    write_embedding,
)
from .rcsls import RcslsConfig, rcsls_align
from .retrieval import (
    RandomBaseline,
    RetrievalReport,
    csls_score,
    evaluate,
    random_baseline,
    retrieve,
)
from .synthbench import SynthInstance, generate

__all__ = [
    "AdversarialConfig",
    "BilingualLexicon",
    "CbowConfig",
    "CbowTrainer",
    "CleaningRules",
    "CorpusStats",
    "EmbeddingMatrix",
    "LinearMap",
    "RandomBaseline",
    "RcslsConfig",
    "RetrievalReport",
    "SynthInstance",
    "Vocabulary",
    "adversarial_align",
    "apply_map",
    "build_synthetic_lexicon",
    "build_vocabulary",
    "clean_corpus",
    "corpus_stats",
    "csls_score",
    "evaluate",
    "filter_lexicon",
    "generate",
    "init_from_pretrained",
    "load_lexicon",
    "normalize",
    "procrustes",
    "random_baseline",
    "rcsls_align",
    "read_embedding",
    "refine",
    "retrieve",
    "split_lexicon",
    "train_cbow",
    "write_embedding",
]
