"""Word stability across two embedding spaces.

Linear-map, neighbor-based and combined stability scores, plus their uses:
instability ranking, contrastive summaries, document expansion for
classification and correlation with lexical properties.
"""

from .align import (
    AlignConfig,
    LinearMap,
    apply_map,
    default_anchors,
    gradient_check,
    load_map,
    map_loss,
    one_way_similarity,
    round_trip_stability,
    save_map,
    train_map,
)
from .analysis import (
    ExpandConfig,
    LawReport,
    LinearTextModel,
    TrainConfig,
    ViewpointSummary,
    classify,
    evaluate_prf,
    expand_document,
    law_correlations,
    pearson,
    rank_delta,
    summarize_viewpoints,
    train_classifier,
)
from .corpus import (
    Document,
    FrequencyTable,
    count_frequencies,
    detect_phrases,
    document_frequencies,
    tfidf_vectorize,
    tokenize,
)
from .embed import (
    EmbeddingSpace,
    NeighborIndex,
    SharedVocab,
    build_neighbor_index,
    cosine,
    generate_synthetic_space,
    intersect_vocab,
    load_embeddings,
    save_embeddings,
)
from .errors import AnchorError, DivergenceError, EmbeddingFormatError, InvariantError, SemshiftError, UnknownWordError
from .stability import (
    StabilityParams,
    StabilityReport,
    combination_stability,
    lambda_select,
    linear_stability,
    minmax_normalize,
    neighbor_stability,
    overlap_count,
    rank_by_instability,
    read_report,
    tail_jaccard,
    write_report,
)

__version__ = "0.1.0"
