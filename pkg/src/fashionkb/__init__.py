"""Fashion knowledge extraction from social-media-style posts.

Pipeline: archive ingestion -> filter cascade -> contextualized multi-task
concept learning with label-noise modeling -> triplet knowledge base ->
faceted search over HTTP.
"""

from .corpus import (
    BoundingBox,
    CorpusError,
    GarmentLabels,
    GarmentRegion,
    LabeledPost,
    Post,
    read_corpus,
    write_corpus,
)
from .filters import (
    AdClassifier,
    FilterOutcome,
    FilterThresholds,
    PersonPair,
    ad_score,
    pair_faces_bodies,
    ratio_check,
    run_filters,
    train_ad_classifier,
)
from .ingest import HashtagMap, IngestReport, ingest_archive
from .kb import FashionTriplet, KnowledgeBase, TripletKey, build_triplets
from .search import Query, SearchPage, TripletResult, query_posts, query_triplets
from .synthetic import PlantedTruth, SyntheticConfig, generate_synthetic
from .vocab import (
    AttributeType,
    ConceptVocabulary,
    VocabularyError,
    load_vocabulary,
    reference_vocabulary,
)

__version__ = "0.1.0"
