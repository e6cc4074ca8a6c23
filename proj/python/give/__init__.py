"""Graph-inspired veracity extrapolation over sparse knowledge graphs."""

from ._core import (
    HashEmbeddingProvider,
    KnowledgeGraph,
    MockPipeline,
    Path2,
    SimilarityIndex,
    Triple,
    cosine,
)

__all__ = [
    "HashEmbeddingProvider",
    "KnowledgeGraph",
    "MockPipeline",
    "Path2",
    "SimilarityIndex",
    "Triple",
    "cosine",
]
