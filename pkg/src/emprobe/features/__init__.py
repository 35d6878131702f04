from .encoding import (
    DISPLAY_NAMES,
    SCHEMES,
    ScalerStats,
    encode,
    encode_matrix,
    fit_scaler,
)
from .schema import FeatureSchema, count_matrix, default_schema, extract_counts
from .sequences import SequenceVocab, build_vocab, encode_sequence

__all__ = [
    "DISPLAY_NAMES",
    "FeatureSchema",
    "SCHEMES",
    "ScalerStats",
    "SequenceVocab",
    "build_vocab",
    "count_matrix",
    "default_schema",
    "encode",
    "encode_matrix",
    "encode_sequence",
    "extract_counts",
    "fit_scaler",
]
