from .datasets import LabeledDataset, assemble_dataset
from .dedup import DedupConfig, dedup, duplicate_pairs, similarity
from .lexer import LexError, Token, strip_comments, tokenize
from .records import (
    NAME_PLACEHOLDER,
    MethodRecord,
    StructureError,
    ensure_prepared,
    mask_own_name,
    prepare,
    read_corpus,
    write_corpus,
)

__all__ = [
    "DedupConfig",
    "LabeledDataset",
    "LexError",
    "MethodRecord",
    "NAME_PLACEHOLDER",
    "StructureError",
    "Token",
    "assemble_dataset",
    "dedup",
    "duplicate_pairs",
    "ensure_prepared",
    "mask_own_name",
    "prepare",
    "read_corpus",
    "similarity",
    "strip_comments",
    "tokenize",
    "write_corpus",
]
