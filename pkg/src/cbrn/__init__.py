"""Attribute-wise associative memory over QR-coded label patterns.

Labels from an attribute catalog are rendered as fixed-size QR bitmaps,
stored by one-shot delta-rule learning between Cue Balls and a Recall Net,
and cross-linked between balls so that presenting one attribute's pattern
recalls the linked patterns of other attributes.
"""

from .errors import (
    CatalogError,
    CbrnError,
    DegeneratePattern,
    DimensionMismatch,
    DuplicateEntry,
    EmptyLabel,
    IntraBallLink,
    LabelTooLong,
    ModelFormatError,
    NeuronIndexError,
    NoAssociation,
    NoRecognition,
    PbmFormatError,
    UnknownBall,
    UnsupportedVersion,
)
from .galois import Codeword, rs_encode, syndromes
from .memory import (
    AssociationResult,
    CueBall,
    CueResponse,
    MemorySystem,
    RecallBank,
    SystemConfig,
    UpdateReport,
    cross_error,
    cue_error,
    recall_error,
)
from .patterns import (
    AttributeCatalog,
    AttributeGroup,
    BinaryPattern,
    default_catalog,
    load_catalog,
    load_pbm,
    normalize,
    parse_catalog,
    raw_vector,
    save_pbm,
    to_pattern,
    to_vector,
)
from .qr import QrMatrix, encode_label, label_pattern, random_pattern, render
from .store import load, loads, save, dumps

__version__ = "0.1.0"

__all__ = [
    "AssociationResult",
    "AttributeCatalog",
    "AttributeGroup",
    "BinaryPattern",
    "CatalogError",
    "CbrnError",
    "Codeword",
    "CueBall",
    "CueResponse",
    "DegeneratePattern",
    "DimensionMismatch",
    "DuplicateEntry",
    "EmptyLabel",
    "IntraBallLink",
    "LabelTooLong",
    "MemorySystem",
    "ModelFormatError",
    "NeuronIndexError",
    "NoAssociation",
    "NoRecognition",
    "PbmFormatError",
    "QrMatrix",
    "RecallBank",
    "SystemConfig",
    "UnknownBall",
    "UnsupportedVersion",
    "UpdateReport",
    "cross_error",
    "cue_error",
    "default_catalog",
    "dumps",
    "encode_label",
    "label_pattern",
    "load",
    "load_catalog",
    "load_pbm",
    "loads",
    "normalize",
    "parse_catalog",
    "random_pattern",
    "raw_vector",
    "recall_error",
    "render",
    "rs_encode",
    "save",
    "save_pbm",
    "syndromes",
    "to_pattern",
    "to_vector",
]
