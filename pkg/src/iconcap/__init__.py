"""Iconclass caption tooling: notation parsing, dataset building, metrics."""

__version__ = "0.1.0"

from .analysis import (
    GenreDistribution,
    GenreRecord,
    frequency_baseline,
    genre_distribution,
    length_stats,
)
from .captions import (
    BuildReport,
    CaptionRecord,
    CleaningConfig,
    SplitConfig,
    assign_splits,
    build_dataset,
    build_raw,
    clean_description,
    export_jsonl,
)
from .errors import (
    DuplicateId,
    EmptyCorpus,
    EmptyInput,
    IconcapError,
    InsufficientRecords,
    IoFailure,
    MalformedNotation,
    MissingReference,
    NoResolvableCodes,
    SchemaViolation,
)
from .iconclass import (
    AnnotationRecord,
    CorrelateStore,
    IconclassNotation,
    correlate,
    load_annotations,
    parent,
    parse_notation,
)
from .metrics import (
    EvalConfig,
    EvalPair,
    MetricReport,
    bleu,
    cider,
    corpus_bleu,
    evaluate,
    evaluate_pairs,
    meteor,
    rouge_l,
    tokenize,
)

__all__ = [
    "AnnotationRecord",
    "BuildReport",
    "CaptionRecord",
    "CleaningConfig",
    "CorrelateStore",
    "DuplicateId",
    "EmptyCorpus",
    "EmptyInput",
    "EvalConfig",
    "EvalPair",
    "GenreDistribution",
    "GenreRecord",
    "IconcapError",
    "IconclassNotation",
    "InsufficientRecords",
    "IoFailure",
    "MalformedNotation",
    "MetricReport",
    "MissingReference",
    "NoResolvableCodes",
    "SchemaViolation",
    "SplitConfig",
    "assign_splits",
    "bleu",
    "build_dataset",
    "build_raw",
    "cider",
    "clean_description",
    "correlate",
    "corpus_bleu",
    "evaluate",
    "evaluate_pairs",
    "export_jsonl",
    "frequency_baseline",
    "genre_distribution",
    "length_stats",
    "load_annotations",
    "meteor",
    "parent",
    "parse_notation",
    "rouge_l",
    "tokenize",
]
