"""Task back-ends: toy knowledge-base subgraph ranking and BiLSTM answer
sentence selection."""

from .instances import (  # noqa: F401
    QAInstance,
    RawRecord,
    TASK_KB,
    TASK_SENTSEL,
    build_idf,
    parse_dataset_file,
    prepare_instances,
)
from .kb import (  # noqa: F401
    KBFeatureSpace,
    KbModel,
    SubgraphCandidate,
    ToyKB,
    f1_vs_gold,
    generate_subgraphs,
    link_entities,
)
from .sentsel import IdfTable, SentSelModel, word_match_features  # noqa: F401
