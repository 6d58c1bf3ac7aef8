"""Candidate paraphrase generation: lexical/phrasal substitution, mined
template rewriting, and multi-pivot fusion decoding."""

from .generate import GeneratorConfig, generate_all, is_trivial_rewrite  # noqa: F401
from .lexical import apply_lexical_rules, load_rule_file  # noqa: F401
from .pivot import (  # noqa: F401
    EOS_TOKEN,
    PivotParaphraser,
    SeqModelInterface,
    TableSeqModel,
    TinyRecurrentSeqModel,
    fuse_decode,
    fused_step_dist,
)
from .templates import (  # noqa: F401
    apply_template_rules,
    load_cluster_file,
    load_template_rules,
    mine_template_rules,
    rank_rules_pmi,
    save_template_rules,
    template_abstractions,
)
from .types import (  # noqa: F401
    ORIGIN_IDENTITY,
    ORIGIN_LEXICAL,
    ORIGIN_PIVOT,
    ORIGIN_TEMPLATE,
    WILDCARD,
    ParaphraseCandidate,
    PivotSet,
    QuestionTemplate,
    RewriteRule,
    TemplateRulePair,
)
