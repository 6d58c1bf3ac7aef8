"""Paraphrase-weighted question answering.

Generate candidate paraphrases of a question with pluggable generators,
score them with a trainable neural model, and marginalize a QA model's
answer distribution over the weighted paraphrases, training everything
jointly from question-answer supervision.
"""

__version__ = "0.1.0"

from .textkit import TokenSeq, normalize  # noqa: F401
