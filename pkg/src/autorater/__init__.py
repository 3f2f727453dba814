"""Multi-modal vehicle rating prediction toolkit.

Predicts five 0-10 rating scores (total, critics, performance, safety,
interior) from parametric specifications, text descriptions, and composed
interior/exterior photo montages. Provides unimodal and fusion regressors,
a repeatable training/evaluation harness, Shapley-value attributions, a
synthetic benchmark corpus, and an HTTP prediction service.
"""

__version__ = "0.1.0"

API_VERSION = "1"
SCORE_NAMES = ("total", "critics", "performance", "safety", "interior")
