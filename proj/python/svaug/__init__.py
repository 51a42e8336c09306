"""Vulnerability description augmentation and CVSS assessment toolkit."""

import os

try:
    from . import _svaug as _core  # installed wheel layout
except ImportError:  # build-tree layout: extension sits on PYTHONPATH
    import _svaug as _core

porter_stem = _core.porter_stem
tokenize = _core.tokenize
strip_token_punctuation = _core.strip_token_punctuation
preprocess = _core.preprocess
change_budget = _core.change_budget
severity_class = _core.severity_class
multiclass_mcc = _core.multiclass_mcc
macro_f1 = _core.macro_f1
wilcoxon_signed_rank = _core.wilcoxon_signed_rank
tfidf = _core.tfidf
augment_preview = _core.augment_preview
run_experiment = _core.run_experiment

__all__ = [
    "porter_stem",
    "tokenize",
    "strip_token_punctuation",
    "preprocess",
    "change_budget",
    "severity_class",
    "multiclass_mcc",
    "macro_f1",
    "wilcoxon_signed_rank",
    "tfidf",
    "augment_preview",
    "run_experiment",
    "default_assets_dir",
    "load_stop_words",
]


def default_assets_dir():
    """SVAUG_ASSETS when set, otherwise the packaged assets directory."""
    env = os.environ.get("SVAUG_ASSETS")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "assets")


def load_stop_words(assets_dir=None):
    """Union of the bundled stop-word lists as a sorted list."""
    assets_dir = assets_dir or default_assets_dir()
    words = set()
    for name in ("stopwords_sklearn.txt", "stopwords_nltk.txt"):
        path = os.path.join(assets_dir, name)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    words.add(line.lower())
    return sorted(words)
