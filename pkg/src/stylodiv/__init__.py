"""Stylometric divergence auditing toolchain.

Measures how a collection of texts deviates from a reference corpus
across a fixed 24-feature taxonomy, with corpus-level diversity
metrics, nonparametric statistics, feature-subset ablation, and a
small absorbing-regime simulator.
"""

__version__ = "0.1.0"


class InputError(ValueError):
    """Bad user input: malformed files, impossible parameters, empty corpora.

    The CLI maps this to exit code 2; everything else unexpected is exit 1.
    """
