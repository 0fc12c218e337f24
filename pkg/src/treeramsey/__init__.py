"""Finite Ramsey computations over tree-indexed words, semigroup actions and delta sets."""

__version__ = "0.1.0"
ENGINE_VERSION = "treeramsey-" + __version__
