"""Topic discovery in short-text corpora with consensus clustering and NMF."""

__version__ = "0.1.0"
