"""Handcrafted features versus neural code embeddings for method-name classification."""

__version__ = "0.1.0"
