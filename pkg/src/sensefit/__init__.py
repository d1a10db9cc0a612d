"""Sense embeddings from word embeddings and a sense inventory, relation
disambiguation, and embedding-based word sense disambiguation."""

__version__ = "0.1.0"
