"""Grow a verb lexicon and ontology from dictionary glosses."""

__version__ = "0.1.0"
