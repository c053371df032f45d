"""Phrase-based statistical machine translation toolkit for Polish-English
experiments: corpus preparation, tagger-based corpus variants, n-gram
language models, word alignment, phrase and reordering models, a stack
decoder, evaluation metrics and an experiment harness."""

__version__ = "0.1.0"
