"""BLEU, NIST, METEOR and TER with multi-reference support."""

from ._common import EmptyInput, transpose_refs
from .bleu import BleuComponents, bleu
from .meteor import MeteorComponents, meteor, meteor_corpus
from .nist import NistComponents, nist
from .ter import TerComponents, ter, ter_corpus

__all__ = ["EmptyInput", "transpose_refs", "BleuComponents", "bleu", "MeteorComponents", "meteor",
           "meteor_corpus", "NistComponents", "nist", "TerComponents", "ter", "ter_corpus"]
