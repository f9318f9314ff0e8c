"""Romanization and transliteration toolkit for South Asian languages.

Script profiles and corpus filtering, EM character alignment, pair n-gram
transliteration, noisy-channel sentence decoding, simulated romanized
corpora and error-rate evaluation.
"""

__version__ = "0.1.0"

from .align import LexiconEntry, PairSymbol, em_train, read_lexicon
from .metrics import cer, edit_align, passthrough_eval, wer, whitespace_eval
from .ngram import NgramModel, read_arpa, train_katz, train_witten_bell, write_arpa
from .scriptdata import ScriptProfile, load_profile
from .translit import PairDecoder, train_pair_model

__all__ = [
    "LexiconEntry",
    "NgramModel",
    "PairDecoder",
    "PairSymbol",
    "ScriptProfile",
    "cer",
    "edit_align",
    "em_train",
    "load_profile",
    "passthrough_eval",
    "read_arpa",
    "read_lexicon",
    "train_katz",
    "train_pair_model",
    "train_witten_bell",
    "wer",
    "whitespace_eval",
    "write_arpa",
]
