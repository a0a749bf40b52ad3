"""Incremental generation with Dynamic Syntax trees and record-type semantics.

Layers, bottom up: ``ttr`` (record types), ``ds`` (trees, actions, grammar
files), ``parser`` (word-by-word context DAG), ``model`` (word/feature
counts), ``generator`` and ``repair`` (beam generation, goal revisions),
``evaluation`` (corpus, metrics) and ``cli``.
"""
from .ds import load_grammar
from .generator import GenerationSession, brute_force_generate, generate
from .model import ConditionalModel, fit, load_model, save_model, train
from .parser import parse_utterance
from .repair import RevisionEvent, classify_revision, generate_with_revisions, strip_repair
from .ttr import equivalent, meet, parse_rt, subtract, subtype

__version__ = "0.1.0"

__all__ = [
    "ConditionalModel", "GenerationSession", "RevisionEvent", "brute_force_generate",
    "classify_revision", "equivalent", "fit", "generate", "generate_with_revisions",
    "load_grammar", "load_model", "meet", "parse_rt", "parse_utterance", "save_model",
    "strip_repair", "subtract", "subtype", "train",
]
