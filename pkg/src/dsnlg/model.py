"""Word x feature count table and the word scores derived from it.

Features are either canonical atomic record types (``sem:...``) or the
pointed-node type/requirement a word was parsed at (``ptr:...``).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .ds import Lexicon
from .parser import DEFAULT_BOUND, parse_utterance, pointed_feature
from .ttr import RecordType, canonical_atom, decompose, embeds, equivalent, parse_rt, subtract

FORMAT_VERSION = 1
NORMALIZATIONS = ("word", "feature")
TRIGGERS = ("atoms", "closure")


class ModelError(ValueError):
    pass


class TrainingError(ModelError):
    pass


class VocabularyError(ModelError, KeyError):
    pass


def sem_key(atom: RecordType) -> str:
    return "sem:" + canonical_atom(atom)


def ptr_key(ty_p: str) -> str:
    return "ptr:" + ty_p


def atom_of_key(key: str) -> RecordType:
    if not key.startswith("sem:"):
        raise ModelError(f"not a semantic feature: {key}")
    return parse_rt(key[4:], check=False)


def feature_keys(r_inc: RecordType) -> set[str]:
    return {sem_key(a) for a in decompose(r_inc)}


@dataclass
class ConditionalModel:
    word_counts: Counter = field(default_factory=Counter)
    pair_counts: Counter = field(default_factory=Counter)   # (word, feature) -> count
    total_tokens: int = 0
    alpha: float = 0.1
    normalization: str = "word"
    trigger: str = "atoms"

    def __post_init__(self):
        if self.alpha < 0:
            raise ModelError("alpha must be nonnegative")
        if self.normalization not in NORMALIZATIONS:
            raise ModelError(f"unknown normalization {self.normalization!r}")
        if self.trigger not in TRIGGERS:
            raise ModelError(f"unknown trigger mode {self.trigger!r}")
        self._index()

    def _index(self):
        self._features = sorted({f for _, f in self.pair_counts})
        self._atoms = [(f, atom_of_key(f)) for f in self._features if f.startswith("sem:")]
        self._feature_totals = Counter()
        for (_, f), c in self.pair_counts.items():
            self._feature_totals[f] += c

    @property
    def vocab(self) -> list[str]:
        return sorted(self.word_counts)

    @property
    def features(self) -> list[str]:
        return list(self._features)

    def scaled(self, k: int) -> "ConditionalModel":
        """Copy with every count multiplied by ``k``."""
        return ConditionalModel(
            Counter({w: c * k for w, c in self.word_counts.items()}),
            Counter({p: c * k for p, c in self.pair_counts.items()}),
            self.total_tokens * k, self.alpha, self.normalization, self.trigger)

    def prior(self, word: str) -> float:
        if word not in self.word_counts:
            raise VocabularyError(word)
        return self.word_counts[word] / self.total_tokens

    def feature_probability(self, f: str, word: str) -> float:
        if word not in self.word_counts:
            raise VocabularyError(word)
        c = self.pair_counts.get((word, f), 0)
        if self.normalization == "word":
            denom = self.word_counts[word] + self.alpha * len(self._features)
        else:
            # column reading: distribution over words for a fixed feature
            denom = self._feature_totals.get(f, 0) + self.alpha * len(self.word_counts)
        if denom == 0:
            return 0.0
        return (c + self.alpha) / denom

    def triggered(self, ty_p: str, r_inc: RecordType) -> list[str]:
        """Features switched on by the remaining content and the pointed node.

        ``atoms`` mode uses the atoms of ``r_inc`` itself, the same features
        counted in training.  ``closure`` mode also fires every known atom
        that is a supertype of ``r_inc`` up to relabelling (e.g. a bare
        ``[v0:e]``).
        """
        if self.trigger == "atoms":
            keys = feature_keys(r_inc)
            feats = [f for f, _ in self._atoms if f in keys]
        else:
            feats = [f for f, atom in self._atoms if embeds(r_inc, atom)]
        return feats + [ptr_key(ty_p)]

    def score(self, word: str, feats) -> float:
        s = math.log(self.prior(word))
        for f in feats:
            p = self.feature_probability(f, word)
            if p == 0.0:
                return -math.inf
            s += math.log(p)
        return s

    def score_words(self, ty_p: str, r_inc: RecordType) -> list[tuple[str, float]]:
        feats = self.triggered(ty_p, r_inc)
        scored = [(w, self.score(w, feats)) for w in self.vocab]
        scored.sort(key=lambda ws: (-ws[1], ws[0]))
        return scored

    def __eq__(self, other):
        if not isinstance(other, ConditionalModel):
            return NotImplemented
        return (+self.word_counts == +other.word_counts
                and +self.pair_counts == +other.pair_counts
                and self.total_tokens == other.total_tokens
                and self.alpha == other.alpha
                and self.normalization == other.normalization
                and self.trigger == other.trigger)


@dataclass
class SkippedEntry:
    index: int        # 0-based corpus position
    tokens: list[str]
    reason: str


def observations(tokens, goal: RecordType, lexicon: Lexicon, bound: int = DEFAULT_BOUND):
    """(word, features) pairs along the parse path matching ``goal``.

    Raises TrainingError when the utterance does not parse to the goal.
    """
    res = parse_utterance(tokens, lexicon, bound)
    if not res.alive:
        raise TrainingError(f"unparsable at word {res.dead_end}")
    path = res.matching(goal)
    if path is None:
        raise TrainingError("parse does not match gold semantics")
    out = []
    for w, vid in zip(tokens, path):
        v = res.dag.vertex(vid)
        r_inc = subtract(goal, v.r_cur)
        feats = feature_keys(r_inc) | {ptr_key(pointed_feature(v.tree, bound))}
        out.append((w, feats))
    return out


def fit(corpus, lexicon: Lexicon, alpha: float = 0.1, normalization: str = "word",
        trigger: str = "atoms", bound: int = DEFAULT_BOUND
        ) -> tuple[ConditionalModel, list[SkippedEntry]]:
    """Count-table estimate from (tokens, goal) pairs; also returns skipped entries."""
    model = ConditionalModel(alpha=alpha, normalization=normalization, trigger=trigger)
    skipped = []
    for i, (tokens, goal) in enumerate(corpus):
        tokens = list(tokens)
        try:
            obs = observations(tokens, goal, lexicon, bound)
        except Exception as exc:   # unknown words, overflow, mismatch
            skipped.append(SkippedEntry(i, tokens, str(exc) or type(exc).__name__))
            continue
        for w, feats in obs:
            model.word_counts[w] += 1
            model.total_tokens += 1
            for f in feats:
                model.pair_counts[w, f] += 1
    if model.total_tokens == 0:
        raise TrainingError("no usable training entries")
    model._index()
    return model, skipped


def train(corpus, lexicon: Lexicon, alpha: float = 0.1, normalization: str = "word",
          trigger: str = "atoms", bound: int = DEFAULT_BOUND) -> ConditionalModel:
    return fit(corpus, lexicon, alpha, normalization, trigger, bound)[0]


# ---------------------------------------------------------------- model files

def dumps_model(model: ConditionalModel) -> str:
    lines = [
        f"dsnlg-model {FORMAT_VERSION}",
        f"alpha {model.alpha!r}",
        f"normalization {model.normalization}",
        f"trigger {model.trigger}",
        f"total_tokens {model.total_tokens}",
        f"vocab {len(model.word_counts)}",
        "[words]",
    ]
    lines += [f"{w}\t{model.word_counts[w]}" for w in sorted(model.word_counts)]
    lines.append("[pairs]")
    lines += [f"{w}\t{f}\t{c}" for (w, f), c in sorted(model.pair_counts.items()) if c]
    return "\n".join(lines) + "\n"


def save_model(model: ConditionalModel) -> bytes:
    return dumps_model(model).encode("utf-8")


def load_model(data: bytes | str) -> ConditionalModel:
    try:
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        lines = text.splitlines()
        head = lines[0].split()
        if len(head) != 2 or head[0] != "dsnlg-model":
            raise ModelError("not a model file")
        if head[1] != str(FORMAT_VERSION):
            raise ModelError(f"unsupported model version {head[1]}")
        meta = dict(line.split(" ", 1) for line in lines[1:6])
        w_at, p_at = lines.index("[words]"), lines.index("[pairs]")
        words = Counter()
        for line in lines[w_at + 1:p_at]:
            w, c = line.split("\t")
            words[w] = int(c)
        pairs = Counter()
        for line in lines[p_at + 1:]:
            w, f, c = line.split("\t")
            pairs[w, f] = int(c)
        model = ConditionalModel(words, pairs, int(meta["total_tokens"]),
                                 float(meta["alpha"]), meta["normalization"], meta["trigger"])
        if int(meta["vocab"]) != len(words) or sum(words.values()) != model.total_tokens:
            raise ModelError("inconsistent counts")
        return model
    except ModelError:
        raise
    except Exception as exc:
        raise ModelError(f"corrupt model payload: {exc}") from exc


def gold_matches(tokens, goal: RecordType, lexicon: Lexicon, bound: int = DEFAULT_BOUND) -> bool:
    res = parse_utterance(tokens, lexicon, bound)
    return res.alive and any(equivalent(res.dag.vertex(v).r_cur, goal)
                             for v in res.complete_vertices(bound))
