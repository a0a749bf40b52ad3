"""Corpus handling, metrics, revision sets and the two evaluation loops."""
from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources

from .ds import Lexicon
from .generator import GenerationSession
from .model import ConditionalModel
from .parser import DEFAULT_BOUND, complete_under_closure, parse_utterance
from .repair import FORWARD, RevisionEvent, classify_revision, generate_with_revisions, strip_repair
from .ttr import RecordType, TTRError, equivalent, parse_rt, print_rt

REVISION_POS = ("NOUN", "ADJ", "PROPN", "ADP", "ADV")
MIN_REVISION_LENGTH = 5
BUCKETS = ("local/forward", "local/backward", "distant/forward", "distant/backward")


class CorpusError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------- corpus

@dataclass
class CorpusEntry:
    tokens: list[str]
    goal: RecordType
    pos_tags: list[str] | None = None
    line: int = 0

    def __post_init__(self):
        if self.pos_tags is not None and len(self.pos_tags) != len(self.tokens):
            raise ValueError("POS tags do not line up with tokens")


def load_corpus(text: str) -> list[CorpusEntry]:
    """One entry per line: ``tokens<TAB>record type[<TAB>POS tags]``."""
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise CorpusError(n, f"expected 2 or 3 tab-separated columns, got {len(cols)}")
        tokens = cols[0].split()
        if not tokens:
            raise CorpusError(n, "empty utterance")
        try:
            goal = parse_rt(cols[1])
        except TTRError as exc:
            raise CorpusError(n, f"bad record type: {exc}") from exc
        tags = cols[2].split() if len(cols) == 3 and cols[2].strip() else None
        try:
            out.append(CorpusEntry(tokens, goal, tags, n))
        except ValueError as exc:
            raise CorpusError(n, str(exc)) from exc
    return out


def dumps_corpus(entries) -> str:
    rows = []
    for e in entries:
        cols = [" ".join(e.tokens), print_rt(e.goal)]
        if e.pos_tags:
            cols.append(" ".join(e.pos_tags))
        rows.append("\t".join(cols))
    return "\n".join(rows) + "\n"


@dataclass
class CorpusStats:
    samples: int
    words: int
    mode_length: int
    max_length: int
    type_token_ratio: float     # x100

    def as_dict(self) -> dict:
        return asdict(self)


def corpus_stats(entries) -> CorpusStats:
    lengths = [len(e.tokens) for e in entries]
    if not lengths:
        return CorpusStats(0, 0, 0, 0, 0.0)
    counts = Counter(lengths)
    top = max(counts.values())
    tokens = [t for e in entries for t in e.tokens]
    return CorpusStats(
        samples=len(entries),
        words=len(tokens),
        mode_length=min(k for k, c in counts.items() if c == top),
        max_length=max(lengths),
        type_token_ratio=100.0 * len(set(tokens)) / len(tokens),
    )


# ---------------------------------------------------------------- metrics

def load_contractions(text: str) -> dict[str, list[str]]:
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        short, long = line.split("\t")
        table[short.lower()] = long.lower().split()
    return table


def default_contractions() -> dict[str, list[str]]:
    ref = resources.files("dsnlg") / "data" / "contractions.tsv"
    return load_contractions(ref.read_text(encoding="utf-8"))


def normalize(tokens, table) -> list[str]:
    out = []
    for t in tokens:
        t = t.lower()
        out.extend(table.get(t, [t]))
    return out


def exact_match(hyp, ref, table=None) -> bool:
    """Token equality after lowercasing and expanding contractions.

    ``table=None`` uses the bundled contraction list; pass ``{}`` for plain
    equality.
    """
    table = default_contractions() if table is None else table
    return normalize(hyp, table) == normalize(ref, table)


def _f1(overlap: int, n_hyp: int, n_ref: int) -> float:
    if overlap == 0:
        return 0.0
    p, r = overlap / n_hyp, overlap / n_ref
    return 2 * p * r / (p + r)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(hyp, ref, n: int = 1) -> float:
    hyp, ref = list(hyp), list(ref)
    h, r = _ngrams(hyp, n), _ngrams(ref, n)
    if not h or not r:
        return 1.0 if hyp == ref else 0.0
    return _f1(sum((h & r).values()), sum(h.values()), sum(r.values()))


def lcs_length(a, b) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge_l(hyp, ref) -> float:
    hyp, ref = list(hyp), list(ref)
    if not hyp or not ref:
        return 1.0 if hyp == ref else 0.0
    return _f1(lcs_length(hyp, ref), len(hyp), len(ref))


# ---------------------------------------------------------------- revisions

@dataclass
class RevisionSpec:
    r_g: RecordType
    index: int
    r_r: RecordType
    utt_r: list[str]
    forward: bool
    position: int          # 0-based token whose content the revision changes

    @property
    def distance(self) -> int:
        if self.forward:
            return self.position - self.index + 1
        return self.index - self.position

    @property
    def locality(self) -> str:
        return "local" if self.distance == 1 else "distant"

    @property
    def direction(self) -> str:
        return "forward" if self.forward else "backward"

    @property
    def bucket(self) -> str:
        return f"{self.locality}/{self.direction}"


def dumps_revisions(specs) -> str:
    rows = [f"{print_rt(s.r_g)}\t{s.index}\t{print_rt(s.r_r)}\t{' '.join(s.utt_r)}"
            f"\t{int(s.forward)}\t{s.position}" for s in specs]
    return "\n".join(rows) + ("\n" if rows else "")


def load_revisions(text: str) -> list[RevisionSpec]:
    """``RT_g<TAB>index<TAB>RT_r<TAB>utt_r<TAB>forward(0/1)<TAB>position`` per line."""
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 6:
            raise CorpusError(n, f"expected 6 tab-separated columns, got {len(cols)}")
        try:
            out.append(RevisionSpec(parse_rt(cols[0]), int(cols[1]), parse_rt(cols[2]),
                                    cols[3].split(), cols[4].strip() == "1", int(cols[5])))
        except (TTRError, ValueError) as exc:
            raise CorpusError(n, str(exc)) from exc
    return out


def substitution_lexicon(entries) -> dict[str, list[str]]:
    table: dict[str, set[str]] = {}
    for e in entries:
        for t, p in zip(e.tokens, e.pos_tags or ()):
            table.setdefault(p, set()).add(t)
    return {p: sorted(ws) for p, ws in table.items()}


@dataclass
class RevisionBuild:
    specs: list[RevisionSpec] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


def build_revisions(entries, lexicon: Lexicon, substitutes=None,
                    bound: int = DEFAULT_BOUND) -> RevisionBuild:
    """Single-word substitutions of eligible tokens, each at up to four indexes.

    For a substitution whose content first shows up after word ``c`` (1-based)
    the indexes are ``c`` and ``c+1`` (backward, local and distant) and
    ``c-1`` and ``c-2`` (forward, local and distant), where they fit.
    """
    substitutes = substitution_lexicon(entries) if substitutes is None else substitutes
    out = RevisionBuild()
    eligible = [e for e in entries if len(e.tokens) >= MIN_REVISION_LENGTH and e.pos_tags]
    if not eligible:
        warnings.warn("no entries eligible for revision")
        return out
    for e in eligible:
        src = parse_utterance(e.tokens, lexicon, bound)
        path = src.matching(e.goal)
        if path is None:
            out.skipped.append(f"{' '.join(e.tokens)}: does not parse to its goal")
            continue
        src_prefix = src.prefix_semantics(path)
        for i, (tok, pos) in enumerate(zip(e.tokens, e.pos_tags)):
            if pos not in REVISION_POS:
                continue
            for sub in substitutes.get(pos, ()):
                if sub == tok:
                    continue
                utt = e.tokens[:i] + [sub] + e.tokens[i + 1:]
                res = parse_utterance(utt, lexicon, bound)
                done = res.complete_vertices(bound)
                if not done:
                    out.skipped.append(f"{' '.join(utt)}: unparsable")
                    continue
                r_r = res.dag.vertex(done[0]).r_cur
                alt = res.prefix_semantics(res.path_for(done[0]))
                c = next(k for k in range(1, len(utt) + 1)
                         if not equivalent(alt[k], src_prefix[k]))
                variants = [(c, False), (c + 1, False), (c - 1, True), (c - 2, True)]
                for index, fwd in variants:
                    if not 0 <= index <= len(e.tokens):
                        continue
                    v = src.dag.vertex(path[index])
                    kind = classify_revision(v.r_cur, r_r, complete_under_closure(v.tree, bound))
                    if (kind == FORWARD) != fwd:
                        out.skipped.append(f"{' '.join(utt)} @ {index}: direction mismatch")
                        continue
                    out.specs.append(RevisionSpec(e.goal, index, r_r, utt, fwd, c - 1))
    return out


# ---------------------------------------------------------------- evaluation

def _mean(xs):
    return sum(xs) / len(xs) if xs else 0.0


def evaluate_generation(model: ConditionalModel, lexicon: Lexicon, entries, beam: int = 3,
                        table=None, bound: int = DEFAULT_BOUND) -> dict:
    entries = list(entries)
    if not entries:
        warnings.warn("empty test set")
    table = default_contractions() if table is None else table
    reached, em, r1, r2, rl, outputs = [], [], [], [], [], []
    for e in entries:
        res = GenerationSession(model, lexicon, e.goal, beam, bound=bound).run()
        hyp = res.tokens
        reached.append(res.success)
        em.append(exact_match(hyp, e.tokens, table))
        h, r = normalize(hyp, table), normalize(e.tokens, table)
        r1.append(rouge_n(h, r, 1))
        r2.append(rouge_n(h, r, 2))
        rl.append(rouge_l(h, r))
        outputs.append({"reference": " ".join(e.tokens), "generated": " ".join(hyp),
                        "reached_goal": res.success, "backtracks": res.backtracks})
    return {
        "samples": len(entries),
        "generated_to_goal": _mean(reached),
        "em": _mean(em),
        "rouge1": _mean(r1),
        "rouge2": _mean(r2),
        "rougeL": _mean(rl),
        "outputs": outputs,
    }


def evaluate_repairs(model: ConditionalModel, lexicon: Lexicon, specs, beam: int = 3,
                     interregnum=None, table=None, bound: int = DEFAULT_BOUND) -> dict:
    table = default_contractions() if table is None else table
    per = {b: {"n": 0, "em": 0, "repaired_edges": 0, "interregna": 0} for b in BUCKETS}
    outputs = []
    for s in specs:
        out = generate_with_revisions(model, lexicon, s.r_g, [RevisionEvent(s.index, s.r_r)],
                                      beam, interregnum, bound)
        clean = strip_repair(out.annotated)
        ok = exact_match(clean, s.utt_r, table)
        b = per[s.bucket]
        b["n"] += 1
        b["em"] += ok
        b["repaired_edges"] += out.repaired_edges
        b["interregna"] += out.interregnum_count
        outputs.append({"bucket": s.bucket, "index": s.index, "target": " ".join(s.utt_r),
                        "surface": out.annotated, "em": ok})
    result = {}
    for name, b in per.items():
        result[name] = {"n": b["n"], "em": b["em"] / b["n"] if b["n"] else 0.0,
                        "repaired_edges": b["repaired_edges"], "interregna": b["interregna"]}
    total = sum(b["n"] for b in per.values())
    result["overall"] = {"n": total,
                         "em": sum(b["em"] for b in per.values()) / total if total else 0.0}
    result["outputs"] = outputs
    return result


def flatten(d: dict, prefix: str = "") -> list[str]:
    """``key=value`` lines; nested keys are dotted, lists are skipped."""
    lines = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines.extend(flatten(v, key + "."))
        elif isinstance(v, list):
            continue
        elif isinstance(v, float):
            lines.append(f"{key}={v:.4f}")
        else:
            lines.append(f"{key}={v}")
    return lines


def to_json(d: dict) -> str:
    return json.dumps(d, indent=2, sort_keys=True, ensure_ascii=False)
