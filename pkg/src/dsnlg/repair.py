"""Goal revisions during generation, and cleaning repairs out of output."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ds import Lexicon
from .model import ConditionalModel
from .parser import DEFAULT_BOUND, ContextDag
from .ttr import HEAD, RecordType, subtype

FORWARD, BACKWARD, NONE = "forward", "backward", "none"


@dataclass(frozen=True)
class RevisionEvent:
    index: int            # apply once this many words have been realised
    new_goal: RecordType

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("revision index must be nonnegative")


@dataclass(frozen=True)
class Resume:
    index: int
    kind: str
    depth: int
    old_spine: tuple[int, ...]
    vertex: int


@dataclass
class RepairOutput:
    surface: list[str]
    annotated: str
    clean: list[str]
    dag: ContextDag
    kind: str = NONE
    backtrack_depth: int = 0
    success: bool = True
    resumes: list[Resume] = field(default_factory=list)
    interregnum_count: int = 0

    @property
    def repaired_edges(self) -> int:
        return sum(e.repaired for e in self.dag.edges)


def classify_revision(r_cur: RecordType, r_new: RecordType, complete: bool = False) -> str:
    """``forward`` when the current semantics still subsumes the new goal.

    For an unfinished tree the head field is provisional and is ignored.
    """
    cur = r_cur if complete else r_cur.without(HEAD)
    return FORWARD if subtype(r_new, cur) else BACKWARD


def generate_with_revisions(model: ConditionalModel, lexicon: Lexicon, goal: RecordType,
                            revisions=(), beam: int = 3, interregnum=None,
                            bound: int = DEFAULT_BOUND) -> RepairOutput:
    from .generator import DEFAULT_INTERREGNUM, MAX_STEPS, GenerationSession

    interregnum = DEFAULT_INTERREGNUM if interregnum is None else tuple(interregnum)
    s = GenerationSession(model, lexicon, goal, beam, interregnum, bound)
    pending = sorted(revisions, key=lambda ev: ev.index)
    resumes = []
    steps = 0
    while True:
        while pending and (pending[0].index <= len(s.words()) or s.done or s.failed):
            ev = pending.pop(0)
            old = s.spine
            kind, depth = s.revise(ev.new_goal)
            resumes.append(Resume(ev.index, kind, depth, old, s.tip))
        if s.done or s.failed or steps >= MAX_STEPS:
            break
        s.step()
        steps += 1
    kinds = {r.kind for r in resumes}
    if BACKWARD in kinds or (not resumes and s.backtracks):
        kind = BACKWARD
    elif FORWARD in kinds:
        kind = FORWARD
    else:
        kind = NONE
    return RepairOutput(
        surface=s.surface(), annotated=s.annotated(), clean=s.words(), dag=s.dag,
        kind=kind, backtrack_depth=sum(r.depth for r in resumes),
        success=s.done and not s.failed, resumes=resumes,
        interregnum_count=sum(1 for k, _ in s.emitted if k == "interregnum"))


_MARKED = re.compile(r"⟦[^⟧]*⟧|⟨[^⟩]*⟩")


def _find(tokens, seq, start=0):
    n = len(seq)
    for i in range(start, len(tokens) - n + 1):
        if tokens[i:i + n] == seq:
            return i
    return -1


def strip_repair(surface, interregnum=None) -> list[str]:
    """Remove reparanda and interregna.

    Annotated output (``⟦...⟧`` / ``⟨...⟩``) is cleaned exactly.  Plain token
    lists fall back to a retrace heuristic: drop each interregnum plus the
    tokens back to the last earlier copy of the word that follows it (or a
    single token when there is none).
    """
    from .generator import DEFAULT_INTERREGNUM

    text = surface if isinstance(surface, str) else " ".join(surface)
    if _MARKED.search(text):
        return _MARKED.sub(" ", text).split()
    tokens = text.split()
    phrases = [list(interregnum)] if interregnum else [list(DEFAULT_INTERREGNUM)]
    phrases += [p.split() for p in ("sorry I mean", "I mean", "uh", "no")
                if p.split() != phrases[0]]
    changed = True
    while changed:
        changed = False
        for ph in phrases:
            i = _find(tokens, ph)
            if i < 0:
                continue
            after = tokens[i + len(ph):]
            start = max(i - 1, 0)
            if after and after[0] in tokens[:i]:
                start = max(j for j in range(i) if tokens[j] == after[0])
            tokens = tokens[:start] + after
            changed = True
            break
    return tokens
