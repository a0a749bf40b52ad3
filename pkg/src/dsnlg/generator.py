"""Beam-driven incremental generation with backtracking.

Each step scores the vocabulary against the remaining content, test-parses
the top candidates and keeps the first whose semantics still licenses the
goal.  When no candidate survives, the session steps back one vertex and
marks the abandoned edge as repaired.  Goal revisions go through
``GenerationSession.revise``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .ds import DsTree, Lexicon, UnknownWordError, root_semantics
from .model import ConditionalModel
from .parser import (
    DEFAULT_BOUND, ContextDag, complete_under_closure, init, pointed_feature, word_steps,
)
from .ttr import HEAD, RecordType, equivalent, subtract, subtype

DEFAULT_INTERREGNUM = ("uh", "I", "mean")
MAX_STEPS = 10_000


class GenerationFailure(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class OracleRefusal(RuntimeError):
    """The brute-force search was asked to run on too large a lexicon."""


def licenses(r_cur: RecordType, goal: RecordType, complete: bool) -> bool:
    """Whether ``r_cur`` can still grow into ``goal``.

    The head of an unfinished tree is provisional (it moves from the subject
    to the predicate once the verb arrives), so it only counts once the tree
    can be completed.
    """
    if complete:
        return subtype(goal, r_cur)
    return subtype(goal, r_cur.without(HEAD))


def tree_licenses(tree: DsTree, r_cur: RecordType, goal: RecordType,
                  bound: int = DEFAULT_BOUND) -> bool:
    return licenses(r_cur, goal, complete_under_closure(tree, bound))


@dataclass
class Candidate:
    word: str
    score: float
    outcome: str = "untested"     # accepted | unparsable | subsumption


@dataclass
class StepRecord:
    kind: str                      # word | backtrack | revise | fail | done
    vertex: int
    ty_p: str = ""
    beam: list[Candidate] = field(default_factory=list)
    word: str | None = None
    note: str = ""


@dataclass
class GenerationResult:
    success: bool
    tokens: list[str]              # realised, non-repaired words
    surface: list[str]             # everything emitted, interregna included
    annotated: str
    dag: ContextDag
    trace: list[StepRecord]
    backtracks: int = 0


class GenerationSession:
    """Mutable generation state for one goal (and its revisions)."""

    def __init__(self, model: ConditionalModel, lexicon: Lexicon, goal: RecordType,
                 beam: int = 3, interregnum=DEFAULT_INTERREGNUM,
                 bound: int = DEFAULT_BOUND):
        if beam < 1:
            raise ValueError("beam size must be at least 1")
        self.model = model
        self.lexicon = lexicon
        self.goal = goal
        self.beam = beam
        self.interregnum = tuple(interregnum)
        self.bound = bound
        self.dag = init()
        self.tried: dict[int, set[str]] = {}
        self.trace: list[StepRecord] = []
        self.emitted: list[tuple[str, int]] = []   # ("word", edge) or ("interregnum", -1)
        self.pending_interregnum = False
        self.backtracks = 0
        self.failed = False
        self.steps = 0

    # -- state ------------------------------------------------------------
    @property
    def spine(self) -> tuple[int, ...]:
        return self.dag.spine

    @property
    def tip(self) -> int:
        return self.dag.spine[-1]

    @property
    def r_cur(self) -> RecordType:
        return self.dag.vertex(self.tip).r_cur

    @property
    def r_inc(self) -> RecordType:
        return subtract(self.goal, self.r_cur)

    @property
    def done(self) -> bool:
        return equivalent(self.r_cur, self.goal)

    def words(self) -> list[str]:
        return [self.dag.edges[self.dag.incoming(v)].word for v in self.spine[1:]]

    def vertex_licenses(self, vid: int, goal: RecordType | None = None) -> bool:
        v = self.dag.vertex(vid)
        return tree_licenses(v.tree, v.r_cur, self.goal if goal is None else goal, self.bound)

    def ranked(self) -> list[tuple[str, float]]:
        v = self.dag.vertex(self.tip)
        return self.model.score_words(pointed_feature(v.tree, self.bound), self.r_inc)

    # -- moves ------------------------------------------------------------
    def step(self) -> StepRecord:
        """Emit one word, or back up one vertex when the beam dead-ends."""
        if self.done:
            rec = StepRecord("done", self.tip)
            self.trace.append(rec)
            return rec
        if self.failed:
            raise GenerationFailure("generation already failed")
        self.steps += 1
        tip = self.tip
        v = self.dag.vertex(tip)
        ty_p = pointed_feature(v.tree, self.bound)
        tried = self.tried.setdefault(tip, set())
        ranked = self.model.score_words(ty_p, subtract(self.goal, v.r_cur))
        beam = [Candidate(w, s) for w, s in ranked
                if s > -math.inf and w not in tried][:self.beam]
        rec = StepRecord("word", tip, ty_p, beam)
        for cand in beam:
            tried.add(cand.word)
            hit, reason = self._try(v, cand.word)
            if hit is None:
                cand.outcome = reason
                continue
            tree, actions = hit
            cand.outcome = "accepted"
            self._emit(tip, tree, cand.word, actions)
            rec.word = cand.word
            self.trace.append(rec)
            return rec
        self.trace.append(rec)
        return self._backtrack_one("no beam word fits")

    def _try(self, v, word: str):
        try:
            results = word_steps(v.tree, word, self.lexicon, self.bound)
        except UnknownWordError:
            results = []
        if not results:
            return None, "unparsable"
        for tree, actions in results:
            r = root_semantics(tree)
            if equivalent(r, v.r_cur):
                continue
            if tree_licenses(tree, r, self.goal, self.bound):
                return (tree, actions), "accepted"
        return None, "subsumption"

    def _emit(self, source: int, tree, word: str, actions) -> None:
        if self.pending_interregnum:
            self.emitted.append(("interregnum", -1))
            self.pending_interregnum = False
        dag, vid = self.dag.extend(source, tree, word, tuple(actions))
        self.dag = replace(dag, spine=dag.spine + (vid,), frontier=(vid,))
        self.emitted.append(("word", len(self.dag.edges) - 1))

    def _backtrack_one(self, note: str) -> StepRecord:
        tip = self.tip
        if tip == 0:
            self.failed = True
            rec = StepRecord("fail", tip, note=note)
            self.trace.append(rec)
            return rec
        edge_i = self.dag.incoming(tip)
        edge = self.dag.edges[edge_i]
        spine = self.dag.spine[:-1]
        self.dag = replace(self.dag.mark_repaired(edge_i), spine=spine, frontier=(spine[-1],))
        self.tried.setdefault(edge.source, set()).add(edge.word)
        self.pending_interregnum = True
        self.backtracks += 1
        rec = StepRecord("backtrack", edge.source, word=edge.word, note=note)
        self.trace.append(rec)
        return rec

    def revise(self, new_goal: RecordType) -> tuple[str, int]:
        """Swap in a new goal; back up until the spine licenses it.

        Returns (kind, depth) with kind ``forward`` or ``backward``.
        """
        self.goal = new_goal
        self.failed = False
        self.tried = {}
        depth = 0
        while not self.vertex_licenses(self.tip):
            self._backtrack_one("goal revised")
            depth += 1
        kind = "backward" if depth else "forward"
        self.trace.append(StepRecord("revise", self.tip, note=f"{kind} depth={depth}"))
        return kind, depth

    def run(self, max_steps: int = MAX_STEPS) -> GenerationResult:
        n = 0
        while not self.done and not self.failed:
            if n >= max_steps:
                self.failed = True
                break
            rec = self.step()
            n += 1
            if rec.kind == "fail":
                break
        return self.result()

    # -- output -----------------------------------------------------------
    def surface(self) -> list[str]:
        out = []
        for kind, i in self.emitted:
            out.extend(self.interregnum if kind == "interregnum" else [self.dag.edges[i].word])
        return out

    def annotated(self) -> str:
        parts, span = [], []
        for kind, i in self.emitted:
            if kind == "word" and self.dag.edges[i].repaired:
                span.append(self.dag.edges[i].word)
                continue
            if span:
                parts.append("⟦" + " ".join(span) + "⟧")
                span = []
            if kind == "interregnum":
                parts.append("⟨" + " ".join(self.interregnum) + "⟩")
            else:
                parts.append(self.dag.edges[i].word)
        if span:
            parts.append("⟦" + " ".join(span) + "⟧")
        return " ".join(parts)

    def result(self) -> GenerationResult:
        return GenerationResult(self.done and not self.failed, self.words(), self.surface(),
                                self.annotated(), self.dag, list(self.trace), self.backtracks)


def generate(model: ConditionalModel, lexicon: Lexicon, goal: RecordType, beam: int = 3,
             bound: int = DEFAULT_BOUND) -> GenerationResult:
    """Generate ``goal``; raises GenerationFailure (carrying the partial result)."""
    res = GenerationSession(model, lexicon, goal, beam, bound=bound).run()
    if not res.success:
        raise GenerationFailure("could not realise goal", res)
    return res


def brute_force_generate(lexicon: Lexicon, goal: RecordType, bound: int = DEFAULT_BOUND,
                         max_actions: int = 200) -> list[str] | None:
    """Exhaustive depth-first search in lexicographic word order.

    Returns the first token sequence found, or ``None`` when the goal cannot
    be reached.  Only meant as a reference for small grammars.
    """
    if len(lexicon) > max_actions:
        raise OracleRefusal(f"lexicon has {len(lexicon)} actions (> {max_actions})")
    words = sorted(lexicon.words)
    limit = len(goal.fields) + 2
    dead: set[DsTree] = set()

    def search(tree, r_cur, depth):
        if equivalent(r_cur, goal):
            return []
        if depth >= limit or tree in dead:
            return None
        for w in words:
            for t2, _ in word_steps(tree, w, lexicon, bound):
                r2 = root_semantics(t2)
                if equivalent(r2, r_cur) or not tree_licenses(t2, r2, goal, bound):
                    continue
                rest = search(t2, r2, depth + 1)
                if rest is not None:
                    return [w] + rest
        dead.add(tree)
        return None

    t0 = init().vertex(0).tree
    return search(t0, root_semantics(t0), 0)
