"""Word-by-word parsing over a context DAG.

Each edge is one word: a run of computational actions followed by a single
lexical action.  Vertices keep the tree reached and its root semantics.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

from .ds import (
    COMPUTATIONAL_ACTIONS, DsTree, Lexicon, axiom_tree, is_complete, root_semantics,
    apply_lexical,
)
from .ttr import RecordType, equivalent

DEFAULT_BOUND = 8


class ClosureOverflow(RuntimeError):
    """Computational actions kept producing new trees past the bound."""


@dataclass(frozen=True)
class DagVertex:
    id: int
    tree: DsTree
    r_cur: RecordType


@dataclass(frozen=True)
class DagEdge:
    source: int
    target: int
    word: str
    actions: tuple[str, ...]
    repaired: bool = False


@dataclass(frozen=True)
class ContextDag:
    vertices: tuple[DagVertex, ...]
    edges: tuple[DagEdge, ...] = ()
    frontier: tuple[int, ...] = (0,)
    spine: tuple[int, ...] = (0,)

    def vertex(self, vid: int) -> DagVertex:
        return self.vertices[vid]

    def incoming(self, vid: int) -> int | None:
        """Index of the edge entering ``vid`` (parse vertices have at most one)."""
        for i, e in enumerate(self.edges):
            if e.target == vid:
                return i
        return None

    def path_to(self, vid: int) -> list[DagEdge]:
        edges = []
        while vid != 0:
            e = self.edges[self.incoming(vid)]
            edges.append(e)
            vid = e.source
        return edges[::-1]

    def extend(self, source: int, tree: DsTree, word: str,
               actions: tuple[str, ...]) -> tuple["ContextDag", int]:
        vid = len(self.vertices)
        v = DagVertex(vid, tree, root_semantics(tree))
        e = DagEdge(source, vid, word, actions)
        return replace(self, vertices=self.vertices + (v,), edges=self.edges + (e,)), vid

    def mark_repaired(self, edge_index: int) -> "ContextDag":
        edges = list(self.edges)
        edges[edge_index] = replace(edges[edge_index], repaired=True)
        return replace(self, edges=tuple(edges))


def init() -> ContextDag:
    t = axiom_tree()
    return ContextDag((DagVertex(0, t, root_semantics(t)),))


@lru_cache(maxsize=65536)
def _closure(tree: DsTree, bound: int) -> tuple[tuple[DsTree, tuple[str, ...]], ...]:
    seen = {tree}
    out = [(tree, ())]
    layer = [(tree, ())]
    for depth in range(bound + 1):
        nxt = []
        for t, acts in layer:
            for name, action in COMPUTATIONAL_ACTIONS.items():
                t2 = action(t)
                if t2 is not None and t2 not in seen:
                    seen.add(t2)
                    nxt.append((t2, acts + (name,)))
        if not nxt:
            break
        if depth == bound:
            raise ClosureOverflow(f"computational actions exceed {bound} steps")
        out.extend(nxt)
        layer = nxt
    return tuple(out)


def closure_with_actions(tree: DsTree, bound: int = DEFAULT_BOUND):
    """Trees reachable by 0..bound computational actions, with the actions used."""
    return _closure(tree, bound)


def computational_closure(tree: DsTree, bound: int = DEFAULT_BOUND) -> list[DsTree]:
    return [t for t, _ in _closure(tree, bound)]


def complete_under_closure(tree: DsTree, bound: int = DEFAULT_BOUND) -> bool:
    return any(is_complete(t) for t, _ in _closure(tree, bound))


def pointed_feature(tree: DsTree, bound: int = DEFAULT_BOUND) -> str:
    """The pointed-node type (or requirement) a next word would be parsed at.

    Takes the deepest open leaf (a pointed node with an outstanding
    requirement and no daughters) over the closure; failing that, the pointed
    node of the most developed closure tree.
    """
    trees = computational_closure(tree, bound)
    best = None
    for t in trees:
        n = t.pointed
        if n.requirements and not t.has_daughters(t.pointer):
            if best is None or len(t.pointer) > len(best.pointer):
                best = t
    if best is not None:
        req = sorted(best.pointed.requirements, key=str)[0]
        return f"?Ty({req})"
    n = trees[-1].pointed
    if n.ty is not None:
        return f"Ty({n.ty})"
    return n.label()


def word_steps(tree: DsTree, word: str, lexicon: Lexicon, bound: int = DEFAULT_BOUND):
    """All (tree, actions) results of parsing ``word`` in the context of ``tree``."""
    results = []
    seen = set()
    for t, acts in closure_with_actions(tree, bound):
        for la in lexicon.for_word(word):
            t2 = apply_lexical(t, la)
            if t2 is not None and t2 not in seen:
                seen.add(t2)
                results.append((t2, acts + (f"lex:{word}",)))
    return results


def parse_word(dag: ContextDag, word: str, lexicon: Lexicon,
               bound: int = DEFAULT_BOUND) -> ContextDag | None:
    """Extend every frontier vertex by ``word``; ``None`` when nothing parses."""
    lexicon.for_word(word)
    new_frontier = []
    for vid in dag.frontier:
        for t2, acts in word_steps(dag.vertex(vid).tree, word, lexicon, bound):
            dag, nid = dag.extend(vid, t2, word, acts)
            new_frontier.append(nid)
    if not new_frontier:
        return None
    return replace(dag, frontier=tuple(new_frontier))


@dataclass
class ParseResult:
    tokens: list[str]
    dag: ContextDag
    dead_end: int | None = None              # 1-based position of the failing word
    path: list[int] = field(default_factory=list)

    @property
    def alive(self) -> bool:
        return self.dead_end is None

    def complete_vertices(self, bound: int = DEFAULT_BOUND) -> list[int]:
        if not self.alive:
            return []
        return [v for v in self.dag.frontier
                if complete_under_closure(self.dag.vertex(v).tree, bound)]

    @property
    def grammatical(self) -> bool:
        return bool(self.complete_vertices())

    @property
    def potentially_grammatical(self) -> bool:
        return self.alive and not self.grammatical

    def path_for(self, vid: int) -> list[int]:
        return [0] + [e.target for e in self.dag.path_to(vid)]

    def prefix_semantics(self, path: list[int] | None = None) -> list[RecordType]:
        path = self.path if path is None else path
        return [self.dag.vertex(v).r_cur for v in path]

    def matching(self, goal: RecordType) -> list[int] | None:
        """Path to the first complete frontier vertex whose semantics ≡ ``goal``."""
        for v in self.complete_vertices():
            if equivalent(self.dag.vertex(v).r_cur, goal):
                return self.path_for(v)
        return None


def parse_utterance(tokens, lexicon: Lexicon, bound: int = DEFAULT_BOUND) -> ParseResult:
    tokens = list(tokens)
    if not tokens:
        raise ValueError("cannot parse an empty token sequence")
    dag = init()
    for i, w in enumerate(tokens, 1):
        nxt = parse_word(dag, w, lexicon, bound)
        if nxt is None:
            res = ParseResult(tokens, dag, dead_end=i)
            res.path = res.path_for(dag.frontier[0])
            res.dag = replace(dag, spine=tuple(res.path))
            return res
        dag = nxt
    res = ParseResult(tokens, dag)
    done = res.complete_vertices(bound)
    res.path = res.path_for(done[0] if done else dag.frontier[0])
    res.dag = replace(dag, spine=tuple(res.path))
    return res


def dump_dag(dag: ContextDag, bound: int = DEFAULT_BOUND) -> str:
    """Plain-text dump: one ``vertex`` line per vertex, one ``edge`` line per edge.

        vertex <id> ptr=<pointed type> complete=<0|1> rt=<record type>
        edge <source> -> <target> word=<token> repaired=<0|1> actions=<a,b,...>
        spine <id> <id> ...
    """
    lines = []
    for v in dag.vertices:
        done = int(complete_under_closure(v.tree, bound))
        lines.append(f"vertex {v.id} ptr={v.tree.pointed_label()} complete={done} rt={v.r_cur}")
    for e in dag.edges:
        lines.append(f"edge {e.source} -> {e.target} word={e.word} "
                     f"repaired={int(e.repaired)} actions={','.join(e.actions)}")
    lines.append("spine " + " ".join(str(v) for v in dag.spine))
    return "\n".join(lines)
