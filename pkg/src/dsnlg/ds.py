"""Dynamic Syntax trees, computational and lexical actions, and lexicons.

Node addresses are strings over ``0`` (argument daughter) and ``1`` (functor
daughter); the root is ``""``.  Trees are immutable: every action returns a
new tree, or ``None`` when its preconditions do not hold.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

from .ttr import (
    HEAD, BaseType, Field, ManifestType, RecordType, TTRError, _dependency_sort,
    meet, read_rt, rename, subtype,
)

ARG, FUN = "0", "1"


class DSError(Exception):
    pass


class DSTypeError(DSError):
    """A functor was applied to an argument outside its constraint."""


class GrammarError(DSError):
    """A lexical action whose update sequence cannot be executed."""


class LexiconSyntaxError(DSError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------- semantic types

@dataclass(frozen=True)
class AtomicType:
    kind: str

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class FunctionType:
    domain: "SemType"
    range: "SemType"

    def __str__(self):
        dom = f"({self.domain})" if isinstance(self.domain, FunctionType) else str(self.domain)
        return f"{dom}→{self.range}"


SemType = Union[AtomicType, FunctionType]
E, T, ES = AtomicType("e"), AtomicType("t"), AtomicType("es")


def parse_semtype(text: str) -> SemType:
    """Parse ``e``, ``e→t``, ``e->(e->t)``, ``e>t``; arrows associate right."""
    s = text.replace("->", "→").replace(">", "→").replace(" ", "")
    ty, rest = _semtype(s)
    if rest:
        raise ValueError(f"bad semantic type {text!r}")
    return ty


def _semtype(s: str) -> tuple[SemType, str]:
    if s.startswith("("):
        left, rest = _semtype(s[1:])
        if not rest.startswith(")"):
            raise ValueError(f"unbalanced parentheses in {s!r}")
        rest = rest[1:]
    else:
        m = re.match(r"(es|e|t)(?![a-z])", s)
        if not m:
            raise ValueError(f"unknown semantic type in {s!r}")
        left, rest = AtomicType(m.group(1)), s[m.end():]
    if rest.startswith("→"):
        right, rest = _semtype(rest[1:])
        return FunctionType(left, right), rest
    return left, rest


# ---------------------------------------------------------------- formulae

@dataclass(frozen=True)
class Abstract:
    """``lambda var:constraint.body``; the body refers to ``var.head``."""
    var: str
    constraint: RecordType
    body: "Formula"

    def __str__(self):
        return f"lambda {self.var}:{self.constraint}.{self.body}"


Formula = Union[RecordType, Abstract]


def parse_formula(text: str) -> Formula:
    f, end = _read_formula(text.strip(), 0)
    if text.strip()[end:].strip():
        raise ValueError(f"trailing input in formula {text!r}")
    return f


def _read_formula(text: str, pos: int) -> tuple[Formula, int]:
    m = re.compile(r"\s*(?:lambda\s+|λ\s*)([A-Za-z]\w*)\s*:").match(text, pos)
    if m:
        constraint, end = read_rt(text, m.end())
        dot = re.compile(r"\s*\.").match(text, end)
        if not dot:
            raise ValueError(f"expected '.' after lambda constraint in {text!r}")
        body, end = _read_formula(text, dot.end())
        return Abstract(m.group(1), constraint, body), end
    return read_rt(text, pos)


def _innermost(f: Formula) -> RecordType:
    while isinstance(f, Abstract):
        f = f.body
    return f


def _with_innermost(f: Formula, body: RecordType) -> Formula:
    if isinstance(f, Abstract):
        return Abstract(f.var, f.constraint, _with_innermost(f.body, body))
    return body


def _slot_label(f: Abstract) -> str | None:
    path = f"{f.var}.{HEAD}"
    for fl in _innermost(f).fields:
        if isinstance(fl.type, ManifestType) and fl.type.witness == path:
            return fl.label
    return None


def _head_target(r: RecordType) -> str | None:
    h = r.get(HEAD)
    if isinstance(h, ManifestType) and h.witness in r:
        return h.witness
    return None


def _fresh(label: str, used: set[str]) -> str:
    stem = label.rstrip("0123456789") or label
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def apply_formula(f: Formula, arg: RecordType) -> Formula:
    """Beta-reduce ``f`` applied to ``arg``.

    The body field witnessed by ``var.head`` is identified with the field the
    argument's ``head`` points at; the argument's remaining content is merged
    in, renaming any label that would clash with the body.  An argument whose
    ``head`` is unmanifest leaves that body field unmanifest.
    """
    if not isinstance(f, Abstract):
        raise DSTypeError(f"cannot apply non-abstract formula {f}")
    if HEAD not in arg:
        raise DSTypeError(f"argument {arg} has no head field")
    try:
        ok = subtype(arg, f.constraint)
    except TTRError as exc:
        raise DSTypeError(str(exc)) from exc
    if not ok:
        raise DSTypeError(f"argument {arg} is not of type {f.constraint}")
    return _substitute(f.body, f"{f.var}.{HEAD}", arg)


def _substitute(body: Formula, path: str, arg: RecordType) -> Formula:
    if isinstance(body, Abstract):
        return Abstract(body.var, body.constraint, _substitute(body.body, path, arg))
    slot = next((fl for fl in body.fields
                 if isinstance(fl.type, ManifestType) and fl.type.witness == path), None)
    if slot is None:
        return body
    head = arg[HEAD]
    target = head.witness if isinstance(head, ManifestType) and head.witness in arg else None
    body_labels = set(body.labels)
    used = body_labels | set(arg.labels)
    mapping = {}
    if target is not None:
        mapping[target] = slot.label
    for lab in arg.labels:
        if lab in (HEAD, target):
            continue
        if lab in body_labels:
            mapping[lab] = _fresh(lab, used)
            used.add(mapping[lab])
    moved = rename(arg.without(HEAD), mapping).fields
    if target is not None:
        rest = tuple(fl for fl in body.fields if fl is not slot)
    else:
        rest = tuple(Field(fl.label, BaseType(fl.type.kind)) if fl is slot else fl
                     for fl in body.fields)
    return RecordType(_dependency_sort(list(moved + rest)))


# ---------------------------------------------------------------- trees

@dataclass(frozen=True)
class Node:
    ty: SemType | None = None
    requirements: frozenset = frozenset()
    formula: Formula | None = None
    bottom: bool = False

    @property
    def complete(self) -> bool:
        return not self.requirements and self.ty is not None and self.formula is not None

    def label(self) -> str:
        parts = [f"?Ty({r})" for r in sorted(self.requirements, key=str)]
        if self.ty is not None:
            parts.insert(0, f"Ty({self.ty})")
        return ",".join(parts) or "-"


@dataclass(frozen=True)
class DsTree:
    nodes: tuple[tuple[str, Node], ...]
    pointer: str = ""

    @cached_property
    def _map(self) -> dict[str, Node]:
        return dict(self.nodes)

    def node(self, addr: str | None = None) -> Node:
        return self._map[self.pointer if addr is None else addr]

    def __contains__(self, addr: str) -> bool:
        return addr in self._map

    @property
    def pointed(self) -> Node:
        return self._map[self.pointer]

    def with_node(self, addr: str, node: Node) -> "DsTree":
        m = dict(self._map)
        m[addr] = node
        return DsTree(tuple(sorted(m.items())), self.pointer)

    def with_pointer(self, addr: str) -> "DsTree":
        return DsTree(self.nodes, addr)

    def has_daughters(self, addr: str) -> bool:
        return addr + ARG in self._map or addr + FUN in self._map

    def pointed_label(self) -> str:
        return self.pointed.label()

    def __str__(self):
        out = []
        for addr, n in self.nodes:
            mark = " <>" if addr == self.pointer else ""
            bot = " [bottom]" if n.bottom else ""
            form = f" {n.formula}" if n.formula is not None else ""
            out.append(f"{addr or 'root'}: {n.label()}{bot}{form}{mark}")
        return "\n".join(out)


def axiom_tree() -> DsTree:
    return DsTree((("", Node(requirements=frozenset({T}))),), "")


def is_complete(tree: DsTree) -> bool:
    if any(n.requirements for _, n in tree.nodes):
        return False
    root = tree.node("")
    return root.ty == T and root.formula is not None


# ---------------------------------------------------------------- computational actions

def introduction_prediction(tree: DsTree) -> DsTree | None:
    n, p = tree.pointed, tree.pointer
    if T not in n.requirements or n.bottom or tree.has_daughters(p):
        return None
    t = tree.with_node(p + ARG, Node(requirements=frozenset({E})))
    t = t.with_node(p + FUN, Node(requirements=frozenset({FunctionType(E, T)})))
    return t.with_pointer(p + ARG)


def completion(tree: DsTree) -> DsTree | None:
    if tree.pointer == "" or not tree.pointed.complete:
        return None
    return tree.with_pointer(tree.pointer[:-1])


def anticipation(tree: DsTree) -> DsTree | None:
    p = tree.pointer
    for d in (p + FUN, p + ARG):
        if d in tree and tree.node(d).requirements:
            return tree.with_pointer(d)
    return None


def beta_reduce(tree: DsTree) -> DsTree | None:
    p = tree.pointer
    n = tree.pointed
    if n.formula is not None or (p + ARG) not in tree or (p + FUN) not in tree:
        return None
    a, f = tree.node(p + ARG), tree.node(p + FUN)
    if not (a.complete and f.complete) or not isinstance(f.ty, FunctionType):
        return None
    if f.ty.domain != a.ty or not isinstance(a.formula, RecordType):
        return None
    try:
        formula = apply_formula(f.formula, a.formula)
    except (DSTypeError, TTRError):
        return None
    ty = f.ty.range
    if n.ty is not None and n.ty != ty:
        return None
    return tree.with_node(p, replace(n, ty=ty, formula=formula,
                                     requirements=n.requirements - {ty}))


COMPUTATIONAL_ACTIONS = {
    "intro-pred": introduction_prediction,
    "completion": completion,
    "anticipation": anticipation,
    "beta-reduce": beta_reduce,
}


def apply_computational(tree: DsTree, action: str) -> DsTree | None:
    return COMPUTATIONAL_ACTIONS[action](tree)


# ---------------------------------------------------------------- semantics

def _sem(tree: DsTree, addr: str) -> Formula | None:
    n = tree.node(addr)
    if n.formula is not None:
        return n.formula
    a_addr, f_addr = addr + ARG, addr + FUN
    a = _sem(tree, a_addr) if a_addr in tree else None
    f = _sem(tree, f_addr) if f_addr in tree else None
    if isinstance(f, Abstract) and not isinstance(a, Abstract):
        arg = a if a is not None else RecordType()
        if HEAD not in arg:
            head_kind = f.constraint[HEAD].kind if HEAD in f.constraint else "e"
            arg = RecordType(arg.fields + (Field(HEAD, BaseType(head_kind)),))
        try:
            return apply_formula(f, arg)
        except (DSTypeError, TTRError):
            return a
    if isinstance(a, RecordType):
        return a
    return None


def root_semantics(tree: DsTree) -> RecordType:
    """The maximal record type derivable from the tree as it stands."""
    s = _sem(tree, "")
    return s if isinstance(s, RecordType) else RecordType()


# ---------------------------------------------------------------- lexical actions

@dataclass(frozen=True)
class Update:
    op: str          # put-type put-req put-formula extend-formula bottom make go
    arg: object = None

    def __str__(self):
        if self.op == "put-type":
            return f"put Ty({self.arg})"
        if self.op == "put-req":
            return f"put ?Ty({self.arg})"
        if self.op == "put-formula":
            return f"put formula {self.arg}"
        if self.op == "extend-formula":
            return f"extend formula {self.arg}"
        if self.op == "bottom":
            return "bottom"
        return f"{self.op} {self.arg}"


@dataclass(frozen=True)
class LexicalAction:
    word: str
    trigger: SemType
    updates: tuple[Update, ...]
    trigger_is_requirement: bool = True

    def trigger_text(self) -> str:
        return f"?Ty({self.trigger})" if self.trigger_is_requirement else f"Ty({self.trigger})"

    def __str__(self):
        ups = "".join(f" ; {u}" for u in self.updates)
        return f"word {self.word} : trigger={self.trigger_text()}{ups}"


_DIR = {"argument": ARG, "functor": FUN}


def _labels_in_use(tree: DsTree) -> set[str]:
    used = set()
    for _, n in tree.nodes:
        if n.formula is not None:
            used.update(_innermost(n.formula).labels)
    used.discard(HEAD)
    return used


def _expected_label(tree: DsTree, addr: str) -> str | None:
    """Label an entity built at ``addr`` will be identified with, if already fixed."""
    if not addr or addr[-1] != ARG:
        return None
    f_addr, depth = addr[:-1] + FUN, 0
    while f_addr in tree and tree.node(f_addr).formula is None:
        f_addr, depth = f_addr + FUN, depth + 1
    if f_addr not in tree:
        return None
    f = tree.node(f_addr).formula
    for _ in range(depth):
        if not isinstance(f, Abstract):
            return None
        f = f.body
    return _slot_label(f) if isinstance(f, Abstract) else None


def _align(tree: DsTree, addr: str, formula: Formula) -> Formula:
    """Relabel a lexical formula before it is placed at ``addr``.

    Slots whose argument is already built take the argument's head label;
    an entity whose position is already bound to a slot takes that slot's
    label; every other label that is in use elsewhere in the tree gets a
    fresh name.  Composition then never has to rename, so the labels of the
    root semantics stay fixed from one word to the next.
    """
    mapping: dict[str, str] = {}
    node, f = addr, formula
    while isinstance(f, Abstract) and node and node[-1] == FUN:
        mother = node[:-1]
        a = tree._map.get(mother + ARG)
        slot = _slot_label(f)
        if a is not None and a.complete and isinstance(a.formula, RecordType) and slot:
            target = _head_target(a.formula)
            if target is not None:
                mapping[slot] = target
        node, f = mother, f.body
    body = _innermost(formula)
    if not isinstance(f, Abstract):
        h = _head_target(body)
        want = _expected_label(tree, node)
        if h is not None and h not in mapping and want is not None:
            mapping[h] = want
    in_use = _labels_in_use(tree)
    taken = in_use | set(mapping.values()) | set(body.labels)
    for lab in body.labels:
        if lab == HEAD or lab in mapping:
            continue
        if lab in in_use or lab in mapping.values():
            mapping[lab] = _fresh(lab, taken)
            taken.add(mapping[lab])
    if not mapping:
        return formula
    return _with_innermost(formula, rename(body, mapping))


def _align_extension(current: RecordType, tree: DsTree, ext: RecordType) -> RecordType:
    in_use = _labels_in_use(tree)
    taken = in_use | set(ext.labels)
    mapping = {}
    for lab in ext.labels:
        if lab != HEAD and lab not in current and lab in in_use:
            mapping[lab] = _fresh(lab, taken)
            taken.add(mapping[lab])
    return rename(ext, mapping) if mapping else ext


def apply_lexical(tree: DsTree, action: LexicalAction) -> DsTree | None:
    """Run ``action`` on ``tree`` all-or-nothing; ``None`` if it does not apply.

    A requirement trigger fires only at a pointed node without daughters;
    a type trigger (``Ty(X)``) fires at a pointed node decorated with ``X``.
    """
    n = tree.pointed
    if action.trigger_is_requirement:
        if action.trigger not in n.requirements or tree.has_daughters(tree.pointer):
            return None
    elif n.ty != action.trigger:
        return None
    t = tree
    for u in action.updates:
        p = t.pointer
        n = t.pointed
        if u.op == "put-type":
            if n.ty is not None and n.ty != u.arg:
                return None
            t = t.with_node(p, replace(n, ty=u.arg, requirements=n.requirements - {u.arg}))
        elif u.op == "put-req":
            if n.ty != u.arg:
                t = t.with_node(p, replace(n, requirements=n.requirements | {u.arg}))
        elif u.op == "put-formula":
            if n.formula is not None:
                return None
            t = t.with_node(p, replace(n, formula=_align(t, p, u.arg)))
        elif u.op == "extend-formula":
            if not isinstance(n.formula, RecordType):
                return None
            try:
                ext = _align_extension(n.formula, t, u.arg)
                t = t.with_node(p, replace(n, formula=meet(n.formula, ext)))
            except TTRError:
                return None
        elif u.op == "bottom":
            if t.has_daughters(p):
                return None
            t = t.with_node(p, replace(n, bottom=True))
        elif u.op == "make":
            if n.bottom:
                raise GrammarError(
                    f"action for {action.word!r} builds a daughter under a bottom-restricted node")
            d = p + _DIR[u.arg]
            if d in t:
                return None
            t = t.with_node(d, Node())
        elif u.op == "go":
            if u.arg == "parent":
                if p == "":
                    raise GrammarError(f"action for {action.word!r} moves above the root")
                t = t.with_pointer(p[:-1])
            else:
                d = p + _DIR[u.arg]
                if d not in t:
                    raise GrammarError(
                        f"action for {action.word!r} moves to a missing {u.arg} daughter")
                t = t.with_pointer(d)
        else:
            raise GrammarError(f"unknown update {u.op!r}")
    return t


# ---------------------------------------------------------------- lexicon

@dataclass
class Lexicon:
    actions: dict[str, tuple[LexicalAction, ...]] = field(default_factory=dict)
    pos: dict[str, str] = field(default_factory=dict)

    def __contains__(self, word: str) -> bool:
        return word in self.actions

    def __len__(self):
        return sum(len(a) for a in self.actions.values())

    @property
    def words(self) -> list[str]:
        return sorted(self.actions)

    def for_word(self, word: str) -> tuple[LexicalAction, ...]:
        try:
            return self.actions[word]
        except KeyError:
            raise UnknownWordError(word) from None

    def add(self, action: LexicalAction) -> None:
        have = self.actions.get(action.word, ())
        if action not in have:
            self.actions[action.word] = have + (action,)

    def dumps(self) -> str:
        lines = []
        for w in self.words:
            for a in self.actions[w]:
                text = str(a)
                if w in self.pos:
                    text = text.replace(f"word {w} :", f"word {w} {self.pos[w]} :", 1)
                lines.append(text)
        return "\n".join(lines) + "\n"


class UnknownWordError(DSError, KeyError):
    def __str__(self):
        return f"word not in lexicon: {self.args[0]!r}"


_WORD_LINE = re.compile(r"^word\s+(\S+)(?:\s+([A-Z]+))?\s*:\s*trigger\s*=\s*(\??)Ty\((.+?)\)\s*(;.*)?$")


def _parse_update(text: str, lineno: int) -> Update:
    text = text.strip()
    try:
        if text == "bottom":
            return Update("bottom")
        m = re.match(r"put\s+(\??)Ty\((.*)\)$", text)
        if m:
            return Update("put-req" if m.group(1) else "put-type", parse_semtype(m.group(2)))
        m = re.match(r"(put|extend)\s+formula\s+(.*)$", text)
        if m:
            formula = parse_formula(m.group(2))
            if m.group(1) == "extend":
                if not isinstance(formula, RecordType):
                    raise ValueError("extend formula takes a record type")
                return Update("extend-formula", formula)
            return Update("put-formula", formula)
        m = re.match(r"make\s+(argument|functor)$", text)
        if m:
            return Update("make", m.group(1))
        m = re.match(r"go\s+(argument|functor|parent)$", text)
        if m:
            return Update("go", m.group(1))
    except (ValueError, TTRError) as exc:
        raise LexiconSyntaxError(f"{exc} in update {text!r}", lineno) from exc
    raise LexiconSyntaxError(f"unknown update {text!r}", lineno)


def load_grammar(text: str) -> Lexicon:
    """Parse lexicon text (one ``word ...`` line per lexical action)."""
    lex = Lexicon()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _WORD_LINE.match(line)
        if not m:
            raise LexiconSyntaxError(f"cannot parse {line!r}", lineno)
        word, pos, req, ty_text, rest = m.groups()
        try:
            trigger = parse_semtype(ty_text)
        except ValueError as exc:
            raise LexiconSyntaxError(f"bad trigger type {ty_text!r}", lineno) from exc
        updates = []
        if rest:
            updates = [_parse_update(u, lineno) for u in rest[1:].split(";")]
        lex.add(LexicalAction(word, trigger, tuple(updates), trigger_is_requirement=bool(req)))
        if pos:
            lex.pos[word] = pos
    return lex
