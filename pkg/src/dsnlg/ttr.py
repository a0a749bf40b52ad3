"""Record types from Type Theory with Records.

A record type is an ordered sequence of labelled fields.  A field type is a
basic kind (``e``, ``es`` or ``t``), a manifest (singleton) type written
``l=a:kind``, or a predicate type written ``l=pred(a,b):kind``.  A manifest
witness that names another label of the same record type is a dependency on
that field (``head=x:e``).

Everything here is an immutable value; every operation is a pure function.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

KINDS = ("e", "es", "t")
HEAD = "head"


class TTRError(ValueError):
    pass


class RTSyntaxError(TTRError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class WellFormednessError(TTRError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class MeetConflict(TTRError):
    def __init__(self, label: str, left, right):
        super().__init__(f"incompatible types for label {label!r}: {left} vs {right}")
        self.label = label


@dataclass(frozen=True)
class BaseType:
    kind: str

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class ManifestType:
    kind: str
    witness: str

    def __str__(self):
        return f"={self.witness}:{self.kind}"


@dataclass(frozen=True)
class PredicateType:
    predicate: str
    args: tuple[str, ...]
    kind: str = "t"

    def __str__(self):
        return f"={self.predicate}({','.join(self.args)}):{self.kind}"


TtrType = Union[BaseType, ManifestType, PredicateType]


def base_of(ty: TtrType) -> BaseType:
    return BaseType(ty.kind)


def type_subtype(t1: TtrType, t2: TtrType) -> bool:
    """Field-type subtyping: identity, or anything below its bare kind."""
    if t1 == t2:
        return True
    return isinstance(t2, BaseType) and t1.kind == t2.kind


@dataclass(frozen=True)
class Field:
    label: str
    type: TtrType

    def __str__(self):
        if isinstance(self.type, BaseType):
            return f"{self.label}:{self.type.kind}"
        return f"{self.label}{self.type}"

    def references(self, labels) -> tuple[str, ...]:
        """Labels (among ``labels``) this field depends on, in argument order."""
        if isinstance(self.type, PredicateType):
            return tuple(dict.fromkeys(self.type.args))
        if isinstance(self.type, ManifestType) and self.type.witness in labels:
            return (self.type.witness,)
        return ()


@dataclass(frozen=True)
class RecordType:
    fields: tuple[Field, ...] = ()

    def __post_init__(self):
        if not isinstance(self.fields, tuple):
            object.__setattr__(self, "fields", tuple(self.fields))

    @cached_property
    def _index(self) -> dict[str, TtrType]:
        return {f.label: f.type for f in self.fields}

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.fields)

    def get(self, label: str) -> TtrType | None:
        return self._index.get(label)

    def __getitem__(self, label: str) -> TtrType:
        return self._index[label]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator[Field]:
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def __bool__(self):
        return bool(self.fields)

    def __str__(self):
        return print_rt(self)

    def __repr__(self):
        return f"RecordType({print_rt(self)})"

    @cached_property
    def violations(self) -> tuple[str, ...]:
        return tuple(check_wellformed(self))

    def without(self, *labels: str) -> "RecordType":
        return RecordType(tuple(f for f in self.fields if f.label not in labels))


EMPTY = RecordType()


# ---------------------------------------------------------------- well-formedness

def check_wellformed(r: RecordType) -> list[str]:
    """All invariant violations of ``r``; an empty list means well-formed."""
    problems = []
    all_labels = [f.label for f in r.fields]
    seen: set[str] = set()
    for f in r.fields:
        if not f.label:
            problems.append("empty label")
        if f.label in seen:
            problems.append(f"duplicate label {f.label!r}")
        if f.type.kind not in KINDS:
            problems.append(f"unknown kind {f.type.kind!r} on {f.label!r}")
        if isinstance(f.type, ManifestType) and not f.type.witness:
            problems.append(f"empty witness on {f.label!r}")
        if isinstance(f.type, PredicateType):
            for a in f.type.args:
                if a not in all_labels:
                    problems.append(f"dangling argument {a!r} in {f.label!r}")
                elif a not in seen:
                    problems.append(f"forward dependency {f.label!r} -> {a!r}")
        elif isinstance(f.type, ManifestType):
            w = f.type.witness
            if w in all_labels and w not in seen:
                problems.append(f"forward dependency {f.label!r} -> {w!r}")
        seen.add(f.label)
    return problems


def ensure_wellformed(*rts: RecordType) -> None:
    for r in rts:
        if r.violations:
            raise WellFormednessError(list(r.violations))


def _dependency_sort(fields: list[Field]) -> tuple[Field, ...]:
    # stable topological order: a field goes as early as its dependencies allow
    labels = {f.label for f in fields}
    pending = list(fields)
    placed: set[str] = set()
    out = []
    while pending:
        for i, f in enumerate(pending):
            if all(d in placed or d == f.label for d in f.references(labels)
                   if d in labels):
                out.append(f)
                placed.add(f.label)
                del pending[i]
                break
        else:
            raise WellFormednessError(
                [f"cyclic dependency among {[f.label for f in pending]}"])
    return tuple(out)


# ---------------------------------------------------------------- the order

def subtype(r1: RecordType, r2: RecordType) -> bool:
    """``r1 ⊑ r2``: every field of ``r2`` is matched by a subtype field in ``r1``."""
    ensure_wellformed(r1, r2)
    for f in r2.fields:
        t1 = r1.get(f.label)
        if t1 is None or not type_subtype(t1, f.type):
            return False
    return True


def subsumes(r1: RecordType, r2: RecordType) -> bool:
    return subtype(r2, r1)


def equivalent(r1: RecordType, r2: RecordType) -> bool:
    return subtype(r1, r2) and subtype(r2, r1)


def meet(r1: RecordType, r2: RecordType) -> RecordType:
    """Union of fields; a shared label keeps the more specific type."""
    ensure_wellformed(r1, r2)
    merged = list(r1.fields)
    where = {f.label: i for i, f in enumerate(merged)}
    for f in r2.fields:
        i = where.get(f.label)
        if i is None:
            where[f.label] = len(merged)
            merged.append(f)
            continue
        mine = merged[i].type
        if type_subtype(mine, f.type):
            continue
        if type_subtype(f.type, mine):
            merged[i] = f
        else:
            raise MeetConflict(f.label, mine, f.type)
    return RecordType(_dependency_sort(merged))


def meet_all(rts: Iterable[RecordType]) -> RecordType:
    out = EMPTY
    for r in rts:
        out = meet(out, r)
    return out


def subtract(r_g: RecordType, r_cur: RecordType) -> RecordType:
    """What of ``r_g`` is not yet covered by ``r_cur``.

    A field of ``r_g`` is covered when ``r_cur`` has the same label with a
    subtype.  Uncovered fields keep their dependencies; a dependency that is
    itself covered comes back with its witness stripped.
    """
    ensure_wellformed(r_g, r_cur)
    kept = set()
    for f in r_g.fields:
        other = r_cur.get(f.label)
        if other is None or not type_subtype(other, f.type):
            kept.add(f.label)
    labels = set(r_g.labels)
    carriers = set()
    for f in r_g.fields:
        if f.label in kept:
            carriers.update(d for d in f.references(labels) if d not in kept)
    out = []
    for f in r_g.fields:
        if f.label in kept:
            out.append(f)
        elif f.label in carriers:
            out.append(Field(f.label, base_of(f.type)))
    return RecordType(tuple(out))


def decompose(r: RecordType) -> tuple[RecordType, ...]:
    """One atomic supertype per field: its dependencies (bare kinds) then the field."""
    ensure_wellformed(r)
    labels = set(r.labels)
    atoms = []
    for f in r.fields:
        deps = [Field(d, base_of(r[d])) for d in f.references(labels)]
        atoms.append(RecordType(tuple(deps) + (f,)))
    return tuple(atoms)


# ---------------------------------------------------------------- renaming

def rename(r: RecordType, mapping: Mapping[str, str]) -> RecordType:
    labels = set(r.labels)

    def conv(f: Field) -> Field:
        ty = f.type
        if isinstance(ty, PredicateType):
            ty = PredicateType(ty.predicate, tuple(mapping.get(a, a) for a in ty.args),
                               ty.kind)
        elif isinstance(ty, ManifestType) and ty.witness in labels:
            ty = ManifestType(ty.kind, mapping.get(ty.witness, ty.witness))
        return Field(mapping.get(f.label, f.label), ty)

    return RecordType(tuple(conv(f) for f in r.fields))


def canonical_atom(atom: RecordType) -> str:
    """Label-independent serialization: non-``head`` labels become v0, v1, ..."""
    mapping = {}
    for f in atom.fields:
        if f.label != HEAD:
            mapping[f.label] = f"v{len(mapping)}"
    return print_rt(rename(atom, mapping))


def embeds(r: RecordType, pattern: RecordType) -> bool:
    """``r ⊑ pattern`` up to an injective relabelling of ``pattern``.

    ``head`` is never relabelled.  Used to test whether a remaining-content
    record type turns on a canonically-labelled atomic feature.
    """
    plabels = set(pattern.labels)
    fields = pattern.fields

    def field_ok(f: Field, sigma: dict, target: str) -> bool:
        ty = f.type
        if isinstance(ty, PredicateType):
            ty = PredicateType(ty.predicate, tuple(sigma[a] for a in ty.args), ty.kind)
        elif isinstance(ty, ManifestType) and ty.witness in plabels:
            ty = ManifestType(ty.kind, sigma[ty.witness])
        return type_subtype(r[target], ty)

    def search(i: int, sigma: dict, used: set) -> bool:
        if i == len(fields):
            return True
        f = fields[i]
        if f.label == HEAD:
            candidates = [HEAD] if HEAD in r else []
        else:
            candidates = [l for l in r.labels if l != HEAD and l not in used]
        for c in candidates:
            if r[c].kind != f.type.kind:
                continue
            sigma[f.label] = c
            if field_ok(f, sigma, c):
                used.add(c)
                if search(i + 1, sigma, used):
                    return True
                used.discard(c)
            del sigma[f.label]
        return False

    return search(0, {}, set())


# ---------------------------------------------------------------- notation

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z0-9_][A-Za-z0-9_.'\-]*)|(?P<punct>[\[\](),=:]))")


class _Reader:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            return None
        return m.group("ident") or m.group("punct")

    def next(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            rest = self.text[self.pos:].lstrip()
            where = len(self.text) - len(rest)
            if not rest:
                raise RTSyntaxError("unexpected end of input", where)
            raise RTSyntaxError(f"unexpected character {rest[0]!r}", where)
        self.pos = m.end()
        return m.group("ident") or m.group("punct")

    def expect(self, tok: str) -> None:
        start = self.pos
        got = self.next()
        if got != tok:
            raise RTSyntaxError(f"expected {tok!r}, got {got!r}", start)

    def ident(self, what: str) -> str:
        start = self.pos
        got = self.next()
        if not re.match(r"[A-Za-z0-9_]", got):
            raise RTSyntaxError(f"expected {what}, got {got!r}", start)
        return got


def _read_field(rd: _Reader) -> Field:
    label = rd.ident("label")
    start = rd.pos
    tok = rd.next()
    witness = pred = None
    args: list[str] = []
    if tok == "=":
        wpos = rd.pos
        nxt = rd.peek()
        if nxt in (":", ",", "]", None):
            raise RTSyntaxError("empty witness", wpos)
        witness = rd.ident("witness")
        if rd.peek() == "(":
            rd.next()
            pred, witness = witness, None
            args.append(rd.ident("argument label"))
            while rd.peek() == ",":
                rd.next()
                args.append(rd.ident("argument label"))
            rd.expect(")")
        start = rd.pos
        tok = rd.next()
    if tok != ":":
        raise RTSyntaxError(f"expected ':', got {tok!r}", start)
    kpos = rd.pos
    kind = rd.ident("kind")
    if kind not in KINDS:
        raise RTSyntaxError(f"unknown kind {kind!r}", kpos)
    if pred is not None:
        return Field(label, PredicateType(pred, tuple(args), kind))
    if witness is not None:
        return Field(label, ManifestType(kind, witness))
    return Field(label, BaseType(kind))


def read_rt(text: str, pos: int = 0) -> tuple[RecordType, int]:
    """Read one record type starting at ``pos``; return it and the end offset."""
    rd = _Reader(text, pos)
    rd.expect("[")
    fields = []
    if rd.peek() == "]":
        rd.next()
        return RecordType(), rd.pos
    fields.append(_read_field(rd))
    while True:
        start = rd.pos
        tok = rd.next()
        if tok == "]":
            break
        if tok != ",":
            raise RTSyntaxError(f"expected ',' or ']', got {tok!r}", start)
        fields.append(_read_field(rd))
    return RecordType(tuple(fields)), rd.pos


def parse_rt(text: str, check: bool = True) -> RecordType:
    r, end = read_rt(text)
    if text[end:].strip():
        raise RTSyntaxError("trailing input", end + len(text[end:]) - len(text[end:].lstrip()))
    if check:
        ensure_wellformed(r)
    return r


def print_rt(r: RecordType) -> str:
    return "[" + ", ".join(str(f) for f in r.fields) + "]"
