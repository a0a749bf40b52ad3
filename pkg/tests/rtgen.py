"""Random well-formed record types for the property tests."""
import random

from dsnlg.ttr import BaseType, Field, ManifestType, PredicateType, RecordType

KINDS = ("e", "es", "t")
CONSTANTS = {"e": ("john", "mary", "ball"), "es": ("arrive", "see"), "t": ("yes",)}
PREDICATES = ("red", "subj", "obj", "today")


def random_rt(rng: random.Random, max_fields: int = 8, max_depth: int = 2,
              prefix: str = "") -> RecordType:
    fields, depth = [], {}
    for i in range(rng.randint(0, max_fields)):
        label = f"{prefix}{rng.choice('xyepq')}{i}"
        if i and rng.random() < 0.15 and "head" not in depth:
            label = "head"
        kind = rng.choice(KINDS)
        shallow = [f for f in fields if depth[f.label] < max_depth]
        roll = rng.random()
        if roll < 0.3 or (roll >= 0.6 and not shallow):
            ty, d = BaseType(kind), 0
        elif roll < 0.6:
            ty, d = ManifestType(kind, rng.choice(CONSTANTS[kind])), 0
        else:
            args = rng.sample(shallow, min(len(shallow), rng.randint(1, 2)))
            if len(args) == 1 and rng.random() < 0.4:
                ty = ManifestType(args[0].type.kind, args[0].label)
            else:
                ty = PredicateType(rng.choice(PREDICATES), tuple(a.label for a in args))
            d = 1 + max(depth[a.label] for a in args)
        fields.append(Field(label, ty))
        depth[label] = d
    return RecordType(tuple(fields))


def random_supertype(rng: random.Random, r: RecordType) -> RecordType:
    """Drop unreferenced fields and weaken others to their bare kind."""
    keep = []
    needed = set()
    for f in reversed(r.fields):
        if f.label not in needed and rng.random() < 0.3:
            continue
        ty = f.type
        if rng.random() < 0.3:
            ty = BaseType(ty.kind)
        keep.append(Field(f.label, ty))
        needed.update(Field(f.label, ty).references(set(r.labels)))
    return RecordType(tuple(reversed(keep)))


def random_subtype(rng: random.Random, r: RecordType) -> RecordType:
    """Strengthen bare fields to constants and add fresh fields."""
    fields = []
    for f in r.fields:
        if isinstance(f.type, BaseType) and rng.random() < 0.4:
            fields.append(Field(f.label, ManifestType(f.type.kind,
                                                      rng.choice(CONSTANTS[f.type.kind]))))
        else:
            fields.append(f)
    extra = random_rt(rng, max_fields=3, prefix="n")
    fields += [f for f in extra.fields if f.label != "head" or "head" not in r]
    return RecordType(tuple(fields))
